import importlib.resources as pkg_resources
import logging

import pint

from . import resources

# Setup pint for the package
ureg = pint.UnitRegistry()
Q_ = ureg.Quantity

logging.getLogger(__name__).addHandler(logging.NullHandler())


def resource_path(name):
    """
    Look up a data file shipped in :mod:`pacteaching.resources`.

    Parameters
    ----------
    name : :class:`str`
        The file name, e.g. ``"worked_example.json"``.

    Returns
    -------
    :class:`importlib.resources.abc.Traversable`
    """

    return pkg_resources.files(resources).joinpath(name)
