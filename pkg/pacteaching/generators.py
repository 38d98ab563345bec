"""
Synthetic instance families.

 * ``multiples``: ``c_k(x) = 1`` iff ``k`` divides ``x``, for x in
   1..x_max (:func:`gen_multiples`). The five-concept instance over
   1..1000 with the shipped deductive error matrix is
   :func:`load_multiples_fixture`.
   Examples positive for one concept only are listed by
   :func:`unique_divisor_examples`; :func:`identifying_pairs` builds
   two-example sets from the shared ones.
 * ``circles``: concepts are discs in the unit square and examples are
   points; a point is positive for a disc it lies in (:func:`gen_circles`).
   Errors are zero, constant in a band around each perimeter, or decay
   linearly with the distance to the perimeter.
 * ``random``: independent Bernoulli labels and uniform errors
   (:func:`gen_random`).

::

    import pacteaching.generators as gen

    inst = gen.gen_multiples([5, 7, 11, 13, 17], 1000)
    inst.consistency[inst.concept_index("c7"), inst.example_index("14")]  # 1

    inst = gen.generate("circles", n_concepts=4, n_examples=50,
                        error_model="proportional", seed=3)

A background registry maps family names to generator functions. New
families can be added via :func:`register_generator` and removed via
:func:`deregister_generator`; :func:`get_generator_names` lists them.

All generators are pure functions of their parameters and seed.
"""

import os
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import resource_path
from .helpers import check_index, check_probability, round_significant
from .instance import Instance
from .io import InstanceFormatError

MULTIPLES_KS = (5, 7, 11, 13, 17)
"""Divisors of the shipped multiples fixture."""

MULTIPLES_X_MAX = 1000

MULTIPLES_FIXTURE = "multiples_gamma.csv"

ERROR_MODELS = ("zero", "band", "proportional")

GAMMA_CAP = 0.5
"""Error on a circle perimeter under the proportional model."""


def _read_gamma_csv(fh, location):
    try:
        return np.loadtxt(fh, delimiter=",", ndmin=2)
    except ValueError as err:
        raise InstanceFormatError(f"unreadable CSV ({err}).",
                                  location) from err


def _gamma_matrix(source, shape):
    if isinstance(source, str) and source == "zero":
        return np.zeros(shape)
    if isinstance(source, (int, float)) and not isinstance(source, bool):
        return np.full(shape, check_probability(source, "constant gamma"))
    if isinstance(source, (str, os.PathLike)):
        location = os.fspath(source)
        with open(source, encoding="utf-8") as fh:
            gamma = _read_gamma_csv(fh, location)
    else:
        location = "gamma"
        gamma = np.asarray(source, dtype=float)
    if gamma.shape != shape:
        raise InstanceFormatError(
            f"expected a {shape[0]} x {shape[1]} matrix, got "
            f"{' x '.join(str(v) for v in gamma.shape)}.",
            location,
        )
    if not np.all((gamma >= 0.0) & (gamma <= 1.0)):
        raise InstanceFormatError("entries must be within [0, 1].", location)
    return gamma


def gen_multiples(ks, x_max, gamma_source="zero", target=0):
    """
    The multiples-of-k concept class.

    Parameters
    ----------
    ks : :class:`list` of :class:`int`
        Distinct divisors, each at least 2.
    x_max : :class:`int`
        Examples are ``1..x_max``; at least ``max(ks)``.
    gamma_source : optional
        ``"zero"`` (default), a constant error in [0, 1], the path of a CSV
        file with one row per divisor and one column per example, or an
        array of that shape.
    target : :class:`int`, optional
        Index of the target concept, by default the first divisor.

    Returns
    -------
    :class:`~pacteaching.instance.Instance`
        Concepts are named ``"c<k>"`` and examples ``"<x>"``.

    Raises
    ------
    ValueError
        If the divisors or ``x_max`` are invalid.
    InstanceFormatError
        If the error matrix has the wrong shape or values.
    """

    ks = [int(k) for k in ks]
    if not ks:
        raise ValueError("At least one divisor is required.")
    if len(set(ks)) != len(ks) or min(ks) < 2:
        raise ValueError("The divisors must be distinct and at least 2.")
    x_max = int(x_max)
    if x_max < max(ks):
        raise ValueError("x_max must be at least the largest divisor.")

    xs = np.arange(1, x_max + 1)
    consistency = (xs[None, :] % np.array(ks)[:, None] == 0).astype(int)
    gamma = _gamma_matrix(gamma_source, consistency.shape)
    return Instance(
        [str(x) for x in xs],
        [f"c{k}" for k in ks],
        consistency,
        round_significant(gamma),
        target,
    )


def load_multiples_fixture(target=1):
    """
    The divisors 5, 7, 11, 13, 17 over 1..1000 with the shipped deductive
    error matrix (zero error up to 100, growing beyond).

    Parameters
    ----------
    target : :class:`int`, optional
        By default 1, i.e. ``c7``.

    Returns
    -------
    :class:`~pacteaching.instance.Instance`
    """

    with resource_path(MULTIPLES_FIXTURE).open("r", encoding="utf-8") as fh:
        gamma = _read_gamma_csv(fh, MULTIPLES_FIXTURE)
    return gen_multiples(MULTIPLES_KS, MULTIPLES_X_MAX, gamma, target)


def unique_divisor_examples(instance):
    """
    The examples labelled positive by exactly one concept.

    Returns
    -------
    :class:`list` of :class:`int`
        Example indices in ascending order.
    """

    positives = instance.consistency.sum(axis=0)
    return [int(x) for x in np.flatnonzero(positives == 1)]


@dataclass(frozen=True)
class IdentifyingPair:
    """
    A positive and a negative example that together leave one concept
    consistent.
    """

    positive_index: int
    negative_index: int
    concept_index: int


def identifying_pairs(instance, targets=None):
    """
    Two-example teaching sets built from examples shared by several
    concepts.

    For every example ``x1`` labelled positive by at least two concepts
    and every concept ``c`` among them, ``x2`` is the first such shared
    example that ``c`` labels negative and every other concept positive
    at ``x1`` labels positive. Only ``c`` is consistent with ``x1``
    positive and ``x2`` negative. Examples with a single positive concept
    are never used.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    targets : iterable of :class:`int`, optional
        Restrict to these concepts, by default all.

    Returns
    -------
    :class:`list` of :class:`IdentifyingPair`
        Ordered by ``x1``, then by concept. Concepts without a suitable
        ``x2`` are skipped.
    """

    if targets is not None:
        targets = {check_index(c, instance.n) for c in targets}
    labels = instance.consistency == 1
    shared = labels.sum(axis=0) >= 2
    pairs = []
    for x1 in np.flatnonzero(shared):
        positive = np.flatnonzero(labels[:, x1])
        for c in positive:
            if targets is not None and c not in targets:
                continue
            rivals = positive[positive != c]
            fits = shared & ~labels[c] & labels[rivals].all(axis=0)
            candidates = np.flatnonzero(fits)
            if candidates.size == 0:
                continue
            pairs.append(IdentifyingPair(int(x1), int(candidates[0]), int(c)))
    return pairs


@dataclass(frozen=True)
class CircleLayout:
    """Disc centers and radii, and the example points, in the unit square."""

    centers: np.ndarray
    radii: np.ndarray
    points: np.ndarray

    def perimeter_distances(self):
        """
        Distance of every point to every perimeter, n x m.
        """

        return np.abs(cdist(self.centers, self.points) - self.radii[:, None])

    def inside(self):
        """n x m boolean matrix, True where the point lies in the disc."""

        return cdist(self.centers, self.points) <= self.radii[:, None]


def _check_count(value, what):
    value = int(value)
    if value < 1:
        raise ValueError(f"The number of {what} must be at least one.")
    return value


def sample_circles(n_concepts, n_examples, seed, radius_range=(0.1, 0.4)):
    """
    Sample a circle layout. Centers, then radii, then points are drawn
    from ``numpy.random.default_rng(seed)``.

    Parameters
    ----------
    n_concepts : :class:`int`
    n_examples : :class:`int`
    seed : :class:`int`
    radius_range : :class:`tuple`, optional
        Radii are uniform in this range, by default (0.1, 0.4).

    Returns
    -------
    :class:`CircleLayout`
    """

    n = _check_count(n_concepts, "concepts")
    m = _check_count(n_examples, "examples")
    low, high = (float(v) for v in radius_range)
    if not 0.0 < low <= high:
        raise ValueError("The radii must be greater than zero.")
    rng = np.random.default_rng(seed)
    centers = rng.random((n, 2))
    radii = rng.uniform(low, high, n)
    points = rng.random((m, 2))
    return CircleLayout(centers, radii, points)


def circle_errors(layout, error_model="zero", width=0.05, gamma0=0.3,
                  scale=0.1):
    """
    Deductive errors of a circle layout.

    Parameters
    ----------
    layout : :class:`CircleLayout`
    error_model : :class:`str`, optional
        ``"zero"`` (default); ``"band"``: ``gamma0`` within ``width`` of the
        perimeter and 0 elsewhere; ``"proportional"``:
        ``0.5 * max(0, 1 - distance / scale)``.
    width : :class:`float`, optional
    gamma0 : :class:`float`, optional
    scale : :class:`float`, optional

    Returns
    -------
    :class:`numpy.ndarray`
        n x m matrix.
    """

    if error_model not in ERROR_MODELS:
        raise ValueError(
            f"Unknown error model {error_model!r}, expected one of "
            f"{', '.join(ERROR_MODELS)}."
        )
    distance = layout.perimeter_distances()
    if error_model == "zero":
        return np.zeros(distance.shape)
    if error_model == "band":
        if not width > 0:
            raise ValueError("The band width must be greater than zero.")
        gamma0 = check_probability(gamma0, "band error gamma0")
        return np.where(distance <= width, gamma0, 0.0)
    if not scale > 0:
        raise ValueError("The decay scale must be greater than zero.")
    return GAMMA_CAP * np.clip(1.0 - distance / scale, 0.0, 1.0)


def circles_instance(layout, error_model="zero", target=0, **params):
    """
    The instance of a circle layout; see :func:`circle_errors` for the
    error parameters.

    Returns
    -------
    :class:`~pacteaching.instance.Instance`
        Concepts are named ``"c<i>"`` and examples ``"x<j>"``, from 1.
    """

    gamma = circle_errors(layout, error_model, **params)
    n, m = gamma.shape
    return Instance(
        [f"x{j}" for j in range(1, m + 1)],
        [f"c{i}" for i in range(1, n + 1)],
        layout.inside().astype(int),
        round_significant(gamma),
        target,
    )


def gen_circles(n_concepts, n_examples, error_model="zero", seed=0,
                target=0, **params):
    """
    A random circle instance.

    Parameters
    ----------
    n_concepts : :class:`int`
    n_examples : :class:`int`
    error_model : :class:`str`, optional
        ``"zero"``, ``"band"`` or ``"proportional"``.
    seed : :class:`int`, optional
    target : :class:`int`, optional
    **params
        ``width``, ``gamma0``, ``scale`` of :func:`circle_errors`.

    Returns
    -------
    :class:`~pacteaching.instance.Instance`
    """

    layout = sample_circles(n_concepts, n_examples, seed)
    return circles_instance(layout, error_model, target, **params)


def gen_random(n, m, gamma_max, density, seed, target=0):
    """
    Independent Bernoulli(``density``) labels and Uniform(0, ``gamma_max``)
    errors.

    Parameters
    ----------
    n : :class:`int`
        Number of concepts.
    m : :class:`int`
        Number of examples.
    gamma_max : :class:`float`
        Within [0, 0.5].
    density : :class:`float`
        Within (0, 1).
    seed : :class:`int`
    target : :class:`int`, optional
        By default concept 0.

    Returns
    -------
    :class:`~pacteaching.instance.Instance`
        Concepts are named ``"c<i>"`` and examples ``"x<j>"``, from 1.
    """

    n = _check_count(n, "concepts")
    m = _check_count(m, "examples")
    gamma_max = float(gamma_max)
    if not 0.0 <= gamma_max <= 0.5:
        raise ValueError("gamma_max must be within [0, 0.5].")
    density = float(density)
    if not 0.0 < density < 1.0:
        raise ValueError("The density must be within (0, 1).")
    target = check_index(target, n)
    rng = np.random.default_rng(seed)
    consistency = (rng.random((n, m)) < density).astype(int)
    gamma = rng.uniform(0.0, gamma_max, (n, m))
    return Instance(
        [f"x{j}" for j in range(1, m + 1)],
        [f"c{i}" for i in range(1, n + 1)],
        consistency,
        round_significant(gamma),
        target,
    )


def register_generator(name, func):
    """
    Register a new instance family.

    Parameters
    ----------
    name : :class:`str`
        Identifier
    func : callable
        Returns an :class:`~pacteaching.instance.Instance` from keyword
        parameters.

    Raises
    ------
    ValueError
        If the name identifier is already in use.
    """

    if name in _generator_registry:
        raise ValueError(
            "Name identifier already in use. " f"Deregister `{name}` first."
        )
    _generator_registry[name] = func


def deregister_generator(name):
    """
    Deregister an existing instance family.

    Parameters
    ----------
    name : :class:`str`
        Identifier
    """

    _generator_registry.pop(name, None)


def get_generator_names():
    """
    The registered family names.

    Returns
    -------
    :class:`list` of :class:`str`
    """

    return sorted(_generator_registry)


def generate(family, **params):
    """
    Build an instance of a registered family.

    Raises
    ------
    ValueError
        If the family is not registered.
    """

    if family not in _generator_registry:
        raise ValueError(
            f"The register does not contain the family {family!r}."
        )
    return _generator_registry[family](**params)


_generator_registry = {}

register_generator("multiples", gen_multiples)
register_generator("circles", gen_circles)
register_generator("random", gen_random)
