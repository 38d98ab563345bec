"""
Small utilities shared by the solver modules: argument checks, decimal
rounding for serialization, the counter-based random streams used by the
learner simulations and the :class:`Budget` that bounds a solve.

A budget limits a solve by the number of evaluated subsets and/or by wall
time. The time limit is a :class:`~pint.Quantity` of dimension [time]::

    from pacteaching import Q_
    from pacteaching.helpers import Budget

    budget = Budget(max_subsets=100_000, max_time=Q_(2, "min"))
"""

import operator
import os
import threading
import time

import numpy as np

from . import Q_, ureg

SIG_DIGITS = 12
"""Significant digits kept when decimals are written to files and reports."""

THREADS_ENV = "PACTEACH_THREADS"
"""Environment variable holding the default worker thread count."""


def check_probability(value, name="probability"):
    """
    Validate a value in the closed interval [0, 1].

    Parameters
    ----------
    value : :class:`float`
    name : :class:`str`, optional
        Used in the error message.

    Returns
    -------
    :class:`float`

    Raises
    ------
    ValueError
        If the value is not within [0, 1].
    """

    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"The {name} must be within [0, 1], got {value}.")
    return value


def check_index(index, size, what="concept"):
    """
    Validate an index into a sequence of the given size.

    Raises
    ------
    ValueError
        If the index is not an integer in range.
    """

    try:
        index = operator.index(index)
    except TypeError:
        raise ValueError(f"The {what} index must be an integer.") from None
    if not 0 <= index < size:
        raise ValueError(
            f"The {what} index {index} is out of range for {size} {what}s."
        )
    return index


def check_weights(weights, size, what):
    """
    Validate an optional weight vector (nonnegative, summing to one).

    Returns
    -------
    :class:`numpy.ndarray` or None
    """

    if weights is None:
        return None
    weights = np.array(weights, dtype=float)
    if weights.shape != (size,):
        raise ValueError(
            f"The {what} weights must have length {size}, "
            f"got shape {weights.shape}."
        )
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(
            f"The {what} weights must be nonnegative and sum to 1."
        )
    weights.flags.writeable = False
    return weights


def round_significant(values, digits=SIG_DIGITS):
    """
    Round a scalar or array to a number of significant digits.

    Rounding goes through the decimal text form so that writing the result
    again with the same precision is the identity.
    """

    if np.ndim(values) == 0:
        return float(f"{float(values):.{digits}g}")
    arr = np.asarray(values, dtype=float)
    flat = [float(f"{v:.{digits}g}") for v in arr.ravel()]
    return np.array(flat, dtype=float).reshape(arr.shape)


def trial_generator(seed, stream):
    """
    One random stream of a simulation.

    Streams are Philox counter-based generators keyed by the master seed,
    with the stream index in the most significant counter word, so stream
    ``s`` draws the same numbers whichever worker consumes it. A stream
    can serve a single trial or a whole block of trials.

    Parameters
    ----------
    seed : :class:`int`
        Master seed (nonnegative).
    stream : :class:`int`
        Stream index (nonnegative).

    Returns
    -------
    :class:`numpy.random.Generator`
    """

    if seed < 0 or stream < 0:
        raise ValueError("Seed and stream index must be nonnegative.")
    bit_gen = np.random.Philox(key=seed, counter=[0, 0, 0, stream])
    return np.random.Generator(bit_gen)


def default_threads():
    """
    The worker thread count from ``PACTEACH_THREADS``, or 1.
    """

    raw = os.environ.get(THREADS_ENV, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(value, 1)


class Budget:
    """
    Resource limits for a solve with a cooperative cancellation flag.
    """

    def __init__(self, max_subsets=None, max_time=None):
        """
        Constructor.

        Parameters
        ----------
        max_subsets : :class:`int`, optional
            Maximum number of subsets evaluated, by default unlimited.
        max_time : :class:`~pint.Quantity` [time], optional
            Soft wall time limit, by default unlimited. It is checked between
            evaluation chunks, so a solve may overrun it by one chunk.
        """

        self.max_subsets = max_subsets
        self.max_time = max_time
        self._cancelled = threading.Event()
        self._started = None
        self._spent = 0

    @property
    def max_subsets(self):
        """
        The maximum number of subsets to evaluate as :class:`int` or None.

        Raises
        ------
        ValueError
            If set to less than one.
        """

        return self._max_subsets

    @max_subsets.setter
    def max_subsets(self, value):
        if value is not None:
            value = int(value)
            if value < 1:
                raise ValueError("The subset budget must be at least one.")
        self._max_subsets = value

    @property
    def max_time(self):
        """
        The wall time limit as :class:`~pint.Quantity` [time] or None.

        Raises
        ------
        pint.DimensionalityError
            If the value is not a time.
        ValueError
            If the time is not greater than zero.
        """

        return self._max_time

    @max_time.setter
    def max_time(self, value):
        # The check decorator can not be used directly (value can be None)
        if value is not None:
            value = self._checked_time(value)
        self._max_time = value

    @staticmethod
    @ureg.check("[time]")
    def _checked_time(value):
        if not value > Q_(0, "s"):
            raise ValueError("The time budget must be greater than zero.")
        return value

    def start(self):
        """Reset the counters and start the clock."""

        self._started = time.perf_counter()
        self._spent = 0

    def cancel(self):
        """Ask a running solve to stop at the next chunk boundary."""

        self._cancelled.set()

    @property
    def cancelled(self):
        """True once :meth:`cancel` has been called."""

        return self._cancelled.is_set()

    @property
    def spent(self):
        """Subsets charged since :meth:`start`."""

        return self._spent

    @property
    def elapsed(self):
        """Wall time since :meth:`start` as :class:`~pint.Quantity` [time]."""

        if self._started is None:
            return Q_(0.0, "s")
        return Q_(time.perf_counter() - self._started, "s")

    def charge(self, count):
        """Record ``count`` evaluated subsets."""

        self._spent += count

    def allowance(self, wanted):
        """
        How many of ``wanted`` subsets may still be evaluated.

        Returns
        -------
        :class:`int`
            0 when the budget is exhausted or cancelled.
        """

        if self.exhausted():
            return 0
        if self._max_subsets is None:
            return wanted
        return max(0, min(wanted, self._max_subsets - self._spent))

    def exhausted(self):
        """
        True if cancelled, out of subsets or out of time.
        """

        if self.cancelled:
            return True
        if self._max_subsets is not None and self._spent >= self._max_subsets:
            return True
        if self._max_time is not None and self.elapsed >= self._max_time:
            return True
        return False
