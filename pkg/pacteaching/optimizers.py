"""
The prudent-optimal teacher comes in six versions: three objectives, each
for identification or for employment similarity.

 * probable: given q and a size bound k, maximize the success probability
   (:func:`probable_optimize`),
 * approx: given p and k, maximize the similarity threshold q reached with
   probability at least p (:func:`approx_optimize`),
 * size: given q and p, find a smallest teaching set reaching p
   (:func:`size_optimize`).

All three enumerate subsets of the examples by size and then
lexicographically (:func:`enumerate_subsets`) and score each with the exact
success probability. Ties are broken by that order: smaller sets first, then
lexicographically smaller index tuples.

::

    from pacteaching import io
    import pacteaching.optimizers as opt

    inst = io.load_worked_example()

    res = opt.probable_optimize(inst, q=1.0, k=1, mode="id")
    res.teaching_set.indices        # (0,)
    res.achieved_p                  # 0.81

    res = opt.size_optimize(inst, q=1.0, p=0.85, mode="id")
    res.size                        # 2

A :class:`~pacteaching.helpers.Budget` bounds the number of evaluated
subsets and the wall time; an exhausted budget is reported on the result
rather than raised. With ``threads > 1`` chunks of subsets are scored by a
thread pool and reduced in enumeration order, so results do not depend on
the schedule.

:func:`naive_teaching_set` is the error-oblivious teacher: it looks for a
classical teaching set and ignores gamma altogether.
:func:`brute_force_success` is an independent, exponential oracle for the
success probability used to check the dynamic program.
"""

import concurrent.futures
import enum
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .helpers import Budget, check_probability
from .instance import (
    GoodPartition,
    SimilarityMode,
    TeachingSet,
    good_partition,
    target_similarities,
)
from .probability import keep_matrix_for, success_from_keeps

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 20
"""Maximum number of (concept, item) cells for :func:`brute_force_success`."""

CHUNK_SIZE = 65536
"""Subsets scored per vectorized evaluation."""

CHUNK_CELLS = 1 << 22
"""Upper bound on keep probabilities held by one chunk."""


class Objective(enum.Enum):
    """What a solve optimizes."""

    PROBABLE = "probable"
    APPROX = "approx"
    SIZE = "size"
    CLASSICAL = "classical"


@dataclass
class SolveResult:
    """
    A teaching set with the (q, p, size) it achieves and solve metadata.
    """

    teaching_set: TeachingSet
    achieved_p: float
    achieved_q: float
    mode: SimilarityMode
    objective: Objective
    subsets_evaluated: int
    feasible: bool = True
    budget_exhausted: bool = False
    wall_time: object = None
    partition: GoodPartition = None
    inputs: dict = field(default_factory=dict)

    @property
    def size(self):
        """The size of the teaching set."""

        return len(self.teaching_set)


def enumerate_subsets(m, k_max):
    """
    All subsets of ``range(m)`` of size 1 to ``k_max``.

    Parameters
    ----------
    m : :class:`int`
        Number of examples.
    k_max : :class:`int`
        Size bound, clamped to ``m``.

    Yields
    ------
    :class:`tuple` of :class:`int`
        Index sets, ordered by size and then lexicographically.

    Raises
    ------
    ValueError
        If ``k_max`` is less than one.
    """

    if k_max < 1:
        raise ValueError("The size bound must be at least one.")
    for size in range(1, min(k_max, m) + 1):
        yield from itertools.combinations(range(m), size)


def subset_count(m, k_max):
    """
    The number of subsets :func:`enumerate_subsets` yields.

    Returns
    -------
    :class:`int`
    """

    sizes = range(1, min(k_max, m) + 1)
    return sum(comb(m, size, exact=True) for size in sizes)


class _SubsetScanner:
    """
    Scores the subsets of one size chunk by chunk within a budget.
    """

    def __init__(self, instance, budget, threads=1):
        self.instance = instance
        self.budget = budget
        self.threads = max(int(threads), 1)
        self.exhausted = False
        self._pool = None

    def __enter__(self):
        if self.threads > 1:
            self._pool = concurrent.futures.ThreadPoolExecutor(self.threads)
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()
        return False

    def _blocks(self, size):
        combos = itertools.combinations(range(self.instance.m), size)
        cells = self.instance.n * size
        per_chunk = max(1, min(CHUNK_SIZE, CHUNK_CELLS // cells))
        while True:
            allowed = self.budget.allowance(per_chunk)
            if allowed == 0:
                if next(combos, None) is not None:
                    self.exhausted = True
                return
            block = list(itertools.islice(combos, allowed))
            if not block:
                return
            self.budget.charge(len(block))
            yield np.array(block, dtype=np.intp)

    def scan(self, size, score):
        """
        Yield ``(block, values)`` pairs covering the subsets of ``size``.

        ``block`` holds one subset per row; ``values = score(block)``.
        """

        blocks = self._blocks(size)
        while True:
            batch = list(itertools.islice(blocks, self.threads))
            if not batch:
                return
            if self._pool is None:
                values = [score(block) for block in batch]
            else:
                values = list(self._pool.map(score, batch))
            yield from zip(batch, values)

    def success(self, good_mask):
        """A scoring function for :meth:`scan`."""

        keep = self.instance.keep_matrix

        def score(block):
            keeps = keep[:, block].transpose(1, 0, 2)
            return success_from_keeps(keeps, good_mask)

        return score


def _started(budget):
    budget = Budget() if budget is None else budget
    budget.start()
    return budget


def _check_size(k):
    k = int(k)
    if k < 1:
        raise ValueError("The size bound k must be at least one.")
    return k


def _result(instance, indices, p, q, mode, objective, budget, partition,
            **kwargs):
    return SolveResult(
        teaching_set=TeachingSet.from_indices(instance, indices),
        achieved_p=float(p),
        achieved_q=float(q),
        mode=mode,
        objective=objective,
        subsets_evaluated=budget.spent,
        wall_time=budget.elapsed,
        partition=partition,
        **kwargs,
    )


def _best_set(scanner, partition, k):
    """The first subset of maximal success, or None if nothing was scored."""

    best_p, best = -1.0, None
    score = scanner.success(partition.good_mask())
    for size in range(1, min(k, scanner.instance.m) + 1):
        for block, probs in scanner.scan(size, score):
            j = int(np.argmax(probs))
            if probs[j] > best_p:
                best_p, best = float(probs[j]), tuple(block[j])
        if scanner.exhausted:
            break
    return best, best_p


def _first_reaching(scanner, partition, p, k):
    """The first subset with success at least ``p``, or None."""

    score = scanner.success(partition.good_mask())
    for size in range(1, min(k, scanner.instance.m) + 1):
        for block, probs in scanner.scan(size, score):
            hits = np.flatnonzero(probs >= p)
            if hits.size:
                j = int(hits[0])
                return tuple(block[j]), float(probs[j])
        if scanner.exhausted:
            return None
    return None


def _fallback(instance, partition, indices=(0,)):
    s = TeachingSet.from_indices(instance, indices)
    keeps = keep_matrix_for(instance, s)[None, :, :]
    p = float(success_from_keeps(keeps, partition.good_mask())[0])
    return indices, p


def probable_optimize(instance, q, k, mode, *, budget=None, threads=1):
    """
    Find a teaching set of size at most ``k`` maximizing the success
    probability under the ``q``-good partition.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    q : :class:`float`
        Similarity threshold in [0, 1].
    k : :class:`int`
        Size bound, at least one.
    mode : :class:`~pacteaching.instance.SimilarityMode` or :class:`str`
    budget : :class:`~pacteaching.helpers.Budget`, optional
    threads : :class:`int`, optional
        Worker threads, by default 1.

    Returns
    -------
    :class:`SolveResult`
        If no concept is good the first singleton is returned with
        probability 0 without enumerating.

    Raises
    ------
    ValueError
        If ``q`` or ``k`` is out of range.
    """

    q = check_probability(q, "threshold q")
    k = _check_size(k)
    mode = SimilarityMode.from_name(mode)
    budget = _started(budget)
    partition = good_partition(instance, q, mode)
    inputs = {"q": q, "k": k}

    if not partition.good:
        logger.info("No concept is %s-good; returning the first singleton.", q)
        return _result(instance, (0,), 0.0, q, mode, Objective.PROBABLE,
                       budget, partition, inputs=inputs)

    logger.info("Probable solve: q=%s k=%d mode=%s, %d subsets", q, k,
                mode.value, subset_count(instance.m, k))
    with _SubsetScanner(instance, budget, threads) as scanner:
        best, best_p = _best_set(scanner, partition, k)
    if best is None:
        best, best_p = _fallback(instance, partition)
    if scanner.exhausted:
        logger.warning("Budget exhausted after %d subsets.", budget.spent)
    return _result(instance, best, best_p, q, mode, Objective.PROBABLE,
                   budget, partition, budget_exhausted=scanner.exhausted,
                   inputs=inputs)


def approx_optimize(instance, p, k, d, mode, *, exact=False, budget=None,
                    threads=1):
    """
    Find the largest threshold q for which some teaching set of size at
    most ``k`` succeeds with probability at least ``p``.

    q is searched by bisection on the grid {0, 10^-d, ..., 1}. With
    ``exact=True`` (identification only) the grid is the set of distinct
    similarities of the concepts to the target instead, which gives the
    exact optimum.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    p : :class:`float`
        Required success probability in (0, 1].
    k : :class:`int`
        Size bound, at least one.
    d : :class:`int`
        Decimal digits of the q grid, 1 to 12.
    mode : :class:`~pacteaching.instance.SimilarityMode` or :class:`str`
    exact : :class:`bool`, optional
        Search the exact similarity values, by default False.
    budget : :class:`~pacteaching.helpers.Budget`, optional
    threads : :class:`int`, optional

    Returns
    -------
    :class:`SolveResult`
        The witness is the first set in enumeration order reaching ``p`` at
        the best q. If even q = 0 fails the result is infeasible, with
        ``achieved_q = 0`` and the most probable set at q = 0. When the
        budget runs out first the fallback set is still reported feasible
        if it reaches ``p``.

    Raises
    ------
    ValueError
        If an argument is out of range, or ``exact`` is requested for
        employment mode.
    """

    p = check_probability(p, "probability p")
    if p <= 0.0:
        raise ValueError("The probability p must be greater than zero.")
    k = _check_size(k)
    d = int(d)
    if not 1 <= d <= 12:
        raise ValueError("The number of decimal digits must be within "
                         "[1, 12].")
    mode = SimilarityMode.from_name(mode)
    if exact and mode is not SimilarityMode.IDENTIFICATION:
        raise ValueError("The exact q search is only available for "
                         "identification.")
    budget = _started(budget)
    inputs = {"p": p, "k": k, "d": d, "exact": bool(exact)}

    if exact:
        grid = np.unique(target_similarities(instance, mode))
        count = len(grid)

        def q_at(i):
            return float(grid[i])

    else:
        steps = 10**d
        count = steps + 1

        def q_at(i):
            return i / steps

    witnesses = {}
    lo, hi = -1, count
    found = None
    with _SubsetScanner(instance, budget, threads) as scanner:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            partition = good_partition(instance, q_at(mid), mode)
            if partition.good not in witnesses:
                witnesses[partition.good] = _first_reaching(
                    scanner, partition, p, k
                )
            hit = witnesses[partition.good]
            logger.debug("Trying q=%s: %s", partition.q,
                         "feasible" if hit else "infeasible")
            if hit is not None:
                lo, found = mid, (partition, hit)
            elif scanner.exhausted:
                break
            else:
                hi = mid

        if found is not None:
            partition, (indices, prob) = found
            return _result(instance, indices, prob, partition.q, mode,
                           Objective.APPROX, budget, partition,
                           budget_exhausted=scanner.exhausted, inputs=inputs)

        partition = good_partition(instance, 0.0, mode)
        best, best_p = (None, 0.0)
        if not scanner.exhausted:
            best, best_p = _best_set(scanner, partition, k)
    if best is None:
        best, best_p = _fallback(instance, partition)
    logger.info("No q reaches p=%s with sets of size <= %d.", p, k)
    return _result(instance, best, best_p, 0.0, mode, Objective.APPROX,
                   budget, partition, feasible=best_p >= p,
                   budget_exhausted=scanner.exhausted, inputs=inputs)


def size_optimize(instance, q, p, mode, *, budget=None, threads=1):
    """
    Find a smallest teaching set whose success probability under the
    ``q``-good partition is at least ``p``.

    Sizes are searched from one upward and the first witness in
    enumeration order is returned. The search is exponential in the number
    of examples; bound it with a budget on large instances.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    q : :class:`float`
        Similarity threshold in [0, 1].
    p : :class:`float`
        Required success probability in [0, 1].
    mode : :class:`~pacteaching.instance.SimilarityMode` or :class:`str`
    budget : :class:`~pacteaching.helpers.Budget`, optional
    threads : :class:`int`, optional

    Returns
    -------
    :class:`SolveResult`
        Infeasible results carry the whole example set and its success
        probability. If the budget runs out before a witness is found
        the whole example set is returned, and it is feasible when it
        reaches ``p``.
    """

    q = check_probability(q, "threshold q")
    p = check_probability(p, "probability p")
    mode = SimilarityMode.from_name(mode)
    budget = _started(budget)
    partition = good_partition(instance, q, mode)
    inputs = {"q": q, "p": p}

    logger.info("Size solve: q=%s p=%s mode=%s", q, p, mode.value)
    with _SubsetScanner(instance, budget, threads) as scanner:
        hit = _first_reaching(scanner, partition, p, instance.m)
    if hit is not None:
        indices, prob = hit
        return _result(instance, indices, prob, q, mode, Objective.SIZE,
                       budget, partition, budget_exhausted=scanner.exhausted,
                       inputs=inputs)

    everything = tuple(range(instance.m))
    indices, prob = _fallback(instance, partition, everything)
    if scanner.exhausted:
        logger.warning("Budget exhausted after %d subsets.", budget.spent)
    return _result(instance, indices, prob, q, mode, Objective.SIZE, budget,
                   partition, feasible=prob >= p,
                   budget_exhausted=scanner.exhausted, inputs=inputs)


def naive_teaching_set(instance, k_max=None, *, budget=None, threads=1):
    """
    The error-oblivious teacher: a smallest classical teaching set, on
    which every concept differing from the target disagrees with it at
    least once.

    The reported probability is the prudent learner's actual success
    probability for that set (q = 1, identification), errors included.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    k_max : :class:`int`, optional
        Size bound, by default the number of examples.
    budget : :class:`~pacteaching.helpers.Budget`, optional
    threads : :class:`int`, optional

    Returns
    -------
    :class:`SolveResult`
    """

    k_max = instance.m if k_max is None else _check_size(k_max)
    mode = SimilarityMode.IDENTIFICATION
    budget = _started(budget)
    partition = good_partition(instance, 1.0, mode)
    rivals = np.flatnonzero(~instance.agree.all(axis=1))
    disagree = ~instance.agree[rivals]
    inputs = {"k": k_max}

    def covers(block):
        return disagree[:, block].any(axis=2).all(axis=0)

    hit = None
    with _SubsetScanner(instance, budget, threads) as scanner:
        for size in range(1, min(k_max, instance.m) + 1):
            for block, ok in scanner.scan(size, covers):
                hits = np.flatnonzero(ok)
                if hits.size:
                    hit = tuple(block[int(hits[0])])
                    break
            if hit is not None or scanner.exhausted:
                break

    feasible = hit is not None
    indices = hit if feasible else tuple(range(instance.m))
    indices, prob = _fallback(instance, partition, indices)
    return _result(instance, indices, prob, 1.0, mode, Objective.CLASSICAL,
                   budget, partition, feasible=feasible,
                   budget_exhausted=scanner.exhausted, inputs=inputs)


def brute_force_success(instance, s, partition):
    """
    Success probability by enumerating every joint outcome of the
    learner's consistency judgements.

    Each of the 2^(n k) outcome tables is weighted by its probability and
    counted as a success when the best good count is at least one and
    strictly above every bad count.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    s : :class:`~pacteaching.instance.TeachingSet`
    partition : :class:`~pacteaching.instance.GoodPartition`

    Returns
    -------
    :class:`float`

    Raises
    ------
    ValueError
        If n k exceeds :data:`BRUTE_FORCE_LIMIT` or ``s`` is empty.
    """

    n, k = instance.n, len(s)
    cells = n * k
    if k == 0:
        raise ValueError("The teaching set must not be empty.")
    if cells > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"Brute force is limited to {BRUTE_FORCE_LIMIT} cells, "
            f"got {cells}."
        )
    keeps = keep_matrix_for(instance, s).ravel()
    good = partition.good_mask()
    shifts = np.arange(cells)
    total = 0.0
    for start in range(0, 1 << cells, CHUNK_SIZE):
        codes = np.arange(start, min(start + CHUNK_SIZE, 1 << cells))
        bits = (codes[:, None] >> shifts) & 1
        weights = np.where(bits == 1, keeps, 1.0 - keeps).prod(axis=1)
        counts = bits.reshape(-1, n, k).sum(axis=2)
        max_good = np.where(good, counts, -1).max(axis=1)
        max_bad = np.where(good, -1, counts).max(axis=1)
        success = (max_good >= 1) & (max_good > max_bad)
        total += weights[success].sum()
    return float(total)
