"""
Stochastic simulation of the two learners that receive a teaching set as a
batch.

Each time the learner checks a concept c against a labelled example it
concludes "consistent" with the keep probability of
:func:`~pacteaching.probability.keep_probability`. All checks are
independent.

 * The naive learner discards every concept that fails a check and guesses
   among the survivors (:func:`run_naive`); it fails when none survive.
 * The prudent learner counts the passed checks of every concept and
   guesses a concept of maximal count (:func:`run_prudent`).

Guesses among ties are either uniform or worst case: the worst-case guess
is a bad concept whenever one is available, which is the event the exact
success probability accounts for.

::

    from pacteaching import io
    import pacteaching.instance as ins
    import pacteaching.learners as lrn

    inst = io.load_worked_example()
    part = ins.good_partition(inst, 1.0, "id")
    s = ins.TeachingSet.from_ids(inst, ["x1", "x2"])

    est = lrn.monte_carlo_success(inst, s, part, trials=100_000, seed=7)
    est.estimate, est.standard_error    # close to 0.8928

Random numbers come from Philox counter-based generators
(:func:`~pacteaching.helpers.trial_generator`). The checks of a trial are
drawn concept-major, item-minor.

Sub-streams are per block of trials, not per trial.
:func:`monte_carlo_success` splits the trials into consecutive blocks of
:data:`TRIAL_BLOCK` (4096) trials, the last block possibly shorter. Block
``b`` covers trials ``4096 b`` to ``4096 (b + 1) - 1`` and owns stream
``b`` of the seed; it draws all checks of its trials first (trial-major),
then one tie-breaking number per trial. A worker always simulates whole
blocks, so the estimate does not depend on the number of threads. It does
depend on the block size: trial ``t`` of a run is not the trial drawn by
calling :func:`run_prudent` with stream ``t``.
"""

import concurrent.futures
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .helpers import trial_generator
from .probability import keep_matrix_for, keep_probability

logger = logging.getLogger(__name__)

TRIAL_BLOCK = 4096
"""Trials simulated per random stream in :func:`monte_carlo_success`."""


class TieRule(enum.Enum):
    """How a learner picks among equally ranked concepts."""

    WORST_CASE = "worst"
    UNIFORM = "uniform"

    @classmethod
    def from_name(cls, name):
        """
        Look up a rule by value (``"worst"``, ``"uniform"``) or name.

        Raises
        ------
        ValueError
            If the name is unknown.
        """

        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("-", "_")
        for rule in cls:
            if key in (rule.value, rule.name.lower()):
                return rule
        raise ValueError(f"Unknown tie rule {name!r}.")


class Learner(enum.Enum):
    """The simulated learner."""

    NAIVE = "naive"
    PRUDENT = "prudent"


@dataclass(frozen=True)
class LearnerOutcome:
    """
    The result of one simulated teaching session.

    ``counts[c]`` is the number of items concept ``c`` was judged consistent
    with. ``guessed_concept`` is None exactly when the naive learner has no
    surviving concept, in which case ``failed`` is set.
    """

    guessed_concept: int
    counts: tuple
    failed: bool
    was_good: bool


@dataclass(frozen=True)
class MonteCarloEstimate:
    """An empirical success rate with its binomial standard error."""

    estimate: float
    standard_error: float
    trials: int
    successes: int

    def agrees_with(self, value, sigmas=4.0):
        """
        True if ``value`` is within ``sigmas`` standard errors of the
        estimate.
        """

        return abs(self.estimate - value) <= sigmas * self.standard_error


def sample_l_consistency(instance, c, item, rng):
    """
    Simulate one consistency check of concept ``c`` against a labelled
    example. Consumes exactly one draw of ``rng``.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    c : :class:`int`
        Concept index.
    item : :class:`~pacteaching.instance.LabelledExample`
    rng : :class:`numpy.random.Generator`

    Returns
    -------
    :class:`bool`
    """

    return bool(rng.random() < keep_probability(instance, c, item))


def _checks(instance, s, rng):
    if len(s) == 0:
        raise ValueError("The teaching set must not be empty.")
    keeps = keep_matrix_for(instance, s)
    return rng.random(keeps.shape) < keeps


def _good_mask(instance, partition):
    if partition is None:
        return np.arange(instance.n) == instance.target
    if partition.n_concepts != instance.n:
        raise ValueError(
            "The partition covers a different number of concepts than the "
            "instance."
        )
    return partition.good_mask()


def _pick(candidates, rng):
    return int(candidates[int(rng.random() * len(candidates))])


def run_prudent(instance, s, partition, rng, tie_rule=TieRule.WORST_CASE):
    """
    One session of the prudent learner.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    s : :class:`~pacteaching.instance.TeachingSet`
        A nonempty teaching set.
    partition : :class:`~pacteaching.instance.GoodPartition`
    rng : :class:`numpy.random.Generator`
    tie_rule : :class:`TieRule` or :class:`str`, optional
        By default worst case: ``was_good`` is set iff the maximal count is
        at least one and every concept reaching it is good. With the uniform
        rule one more draw picks the guess and ``was_good`` tells whether it
        is good.

    Returns
    -------
    :class:`LearnerOutcome`
    """

    tie_rule = TieRule.from_name(tie_rule)
    good = _good_mask(instance, partition)
    counts = _checks(instance, s, rng).sum(axis=1)
    best = counts.max()
    tied = np.flatnonzero(counts == best)

    if tie_rule is TieRule.UNIFORM:
        guess = _pick(tied, rng)
        was_good = bool(good[guess])
    else:
        bad_tied = tied[~good[tied]]
        guess = int(bad_tied[0] if bad_tied.size else tied[0])
        was_good = bool(best >= 1 and bad_tied.size == 0)
    return LearnerOutcome(guess, tuple(int(v) for v in counts), False,
                          was_good)


def run_naive(instance, s, rng, partition=None, tie_rule=TieRule.UNIFORM):
    """
    One session of the naive learner.

    A concept survives if it is judged consistent with every item.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    s : :class:`~pacteaching.instance.TeachingSet`
        A nonempty teaching set.
    rng : :class:`numpy.random.Generator`
    partition : :class:`~pacteaching.instance.GoodPartition`, optional
        By default only the target is good.
    tie_rule : :class:`TieRule` or :class:`str`, optional
        By default uniform among the survivors. Under the worst-case rule
        the session succeeds iff some concept survives and all survivors
        are good.

    Returns
    -------
    :class:`LearnerOutcome`
    """

    tie_rule = TieRule.from_name(tie_rule)
    good = _good_mask(instance, partition)
    checks = _checks(instance, s, rng)
    counts = tuple(int(v) for v in checks.sum(axis=1))
    survivors = np.flatnonzero(checks.all(axis=1))
    if survivors.size == 0:
        return LearnerOutcome(None, counts, True, False)

    if tie_rule is TieRule.UNIFORM:
        guess = _pick(survivors, rng)
        was_good = bool(good[guess])
    else:
        bad = survivors[~good[survivors]]
        guess = int(bad[0] if bad.size else survivors[0])
        was_good = bad.size == 0
    return LearnerOutcome(guess, counts, False, bool(was_good))


def _uniform_pick(candidates, u):
    # Index of the floor(u * count)-th True entry of each row.
    count = candidates.sum(axis=1)
    rank = np.floor(u * count).astype(np.intp)
    seen = np.cumsum(candidates, axis=1)
    return np.argmax(seen > rank[:, None], axis=1)


def _block_successes(keeps, good, learner, tie_rule, seed, block, trials):
    rng = trial_generator(seed, block)
    checks = rng.random((trials,) + keeps.shape) < keeps
    u = rng.random(trials)

    if learner is Learner.PRUDENT:
        counts = checks.sum(axis=2)
        best = counts.max(axis=1)
        candidates = counts == best[:, None]
        alive = np.ones(trials, dtype=bool)
    else:
        candidates = checks.all(axis=2)
        alive = candidates.any(axis=1)

    if tie_rule is TieRule.UNIFORM:
        guess = _uniform_pick(candidates, u)
        success = alive & good[guess]
    else:
        success = alive & ~(candidates & ~good).any(axis=1)
        if learner is Learner.PRUDENT:
            success &= best >= 1
    return int(success.sum())


def monte_carlo_success(
    instance,
    s,
    partition,
    trials,
    seed,
    learner="prudent",
    tie_rule=TieRule.WORST_CASE,
    threads=1,
):
    """
    Estimate the success rate of a learner by simulation.

    With the defaults (prudent learner, worst-case ties) this estimates
    :func:`~pacteaching.probability.success_probability`.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    s : :class:`~pacteaching.instance.TeachingSet`
        A nonempty teaching set.
    partition : :class:`~pacteaching.instance.GoodPartition`
    trials : :class:`int`
        At least one.
    seed : :class:`int`
        Master seed, nonnegative.
    learner : :class:`Learner` or :class:`str`, optional
        ``"prudent"`` (default) or ``"naive"``.
    tie_rule : :class:`TieRule` or :class:`str`, optional
    threads : :class:`int`, optional
        Worker threads, by default 1.

    Returns
    -------
    :class:`MonteCarloEstimate`

    Raises
    ------
    ValueError
        If ``trials`` is less than one, ``s`` is empty or a name is unknown.
    """

    trials = int(trials)
    if trials < 1:
        raise ValueError("The number of trials must be at least one.")
    if len(s) == 0:
        raise ValueError("The teaching set must not be empty.")
    if not isinstance(learner, Learner):
        learner = Learner(str(learner).lower())
    tie_rule = TieRule.from_name(tie_rule)
    good = _good_mask(instance, partition)
    keeps = keep_matrix_for(instance, s)

    n_blocks = -(-trials // TRIAL_BLOCK)

    def run(block):
        size = min(TRIAL_BLOCK, trials - block * TRIAL_BLOCK)
        return _block_successes(keeps, good, learner, tie_rule, seed, block,
                                size)

    logger.info("Simulating %d %s trials in %d blocks.", trials,
                learner.value, n_blocks)
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            successes = sum(pool.map(run, range(n_blocks)))
    else:
        successes = sum(run(block) for block in range(n_blocks))

    rate = successes / trials
    return MonteCarloEstimate(
        estimate=rate,
        standard_error=math.sqrt(rate * (1.0 - rate) / trials),
        trials=trials,
        successes=successes,
    )
