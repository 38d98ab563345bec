"""
The heuristic teacher scores every example once and builds a teaching set
greedily instead of enumerating subsets.

 * Uniqueness of x: the expected rate at which a concept drawn from the
   concept distribution is judged consistent with ``(x, c*(x))``. Low
   values single the target out.
 * Homogeneity of x': the mean employment similarity to the target of the
   concepts sharing the target's label on x'. High values mean the
   survivors are target-like.
 * Combined: ``(1 - uniqueness) + alpha * homogeneity``.
 * Rival uniqueness: uniqueness restricted to the concepts other than the
   target, so an error-free example that rules out every rival scores 0.

::

    from pacteaching import io
    import pacteaching.heuristics as heu

    inst = io.load_worked_example()
    heu.uniqueness(inst, 0)         # 0.5
    heu.homogeneity(inst, 0)        # 0.85

    res = heu.greedy_teaching_set(inst, "uniqueness",
                                  stop=heu.StopAtSize(1))
    res.teaching_set.indices        # (0,)

Criteria are held in a registry. New criteria can be added with
:func:`register_criterion`; a score function takes the instance and alpha
and returns one value per example::

    heu.register_criterion(
        "error-mass",
        lambda inst, alpha: inst.gamma.sum(axis=0),
        descending=False,
    )

Criteria can be removed via :func:`deregister_criterion` and listed with
:func:`get_criteria_data`.
"""

import copy
import logging
from dataclasses import dataclass

import numpy as np

from .helpers import check_index, check_probability
from .instance import (
    SimilarityMode,
    TeachingSet,
    good_partition,
    target_similarities,
)
from .probability import success_probability

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 1.0
"""Weight of homogeneity in the combined score."""


@dataclass(frozen=True)
class HeuristicScore:
    """The heuristic scores of one example."""

    example_index: int
    uniqueness: float
    homogeneity: float
    combined: float
    rival_uniqueness: float


def _concept_mean(instance, values, rows=None):
    """Mean over concepts (axis 0), optionally restricted by a row mask."""

    weights = instance.concept_weights
    if weights is None:
        weights = np.ones(instance.n)
    if rows is None:
        rows = np.ones(values.shape, dtype=bool)
    mass = np.where(rows, weights[:, None], 0.0)
    total = mass.sum(axis=0)
    # Fall back to a uniform mean where the restricted weight vanishes.
    uniform = rows.astype(float)
    mass = np.where(total > 0, mass, uniform)
    total = mass.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, (mass * values).sum(axis=0) / total, 0.0)


def uniqueness_scores(instance):
    """
    Uniqueness of every example.

    Returns
    -------
    :class:`numpy.ndarray`
        Length m vector.
    """

    return _concept_mean(instance, instance.keep_matrix)


def homogeneity_scores(instance):
    """
    Homogeneity of every example.

    Returns
    -------
    :class:`numpy.ndarray`
        Length m vector.
    """

    sims = target_similarities(instance, SimilarityMode.EMPLOYMENT)
    values = np.broadcast_to(sims[:, None], instance.agree.shape)
    return _concept_mean(instance, values, rows=instance.agree)


def rival_uniqueness_scores(instance):
    """
    Rival uniqueness of every example; 0 for instances with one concept.

    Returns
    -------
    :class:`numpy.ndarray`
        Length m vector.
    """

    rivals = np.ones(instance.keep_matrix.shape, dtype=bool)
    rivals[instance.target] = False
    return _concept_mean(instance, instance.keep_matrix, rows=rivals)


def combined_scores(instance, alpha=DEFAULT_ALPHA):
    """
    Combined score of every example.

    Raises
    ------
    ValueError
        If ``alpha`` is negative.
    """

    alpha = _check_alpha(alpha)
    return (1.0 - uniqueness_scores(instance)) + alpha * homogeneity_scores(
        instance
    )


def _check_alpha(alpha):
    alpha = float(alpha)
    if not alpha >= 0.0:
        raise ValueError("The homogeneity weight alpha must be nonnegative.")
    return alpha


def uniqueness(instance, x):
    """
    The uniqueness of one example.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    x : :class:`int`
        Example index.

    Returns
    -------
    :class:`float`
    """

    x = check_index(x, instance.m, "example")
    return float(uniqueness_scores(instance)[x])


def homogeneity(instance, x_prime):
    """
    The homogeneity of one example.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    x_prime : :class:`int`
        Example index.

    Returns
    -------
    :class:`float`
    """

    x_prime = check_index(x_prime, instance.m, "example")
    return float(homogeneity_scores(instance)[x_prime])


def rival_uniqueness(instance, x):
    """The rival uniqueness of one example."""

    x = check_index(x, instance.m, "example")
    return float(rival_uniqueness_scores(instance)[x])


def combined(instance, x, alpha=DEFAULT_ALPHA):
    """The combined score of one example."""

    x = check_index(x, instance.m, "example")
    return float(combined_scores(instance, alpha)[x])


def score_examples(instance, alpha=DEFAULT_ALPHA):
    """
    All scores of all examples.

    Returns
    -------
    :class:`list` of :class:`HeuristicScore`
    """

    alpha = _check_alpha(alpha)
    uniq = uniqueness_scores(instance)
    homo = homogeneity_scores(instance)
    rival = rival_uniqueness_scores(instance)
    comb = (1.0 - uniq) + alpha * homo
    return [
        HeuristicScore(x, float(uniq[x]), float(homo[x]), float(comb[x]),
                       float(rival[x]))
        for x in range(instance.m)
    ]


def register_criterion(name, score_func, descending):
    """
    Register a new greedy criterion.

    Parameters
    ----------
    name : :class:`str`
        Identifier.
    score_func : callable
        ``score_func(instance, alpha)`` returning a length m array.
    descending : :class:`bool`
        If True the highest scores are added first.

    Raises
    ------
    ValueError
        If the name identifier is already in use.
    """

    if name in _criterion_registry:
        raise ValueError(
            "Name identifier already in use. " f"Deregister `{name}` first."
        )
    _criterion_registry[name] = {
        "score_func": score_func,
        "descending": bool(descending),
    }


def deregister_criterion(name):
    """
    Deregister an existing criterion.

    Parameters
    ----------
    name : :class:`str`
        Identifier
    """

    _criterion_registry.pop(name, None)


def get_criteria_data():
    """
    Get a copy of the registry.

    Returns
    -------
    :class:`dict` (:class:`str`, :class:`dict`)
        The score function and sort direction of each criterion.
    """

    return copy.copy(_criterion_registry)


def criterion_scores(instance, criterion, alpha=DEFAULT_ALPHA):
    """
    The scores of a registered criterion and its greedy order.

    Ties are ordered by ascending example index; scores are compared at 12
    decimals.

    Returns
    -------
    :class:`tuple` (:class:`numpy.ndarray`, :class:`numpy.ndarray`)
        The scores and the example indices in greedy order.

    Raises
    ------
    ValueError
        If the criterion is not registered.
    """

    if criterion not in _criterion_registry:
        raise ValueError(
            f"The register does not contain the criterion {criterion!r}."
        )
    entry = _criterion_registry[criterion]
    scores = np.asarray(entry["score_func"](instance, _check_alpha(alpha)),
                        dtype=float)
    if scores.shape != (instance.m,):
        raise ValueError(
            f"The criterion {criterion!r} must score each of the "
            f"{instance.m} examples."
        )
    keys = np.round(scores, 12)
    if entry["descending"]:
        keys = -keys
    return scores, np.argsort(keys, kind="stable")


@dataclass(frozen=True)
class StopAtSize:
    """Stop the greedy construction at a fixed size."""

    size: int

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValueError("The stopping size must be at least one.")

    def partition(self, instance):
        """The partition achieved probabilities are reported under."""

        return good_partition(instance, 1.0, SimilarityMode.IDENTIFICATION)

    def reached(self, instance, s, p_now):
        return len(s) >= self.size


@dataclass(frozen=True)
class StopAtProbability:
    """
    Stop the greedy construction once the success probability under the
    ``(q, mode)`` partition reaches ``p``.
    """

    p: float
    q: float = 1.0
    mode: SimilarityMode = SimilarityMode.IDENTIFICATION

    def __post_init__(self):
        check_probability(self.p, "probability p")
        check_probability(self.q, "threshold q")
        object.__setattr__(self, "mode", SimilarityMode.from_name(self.mode))

    def partition(self, instance):
        """The partition achieved probabilities are reported under."""

        return good_partition(instance, self.q, self.mode)

    def reached(self, instance, s, p_now):
        return p_now >= self.p


def parse_stop_rule(text):
    """
    Parse ``"size:K"`` or ``"prob:P@Q"`` (identification) into a stop
    rule.

    Raises
    ------
    ValueError
        If the text is malformed.
    """

    kind, _, rest = str(text).partition(":")
    try:
        if kind == "size":
            return StopAtSize(int(rest))
        if kind == "prob":
            p, _, q = rest.partition("@")
            return StopAtProbability(float(p), float(q) if q else 1.0)
    except ValueError as err:
        raise ValueError(f"Invalid stop rule {text!r}: {err}") from None
    raise ValueError(
        f"Invalid stop rule {text!r}, expected size:K or prob:P@Q."
    )


@dataclass(frozen=True)
class GreedyResult:
    """A greedily built teaching set."""

    teaching_set: TeachingSet
    satisfied: bool
    achieved_p: float
    criterion: str
    scores: np.ndarray
    order: np.ndarray


def greedy_teaching_set(
    instance, criterion, alpha=DEFAULT_ALPHA, stop=StopAtSize(1)
):
    """
    Add examples in criterion order until the stop rule fires.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    criterion : :class:`str`
        A registered criterion, e.g. ``"uniqueness"``.
    alpha : :class:`float`, optional
        Homogeneity weight of the combined criterion, by default 1.0.
    stop : :class:`StopAtSize` or :class:`StopAtProbability`, optional
        By default a single example.

    Returns
    -------
    :class:`GreedyResult`
        If the rule never fires the whole example set is returned with
        ``satisfied`` False.
    """

    scores, order = criterion_scores(instance, criterion, alpha)
    partition = stop.partition(instance)
    chosen = []
    s, p_now, satisfied = None, 0.0, False
    for x in order:
        chosen.append(int(x))
        s = TeachingSet.from_indices(instance, chosen)
        p_now = success_probability(instance, s, partition)
        if stop.reached(instance, s, p_now):
            satisfied = True
            break
    if not satisfied:
        logger.info("Stop rule %r not reached with all %d examples.", stop,
                    instance.m)
    return GreedyResult(s, satisfied, p_now, criterion, scores, order)


def selection_table(instance, criteria=None, alpha=DEFAULT_ALPHA):
    """
    The first example each criterion picks for every possible target.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    criteria : :class:`list` of :class:`str`, optional
        By default every registered criterion.
    alpha : :class:`float`, optional

    Returns
    -------
    :class:`list` of :class:`tuple`
        ``(target id, criterion, example id, score)`` rows, targets in
        concept order.
    """

    criteria = list(_criterion_registry) if criteria is None else criteria
    rows = []
    for c in range(instance.n):
        inst = instance.with_target(c)
        for name in criteria:
            scores, order = criterion_scores(inst, name, alpha)
            x = int(order[0])
            rows.append((inst.concepts[c], name, inst.examples[x],
                         float(scores[x])))
    return rows


@dataclass(frozen=True)
class ProfileRow:
    """Deductive error and singleton success of one identifying example."""

    example_index: int
    concept_index: int
    mean_error: float
    singleton_p: float


def deductive_error_profile(instance, examples):
    """
    For examples labelled positive by exactly one concept: that concept,
    the mean deductive error over all concepts and the success probability
    of teaching the concept with the example alone (q = 1,
    identification).

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    examples : iterable of :class:`int`
        Example indices.

    Returns
    -------
    :class:`list` of :class:`ProfileRow`

    Raises
    ------
    ValueError
        If an example is not labelled positive by exactly one concept.
    """

    rows = []
    targets = {}
    for x in examples:
        x = check_index(x, instance.m, "example")
        positive = np.flatnonzero(instance.consistency[:, x] == 1)
        if positive.size != 1:
            raise ValueError(
                f"The example {instance.examples[x]!r} is labelled positive "
                f"by {positive.size} concepts, expected exactly one."
            )
        c = int(positive[0])
        if c not in targets:
            inst = instance.with_target(c)
            targets[c] = (inst, good_partition(inst, 1.0, "id"))
        inst, partition = targets[c]
        p = success_probability(inst, TeachingSet.from_indices(inst, [x]),
                                partition)
        rows.append(ProfileRow(x, c, float(instance.gamma[:, x].mean()), p))
    return rows


@dataclass(frozen=True)
class PairProfileRow:
    """Deductive error and success of one identifying pair."""

    positive_index: int
    negative_index: int
    concept_index: int
    mean_error: float
    pair_p: float


def pair_error_profile(instance, pairs):
    """
    For identifying pairs: the mean deductive error over all concepts and
    both examples, and the success probability of teaching the pair's
    concept with the two examples (q = 1, identification).

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    pairs : iterable of :class:`~pacteaching.generators.IdentifyingPair`

    Returns
    -------
    :class:`list` of :class:`PairProfileRow`

    Raises
    ------
    ValueError
        If a pair leaves a concept other than its own consistent.
    """

    rows = []
    targets = {}
    for pair in pairs:
        c = check_index(pair.concept_index, instance.n)
        x1 = check_index(pair.positive_index, instance.m, "example")
        x2 = check_index(pair.negative_index, instance.m, "example")
        labels = instance.consistency
        consistent = np.flatnonzero(
            (labels[:, x1] == 1) & (labels[:, x2] == 0)
        )
        if consistent.tolist() != [c]:
            raise ValueError(
                f"The pair ({instance.examples[x1]!r}, "
                f"{instance.examples[x2]!r}) does not single out "
                f"{instance.concepts[c]!r}."
            )
        if c not in targets:
            inst = instance.with_target(c)
            targets[c] = (inst, good_partition(inst, 1.0, "id"))
        inst, partition = targets[c]
        p = success_probability(
            inst, TeachingSet.from_indices(inst, [x1, x2]), partition
        )
        error = float(instance.gamma[:, [x1, x2]].mean())
        rows.append(PairProfileRow(x1, x2, c, error, p))
    return rows


_criterion_registry = {}

# Register the built-in criteria

register_criterion(
    "uniqueness",
    lambda instance, alpha: uniqueness_scores(instance),
    descending=False,
)
register_criterion(
    "homogeneity",
    lambda instance, alpha: homogeneity_scores(instance),
    descending=True,
)
register_criterion("combined", combined_scores, descending=True)
register_criterion(
    "rival-uniqueness",
    lambda instance, alpha: rival_uniqueness_scores(instance),
    descending=False,
)
