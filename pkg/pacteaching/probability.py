"""
Exact success probability of a teaching set for the prudent learner.

For every concept the learner counts on how many labelled examples of the
teaching set it judges the concept consistent. These judgements are
independent Bernoulli trials with the keep probabilities of
:func:`keep_probability`, so each count follows a Poisson-binomial
distribution (:func:`count_pmf`). The prudent learner guesses a concept of
maximal count, and in the worst case it guesses a bad one whenever one ties
for the maximum. Teaching succeeds when some good concept strictly beats
every bad concept with a count of at least one::

    P[max_G X_g > max_B X_b] = sum_{i=1..k} P[max_G X_g = i] P[max_B X_b <= i-1]

:func:`success_probability` evaluates this from per-concept distribution
functions in O(|C| k^2)::

    from pacteaching import io
    import pacteaching.instance as ins
    import pacteaching.probability as prob

    inst = io.load_worked_example()
    part = ins.good_partition(inst, 1.0, "id")
    s = ins.TeachingSet.from_ids(inst, ["x1", "x2"])

    prob.success_probability(inst, s, part)     # 0.8928

The batched entry point :func:`success_from_keeps` evaluates many teaching
sets of the same size at once; the optimizers use it for enumeration.
"""

from dataclasses import dataclass

import numpy as np

from .helpers import check_index


@dataclass(frozen=True)
class CountDistribution:
    """
    The distribution of a concept's L-consistency count over a teaching
    set; ``pmf[j]`` is the probability of exactly ``j`` consistent
    judgements.
    """

    pmf: np.ndarray

    @property
    def size(self):
        """The teaching set size k (the pmf has k + 1 entries)."""

        return len(self.pmf) - 1

    def cdf(self):
        """
        The cumulative distribution, ``cdf[j] = P[count <= j]``.

        Returns
        -------
        :class:`numpy.ndarray`
        """

        return np.cumsum(self.pmf)


def keep_probability(instance, c, item):
    """
    The probability that concept ``c`` is judged consistent with a
    labelled example.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    c : :class:`int`
        Concept index.
    item : :class:`~pacteaching.instance.LabelledExample`

    Returns
    -------
    :class:`float`
        ``1 - gamma(c, x)`` if ``c(x)`` equals the label, else
        ``gamma(c, x)``.
    """

    c = check_index(c, instance.n)
    x = check_index(item.example_index, instance.m, "example")
    gamma = instance.gamma[c, x]
    if instance.consistency[c, x] == item.label:
        return float(1.0 - gamma)
    return float(gamma)


def keep_matrix_for(instance, s):
    """
    Keep probabilities of every concept on every item of a teaching set.

    Returns
    -------
    :class:`numpy.ndarray`
        n x k matrix.

    Raises
    ------
    ValueError
        If an example index is out of range for the instance.
    """

    indices = np.array(
        [check_index(x, instance.m, "example") for x in s.indices],
        dtype=np.intp,
    )
    labels = np.array(s.labels)
    agree = instance.consistency[:, indices] == labels
    gamma = instance.gamma[:, indices]
    return np.where(agree, 1.0 - gamma, gamma)


def poisson_binomial_pmf(keeps):
    """
    Poisson-binomial distributions by dynamic programming over the items.

    Parameters
    ----------
    keeps : array_like
        Success probabilities, shape (..., k) with k >= 1. Leading axes
        are batch axes.

    Returns
    -------
    :class:`numpy.ndarray`
        Shape (..., k + 1); entry j is the probability of j successes.

    Raises
    ------
    ValueError
        If there are no items.
    """

    keeps = np.asarray(keeps, dtype=float)
    k = keeps.shape[-1] if keeps.ndim else 0
    if k == 0:
        raise ValueError("The teaching set must not be empty.")
    dp = np.zeros(keeps.shape[:-1] + (k + 1,))
    dp[..., 0] = 1.0 - keeps[..., 0]
    dp[..., 1] = keeps[..., 0]
    for i in range(1, k):
        keep = keeps[..., i, None]
        nxt = np.empty_like(dp)
        nxt[..., 0] = dp[..., 0] * (1.0 - keep[..., 0])
        nxt[..., 1:] = dp[..., :-1] * keep + dp[..., 1:] * (1.0 - keep)
        dp = nxt
    return dp


def count_pmf(instance, c, s):
    """
    The distribution of the L-consistency count of concept ``c`` over the
    teaching set ``s``.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    c : :class:`int`
        Concept index.
    s : :class:`~pacteaching.instance.TeachingSet`

    Returns
    -------
    :class:`CountDistribution`

    Raises
    ------
    ValueError
        If ``s`` is empty or ``c`` is out of range.
    """

    c = check_index(c, instance.n)
    if len(s) == 0:
        raise ValueError("The teaching set must not be empty.")
    keeps = keep_matrix_for(instance, s)[c]
    return CountDistribution(pmf=poisson_binomial_pmf(keeps))


def success_from_keeps(keeps, good_mask):
    """
    Batched success probability.

    Parameters
    ----------
    keeps : :class:`numpy.ndarray`
        Shape (B, n, k): keep probabilities of each of n concepts on each
        of the k items, for B teaching sets.
    good_mask : :class:`numpy.ndarray`
        Length n boolean mask of the good concepts.

    Returns
    -------
    :class:`numpy.ndarray`
        Length B vector of success probabilities.
    """

    keeps = np.asarray(keeps, dtype=float)
    batch, n, k = keeps.shape
    cdf = np.cumsum(poisson_binomial_pmf(keeps), axis=-1)

    # P[max <= i] of each group is the product of its members' cdfs; the
    # product over an empty group is 1. Concepts are folded in index order.
    good_cdf = np.ones((batch, k + 1))
    bad_cdf = np.ones((batch, k + 1))
    for c in range(n):
        if good_mask[c]:
            good_cdf *= cdf[:, c]
        else:
            bad_cdf *= cdf[:, c]

    total = np.zeros(batch)
    for i in range(1, k + 1):
        total += (good_cdf[:, i] - good_cdf[:, i - 1]) * bad_cdf[:, i - 1]
    return np.clip(total, 0.0, 1.0)


def success_probability(instance, s, partition):
    """
    The probability that the prudent learner's worst-case guess is good.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    s : :class:`~pacteaching.instance.TeachingSet`
        A nonempty teaching set.
    partition : :class:`~pacteaching.instance.GoodPartition`
        A partition of the same instance's concepts.

    Returns
    -------
    :class:`float`

    Raises
    ------
    ValueError
        If ``s`` is empty or the partition does not match the instance.
    """

    if len(s) == 0:
        raise ValueError("The teaching set must not be empty.")
    if partition.n_concepts != instance.n:
        raise ValueError(
            "The partition covers a different number of concepts than the "
            "instance."
        )
    keeps = keep_matrix_for(instance, s)[None, :, :]
    return float(success_from_keeps(keeps, partition.good_mask())[0])
