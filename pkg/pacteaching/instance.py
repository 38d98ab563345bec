"""
A teaching instance holds a finite example set X, a finite concept set C,
the binary consistency matrix c(x), the learner's deductive error
probabilities gamma(c, x) and the target concept c*.

Two similarities compare a concept with the target. Identification
similarity :func:`sim` is the plain label agreement rate. Employment
similarity :func:`sim_L` is the rate at which the learner, with its own
errors, judges the concept consistent with target-labelled examples.

::

    import pacteaching.instance as ins

    inst = ins.Instance(
        examples=["x1", "x2"],
        concepts=["c1", "c2"],
        consistency=[[1, 0], [0, 1]],
        gamma=[[0.1, 0.2], [0.1, 0.2]],
        target=1,
    )

    ins.sim(inst, 0, 1)     # 0.0
    ins.sim_L(inst, 1, 1)   # 0.85

    part = ins.good_partition(inst, 1.0, "id")
    part.good               # frozenset({1})

Teaching sets are built from example indices and always carry the target's
labels::

    s = ins.TeachingSet.from_indices(inst, [1, 0])
    s.indices               # (0, 1)
    s.labels                # (0, 1)
"""

import enum
from dataclasses import dataclass

import numpy as np

from .helpers import check_index, check_probability, check_weights

EPS_TOL = 1e-9
"""Tolerance of the good-set threshold comparison."""


class SimilarityMode(enum.Enum):
    """
    Teaching for identification (``sim``) or for employment (``sim_L``).
    """

    IDENTIFICATION = "id"
    EMPLOYMENT = "em"

    @classmethod
    def from_name(cls, name):
        """
        Look up a mode by its short or long name.

        Parameters
        ----------
        name : :class:`str` or :class:`SimilarityMode`
            ``"id"``, ``"identification"``, ``"em"`` or ``"employment"``.

        Returns
        -------
        :class:`SimilarityMode`

        Raises
        ------
        ValueError
            If the name is not a known mode.
        """

        if isinstance(name, cls):
            return name
        key = str(name).lower()
        for mode in cls:
            if key in (mode.value, mode.name.lower()):
                return mode
        raise ValueError(f"Unknown similarity mode {name!r}.")


@dataclass(frozen=True, order=True)
class LabelledExample:
    """An example index with the binary label it is taught with."""

    example_index: int
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(
                f"A label must be 0 or 1, got {self.label!r}."
            )


@dataclass(frozen=True)
class TeachingSet:
    """
    A set of labelled examples in canonical order (ascending example index).
    """

    items: tuple

    def __post_init__(self):
        items = tuple(sorted(self.items))
        indices = [item.example_index for item in items]
        if len(set(indices)) != len(indices):
            raise ValueError("A teaching set cannot repeat an example.")
        object.__setattr__(self, "items", items)

    @classmethod
    def from_indices(cls, instance, indices):
        """
        Build a teaching set labelled by the instance's target.

        Parameters
        ----------
        instance : :class:`Instance`
        indices : iterable of :class:`int`

        Returns
        -------
        :class:`TeachingSet`
        """

        target_row = instance.consistency[instance.target]
        items = []
        for index in indices:
            index = check_index(index, instance.m, "example")
            items.append(LabelledExample(index, int(target_row[index])))
        return cls(tuple(items))

    @classmethod
    def from_ids(cls, instance, ids):
        """
        Build a teaching set from example identifiers, labelled by the target.

        Raises
        ------
        ValueError
            If an identifier is unknown.
        """

        return cls.from_indices(
            instance, [instance.example_index(i) for i in ids]
        )

    @property
    def indices(self):
        """The example indices as a :class:`tuple`."""

        return tuple(item.example_index for item in self.items)

    @property
    def labels(self):
        """The labels as a :class:`tuple`."""

        return tuple(item.label for item in self.items)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class GoodPartition:
    """
    The split of concepts into good and bad under a similarity threshold.
    """

    good: frozenset
    bad: frozenset
    mode: SimilarityMode
    q: float

    @property
    def n_concepts(self):
        """Number of concepts covered by the partition."""

        return len(self.good) + len(self.bad)

    def good_mask(self):
        """
        Boolean mask over concept indices, True for good concepts.

        Returns
        -------
        :class:`numpy.ndarray`
        """

        mask = np.zeros(self.n_concepts, dtype=bool)
        mask[list(self.good)] = True
        return mask


class Instance:
    """
    A teaching instance: examples, concepts, consistency and error matrices,
    and the target concept. Instances are immutable.
    """

    def __init__(
        self,
        examples,
        concepts,
        consistency,
        gamma,
        target,
        *,
        example_weights=None,
        concept_weights=None,
    ):
        """
        Constructor.

        Parameters
        ----------
        examples : :class:`list`
            Unique example identifiers, length m.
        concepts : :class:`list`
            Unique concept identifiers, length n.
        consistency : array_like
            n x m matrix of 0/1 labels, entry (c, x) is c(x).
        gamma : array_like
            n x m matrix of error probabilities in [0, 1].
        target : :class:`int`
            Index of the target concept.
        example_weights : array_like, optional
            Distribution over examples used by the similarities, by default
            uniform.
        concept_weights : array_like, optional
            Distribution over concepts used by the heuristics, by default
            uniform.

        Raises
        ------
        ValueError
            If the identifiers are not unique, a matrix has the wrong shape,
            a label is not 0/1, an error is outside [0, 1] or the target is
            out of range.
        """

        self._examples = tuple(examples)
        self._concepts = tuple(concepts)
        if len(set(self._examples)) != len(self._examples):
            raise ValueError("Example identifiers must be unique.")
        if len(set(self._concepts)) != len(self._concepts):
            raise ValueError("Concept identifiers must be unique.")
        if not self._examples or not self._concepts:
            raise ValueError(
                "An instance needs at least one example and one concept."
            )
        shape = (len(self._concepts), len(self._examples))

        raw = np.asarray(consistency)
        if raw.shape != shape:
            raise ValueError(
                f"The consistency matrix must have shape {shape}, "
                f"got {raw.shape}."
            )
        if not np.all((raw == 0) | (raw == 1)):
            raise ValueError("Consistency entries must be exactly 0 or 1.")
        self._consistency = raw.astype(np.int8)

        self._gamma = np.array(gamma, dtype=float)
        if self._gamma.shape != shape:
            raise ValueError(
                f"The gamma matrix must have shape {shape}, "
                f"got {self._gamma.shape}."
            )
        if not np.all((self._gamma >= 0.0) & (self._gamma <= 1.0)):
            raise ValueError("Gamma entries must be within [0, 1].")

        self._target = check_index(target, shape[0], "concept")
        self._example_weights = check_weights(
            example_weights, shape[1], "example"
        )
        self._concept_weights = check_weights(
            concept_weights, shape[0], "concept"
        )

        # Agreement with the target and the matching keep probabilities,
        # i.e. the chance c is judged consistent with (x, c*(x)).
        self._agree = self._consistency == self._consistency[self._target]
        self._keep = np.where(self._agree, 1.0 - self._gamma, self._gamma)
        for arr in (self._consistency, self._gamma, self._agree, self._keep):
            arr.flags.writeable = False
        self._example_lookup = {e: i for i, e in enumerate(self._examples)}
        self._concept_lookup = {c: i for i, c in enumerate(self._concepts)}

    def with_target(self, target):
        """
        A copy of the instance with another target concept.

        Parameters
        ----------
        target : :class:`int`
            Index of the new target.

        Returns
        -------
        :class:`Instance`
        """

        return Instance(
            self._examples,
            self._concepts,
            self._consistency,
            self._gamma,
            target,
            example_weights=self._example_weights,
            concept_weights=self._concept_weights,
        )

    def example_index(self, example_id):
        """
        The index of an example identifier.

        Raises
        ------
        ValueError
            If the identifier is unknown.
        """

        try:
            return self._example_lookup[example_id]
        except KeyError:
            raise ValueError(f"Unknown example {example_id!r}.") from None

    def concept_index(self, concept_id):
        """
        The index of a concept identifier.

        Raises
        ------
        ValueError
            If the identifier is unknown.
        """

        try:
            return self._concept_lookup[concept_id]
        except KeyError:
            raise ValueError(f"Unknown concept {concept_id!r}.") from None

    @property
    def examples(self):
        """The example identifiers as a :class:`tuple`."""

        return self._examples

    @property
    def concepts(self):
        """The concept identifiers as a :class:`tuple`."""

        return self._concepts

    @property
    def consistency(self):
        """The read-only n x m label matrix."""

        return self._consistency

    @property
    def gamma(self):
        """The read-only n x m error matrix."""

        return self._gamma

    @property
    def target(self):
        """The index of the target concept."""

        return self._target

    @property
    def n(self):
        """Number of concepts."""

        return len(self._concepts)

    @property
    def m(self):
        """Number of examples."""

        return len(self._examples)

    @property
    def example_weights(self):
        """The example distribution, or None for uniform."""

        return self._example_weights

    @property
    def concept_weights(self):
        """The concept distribution, or None for uniform."""

        return self._concept_weights

    @property
    def agree(self):
        """
        Read-only n x m boolean matrix, True where c(x) = c*(x).
        """

        return self._agree

    @property
    def keep_matrix(self):
        """
        Read-only n x m matrix of the probabilities that c is judged
        consistent with the target-labelled example (x, c*(x)).
        """

        return self._keep

    def __repr__(self):
        return (
            f"Instance(n={self.n}, m={self.m}, "
            f"target={self._concepts[self._target]!r})"
        )


def _example_mean(instance, values):
    weights = instance.example_weights
    if weights is None:
        return np.mean(values, axis=-1)
    return values @ weights


def sim(instance, c, c_star):
    """
    Identification similarity: the probability that ``c`` and ``c_star``
    agree on an example drawn from the example distribution.

    Parameters
    ----------
    instance : :class:`Instance`
    c : :class:`int`
        Concept index.
    c_star : :class:`int`
        Concept index.

    Returns
    -------
    :class:`float`

    Raises
    ------
    ValueError
        If an index is out of range.
    """

    c = check_index(c, instance.n)
    c_star = check_index(c_star, instance.n)
    agree = instance.consistency[c] == instance.consistency[c_star]
    return float(_example_mean(instance, agree.astype(float)))


def sim_L(instance, c, c_star):
    """
    Employment similarity: the expected rate at which the learner judges
    ``c`` consistent with examples labelled by ``c_star``. It uses the
    error row of ``c`` and is therefore not symmetric.

    Parameters
    ----------
    instance : :class:`Instance`
    c : :class:`int`
        Concept index.
    c_star : :class:`int`
        Concept index.

    Returns
    -------
    :class:`float`

    Raises
    ------
    ValueError
        If an index is out of range.
    """

    c = check_index(c, instance.n)
    c_star = check_index(c_star, instance.n)
    agree = instance.consistency[c] == instance.consistency[c_star]
    gamma = instance.gamma[c]
    return float(_example_mean(instance, np.where(agree, 1.0 - gamma, gamma)))


def similarity_matrix(instance, mode):
    """
    All pairwise similarities, ``M[i, j] = sim(c_i, c_j)`` or
    ``sim_L(c_i, c_j)``.

    Parameters
    ----------
    instance : :class:`Instance`
    mode : :class:`SimilarityMode` or :class:`str`

    Returns
    -------
    :class:`numpy.ndarray`
        n x n matrix.
    """

    mode = SimilarityMode.from_name(mode)
    labels = instance.consistency
    agree = labels[:, None, :] == labels[None, :, :]
    if mode is SimilarityMode.IDENTIFICATION:
        values = agree.astype(float)
    else:
        gamma = instance.gamma[:, None, :]
        values = np.where(agree, 1.0 - gamma, gamma)
    return _example_mean(instance, values)


def target_similarities(instance, mode):
    """
    The similarity of every concept to the target.

    Returns
    -------
    :class:`numpy.ndarray`
        Length n vector.
    """

    mode = SimilarityMode.from_name(mode)
    if mode is SimilarityMode.IDENTIFICATION:
        values = instance.agree.astype(float)
    else:
        values = instance.keep_matrix
    return _example_mean(instance, values)


def good_partition(instance, q, mode):
    """
    Split the concepts into those at least ``q``-similar to the target and
    the rest. The target is not forced into the good set.

    Parameters
    ----------
    instance : :class:`Instance`
    q : :class:`float`
        Threshold in [0, 1].
    mode : :class:`SimilarityMode` or :class:`str`

    Returns
    -------
    :class:`GoodPartition`

    Raises
    ------
    ValueError
        If ``q`` is outside [0, 1].
    """

    q = check_probability(q, "threshold q")
    mode = SimilarityMode.from_name(mode)
    good_mask = target_similarities(instance, mode) >= q - EPS_TOL
    good = frozenset(int(i) for i in np.flatnonzero(good_mask))
    bad = frozenset(int(i) for i in np.flatnonzero(~good_mask))
    return GoodPartition(good=good, bad=bad, mode=mode, q=q)
