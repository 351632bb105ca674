"""Plackett-Luce core: rankings, choice probabilities, and exact sampling.

The Plackett-Luce (PL) model assigns each alternative i a positive latent
utility v_i and defines a distribution over rankings by repeated choice:
the top-ranked alternative is drawn with probability proportional to its
utility, then the next one from the remainder, and so on.  In the
contextual variant the utility of alternative i is ``exp(theta . x_i)``
for a joint feature vector x_i.

All probability computations run in log space with max-shifted
log-sum-exp, so large inner products ``theta . x`` do not overflow.
Every function is pure; random sampling takes a caller-owned
``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "Ranking",
    "ContextMatrix",
    "UtilityVector",
    "contextual_utilities",
    "prob_full_ranking",
    "prob_partial_ranking",
    "prob_top_rank",
    "sample_partial_ranking",
    "sample_winner",
]


@dataclass(frozen=True)
class Ranking:
    """A bijection from a set of alternatives onto positions ``1..m``.

    ``items`` holds the members of the ranked set in sorted order and
    ``ranks[j]`` is the (1-based) position assigned to ``items[j]``.
    ``rank_of`` is therefore an O(1)-ish lookup and the bijection is easy
    to check at construction.
    """

    items: tuple[int, ...]
    ranks: tuple[int, ...]

    def __post_init__(self):
        m = len(self.items)
        if m == 0:
            raise ValueError("ranking must cover at least one alternative")
        if len(self.ranks) != m:
            raise ValueError("items and ranks must have equal length")
        if list(self.items) != sorted(set(self.items)):
            raise ValueError("items must be sorted and distinct")
        if sorted(self.ranks) != list(range(1, m + 1)):
            raise ValueError("ranks must be a bijection onto 1..m")

    @classmethod
    def from_ordering(cls, ordering: Sequence[int]) -> "Ranking":
        """Build a ranking from alternatives listed best-first."""
        ordering = [int(a) for a in ordering]
        items = sorted(ordering)
        if len(set(items)) != len(items):
            raise ValueError("ordering contains duplicate alternatives")
        pos = {a: p + 1 for p, a in enumerate(ordering)}
        return cls(items=tuple(items), ranks=tuple(pos[a] for a in items))

    @property
    def ordering(self) -> tuple[int, ...]:
        """Alternatives listed best-first (the inverse map)."""
        order = [0] * len(self.items)
        for item, rank in zip(self.items, self.ranks):
            order[rank - 1] = item
        return tuple(order)

    def rank_of(self, item: int) -> int:
        """1-based position of ``item``."""
        return self.ranks[self.items.index(item)]

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(self.items)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class ContextMatrix:
    """Per-round block of joint context/arm feature vectors.

    ``features`` has shape ``(d, n)``; column i is the joint feature
    vector of arm i for this round.  ``t`` is the 1-based round index.
    """

    features: np.ndarray
    t: int = 1

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise ValueError("features must be a d x n matrix with d, n >= 1")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        if self.t < 1:
            raise ValueError("round index must be positive")
        object.__setattr__(self, "features", feats)

    @property
    def d(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.features[:, i]


@dataclass(frozen=True)
class UtilityVector:
    """Positive latent utilities of ``n`` alternatives.

    Stored as log-utilities so that probability computations stay in log
    space; ``values`` materializes ``exp(log_values)`` and can overflow
    for extreme logits, which is exactly why the probability functions
    below never go through it.
    """

    log_values: np.ndarray = field()

    def __post_init__(self):
        logs = np.asarray(self.log_values, dtype=float)
        if logs.ndim != 1 or logs.size < 1:
            raise ValueError("log utilities must be a nonempty vector")
        if not np.all(np.isfinite(logs)):
            raise ValueError("log utilities must be finite")
        object.__setattr__(self, "log_values", logs)

    @classmethod
    def from_values(cls, values: Sequence[float] | np.ndarray) -> "UtilityVector":
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("utilities must be a nonempty vector")
        if not (np.all(np.isfinite(vals)) and np.all(vals > 0)):
            raise ValueError("utilities must be strictly positive and finite")
        return cls(np.log(vals))

    @classmethod
    def from_log(cls, log_values: Sequence[float] | np.ndarray) -> "UtilityVector":
        return cls(np.asarray(log_values, dtype=float))

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    def __len__(self) -> int:
        return self.log_values.size


def contextual_utilities(theta: np.ndarray, context: ContextMatrix) -> UtilityVector:
    """Utilities ``v_i = exp(theta . x_i)`` for every arm column of the context."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size != context.d:
        raise ValueError(
            f"theta has dimension {theta.size}, context expects {context.d}"
        )
    return UtilityVector.from_log(theta @ context.features)


def _check_subset(subset: Sequence[int], n: int) -> np.ndarray:
    members = np.asarray(sorted(int(i) for i in subset), dtype=int)
    if members.size == 0:
        raise ValueError("subset must be nonempty")
    if np.unique(members).size != members.size:
        raise ValueError("subset members must be distinct")
    if members[0] < 0 or members[-1] >= n:
        raise ValueError(f"subset members must lie in [0, {n})")
    return members


def _log_prob_ordering(log_v: np.ndarray, ordering: Sequence[int]) -> float:
    """Log PL probability of observing ``ordering`` (best-first) among itself."""
    logits = log_v[np.asarray(ordering, dtype=int)]
    total = 0.0
    for i in range(logits.size):
        total += logits[i] - logsumexp(logits[i:])
    return total


def prob_full_ranking(utilities: UtilityVector, ranking: Ranking) -> float:
    """PL probability of a full ranking over all ``n`` alternatives."""
    n = len(utilities)
    if ranking.items != tuple(range(n)):
        raise ValueError("ranking must cover all n alternatives exactly once")
    return float(np.exp(_log_prob_ordering(utilities.log_values, ranking.ordering)))


def prob_partial_ranking(
    utilities: UtilityVector, subset: Sequence[int], ranking: Ranking
) -> float:
    """PL probability of a partial ranking on ``subset``.

    Equals the sum of full-ranking probabilities over all linear
    extensions of the partial ranking, but is computed directly via the
    closed-form product of stage-wise choice probabilities.
    """
    members = _check_subset(subset, len(utilities))
    if ranking.items != tuple(members):
        raise ValueError("ranking domain must equal the subset")
    return float(np.exp(_log_prob_ordering(utilities.log_values, ranking.ordering)))


def prob_top_rank(utilities: UtilityVector, subset: Sequence[int], arm: int) -> float:
    """Probability that ``arm`` is ranked first among ``subset``."""
    members = _check_subset(subset, len(utilities))
    if int(arm) not in members:
        raise ValueError(f"arm {arm} is not a member of the subset")
    logs = utilities.log_values[members]
    return float(np.exp(utilities.log_values[int(arm)] - logsumexp(logs)))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - np.max(logits))
    return shifted / shifted.sum()


def _categorical(probs: np.ndarray, rng: np.random.Generator) -> int:
    # Inverse-CDF draw consuming exactly one uniform per call.
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(idx, probs.size - 1)


def sample_partial_ranking(
    utilities: UtilityVector, subset: Sequence[int], rng: np.random.Generator
) -> Ranking:
    """Draw a full ranking of ``subset`` from the PL model.

    Sequential categorical selection: the next-best arm is sampled from
    the remaining ones with probabilities proportional to their
    utilities, which realizes the closed-form partial-ranking
    distribution exactly.
    """
    members = _check_subset(subset, len(utilities))
    remaining = list(members)
    ordering = []
    for _ in range(len(remaining)):
        logs = utilities.log_values[remaining]
        idx = _categorical(_softmax(logs), rng)
        ordering.append(remaining.pop(idx))
    return Ranking.from_ordering(ordering)


def sample_winner(
    utilities: UtilityVector, subset: Sequence[int], rng: np.random.Generator
) -> int:
    """Draw the top-ranked arm of ``subset`` from the PL top-rank marginal."""
    members = _check_subset(subset, len(utilities))
    logs = utilities.log_values[members]
    return int(members[_categorical(_softmax(logs), rng)])
