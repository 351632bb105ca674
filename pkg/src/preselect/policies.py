"""Subset-selection policies behind a uniform online interface.

Every policy follows the same per-round protocol driven by the harness:

    policy.observe(context)          # round context revealed
    decision = policy.choose(k)      # pick k distinct arms
    policy.update(feedback)          # winner or ranking of the chosen subset

Because the objective ``sum of per-arm scores`` is separable, the argmax
over fixed-size subsets reduces to taking the top-k arms by score; ties
break toward the lowest arm index so traces are reproducible.

Policies:

* ``CPPLPolicy`` scores arms by estimated utility plus confidence width.
* ``MaxThetaPolicy`` scores by estimated utility alone.
* ``EpsilonGreedyPolicy`` follows MaxTheta, but with probability epsilon
  picks a uniformly random k-subset.
* ``MMPolicy`` is context-free: it fits plain PL weights to the observed
  choice stages with a minorization-maximization iteration and greedily
  plays the top-k arms by weight.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace

import numpy as np

from .estimator import EstimatorState, confidence_widths, sgd_update
from .likelihood import Feedback, Observation, RankingFeedback, WinnerFeedback
from .plackett_luce import ContextMatrix

__all__ = [
    "PolicyDecision",
    "Policy",
    "CPPLPolicy",
    "MaxThetaPolicy",
    "EpsilonGreedyPolicy",
    "MMPolicy",
    "MMState",
    "cppl_choose",
    "max_theta_choose",
    "epsilon_greedy_choose",
    "mm_fit",
    "mm_choose",
]


@dataclass(frozen=True)
class PolicyDecision:
    """A chosen k-subset plus the per-arm scores that produced it."""

    subset: tuple[int, ...]
    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        subset = tuple(int(i) for i in self.subset)
        if len(set(subset)) != len(subset):
            raise ValueError("subset members must be distinct")
        if any(i < 0 or i >= scores.size for i in subset):
            raise ValueError("subset members must index into the score vector")
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "scores", scores)


def top_k_subset(scores: np.ndarray, k: int) -> tuple[int, ...]:
    """Indices of the k largest scores; ties break toward the lowest index."""
    scores = np.asarray(scores, dtype=float)
    n = scores.size
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n (got k={k}, n={n})")
    order = np.argsort(-scores, kind="stable")
    return tuple(sorted(int(i) for i in order[:k]))


def cppl_choose(
    state: EstimatorState, context: ContextMatrix, k: int, omega: float
) -> PolicyDecision:
    """Top-k arms by estimated utility plus confidence width.

    Before the first estimator update the covariance is undefined, so the
    widths are zero and the choice falls back to the utility estimates
    from the initial parameter.  ``omega == 0`` likewise short-circuits
    the width computation, making the result identical to
    ``max_theta_choose`` on any input.
    """
    if omega == 0.0 or state.t == 0:
        scores = np.exp(state.theta_bar @ context.features)
    else:
        cw = confidence_widths(state, context, omega)
        scores = cw.utilities + cw.widths
    return PolicyDecision(subset=top_k_subset(scores, k), scores=scores)


def max_theta_choose(
    state: EstimatorState, context: ContextMatrix, k: int
) -> PolicyDecision:
    """Top-k arms by estimated utility alone (zero exploration bonus)."""
    return cppl_choose(state, context, k, omega=0.0)


def epsilon_greedy_choose(
    state: EstimatorState,
    context: ContextMatrix,
    k: int,
    epsilon: float,
    rng: np.random.Generator,
) -> PolicyDecision:
    """Greedy top-k with probability 1 - epsilon, else a uniform random k-subset."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    greedy = max_theta_choose(state, context, k)
    if epsilon > 0.0 and rng.random() < epsilon:
        subset = tuple(sorted(int(i) for i in rng.choice(context.n, size=k, replace=False)))
        return PolicyDecision(subset=subset, scores=greedy.scores)
    return greedy


# ---------------------------------------------------------------------------
# Context-free MM baseline
# ---------------------------------------------------------------------------

_WEIGHT_FLOOR = 1e-12  # keeps never-winning arms strictly positive


@dataclass(frozen=True)
class MMState:
    """Context-free PL weight estimates plus the observation history.

    ``weights`` are normalized to sum 1.  ``history`` holds
    ``(subset, feedback)`` pairs.  ``unseen`` flags arms that never
    appeared in any choice stage; their weights are held at the uniform
    prior 1/n (up to renormalization).
    """

    weights: np.ndarray
    history: tuple[tuple[tuple[int, ...], Feedback], ...] = ()
    unseen: frozenset[int] = frozenset()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a nonempty vector")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise ValueError("weights must be strictly positive and finite")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "MMState":
        return cls(weights=np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.weights.size

    def record(self, subset: tuple[int, ...], feedback: Feedback) -> "MMState":
        return replace(self, history=self.history + ((tuple(subset), feedback),))


def _decompose_stages(
    history: tuple[tuple[tuple[int, ...], Feedback], ...],
) -> list[tuple[tuple[int, ...], int]]:
    """Sequential-choice stages ``(remaining arms, stage winner)`` of a history.

    A winner observation is a single stage over the whole subset; a
    ranking of size m contributes m - 1 stages over the shrinking
    remainder.
    """
    stages: list[tuple[tuple[int, ...], int]] = []
    for subset, feedback in history:
        if isinstance(feedback, WinnerFeedback):
            stages.append((tuple(subset), feedback.arm))
        elif isinstance(feedback, RankingFeedback):
            ordering = feedback.ranking.ordering
            for i in range(len(ordering) - 1):
                stages.append((ordering[i:], ordering[i]))
        else:
            raise ValueError(f"unknown feedback type: {type(feedback)!r}")
    return stages


def _group_stages(
    stages: list[tuple[tuple[int, ...], int]],
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Group stages by remaining-set size into (members matrix, winners) arrays."""
    by_size: dict[int, tuple[list[tuple[int, ...]], list[int]]] = {}
    for remaining, winner in stages:
        rows, winners = by_size.setdefault(len(remaining), ([], []))
        rows.append(remaining)
        winners.append(winner)
    return [
        (np.asarray(rows, dtype=np.intp), np.asarray(winners, dtype=np.intp))
        for rows, winners in by_size.values()
    ]


def _mm_iterate(
    weights: np.ndarray,
    groups: list[tuple[np.ndarray, np.ndarray]],
    n: int,
    max_iters: int,
    tol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Minorization-maximization fixed-point iteration on grouped stages.

    Each sweep sets ``w_i`` to the number of stages won by arm i divided
    by the sum over stages containing i of the inverse stage total, then
    renormalizes.  Returns the fitted weights and the per-arm appearance
    counts (zero marks unseen arms, which stay at the uniform prior).
    """
    wins = np.zeros(n)
    appearances = np.zeros(n)
    for rows, winners in groups:
        wins += np.bincount(winners, minlength=n)
        appearances += np.bincount(rows.ravel(), minlength=n)
    seen = appearances > 0

    w = weights.copy()
    for _ in range(max_iters):
        denom = np.zeros(n)
        for rows, winners in groups:
            inv_totals = 1.0 / w[rows].sum(axis=1)
            denom += np.bincount(
                rows.ravel(),
                weights=np.repeat(inv_totals, rows.shape[1]),
                minlength=n,
            )
        w_new = np.full(n, 1.0 / n)
        w_new[seen] = wins[seen] / denom[seen]
        w_new = np.maximum(w_new, _WEIGHT_FLOOR)
        w_new /= w_new.sum()
        delta = np.max(np.abs(w_new - w))
        w = w_new
        if delta < tol:
            break
    return w, appearances


def mm_fit(state: MMState, max_iters: int = 100, tol: float = 1e-8) -> MMState:
    """Fit context-free PL weights to the recorded history."""
    if not state.history:
        raise ValueError("cannot fit with an empty history")
    groups = _group_stages(_decompose_stages(state.history))
    weights, appearances = _mm_iterate(state.weights, groups, state.n, max_iters, tol)
    return replace(
        state,
        weights=weights,
        unseen=frozenset(int(i) for i in np.flatnonzero(appearances == 0)),
    )


def mm_choose(state: MMState, k: int) -> PolicyDecision:
    """Greedy top-k arms by fitted weight."""
    return PolicyDecision(
        subset=top_k_subset(state.weights, k), scores=state.weights.copy()
    )


# ---------------------------------------------------------------------------
# Uniform policy interface
# ---------------------------------------------------------------------------


class Policy(ABC):
    """Per-round protocol: observe(context) -> choose(k) -> update(feedback)."""

    def __init__(self):
        self._context: ContextMatrix | None = None
        self._subset: tuple[int, ...] | None = None

    def observe(self, context: ContextMatrix) -> None:
        self._context = context
        self._subset = None

    def choose(self, k: int) -> PolicyDecision:
        if self._context is None:
            raise RuntimeError("choose() called before observe()")
        decision = self._choose(self._context, k)
        self._subset = decision.subset
        return decision

    def update(self, feedback: Feedback) -> None:
        if self._context is None or self._subset is None:
            raise RuntimeError("update() called before observe()/choose()")
        obs = Observation(feedback=feedback, subset=self._subset, context=self._context)
        self._update(obs)

    @abstractmethod
    def _choose(self, context: ContextMatrix, k: int) -> PolicyDecision: ...

    @abstractmethod
    def _update(self, obs: Observation) -> None: ...


class CPPLPolicy(Policy):
    """Upper-confidence subset selection with averaged-SGD estimation."""

    def __init__(
        self,
        d: int,
        rng: np.random.Generator,
        gamma1: float = 2.0,
        alpha: float = 0.6,
        omega: float = 1.0,
        ridge: float = 1e-6,
    ):
        super().__init__()
        self.omega = omega
        self.state = EstimatorState.init(d, rng, gamma1=gamma1, alpha=alpha, ridge=ridge)

    def _choose(self, context: ContextMatrix, k: int) -> PolicyDecision:
        return cppl_choose(self.state, context, k, self.omega)

    def _update(self, obs: Observation) -> None:
        self.state = sgd_update(self.state, obs)


class MaxThetaPolicy(CPPLPolicy):
    """Greedy subset selection by estimated utility (no exploration bonus)."""

    def __init__(self, d, rng, gamma1=2.0, alpha=0.6, ridge=1e-6):
        super().__init__(d, rng, gamma1=gamma1, alpha=alpha, omega=0.0, ridge=ridge)


class EpsilonGreedyPolicy(CPPLPolicy):
    """MaxTheta with an epsilon-probability uniformly random subset."""

    def __init__(self, d, rng, epsilon=0.1, gamma1=2.0, alpha=0.6, ridge=1e-6):
        super().__init__(d, rng, gamma1=gamma1, alpha=alpha, omega=0.0, ridge=ridge)
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        self.epsilon = epsilon
        self.rng = rng

    def _choose(self, context: ContextMatrix, k: int) -> PolicyDecision:
        return epsilon_greedy_choose(self.state, context, k, self.epsilon, self.rng)


class _StageBuffer:
    """Append-only array storage for stages of one remaining-set size."""

    def __init__(self, size: int, capacity: int = 256):
        self.rows = np.empty((capacity, size), dtype=np.intp)
        self.winners = np.empty(capacity, dtype=np.intp)
        self.count = 0

    def append(self, remaining: tuple[int, ...], winner: int) -> None:
        if self.count == self.winners.size:
            self.rows = np.concatenate([self.rows, np.empty_like(self.rows)])
            self.winners = np.concatenate([self.winners, np.empty_like(self.winners)])
        self.rows[self.count] = remaining
        self.winners[self.count] = winner
        self.count += 1

    def view(self) -> tuple[np.ndarray, np.ndarray]:
        return self.rows[: self.count], self.winners[: self.count]


class MMPolicy(Policy):
    """Context-free baseline: refit MM weights each round, play top-k greedily.

    The refit warm-starts from the previous weights; stage arrays grow
    incrementally so the per-round cost stays linear in the history
    instead of re-decomposing it.
    """

    def __init__(self, n: int, max_iters: int = 100, tol: float = 1e-8):
        super().__init__()
        self.state = MMState.uniform(n)
        self.max_iters = max_iters
        self.tol = tol
        self._buffers: dict[int, _StageBuffer] = {}

    def _choose(self, context: ContextMatrix, k: int) -> PolicyDecision:
        return mm_choose(self.state, k)

    def _update(self, obs: Observation) -> None:
        state = self.state.record(obs.subset, obs.feedback)
        for remaining, winner in _decompose_stages(((obs.subset, obs.feedback),)):
            size = len(remaining)
            if size not in self._buffers:
                self._buffers[size] = _StageBuffer(size)
            self._buffers[size].append(remaining, winner)
        groups = [buf.view() for buf in self._buffers.values()]
        weights, appearances = _mm_iterate(
            state.weights, groups, state.n, self.max_iters, self.tol
        )
        self.state = replace(
            state,
            weights=weights,
            unseen=frozenset(int(i) for i in np.flatnonzero(appearances == 0)),
        )
