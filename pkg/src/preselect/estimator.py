"""Averaged-SGD estimation of the utility parameter and UCB-style widths.

The parameter estimate is the running average ``theta_bar`` of
stochastic gradient-ascent iterates ``theta_hat`` on the observation
log-likelihood, with step size ``gamma1 * t**(-alpha)``.  Alongside the
iterates we accumulate plug-in curvature and score statistics

    S_accum = sum_i  hess loglik(theta_bar_i | obs_i)
    V_accum = sum_i  grad loglik(theta_bar_i | obs_i) grad(...)^T

from which a sandwich covariance estimate for ``theta_bar`` is formed.
Per-arm confidence widths follow from the covariance through a rank-one
operator-norm identity; together with the estimated utilities they give
upper confidence bounds used for subset selection.

The module also provides closed-form tail-bound helpers for the
F-distribution and the chi-square distribution that back the width
construction; they are plain formulas, verified elsewhere by Monte
Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .likelihood import Observation, grad_loglik, hessian_loglik
from .plackett_luce import ContextMatrix

__all__ = [
    "EstimatorState",
    "ConfidenceWidths",
    "sgd_update",
    "covariance",
    "confidence_widths",
    "f_tail_threshold",
    "f_tail_bound",
    "chi2_upper_tail_bound",
    "chi2_tail_bounds",
]


@dataclass(frozen=True)
class EstimatorState:
    """State of the averaged-SGD estimator after ``t`` updates.

    ``theta_hat`` is the current SGD iterate, ``theta_bar`` the running
    average of iterates 1..t.  ``S_accum`` and ``V_accum`` are the raw
    (unnormalized) curvature and score accumulators.  ``ridge`` is the
    shift applied to the normalized curvature matrix before inversion
    when it is near-singular (unavoidable in early rounds).
    """

    theta_hat: np.ndarray
    theta_bar: np.ndarray
    t: int
    S_accum: np.ndarray
    V_accum: np.ndarray
    gamma1: float
    alpha: float
    ridge: float = 1e-6

    def __post_init__(self):
        theta_hat = np.asarray(self.theta_hat, dtype=float)
        theta_bar = np.asarray(self.theta_bar, dtype=float)
        d = theta_hat.size
        if theta_bar.size != d:
            raise ValueError("theta_hat and theta_bar must have equal dimension")
        S = np.asarray(self.S_accum, dtype=float)
        V = np.asarray(self.V_accum, dtype=float)
        if S.shape != (d, d) or V.shape != (d, d):
            raise ValueError("accumulators must be d x d matrices")
        if self.t < 0:
            raise ValueError("update counter must be nonnegative")
        if not self.gamma1 > 0:
            raise ValueError("gamma1 must be positive")
        if not 0.5 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (1/2, 1)")
        if not self.ridge > 0:
            raise ValueError("ridge must be positive")
        object.__setattr__(self, "theta_hat", theta_hat)
        object.__setattr__(self, "theta_bar", theta_bar)
        object.__setattr__(self, "S_accum", S)
        object.__setattr__(self, "V_accum", V)

    @classmethod
    def init(
        cls,
        d: int,
        rng: np.random.Generator,
        gamma1: float = 2.0,
        alpha: float = 0.6,
        ridge: float = 1e-6,
        theta0: np.ndarray | None = None,
    ) -> "EstimatorState":
        """Fresh state with ``theta_hat`` drawn uniformly from [0, 1]^d.

        ``theta0`` overrides the random initialization (useful in tests).
        """
        theta = np.asarray(theta0, dtype=float) if theta0 is not None else rng.uniform(size=d)
        if theta.size != d:
            raise ValueError("theta0 dimension mismatch")
        return cls(
            theta_hat=theta.copy(),
            theta_bar=theta.copy(),
            t=0,
            S_accum=np.zeros((d, d)),
            V_accum=np.zeros((d, d)),
            gamma1=gamma1,
            alpha=alpha,
            ridge=ridge,
        )

    @property
    def d(self) -> int:
        return self.theta_hat.size


@dataclass(frozen=True)
class ConfidenceWidths:
    """Per-arm estimated utilities and exploration bonuses for one round."""

    widths: np.ndarray
    utilities: np.ndarray

    def __post_init__(self):
        widths = np.asarray(self.widths, dtype=float)
        utils = np.asarray(self.utilities, dtype=float)
        if widths.shape != utils.shape or widths.ndim != 1:
            raise ValueError("widths and utilities must be vectors of equal length")
        if not (np.all(np.isfinite(widths)) and np.all(widths >= 0)):
            raise ValueError("widths must be finite and nonnegative")
        if not (np.all(np.isfinite(utils)) and np.all(utils > 0)):
            raise ValueError("utilities must be finite and positive")
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "utilities", utils)


def sgd_update(state: EstimatorState, obs: Observation) -> EstimatorState:
    """One gradient-ascent step plus accumulator maintenance.

    The step uses the gradient at the current iterate; the accumulators
    are evaluated at the new running average, matching their plug-in
    definitions.
    """
    if obs.context.d != state.d:
        raise ValueError(
            f"observation dimension {obs.context.d} does not match state dimension {state.d}"
        )
    t_new = state.t + 1
    step = state.gamma1 * t_new ** (-state.alpha)
    theta_hat = state.theta_hat + step * grad_loglik(state.theta_hat, obs)
    theta_bar = ((t_new - 1) * state.theta_bar + theta_hat) / t_new
    g = grad_loglik(theta_bar, obs)
    return replace(
        state,
        theta_hat=theta_hat,
        theta_bar=theta_bar,
        t=t_new,
        S_accum=state.S_accum + hessian_loglik(theta_bar, obs),
        V_accum=state.V_accum + np.outer(g, g),
    )


def covariance(state: EstimatorState) -> np.ndarray:
    """Sandwich covariance estimate ``t^-1 S^-1 V S^-1`` for ``theta_bar``.

    ``S = S_accum / t`` is negative semi-definite; when its smallest
    eigenvalue magnitude falls below ``state.ridge`` it is shifted by
    ``-ridge * I`` before inversion.  The result is symmetrized and
    positive semi-definite regardless of the sign of S because S enters
    twice.
    """
    if state.t < 1:
        raise RuntimeError("covariance is undefined before the first update")
    t = state.t
    S = state.S_accum / t
    V = state.V_accum / t
    eigenvalues = np.linalg.eigvalsh(S)
    if np.min(np.abs(eigenvalues)) < state.ridge:
        S = S - state.ridge * np.eye(state.d)
    S_inv = np.linalg.inv(S)
    sigma = S_inv @ V @ S_inv / t
    return (sigma + sigma.T) / 2.0


def confidence_widths(
    state: EstimatorState, context: ContextMatrix, omega: float
) -> ConfidenceWidths:
    """Estimated utilities and UCB bonuses for every arm of ``context``.

    For arm i with feature column x the bonus is

        omega * sqrt( (2 log t + d + 2 sqrt(d log t)) * I_i ),
        I_i = exp(2 x . theta_bar) * x^T Sigma x,

    where ``I_i`` is the operator norm of the rank-one matrix
    ``Sigma^(1/2) [exp(2 x.theta_bar) x x^T] Sigma^(1/2)`` in closed
    form; the square root of Sigma is never materialized.
    """
    if state.t < 1:
        raise RuntimeError("confidence widths are undefined before the first update")
    if context.d != state.d:
        raise ValueError(
            f"context dimension {context.d} does not match state dimension {state.d}"
        )
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    logits = state.theta_bar @ context.features
    with np.errstate(over="ignore"):  # overflow becomes an explicit error below
        utilities = np.exp(logits)
        if not np.all(np.isfinite(utilities)):
            raise OverflowError("estimated utilities overflowed; rescale the features")
        sigma = covariance(state)
        quad = np.einsum("ij,jk,ki->i", context.features.T, sigma, context.features)
        quad = np.maximum(quad, 0.0)  # guard tiny negative round-off
        info = np.exp(2.0 * logits) * quad
        log_t = math.log(state.t)
        bracket = 2.0 * log_t + state.d + 2.0 * math.sqrt(state.d * log_t)
        widths = omega * np.sqrt(bracket * info)
    if not np.all(np.isfinite(widths)):
        raise OverflowError("confidence widths overflowed; rescale the features")
    return ConfidenceWidths(widths=widths, utilities=utilities)


def f_tail_threshold(d1: int, x: float) -> float:
    """Threshold ``s`` such that an F(d1, d2) variable exceeds s with small probability."""
    if d1 < 1:
        raise ValueError("d1 must be a positive integer")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return 4.0 * (d1 + 2.0 * math.sqrt(d1 * x) + 2.0 * x) / (3.0 * d1)


def f_tail_bound(d2: int, x: float) -> float:
    """Upper bound on ``P(F >= f_tail_threshold(d1, x))``: ``exp(-x) + exp(-3 d2 / 256)``."""
    if d2 < 1:
        raise ValueError("d2 must be a positive integer")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return math.exp(-x) + math.exp(-3.0 * d2 / 256.0)


def chi2_upper_tail_bound(d: int, x: float) -> float:
    """Bound ``exp(-x)`` on ``P(Y - d >= 2 sqrt(d x) + 2 x)`` for ``Y ~ chi2(d)``."""
    if d < 1:
        raise ValueError("d must be a positive integer")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return math.exp(-x)


def chi2_tail_bounds(d: int, x: float) -> tuple[float, float]:
    """Chi-square tail bounds for ``Y ~ chi2(d)``.

    Returns ``(exp(-x), exp(-3 d x^2 / 16))`` bounding
    ``P(Y - d >= 2 sqrt(d x) + 2 x)`` and ``P(|Y - d| >= d x)``
    respectively.  The second form is only valid for ``x < 1/2``; use
    ``chi2_upper_tail_bound`` alone for larger ``x``.
    """
    if d < 1:
        raise ValueError("d must be a positive integer")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x >= 0.5:
        raise ValueError("the concentration bound requires x in [0, 1/2)")
    return chi2_upper_tail_bound(d, x), math.exp(-3.0 * d * x * x / 16.0)
