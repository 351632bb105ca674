"""Quick self-verification of the numeric core on small instances.

Each check compares a library computation against an independent
recomputation (enumeration, finite differences, eigen-decomposition, or
Monte Carlo) and returns pass/fail.  The CLI ``verify`` subcommand runs
them all; the pytest suite covers the same ground at tighter tolerances
and larger sizes.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .estimator import (
    EstimatorState,
    confidence_widths,
    covariance,
    f_tail_bound,
    f_tail_threshold,
)
from .likelihood import Observation, RankingFeedback, WinnerFeedback, grad_loglik, loglik
from .plackett_luce import (
    ContextMatrix,
    Ranking,
    UtilityVector,
    contextual_utilities,
    prob_full_ranking,
    prob_partial_ranking,
    prob_top_rank,
    sample_winner,
)
from .policies import top_k_subset

__all__ = ["run_all_checks"]


def _check_ranking_probabilities(rng):
    utils = UtilityVector.from_values(rng.uniform(0.2, 2.0, size=4))
    total = sum(
        prob_full_ranking(utils, Ranking.from_ordering(perm))
        for perm in itertools.permutations(range(4))
    )
    return abs(total - 1.0) < 1e-12, f"sum over 4! rankings = {total:.15f}"


def _check_partial_vs_extensions(rng):
    utils = UtilityVector.from_values(rng.uniform(0.2, 2.0, size=4))
    subset = (0, 1, 3)
    ranking = Ranking.from_ordering((3, 0, 1))
    direct = prob_partial_ranking(utils, subset, ranking)
    target = ranking.ordering
    brute = 0.0
    for perm in itertools.permutations(range(4)):
        restricted = tuple(a for a in perm if a in subset)
        if restricted == target:
            brute += prob_full_ranking(utils, Ranking.from_ordering(perm))
    return abs(direct - brute) < 1e-12, f"closed form {direct:.12f} vs extensions {brute:.12f}"


def _check_gradients(rng):
    d, k = 4, 3
    context = ContextMatrix(rng.uniform(size=(d, 6)))
    theta = rng.uniform(size=d)
    worst = 0.0
    for feedback in (
        WinnerFeedback(2),
        RankingFeedback(Ranking.from_ordering((4, 0, 2))),
    ):
        subset = (0, 2, 4)
        obs = Observation(feedback=feedback, subset=subset, context=context)
        grad = grad_loglik(theta, obs)
        fd = np.empty(d)
        h = 1e-5
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            fd[j] = (loglik(theta + e, obs) - loglik(theta - e, obs)) / (2 * h)
        worst = max(worst, np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-8))
    return worst < 1e-5, f"max relative gradient error {worst:.2e}"


def _check_width_identity(rng):
    d = 4
    A = rng.normal(size=(d, d))
    B = rng.normal(size=(d, d))
    state = EstimatorState(
        theta_hat=rng.uniform(size=d),
        theta_bar=rng.uniform(size=d),
        t=7,
        S_accum=-(A @ A.T + np.eye(d)),
        V_accum=B @ B.T,
        gamma1=2.0,
        alpha=0.6,
    )
    context = ContextMatrix(rng.uniform(size=(d, 5)))
    cw = confidence_widths(state, context, omega=1.0)
    sigma = covariance(state)
    evals, evecs = np.linalg.eigh(sigma)
    root = evecs @ np.diag(np.sqrt(np.maximum(evals, 0.0))) @ evecs.T
    log_t = math.log(state.t)
    bracket = 2 * log_t + d + 2 * math.sqrt(d * log_t)
    worst = 0.0
    for i in range(context.n):
        x = context.column(i)
        M = math.exp(2 * x @ state.theta_bar) * np.outer(x, x)
        op_norm = np.linalg.eigvalsh(root @ M @ root).max()
        width = math.sqrt(bracket * op_norm)
        worst = max(worst, abs(width - cw.widths[i]) / max(width, 1e-12))
    return worst < 1e-8, f"max relative width error {worst:.2e}"


def _check_top_k(rng):
    scores = rng.normal(size=8)
    best, best_sum = None, -np.inf
    for subset in itertools.combinations(range(8), 3):
        s = scores[list(subset)].sum()
        if s > best_sum + 1e-15:
            best, best_sum = subset, s
    return top_k_subset(scores, 3) == best, f"top-3 {top_k_subset(scores, 3)} vs {best}"


def _check_winner_sampling(rng):
    utils = contextual_utilities(rng.uniform(size=3), ContextMatrix(rng.uniform(size=(3, 5))))
    subset = (0, 1, 2, 4)
    draws = 20000
    counts = np.zeros(5)
    for _ in range(draws):
        counts[sample_winner(utils, subset, rng)] += 1
    worst = max(
        abs(counts[i] / draws - prob_top_rank(utils, subset, i)) for i in subset
    )
    return worst < 0.02, f"max frequency deviation {worst:.4f} over {draws} draws"


def _check_tail_arithmetic(rng):
    ok = (
        abs(f_tail_threshold(4, 1.0) - 10.0 / 3.0) < 1e-12
        and abs(f_tail_threshold(1, 0.0) - 4.0 / 3.0) < 1e-12
        and abs(f_tail_bound(256, 0.0) - (1.0 + math.exp(-3.0))) < 1e-12
    )
    return ok, "closed-form threshold/bound spot values"


def run_all_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Run every self-check; returns (name, passed, detail) triples."""
    rng = np.random.default_rng(seed)
    checks = [
        ("full-ranking probabilities sum to 1", _check_ranking_probabilities),
        ("partial ranking equals linear-extension sum", _check_partial_vs_extensions),
        ("analytic gradient matches finite differences", _check_gradients),
        ("closed-form width equals eigen operator norm", _check_width_identity),
        ("top-k equals exhaustive subset argmax", _check_top_k),
        ("winner sampling matches top-rank probabilities", _check_winner_sampling),
        ("tail-bound arithmetic", _check_tail_arithmetic),
    ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
