"""Ground-truth simulators and regret accounting.

Two worlds drive the benchmark:

* A synthetic world where the hidden parameter and every per-round
  feature entry are drawn i.i.d. uniform from [0, 1].
* An algorithm-selection world built from a precomputed runtime table:
  problem instances arrive in shuffled order without replacement, the
  per-arm context is the Kronecker product of (preprocessed) instance
  features and solver features, and the true utility of solver i on the
  current instance is ``exp(-lam * runtime)`` so faster solvers are
  preferred.

Instance features pass through a fixed preprocessing pipeline before the
run: min-max scaling to [0, 1], a variance filter, and greedy pruning of
highly correlated columns.

Regret for a chosen subset is the relative utility gap between the
overall best arm and the best arm inside the subset; it vanishes
whenever the best arm was preselected.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .likelihood import Feedback, RankingFeedback, WinnerFeedback
from .plackett_luce import (
    ContextMatrix,
    UtilityVector,
    contextual_utilities,
    sample_partial_ranking,
    sample_winner,
)

__all__ = [
    "SyntheticScenario",
    "RuntimeTable",
    "RegretTrace",
    "synthetic_round",
    "true_utilities",
    "instant_regret",
    "preprocess_features",
    "algoselect_round",
    "sample_feedback",
    "SyntheticEnvironment",
    "AlgoSelectEnvironment",
    "load_runtime_table",
    "load_solver_features",
    "bundled_solver_features",
    "VARIANCE_THRESHOLD",
    "CORRELATION_THRESHOLD",
]

VARIANCE_THRESHOLD = 0.01
CORRELATION_THRESHOLD = 0.95


@dataclass(frozen=True)
class SyntheticScenario:
    """Parameters of a synthetic contextual world."""

    n: int
    d: int
    k: int
    T: int
    theta_star: np.ndarray
    seed: int

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float)
        if self.n < 2 or self.d < 1 or self.T < 0:
            raise ValueError("need n >= 2, d >= 1, T >= 0")
        if not 1 <= self.k < self.n:
            raise ValueError("k must satisfy 1 <= k < n")
        if theta.shape != (self.d,):
            raise ValueError("theta_star must have dimension d")
        if not (np.all(theta >= 0) and np.all(theta <= 1)):
            raise ValueError("theta_star entries must lie in [0, 1]")
        object.__setattr__(self, "theta_star", theta)

    @classmethod
    def draw(
        cls, n: int, d: int, k: int, T: int, seed: int, rng: np.random.Generator
    ) -> "SyntheticScenario":
        """Scenario with a fresh hidden parameter drawn uniformly from [0, 1]^d."""
        return cls(n=n, d=d, k=k, T=T, theta_star=rng.uniform(size=d), seed=seed)


def _round_rng(seed: int, t: int) -> np.random.Generator:
    # Per-(seed, t) child stream: reproducible bit-for-bit regardless of
    # how many draws other rounds or the policy consumed.
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(3, t)))


def synthetic_round(
    scenario: SyntheticScenario, t: int, rng: np.random.Generator | None = None
) -> ContextMatrix:
    """Fresh d x n context with i.i.d. uniform [0, 1] entries for round ``t``.

    Without an explicit ``rng`` the draw is derived from
    ``(scenario.seed, t)``, so the same round always yields the same
    matrix.
    """
    if t < 1 or (scenario.T > 0 and t > scenario.T):
        raise ValueError(f"round index {t} outside 1..{scenario.T}")
    gen = rng if rng is not None else _round_rng(scenario.seed, t)
    return ContextMatrix(gen.uniform(size=(scenario.d, scenario.n)), t=t)


def true_utilities(theta_star: np.ndarray, context: ContextMatrix) -> UtilityVector:
    """Ground-truth utilities of every arm under the hidden parameter."""
    return contextual_utilities(theta_star, context)


def instant_regret(true_utils: UtilityVector, subset) -> float:
    """Relative utility gap between the best arm and the best arm in ``subset``.

    Zero whenever the best arm (lowest index under exact ties) is
    preselected; always in [0, 1].
    """
    members = np.asarray(sorted(int(i) for i in subset), dtype=int)
    if members.size == 0:
        raise ValueError("subset must be nonempty")
    logs = true_utils.log_values
    best = float(np.max(logs))
    best_in_subset = float(np.max(logs[members]))
    return 1.0 - float(np.exp(best_in_subset - best))


@dataclass(frozen=True)
class RegretTrace:
    """Per-round instantaneous and cumulative regret of one repetition."""

    instantaneous: np.ndarray
    cumulative: np.ndarray

    def __post_init__(self):
        inst = np.asarray(self.instantaneous, dtype=float)
        cum = np.asarray(self.cumulative, dtype=float)
        if inst.shape != cum.shape or inst.ndim != 1:
            raise ValueError("instantaneous and cumulative must be equal-length vectors")
        if inst.size and (np.min(inst) < 0 or np.max(inst) > 1):
            raise ValueError("instantaneous regret must lie in [0, 1]")
        if not np.allclose(cum, np.cumsum(inst), atol=1e-9):
            raise ValueError("cumulative must be the running sum of instantaneous")
        object.__setattr__(self, "instantaneous", inst)
        object.__setattr__(self, "cumulative", cum)

    @classmethod
    def from_instantaneous(cls, instantaneous) -> "RegretTrace":
        inst = np.asarray(instantaneous, dtype=float)
        return cls(instantaneous=inst, cumulative=np.cumsum(inst))

    @property
    def T(self) -> int:
        return self.instantaneous.size


# ---------------------------------------------------------------------------
# Algorithm-selection world
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuntimeTable:
    """Measured solver runtimes plus instance and solver feature vectors.

    ``runtimes[s, i]`` is the nonnegative runtime (seconds) of solver i
    on instance s.  ``instance_features`` has one row per instance,
    ``solver_features`` one row per solver.
    """

    runtimes: np.ndarray
    instance_features: np.ndarray
    solver_features: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.runtimes, dtype=float)
        F = np.asarray(self.instance_features, dtype=float)
        A = np.asarray(self.solver_features, dtype=float)
        if R.ndim != 2 or F.ndim != 2 or A.ndim != 2:
            raise ValueError("runtimes and feature tables must be matrices")
        if F.shape[0] != R.shape[0]:
            raise ValueError("one instance-feature row per runtime row required")
        if A.shape[0] != R.shape[1]:
            raise ValueError("one solver-feature row per runtime column required")
        if not (np.all(np.isfinite(R)) and np.all(R >= 0)):
            raise ValueError("runtimes must be finite and nonnegative")
        if not (np.all(np.isfinite(F)) and np.all(np.isfinite(A))):
            raise ValueError("feature tables must be finite")
        object.__setattr__(self, "runtimes", R)
        object.__setattr__(self, "instance_features", F)
        object.__setattr__(self, "solver_features", A)

    @property
    def num_instances(self) -> int:
        return self.runtimes.shape[0]

    @property
    def num_solvers(self) -> int:
        return self.runtimes.shape[1]


def preprocess_features(raw: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Scale, variance-filter, and decorrelate a feature matrix.

    Steps, fitted on the full matrix:

    1. Min-max scale each column to [0, 1]; constant columns map to 0.
    2. Drop columns with variance below 0.01.
    3. While the most correlated remaining pair exceeds |r| = 0.95,
       remove the member with the larger mean absolute correlation to
       the other remaining columns (ties: the larger column index).

    Returns the reduced matrix and the surviving original column
    indices, in order.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[0] < 2:
        raise ValueError("need a matrix with at least 2 rows")
    lo, hi = raw.min(axis=0), raw.max(axis=0)
    span = hi - lo
    constant = span == 0
    span = np.where(constant, 1.0, span)
    scaled = (raw - lo) / span
    scaled[:, constant] = 0.0

    keep = [j for j in range(scaled.shape[1]) if np.var(scaled[:, j]) >= VARIANCE_THRESHOLD]

    while len(keep) >= 2:
        corr = np.abs(np.corrcoef(scaled[:, keep], rowvar=False))
        np.fill_diagonal(corr, 0.0)
        a, b = np.unravel_index(np.argmax(corr), corr.shape)
        if corr[a, b] <= CORRELATION_THRESHOLD:
            break
        # Victim: larger mean |correlation| to the other remaining columns;
        # on a tie, the larger original column index.
        m = len(keep)
        mean_a = corr[a].sum() / (m - 1)
        mean_b = corr[b].sum() / (m - 1)
        if mean_a > mean_b:
            victim = a
        elif mean_b > mean_a:
            victim = b
        else:
            victim = a if keep[a] > keep[b] else b
        keep.pop(victim)

    return scaled[:, keep], list(keep)


def algoselect_round(
    table: RuntimeTable, order: np.ndarray, t: int, lam: float
) -> tuple[ContextMatrix, UtilityVector]:
    """Context and true utilities for round ``t`` of an algorithm-selection run.

    The instance is ``order[t-1]``; arm i's feature vector is the
    Kronecker product of the instance features and solver i's features
    (instance entries vary slowest), and its true utility is
    ``exp(-lam * runtime)``.
    """
    order = np.asarray(order, dtype=int)
    if not lam >= 0:
        raise ValueError("lam must be nonnegative")
    if t < 1 or t > order.size:
        raise RuntimeError(
            f"environment exhausted: round {t} of {order.size} available instances"
        )
    row = int(order[t - 1])
    inst = table.instance_features[row]
    columns = [np.kron(inst, table.solver_features[i]) for i in range(table.num_solvers)]
    context = ContextMatrix(np.column_stack(columns), t=t)
    utils = UtilityVector.from_log(-lam * table.runtimes[row])
    return context, utils


def sample_feedback(
    true_utils: UtilityVector, subset, mode: str, rng: np.random.Generator
) -> Feedback:
    """Draw winner or partial-ranking feedback for the chosen subset."""
    if mode == "winner":
        return WinnerFeedback(sample_winner(true_utils, subset, rng))
    if mode == "ranking":
        return RankingFeedback(sample_partial_ranking(true_utils, subset, rng))
    raise ValueError(f"unknown feedback mode: {mode!r}")


# ---------------------------------------------------------------------------
# Environment wrappers used by the harness
# ---------------------------------------------------------------------------


class SyntheticEnvironment:
    """Synthetic world with a hidden parameter and a fresh context per round."""

    def __init__(self, scenario: SyntheticScenario):
        self.scenario = scenario

    @property
    def n(self) -> int:
        return self.scenario.n

    @property
    def d(self) -> int:
        return self.scenario.d

    @property
    def max_rounds(self) -> int | None:
        return None  # unbounded

    def round(self, t: int) -> tuple[ContextMatrix, UtilityVector]:
        context = synthetic_round(self.scenario, t)
        return context, true_utilities(self.scenario.theta_star, context)


class AlgoSelectEnvironment:
    """Algorithm-selection world over a runtime table.

    Instance features are preprocessed once up front; the instance order
    is a fresh shuffle (without replacement) from ``rng``.
    """

    def __init__(self, table: RuntimeTable, lam: float, rng: np.random.Generator):
        reduced, kept = preprocess_features(table.instance_features)
        self.table = replace(table, instance_features=reduced)
        self.kept_columns = kept
        self.lam = lam
        self.order = rng.permutation(table.num_instances)

    @property
    def n(self) -> int:
        return self.table.num_solvers

    @property
    def d(self) -> int:
        return self.table.instance_features.shape[1] * self.table.solver_features.shape[1]

    @property
    def max_rounds(self) -> int:
        return self.table.num_instances

    def round(self, t: int) -> tuple[ContextMatrix, UtilityVector]:
        return algoselect_round(self.table, self.order, t, self.lam)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def _read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        return header, [row for row in reader if row]


def load_runtime_table(
    runtimes_path: str | Path,
    instance_features_path: str | Path,
    solver_features_path: str | Path | None = None,
) -> RuntimeTable:
    """Load a runtime table from CSV files.

    ``runtimes_path``: header ``instance_id,solver_0,...,solver_{m-1}``,
    one row per instance.  ``instance_features_path``: header
    ``instance_id,f0,...,f{p-1}``, aligned to the runtime rows by
    instance_id.  ``solver_features_path``: columns ``alpha,rho,ps,wp``;
    defaults to the bundled solver parametrization fixture.
    """
    rt_header, rt_rows = _read_csv(runtimes_path)
    if not rt_header or rt_header[0] != "instance_id":
        raise ValueError(f"{runtimes_path}: first column must be instance_id")
    ids = [row[0] for row in rt_rows]
    runtimes = np.array([[float(v) for v in row[1:]] for row in rt_rows])

    if_header, if_rows = _read_csv(instance_features_path)
    if not if_header or if_header[0] != "instance_id":
        raise ValueError(f"{instance_features_path}: first column must be instance_id")
    feat_ids = [row[0] for row in if_rows]
    if feat_ids != ids:
        raise ValueError(
            "instance_id mismatch between runtime and instance-feature files"
        )
    feats = np.array([[float(v) for v in row[1:]] for row in if_rows])

    if solver_features_path is None:
        solver = bundled_solver_features()
    else:
        solver = load_solver_features(solver_features_path)
    return RuntimeTable(runtimes=runtimes, instance_features=feats, solver_features=solver)


def load_solver_features(path: str | Path) -> np.ndarray:
    """Load solver feature rows from a CSV with columns alpha,rho,ps,wp."""
    header, rows = _read_csv(path)
    if header != ["alpha", "rho", "ps", "wp"]:
        raise ValueError(f"{path}: expected header alpha,rho,ps,wp")
    return np.array([[float(v) for v in row] for row in rows])


def bundled_solver_features() -> np.ndarray:
    """The 20 bundled solver parametrizations (alpha, rho, ps, wp rows)."""
    ref = resources.files("preselect").joinpath("data/saps_parametrizations.csv")
    with resources.as_file(ref) as path:
        return load_solver_features(path)
