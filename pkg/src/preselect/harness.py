"""Experiment orchestration: configuration, the online loop, aggregation, output.

A repetition plays the standard online protocol for T rounds: reveal the
context, let the policy preselect k arms, sample feedback for the chosen
subset from the ground-truth model, update the policy, and record the
instantaneous regret.  Repetitions are embarrassingly parallel in
principle (each owns its environment, policy, and rng streams); they are
executed sequentially here and aggregated into per-round mean cumulative
regret with standard errors.

Random streams: repetition ``r`` is seeded with ``base_seed + r`` and
splits into independent policy, feedback, and environment-setup streams,
while per-round context draws derive from ``(seed, t)`` directly.  The
environment realization therefore does not depend on which policy runs
on it, so baselines can be compared on identical draws.

Output formats (see ``emit_results``):

* ``csv``: columns ``round,mean_cum_regret,stderr`` plus a JSON sidecar
  ``<out>.meta.json`` with the config echo, per-repetition final
  regrets, and wall time.
* ``json``: one document with keys ``config``, ``rounds``,
  ``mean_cum_regret``, ``stderr``, ``final_regrets``, ``wall_time_s``.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .environments import (
    AlgoSelectEnvironment,
    RegretTrace,
    SyntheticEnvironment,
    SyntheticScenario,
    instant_regret,
    load_runtime_table,
    sample_feedback,
)
from .policies import CPPLPolicy, EpsilonGreedyPolicy, MaxThetaPolicy, MMPolicy, Policy

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "AggregatedResult",
    "run_repetition",
    "run_experiment",
    "emit_results",
]

POLICIES = ("cppl", "maxtheta", "egreedy", "mm")
FEEDBACK_MODES = ("winner", "ranking")
ENVIRONMENTS = ("synthetic", "algoselect")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment."""

    environment: str = "synthetic"
    policy: str = "cppl"
    feedback: str = "winner"
    n: int = 20
    d: int = 5
    k: int = 5
    T: int = 2000
    reps: int = 20
    seed: int = 0
    gamma1: float = 2.0
    alpha: float = 0.6
    omega: float = 1.0
    epsilon: float = 0.1
    lam: float = 10.0
    ridge: float = 1e-6
    runtimes: str | None = None
    instance_features: str | None = None
    solver_features: str | None = None
    out: str = "results.csv"
    format: str = "csv"

    def __post_init__(self):
        if self.environment not in ENVIRONMENTS:
            raise ConfigError(f"unknown environment {self.environment!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.feedback not in FEEDBACK_MODES:
            raise ConfigError(f"unknown feedback mode {self.feedback!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.format!r}")
        if self.T < 0:
            raise ConfigError("T must be nonnegative")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if not self.gamma1 > 0:
            raise ConfigError("gamma1 must be positive")
        if not 0.5 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (1/2, 1)")
        if self.omega < 0:
            raise ConfigError("omega must be nonnegative")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.lam < 0:
            raise ConfigError("lambda must be nonnegative")
        if self.environment == "synthetic":
            if self.d < 1:
                raise ConfigError("d must be >= 1")
            if not 1 <= self.k < self.n:
                raise ConfigError("k must satisfy 1 <= k < n")
        else:
            if self.runtimes is None or self.instance_features is None:
                raise ConfigError(
                    "algoselect requires --runtimes and --instance-features"
                )


@dataclass
class AggregatedResult:
    """Per-round aggregates over repetitions plus reproduction metadata."""

    mean_cum_regret: np.ndarray
    stderr: np.ndarray
    final_regrets: np.ndarray
    config: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def __post_init__(self):
        mean = np.asarray(self.mean_cum_regret, dtype=float)
        se = np.asarray(self.stderr, dtype=float)
        if mean.shape != se.shape or mean.ndim != 1:
            raise ValueError("mean and stderr must be equal-length vectors")
        if se.size and np.min(se) < 0:
            raise ValueError("standard errors must be nonnegative")
        object.__setattr__(self, "mean_cum_regret", mean)
        object.__setattr__(self, "stderr", se)
        object.__setattr__(self, "final_regrets", np.asarray(self.final_regrets, dtype=float))

    @property
    def T(self) -> int:
        return self.mean_cum_regret.size


def _streams(base_seed: int, rep_index: int):
    """Independent policy / feedback / setup generators for one repetition."""
    rep_seed = base_seed + rep_index
    policy_rng = np.random.default_rng(np.random.SeedSequence(rep_seed, spawn_key=(0,)))
    feedback_rng = np.random.default_rng(np.random.SeedSequence(rep_seed, spawn_key=(1,)))
    setup_rng = np.random.default_rng(np.random.SeedSequence(rep_seed, spawn_key=(2,)))
    return rep_seed, policy_rng, feedback_rng, setup_rng


def _build_environment(config: ExperimentConfig, rep_seed, setup_rng, table):
    if config.environment == "synthetic":
        scenario = SyntheticScenario.draw(
            config.n, config.d, config.k, config.T, seed=rep_seed, rng=setup_rng
        )
        return SyntheticEnvironment(scenario)
    env = AlgoSelectEnvironment(table, lam=config.lam, rng=setup_rng)
    if config.T > env.max_rounds:
        raise ConfigError(
            f"T={config.T} exceeds the {env.max_rounds} available instances"
        )
    if not 1 <= config.k < env.n:
        raise ConfigError(f"k must satisfy 1 <= k < {env.n} solvers")
    return env


def _build_policy(config: ExperimentConfig, env, policy_rng) -> Policy:
    common = dict(gamma1=config.gamma1, alpha=config.alpha, ridge=config.ridge)
    if config.policy == "cppl":
        return CPPLPolicy(env.d, policy_rng, omega=config.omega, **common)
    if config.policy == "maxtheta":
        return MaxThetaPolicy(env.d, policy_rng, **common)
    if config.policy == "egreedy":
        return EpsilonGreedyPolicy(env.d, policy_rng, epsilon=config.epsilon, **common)
    return MMPolicy(env.n)


def run_repetition(
    config: ExperimentConfig,
    rep_index: int,
    table=None,
    policy: Policy | None = None,
) -> RegretTrace:
    """Play one full repetition and return its regret trace.

    ``table`` may carry a preloaded runtime table to avoid re-reading
    files; ``policy`` overrides the configured policy (used for oracle
    policies in tests).
    """
    if config.environment == "algoselect" and table is None:
        table = load_runtime_table(
            config.runtimes, config.instance_features, config.solver_features
        )
    rep_seed, policy_rng, feedback_rng, setup_rng = _streams(config.seed, rep_index)
    env = _build_environment(config, rep_seed, setup_rng, table)
    if policy is None:
        policy = _build_policy(config, env, policy_rng)

    regrets = np.empty(config.T)
    for t in range(1, config.T + 1):
        context, utils = env.round(t)
        policy.observe(context)
        decision = policy.choose(config.k)
        feedback = sample_feedback(utils, decision.subset, config.feedback, feedback_rng)
        policy.update(feedback)
        regrets[t - 1] = instant_regret(utils, decision.subset)
    return RegretTrace.from_instantaneous(regrets)


def run_experiment(config: ExperimentConfig) -> AggregatedResult:
    """Run all repetitions and aggregate mean cumulative regret per round."""
    start = time.perf_counter()
    table = None
    if config.environment == "algoselect":
        table = load_runtime_table(
            config.runtimes, config.instance_features, config.solver_features
        )
    cumulative = np.empty((config.reps, config.T))
    for rep in range(config.reps):
        try:
            cumulative[rep] = run_repetition(config, rep, table=table).cumulative
        except ConfigError:
            raise
        except Exception as exc:
            raise RuntimeError(f"repetition {rep} failed: {exc}") from exc
    mean = cumulative.mean(axis=0)
    if config.reps > 1:
        stderr = cumulative.std(axis=0, ddof=1) / np.sqrt(config.reps)
    else:
        stderr = np.zeros(config.T)
    final = cumulative[:, -1] if config.T > 0 else np.zeros(config.reps)
    return AggregatedResult(
        mean_cum_regret=mean,
        stderr=stderr,
        final_regrets=final,
        config=asdict(config),
        wall_time_s=time.perf_counter() - start,
    )


def emit_results(result: AggregatedResult, path: str | Path, format: str = "csv") -> None:
    """Write aggregated results to ``path`` in the given format.

    Floats are written with ``repr`` so a round-trip through the file
    reproduces them exactly; everything except ``wall_time_s`` is
    byte-identical across runs with the same config and seed.
    """
    path = Path(path)
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["round", "mean_cum_regret", "stderr"])
            for t in range(result.T):
                writer.writerow(
                    [t + 1, repr(float(result.mean_cum_regret[t])), repr(float(result.stderr[t]))]
                )
        sidecar = {
            "config": result.config,
            "final_regrets": [float(v) for v in result.final_regrets],
            "wall_time_s": result.wall_time_s,
        }
        with open(path.with_name(path.name + ".meta.json"), "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif format == "json":
        doc = {
            "config": result.config,
            "rounds": list(range(1, result.T + 1)),
            "mean_cum_regret": [float(v) for v in result.mean_cum_regret],
            "stderr": [float(v) for v in result.stderr],
            "final_regrets": [float(v) for v in result.final_regrets],
            "wall_time_s": result.wall_time_s,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ValueError(f"unknown output format: {format!r}")
