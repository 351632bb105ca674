"""End-to-end algorithm selection from a runtime table.

Builds a small synthetic table of solver runtimes (in production this
comes from measured data), writes it in the CSV wire format, loads it
back, and runs the online selection experiment: each round one problem
instance arrives, the policy preselects k solver parametrizations, and
feedback reveals which of them finished first under the utility model
exp(-lambda * runtime).

Solver feature vectors default to the 20 bundled parametrizations
(alpha, rho, ps, wp per solver).
"""

import tempfile
from pathlib import Path

import numpy as np

from preselect import (
    ExperimentConfig,
    bundled_solver_features,
    load_runtime_table,
    preprocess_features,
    run_experiment,
)

rng = np.random.default_rng(3)
solver_features = bundled_solver_features()
num_solvers = solver_features.shape[0]
num_instances = 2000
print(f"{num_solvers} solver parametrizations, first row: {solver_features[0]}")

# Synthetic ground truth: which solver is fastest depends on the
# instance, through a bilinear instance-solver interaction.  Ten raw
# instance features, some redundant so preprocessing has work to do.
base = rng.uniform(size=(num_instances, 6))
spikes = np.zeros(num_instances)
spikes[::150] = 1.0  # almost-constant: variance below the 0.01 filter
raw_features = np.column_stack([
    base,
    base[:, 0] + 0.01 * rng.normal(size=num_instances),  # near-duplicate
    np.full(num_instances, 0.5),                          # constant
    base[:, 1] * 0.98 + 0.02 * rng.normal(size=num_instances),
    spikes,
])
interaction = base @ rng.normal(size=(6, 4)) @ solver_features.T
interaction += 0.1 * rng.normal(size=interaction.shape)
runtimes = 0.05 + (interaction - interaction.min()) / np.ptp(interaction)

reduced, kept = preprocess_features(raw_features)
print(f"preprocessing keeps columns {kept} of {raw_features.shape[1]}")

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    ids = [f"inst_{i:04d}" for i in range(num_instances)]
    with open(tmp / "runtimes.csv", "w") as fh:
        fh.write("instance_id," + ",".join(f"solver_{j}" for j in range(num_solvers)) + "\n")
        for i, iid in enumerate(ids):
            fh.write(iid + "," + ",".join(f"{v:.6f}" for v in runtimes[i]) + "\n")
    with open(tmp / "features.csv", "w") as fh:
        fh.write("instance_id," + ",".join(f"f{j}" for j in range(raw_features.shape[1])) + "\n")
        for i, iid in enumerate(ids):
            fh.write(iid + "," + ",".join(f"{v:.6f}" for v in raw_features[i]) + "\n")

    table = load_runtime_table(tmp / "runtimes.csv", tmp / "features.csv")
    print(f"loaded table: {table.num_instances} instances x {table.num_solvers} solvers")

    print("\nmean cumulative regret (3 repetitions, ranking feedback, k=4):")
    for policy in ("cppl", "egreedy", "mm"):
        config = ExperimentConfig(
            environment="algoselect",
            policy=policy,
            feedback="ranking",
            k=4,
            T=1200,
            reps=3,
            seed=17,
            lam=10.0,
            runtimes=str(tmp / "runtimes.csv"),
            instance_features=str(tmp / "features.csv"),
        )
        result = run_experiment(config)
        m = result.mean_cum_regret
        print(f"  {policy:9s} t=300: {m[299]:6.1f}   t=600: {m[599]:6.1f}   "
              f"t=1200: {m[1199]:6.1f} (+/- {result.stderr[-1]:.1f})")
