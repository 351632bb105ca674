"""Environment tests: simulators, regret, preprocessing, and CSV interfaces."""

import itertools

import numpy as np
import pytest

from preselect import (
    AlgoSelectEnvironment,
    RegretTrace,
    RuntimeTable,
    SyntheticEnvironment,
    SyntheticScenario,
    UtilityVector,
    algoselect_round,
    instant_regret,
    load_runtime_table,
    load_solver_features,
    bundled_solver_features,
    preprocess_features,
    sample_feedback,
    synthetic_round,
    true_utilities,
)
from preselect.likelihood import RankingFeedback, WinnerFeedback


def make_scenario(rng, n=6, d=3, k=2, T=50, seed=13):
    return SyntheticScenario.draw(n=n, d=d, k=k, T=T, seed=seed, rng=rng)


def preprocessing_fixture():
    """Six columns with known variance/correlation structure.

    After min-max scaling: column 0 is constant and column 5 has
    variance below 0.01, so both fall to the variance filter.  Columns 1
    and 2 are identical (the tie-break removes the larger index, 2);
    column 3 is column 1 plus a small alternating wiggle (correlation
    0.9994, and column 1 is more correlated with the rest, so 1 is
    removed); columns 3 and 4 correlate at 0.37 and both survive.
    """
    m = 200
    i = np.arange(m)
    c0 = np.full(m, 0.7)
    c1 = np.linspace(0.0, 1.0, m)
    c2 = c1.copy()
    c3 = c1 + 0.01 * (-1.0) ** i
    c4 = 0.5 * c1 + 0.5 * np.sin(2.3 * i)
    c5 = np.zeros(m)
    c5[0] = 1.0
    return np.column_stack([c0, c1, c2, c3, c4, c5])


class TestSyntheticRound:
    def test_deterministic_per_seed_and_round(self, rng):
        scenario = make_scenario(rng)
        a = synthetic_round(scenario, 7)
        b = synthetic_round(scenario, 7)
        np.testing.assert_array_equal(a.features, b.features)
        c = synthetic_round(scenario, 8)
        assert not np.array_equal(a.features, c.features)

    def test_shape_and_round_index(self, rng):
        scenario = make_scenario(rng, n=10, d=5, k=3, T=20)
        X = synthetic_round(scenario, 4)
        assert X.features.shape == (5, 10)
        assert X.t == 4

    def test_entries_uniform(self, rng):
        scenario = make_scenario(rng, n=100, d=10, T=100)
        values = np.concatenate(
            [synthetic_round(scenario, t).features.ravel() for t in range(1, 101)]
        )
        assert values.mean() == pytest.approx(0.5, abs=0.01)
        assert values.min() >= 0.0 and values.max() <= 1.0

    def test_round_out_of_range(self, rng):
        scenario = make_scenario(rng, T=5)
        with pytest.raises(ValueError):
            synthetic_round(scenario, 6)

    def test_theta_star_in_unit_cube(self, rng):
        scenario = make_scenario(rng)
        assert np.all((scenario.theta_star >= 0) & (scenario.theta_star <= 1))


class TestInstantRegret:
    def test_zero_when_best_arm_included(self):
        utils = UtilityVector.from_values([4.0, 2.0, 1.0])
        assert instant_regret(utils, (0, 2)) == 0.0

    def test_relative_gap(self):
        utils = UtilityVector.from_values([4.0, 2.0, 1.0])
        assert instant_regret(utils, (1,)) == pytest.approx(0.5)
        assert instant_regret(utils, (2,)) == pytest.approx(0.75)

    def test_matches_enumeration(self, rng):
        # Oracle: direct formula over every k-subset.
        vals = rng.uniform(0.5, 4.0, size=6)
        utils = UtilityVector.from_values(vals)
        best = vals.max()
        for k in (1, 2, 3):
            for subset in itertools.combinations(range(6), k):
                expected = (best - vals[list(subset)].max()) / best
                assert instant_regret(utils, subset) == pytest.approx(expected, abs=1e-12)

    def test_zero_iff_argmax_included(self, rng):
        vals = rng.uniform(0.5, 4.0, size=7)
        utils = UtilityVector.from_values(vals)
        best = int(np.argmax(vals))
        for subset in itertools.combinations(range(7), 3):
            r = instant_regret(utils, subset)
            assert (r == 0.0) == (best in subset)

    def test_range(self, rng):
        for _ in range(50):
            vals = rng.uniform(0.01, 10.0, size=5)
            r = instant_regret(UtilityVector.from_values(vals), (int(rng.integers(5)),))
            assert 0.0 <= r <= 1.0


class TestRegretTrace:
    def test_cumulative_is_running_sum(self, rng):
        inst = rng.uniform(size=30)
        trace = RegretTrace.from_instantaneous(inst)
        np.testing.assert_allclose(trace.cumulative, np.cumsum(inst))
        assert np.all(np.diff(trace.cumulative) >= 0)
        assert trace.cumulative[-1] <= trace.T

    def test_rejects_inconsistent_cumulative(self):
        with pytest.raises(ValueError):
            RegretTrace(instantaneous=np.array([0.5, 0.5]), cumulative=np.array([0.5, 0.7]))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            RegretTrace.from_instantaneous(np.array([0.5, 1.5]))


class TestPreprocessing:
    def test_constant_column_dropped(self):
        raw = np.column_stack([np.full(50, 3.0), np.linspace(0, 1, 50)])
        reduced, kept = preprocess_features(raw)
        assert kept == [1]

    def test_duplicate_columns_keep_one(self):
        ramp = np.linspace(0, 1, 50)
        reduced, kept = preprocess_features(np.column_stack([ramp, ramp]))
        assert kept == [0]

    def test_hand_traced_fixture(self):
        # Oracle: the greedy trace in the fixture docstring.
        reduced, kept = preprocess_features(preprocessing_fixture())
        assert kept == [3, 4]
        assert np.all(np.var(reduced, axis=0) >= 0.01)
        corr = np.corrcoef(reduced, rowvar=False)
        np.fill_diagonal(corr, 0.0)
        assert np.max(np.abs(corr)) <= 0.95

    def test_output_in_unit_interval(self, rng):
        raw = rng.normal(size=(60, 5)) * 10 + 3
        reduced, kept = preprocess_features(raw)
        assert reduced.min() >= 0.0 and reduced.max() <= 1.0

    def test_independent_greedy_simulation(self, rng):
        # Oracle: re-run the documented greedy rule with numpy primitives.
        raw = rng.normal(size=(80, 6))
        raw[:, 3] = raw[:, 0] + 0.05 * rng.normal(size=80)
        raw[:, 4] = -raw[:, 1] + 0.02 * rng.normal(size=80)
        _, kept = preprocess_features(raw)

        lo, hi = raw.min(0), raw.max(0)
        span = np.where(hi - lo == 0, 1.0, hi - lo)
        scaled = (raw - lo) / span
        scaled[:, hi - lo == 0] = 0.0
        expected = [j for j in range(6) if np.var(scaled[:, j]) >= 0.01]
        while len(expected) >= 2:
            corr = np.abs(np.corrcoef(scaled[:, expected], rowvar=False))
            np.fill_diagonal(corr, 0.0)
            a, b = np.unravel_index(np.argmax(corr), corr.shape)
            if corr[a, b] <= 0.95:
                break
            mean_a = corr[a].sum() / (len(expected) - 1)
            mean_b = corr[b].sum() / (len(expected) - 1)
            if mean_a > mean_b:
                victim = a
            elif mean_b > mean_a:
                victim = b
            else:
                victim = a if expected[a] > expected[b] else b
            expected.pop(victim)
        assert kept == expected

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            preprocess_features(np.ones((1, 4)))


def small_table(num_instances=30, num_solvers=4, p=5, seed=5):
    rng = np.random.default_rng(seed)
    return RuntimeTable(
        runtimes=rng.uniform(0.0, 1.0, size=(num_instances, num_solvers)),
        instance_features=rng.uniform(size=(num_instances, p)),
        solver_features=rng.uniform(size=(num_solvers, 4)),
    )


class TestAlgoSelect:
    def test_lambda_zero_gives_unit_utilities(self):
        table = small_table()
        order = np.arange(table.num_instances)
        _, utils = algoselect_round(table, order, 1, lam=0.0)
        np.testing.assert_allclose(utils.values, 1.0)

    def test_faster_solver_has_higher_utility(self):
        table = RuntimeTable(
            runtimes=np.array([[0.1, 0.2]]* 2),
            instance_features=np.eye(2),
            solver_features=np.ones((2, 4)),
        )
        _, utils = algoselect_round(table, np.array([0, 1]), 1, lam=10.0)
        assert utils.values[0] == pytest.approx(np.exp(-1.0))
        assert utils.values[1] == pytest.approx(np.exp(-2.0))
        assert utils.values[0] > utils.values[1]

    def test_kronecker_layout(self, rng):
        # Oracle: entry (4a + b) of the joint vector equals inst[a] * solver[b].
        table = small_table(p=7)
        order = np.arange(table.num_instances)
        context, _ = algoselect_round(table, order, 3, lam=1.0)
        inst = table.instance_features[order[2]]
        assert context.features.shape == (28, table.num_solvers)
        for i in range(table.num_solvers):
            solver = table.solver_features[i]
            for a in range(7):
                for b in range(4):
                    assert context.features[4 * a + b, i] == pytest.approx(
                        inst[a] * solver[b], rel=1e-12
                    )

    def test_exhaustion(self):
        table = small_table(num_instances=3)
        order = np.arange(3)
        with pytest.raises(RuntimeError):
            algoselect_round(table, order, 4, lam=1.0)

    def test_environment_never_repeats_instances(self, rng):
        table = small_table(num_instances=25)
        env = AlgoSelectEnvironment(table, lam=10.0, rng=rng)
        assert sorted(env.order) == list(range(25))
        assert env.max_rounds == 25

    def test_environment_preprocesses_once(self, rng):
        table = small_table()
        env = AlgoSelectEnvironment(table, lam=10.0, rng=rng)
        assert env.table.instance_features.shape[1] == len(env.kept_columns)
        context, _ = env.round(1)
        assert context.d == env.d


class TestSampleFeedback:
    def test_modes(self, rng):
        utils = UtilityVector.from_values([1.0, 2.0, 3.0, 4.0])
        fb = sample_feedback(utils, (0, 2, 3), "winner", rng)
        assert isinstance(fb, WinnerFeedback) and fb.arm in (0, 2, 3)
        fb = sample_feedback(utils, (0, 2, 3), "ranking", rng)
        assert isinstance(fb, RankingFeedback) and fb.ranking.items == (0, 2, 3)
        with pytest.raises(ValueError):
            sample_feedback(utils, (0, 1), "duel", rng)


class TestCsvLoading:
    def _write_files(self, tmp_path, ids=("a", "b", "c"), feat_ids=None):
        rt = tmp_path / "runtimes.csv"
        rt.write_text(
            "instance_id,solver_0,solver_1\n"
            + "".join(f"{i},0.{j + 1},0.{j + 2}\n" for j, i in enumerate(ids))
        )
        feat_ids = ids if feat_ids is None else feat_ids
        fi = tmp_path / "features.csv"
        fi.write_text(
            "instance_id,f0,f1,f2\n"
            + "".join(f"{i},0.1,0.5,{j / 10}\n" for j, i in enumerate(feat_ids))
        )
        sf = tmp_path / "solvers.csv"
        sf.write_text("alpha,rho,ps,wp\n1.0,0.5,0.2,0.1\n1.5,0.6,0.3,0.2\n")
        return rt, fi, sf

    def test_round_trip(self, tmp_path):
        rt, fi, sf = self._write_files(tmp_path)
        table = load_runtime_table(rt, fi, sf)
        assert table.runtimes.shape == (3, 2)
        assert table.instance_features.shape == (3, 3)
        assert table.solver_features.shape == (2, 4)
        assert table.runtimes[0, 0] == pytest.approx(0.1)

    def test_id_mismatch_rejected(self, tmp_path):
        rt, fi, sf = self._write_files(tmp_path, feat_ids=("a", "c", "b"))
        with pytest.raises(ValueError):
            load_runtime_table(rt, fi, sf)

    def test_solver_features_header_checked(self, tmp_path):
        bad = tmp_path / "solvers.csv"
        bad.write_text("a,b,c,d\n1,2,3,4\n")
        with pytest.raises(ValueError):
            load_solver_features(bad)

    def test_bundled_fixture(self):
        solver = bundled_solver_features()
        assert solver.shape == (20, 4)
        np.testing.assert_allclose(
            solver[0], [1.54114, 0.851212, 0.739441, 0.846641]
        )


class TestSyntheticEnvironment:
    def test_round_returns_context_and_true_utilities(self, rng):
        scenario = make_scenario(rng)
        env = SyntheticEnvironment(scenario)
        context, utils = env.round(3)
        expected = true_utilities(scenario.theta_star, context)
        np.testing.assert_allclose(utils.values, expected.values)
