"""Core model tests: probabilities against enumeration oracles, exact sampling."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from preselect import (
    ContextMatrix,
    Ranking,
    UtilityVector,
    contextual_utilities,
    prob_full_ranking,
    prob_partial_ranking,
    prob_top_rank,
    sample_partial_ranking,
    sample_winner,
)


def all_rankings(items):
    return [Ranking.from_ordering(perm) for perm in itertools.permutations(items)]


def linear_extension_sum(utils, subset, ranking):
    """Oracle: sum full-ranking probabilities over all linear extensions."""
    n = len(utils)
    target = ranking.ordering
    total = 0.0
    for perm in itertools.permutations(range(n)):
        restricted = tuple(a for a in perm if a in set(subset))
        if restricted == target:
            total += prob_full_ranking(utils, Ranking.from_ordering(perm))
    return total


class TestRanking:
    def test_round_trip(self):
        r = Ranking.from_ordering((4, 1, 7))
        assert r.items == (1, 4, 7)
        assert r.ordering == (4, 1, 7)
        assert r.rank_of(4) == 1 and r.rank_of(1) == 2 and r.rank_of(7) == 3

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            Ranking(items=(0, 1), ranks=(1, 1))
        with pytest.raises(ValueError):
            Ranking(items=(0, 1), ranks=(1, 3))
        with pytest.raises(ValueError):
            Ranking.from_ordering((2, 2, 1))

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=8, unique=True))
    def test_ordering_inverts_ranks(self, ordering):
        r = Ranking.from_ordering(ordering)
        assert list(r.ordering) == ordering
        for item in ordering:
            assert r.ordering[r.rank_of(item) - 1] == item


class TestContextMatrix:
    def test_shape_and_columns(self, rng):
        X = ContextMatrix(rng.uniform(size=(3, 5)), t=2)
        assert (X.d, X.n, X.t) == (3, 5, 2)
        assert X.column(4).shape == (3,)

    def test_rejects_nonfinite(self):
        bad = np.ones((2, 2))
        bad[0, 0] = np.inf
        with pytest.raises(ValueError):
            ContextMatrix(bad)

    def test_rejects_bad_round(self):
        with pytest.raises(ValueError):
            ContextMatrix(np.ones((2, 2)), t=0)


class TestContextualUtilities:
    def test_zero_theta_gives_unit_utilities(self, rng):
        X = ContextMatrix(rng.uniform(size=(4, 6)))
        v = contextual_utilities(np.zeros(4), X)
        np.testing.assert_allclose(v.values, np.ones(6))

    def test_orthogonal_column(self):
        X = ContextMatrix(np.array([[0.0, 2.0], [5.0, 1.0]]))
        v = contextual_utilities(np.array([1.0, 0.0]), X)
        assert v.values[0] == pytest.approx(1.0)

    def test_matches_scalar_recomputation(self, rng):
        # Oracle: independent per-entry exp(dot) recomputation.
        theta = rng.normal(size=3)
        X = ContextMatrix(rng.normal(size=(3, 4)))
        v = contextual_utilities(theta, X)
        for i in range(4):
            expected = math.exp(sum(theta[j] * X.features[j, i] for j in range(3)))
            assert v.values[i] == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch(self, rng):
        X = ContextMatrix(rng.uniform(size=(3, 4)))
        with pytest.raises(ValueError):
            contextual_utilities(np.zeros(2), X)

    def test_no_overflow_for_large_logits(self):
        X = ContextMatrix(np.full((1, 3), 1000.0))
        v = contextual_utilities(np.ones(1), X)
        r = Ranking.from_ordering((0, 1, 2))
        assert prob_full_ranking(v, r) == pytest.approx(1.0 / 6.0, rel=1e-9)


class TestFullRanking:
    def test_uniform_utilities(self):
        v = UtilityVector.from_values(np.full(3, 2.5))
        for r in all_rankings(range(3)):
            assert prob_full_ranking(v, r) == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_single_alternative(self):
        v = UtilityVector.from_values([3.0])
        assert prob_full_ranking(v, Ranking.from_ordering([0])) == pytest.approx(1.0)

    def test_probabilities_sum_to_one(self, rng):
        for n in range(2, 6):
            v = UtilityVector.from_values(rng.uniform(0.1, 3.0, size=n))
            total = sum(prob_full_ranking(v, r) for r in all_rankings(range(n)))
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_mode_sorts_utilities_descending(self, rng):
        for n in range(2, 6):
            vals = rng.uniform(0.1, 3.0, size=n)
            v = UtilityVector.from_values(vals)
            best = max(all_rankings(range(n)), key=lambda r: prob_full_ranking(v, r))
            assert best.ordering == tuple(np.argsort(-vals))

    def test_requires_full_domain(self, rng):
        v = UtilityVector.from_values(rng.uniform(0.5, 1.5, size=4))
        with pytest.raises(ValueError):
            prob_full_ranking(v, Ranking.from_ordering((0, 1, 2)))


class TestPartialRanking:
    def test_singleton_subset(self, rng):
        v = UtilityVector.from_values(rng.uniform(0.5, 1.5, size=4))
        assert prob_partial_ranking(v, (2,), Ranking.from_ordering((2,))) == 1.0

    def test_equal_utilities(self):
        v = UtilityVector.from_values(np.ones(5))
        for r in all_rankings((0, 2, 4)):
            assert prob_partial_ranking(v, (0, 2, 4), r) == pytest.approx(1 / 6, rel=1e-12)

    def test_equals_linear_extension_sum(self, rng):
        # Oracle: enumeration of linear extensions, n=4, |S|=3.
        v = UtilityVector.from_values(rng.uniform(0.1, 3.0, size=4))
        for subset in itertools.combinations(range(4), 3):
            for r in all_rankings(subset):
                direct = prob_partial_ranking(v, subset, r)
                assert direct == pytest.approx(linear_extension_sum(v, subset, r), abs=1e-12)

    def test_domain_mismatch(self, rng):
        v = UtilityVector.from_values(rng.uniform(0.5, 1.5, size=4))
        with pytest.raises(ValueError):
            prob_partial_ranking(v, (0, 1), Ranking.from_ordering((0, 2)))
        with pytest.raises(ValueError):
            prob_partial_ranking(v, (), Ranking.from_ordering((0,)))


class TestTopRank:
    def test_equal_utilities(self):
        v = UtilityVector.from_values(np.ones(6))
        assert prob_top_rank(v, (0, 2, 3, 5), 2) == pytest.approx(0.25)

    def test_singleton(self, rng):
        v = UtilityVector.from_values(rng.uniform(0.5, 1.5, size=4))
        assert prob_top_rank(v, (3,), 3) == pytest.approx(1.0)

    def test_sums_to_one(self, rng):
        v = UtilityVector.from_values(rng.uniform(0.1, 3.0, size=8))
        subset = (0, 2, 4, 5, 7)
        total = sum(prob_top_rank(v, subset, i) for i in subset)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_equals_sum_of_partial_rankings_with_k_first(self, rng):
        v = UtilityVector.from_values(rng.uniform(0.1, 3.0, size=5))
        subset = (1, 2, 4)
        for k in subset:
            brute = sum(
                prob_partial_ranking(v, subset, r)
                for r in all_rankings(subset)
                if r.ordering[0] == k
            )
            assert prob_top_rank(v, subset, k) == pytest.approx(brute, abs=1e-12)

    def test_arm_outside_subset(self, rng):
        v = UtilityVector.from_values(rng.uniform(0.5, 1.5, size=4))
        with pytest.raises(ValueError):
            prob_top_rank(v, (0, 1), 3)


@given(
    st.lists(st.floats(0.05, 20.0), min_size=2, max_size=5),
    st.floats(0.01, 100.0),
)
@settings(max_examples=60)
def test_scale_invariance(values, c):
    """Multiplying all utilities by c > 0 changes no probability."""
    v1 = UtilityVector.from_values(values)
    v2 = UtilityVector.from_values([c * x for x in values])
    n = len(values)
    r = Ranking.from_ordering(tuple(range(n))[::-1])
    assert prob_full_ranking(v1, r) == pytest.approx(prob_full_ranking(v2, r), rel=1e-12)
    subset = tuple(range(min(2, n)))
    pr = Ranking.from_ordering(subset)
    assert prob_partial_ranking(v1, subset, pr) == pytest.approx(
        prob_partial_ranking(v2, subset, pr), rel=1e-12
    )
    assert prob_top_rank(v1, subset, 0) == pytest.approx(
        prob_top_rank(v2, subset, 0), rel=1e-12
    )


class TestSampling:
    def test_singleton_ranking(self, rng):
        v = UtilityVector.from_values(np.ones(3))
        r = sample_partial_ranking(v, (1,), rng)
        assert r.ordering == (1,)

    def test_ranking_frequencies_match_probabilities(self):
        rng = np.random.default_rng(7)
        v = UtilityVector.from_values(np.ones(4))
        subset = (0, 1, 3)
        counts = {}
        draws = 60000
        for _ in range(draws):
            r = sample_partial_ranking(v, subset, rng)
            counts[r.ordering] = counts.get(r.ordering, 0) + 1
        assert len(counts) == 6
        for ordering, count in counts.items():
            assert count / draws == pytest.approx(1 / 6, abs=0.01)

    def test_nonuniform_ranking_frequencies(self):
        rng = np.random.default_rng(11)
        v = UtilityVector.from_values([3.0, 1.0, 0.5])
        subset = (0, 1, 2)
        counts = {}
        draws = 60000
        for _ in range(draws):
            r = sample_partial_ranking(v, subset, rng)
            counts[r.ordering] = counts.get(r.ordering, 0) + 1
        for r in all_rankings(subset):
            expected = prob_partial_ranking(v, subset, r)
            assert counts.get(r.ordering, 0) / draws == pytest.approx(expected, abs=0.01)

    def test_ranking_determinism(self):
        v = UtilityVector.from_values([1.0, 2.0, 0.5, 1.5])
        runs = []
        for _ in range(2):
            rng = np.random.default_rng(99)
            runs.append([sample_partial_ranking(v, (0, 1, 2, 3), rng).ordering
                         for _ in range(20)])
        assert runs[0] == runs[1]

    def test_winner_singleton(self, rng):
        v = UtilityVector.from_values(np.ones(4))
        assert sample_winner(v, (2,), rng) == 2

    def test_winner_frequencies(self):
        rng = np.random.default_rng(3)
        v = UtilityVector.from_values(np.ones(5))
        subset = (0, 1, 2, 4)
        draws = 100000
        counts = np.zeros(5)
        for _ in range(draws):
            counts[sample_winner(v, subset, rng)] += 1
        for i in subset:
            assert counts[i] / draws == pytest.approx(0.25, abs=0.006)

    def test_winner_determinism(self):
        v = UtilityVector.from_values([1.0, 2.0, 3.0])
        seq1 = [sample_winner(v, (0, 1, 2), np.random.default_rng(5)) for _ in range(1)]
        rng_a, rng_b = np.random.default_rng(41), np.random.default_rng(41)
        seq_a = [sample_winner(v, (0, 1, 2), rng_a) for _ in range(50)]
        seq_b = [sample_winner(v, (0, 1, 2), rng_b) for _ in range(50)]
        assert seq_a == seq_b
