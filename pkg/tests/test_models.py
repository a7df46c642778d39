import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stopsmith import models
from stopsmith.errors import BadParameter, TooLarge
from stopsmith.models import ModelSpec, WeightVector
from stopsmith.perm import Permutation, complement, inverse, inversion_counts

Q_GRID = (0.3, 0.7, 1.0, 1.5, 3.0)


def weight_families(n):
    return [
        WeightVector.unit(n),
        WeightVector.geometric(0.6, n),
        WeightVector.geometric(2.0, n),
        WeightVector.sukhatme(n),
        WeightVector.reverse_sukhatme(n),
    ]


def all_specs(n):
    specs = [ModelSpec.uniform(n)] + [ModelSpec.mallows(n, q) for q in Q_GRID]
    for w in weight_families(n):
        specs += [ModelSpec.luce(w), ModelSpec.luce_inv(w), ModelSpec.p_shifted(w)]
    return specs


class TestWeights:
    def test_constructors(self):
        assert WeightVector.unit(3).theta == (1.0, 1.0, 1.0)
        assert WeightVector.sukhatme(4).theta == (4.0, 3.0, 2.0, 1.0)
        assert WeightVector.reverse_sukhatme(4).theta == (1.0, 2.0, 3.0, 4.0)
        assert WeightVector.geometric(2.0, 3).theta == (2.0, 4.0, 8.0)
        assert math.isclose(WeightVector((1.0, 2.5, 3.5)).total, 7.0, rel_tol=1e-12)

    @pytest.mark.parametrize("theta", [(1.0, 0.0), (1.0, -2.0), (1.0, math.inf), (math.nan,), ()])
    def test_rejects_bad_entries(self, theta):
        with pytest.raises(BadParameter):
            WeightVector(theta)

    def test_parse_shorthands(self, tmp_path):
        assert WeightVector.parse("1,2,3").theta == (1.0, 2.0, 3.0)
        assert WeightVector.parse("sukhatme", 3).theta == (3.0, 2.0, 1.0)
        assert WeightVector.parse("rev-sukhatme", 3).theta == (1.0, 2.0, 3.0)
        assert WeightVector.parse("unit", 2).theta == (1.0, 1.0)
        assert WeightVector.parse("geom:0.5", 2).theta == (0.5, 0.25)
        f = tmp_path / "w.txt"
        f.write_text("1 2\n3\n")
        assert WeightVector.parse(str(f)).theta == (1.0, 2.0, 3.0)
        with pytest.raises(BadParameter):
            WeightVector.parse("1,-2,3")

    def test_spec_validation(self):
        with pytest.raises(BadParameter):
            ModelSpec.mallows(3, 0.0)
        with pytest.raises(BadParameter):
            ModelSpec("luce", 3, weights=WeightVector.unit(2))


class TestNormalizer:
    def test_examples(self):
        assert models.mallows_normalizer(3, 1.0) == pytest.approx(6.0, rel=1e-14)
        assert models.mallows_normalizer(3, 2.0) == pytest.approx(21.0, rel=1e-14)
        assert models.mallows_normalizer(1, 0.37) == 1.0

    def test_matches_enumeration(self):
        rows = np.array([[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]])
        for q in (0.2, 0.999999, 1.0, 1.000001, 4.0):
            brute = math.fsum(q ** k for k in inversion_counts(rows))
            assert models.mallows_normalizer(3, q) == pytest.approx(brute, rel=1e-12)

    @pytest.mark.parametrize("q", [0.5, 0.9, 0.999, 1.001, 1.7, 3.0])
    def test_duality(self, q):
        for n in range(1, 51):
            lhs = models.log_mallows_normalizer(n, q)
            rhs = n * (n - 1) / 2 * math.log(q) + models.log_mallows_normalizer(n, 1 / q)
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_continuity_at_one(self):
        for n in (5, 50, 500):
            exact = math.lgamma(n + 1)
            for eps in (1e-9, 1e-12):
                for q in (1 - eps, 1 + eps):
                    assert models.log_mallows_normalizer(n, q) == pytest.approx(exact, rel=1e-6)


class TestPmf:
    def test_examples(self):
        perms, probs = models.support_arrays(ModelSpec.mallows(2, 2.0))
        law = {tuple(r): p for r, p in zip(perms.tolist(), probs)}
        assert law[(1, 2)] == pytest.approx(1 / 3) and law[(2, 1)] == pytest.approx(2 / 3)
        _, probs = models.support_arrays(ModelSpec.uniform(3))
        assert np.allclose(probs, 1 / 6)
        p = Permutation((3, 1, 2))
        assert models.mallows_pmf(p, 1.0) == pytest.approx(1 / 6)
        assert models.luce_pmf(p, WeightVector.unit(3)) == pytest.approx(1 / 6)

    def test_luce_first_position(self):
        w = WeightVector((1.0, 2.0, 3.0, 4.0))
        perms, probs = models.support_arrays(ModelSpec.luce(w))
        for j in range(1, 5):
            assert probs[perms[:, 0] == j].sum() == pytest.approx(j / 10, abs=1e-14)

    @pytest.mark.parametrize("n", range(1, 8))
    def test_normalization(self, n):
        for spec in all_specs(n):
            _, probs = models.support_arrays(spec)
            assert math.fsum(probs) == pytest.approx(1.0, abs=1e-12), spec

    def test_vectorised_matches_scalar(self):
        for spec in all_specs(4):
            for row, pr in models.enumerate_support(spec):
                assert spec.pmf(row) == pytest.approx(pr, rel=1e-12, abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_mallows_symmetries(self, n):
        for q in (0.3, 0.8, 2.5):
            for row, pr in models.enumerate_support(ModelSpec.mallows(n, q)):
                assert models.mallows_pmf(complement(row), q) == pytest.approx(models.mallows_pmf(row, 1 / q), rel=1e-12)
                assert models.mallows_pmf(inverse(row), q) == pytest.approx(pr, rel=1e-12)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_luce_inv_is_pushforward(self, n):
        for w in weight_families(n):
            for row, _ in models.enumerate_support(ModelSpec.uniform(n)):
                assert models.luce_inv_pmf(row, w) == models.luce_pmf(inverse(row), w)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_p_shifted_geometric_is_mallows(self, n):
        for q in (0.4, 1.0, 2.2):
            a = models.support_arrays(ModelSpec.p_shifted(WeightVector.geometric(q, n)))[1]
            b = models.support_arrays(ModelSpec.mallows(n, q))[1]
            assert np.allclose(a, b, rtol=1e-12, atol=0)

    def test_support_cap(self):
        with pytest.raises(TooLarge):
            models.support_arrays(ModelSpec.uniform(10))


def _freq(values, n):
    return np.bincount(values, minlength=n + 1)[1:] / len(values)


class TestSamplers:
    def test_trivial_sizes(self):
        rng = np.random.default_rng(0)
        one = WeightVector.unit(1)
        assert models.luce_sample(one, rng) == Permutation((1,))
        assert models.exponential_reduction_sample(one, rng) == Permutation((1,))
        assert models.sukhatme_gap_sample(1, rng) == Permutation((1,))
        assert models.mallows_sample(1, 3.0, rng) == Permutation((1,))

    def test_determinism(self):
        w = WeightVector.geometric(0.8, 30)
        for fn in (models.luce_sample, models.luce_inv_sample, models.p_shifted_sample, models.exponential_reduction_sample):
            assert fn(w, np.random.default_rng(11)) == fn(w, np.random.default_rng(11))
        a = models.mallows_sample_batch(40, 0.9, 100, np.random.default_rng(5))
        b = models.mallows_sample_batch(40, 0.9, 100, np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_luce_first_position_frequency(self):
        w = WeightVector((1.0, 2.0, 3.0, 4.0))
        rows = models.luce_sample_batch(w, 200_000, np.random.default_rng(1))
        assert np.allclose(_freq(rows[:, 0], 4), [0.1, 0.2, 0.3, 0.4], atol=0.005)

    def test_p_shifted_first_position_frequency(self):
        w = WeightVector((1.0, 2.0, 3.0, 4.0))
        rows = models.p_shifted_sample_batch(w, 200_000, np.random.default_rng(2))
        assert np.allclose(_freq(rows[:, 0], 4), [0.1, 0.2, 0.3, 0.4], atol=0.005)

    def test_exponential_reduction_argmin(self):
        w = WeightVector((1.0, 4.0, 2.0, 3.0))
        rows = models.exponential_reduction_sample_batch(w, 200_000, np.random.default_rng(3))
        where_one = np.argmax(rows == 1, axis=1) + 1
        assert np.allclose(_freq(where_one, 4), np.array(w.theta) / w.total, atol=0.005)

    def test_sukhatme_gap_argmin(self):
        n = 5
        rows = models.sukhatme_gap_sample_batch(n, 200_000, np.random.default_rng(4))
        where_one = np.argmax(rows == 1, axis=1) + 1
        target = np.array([n + 1 - j for j in range(1, n + 1)]) / (n * (n + 1) / 2)
        assert np.allclose(_freq(where_one, n), target, atol=0.005)

    def test_mallows_two_point(self):
        rows = models.mallows_sample_batch(2, 2.0, 200_000, np.random.default_rng(6))
        assert np.mean(rows[:, 0] == 2) == pytest.approx(2 / 3, abs=0.005)

    def test_unit_weights_are_uniform(self):
        rows = models.p_shifted_sample_batch(WeightVector.unit(4), 200_000, np.random.default_rng(7))
        assert models.empirical_tv(rows, ModelSpec.uniform(4)) < 0.01

    def test_mallows_inversion_mean(self):
        n, q = 500, 0.5
        rows = models.mallows_sample_batch(n, q, 20_000, np.random.default_rng(8))
        assert inversion_counts(rows).mean() / n == pytest.approx(q / (1 - q), abs=0.05)

    @pytest.mark.parametrize("q", [0.3, 1.0, 2.5])
    def test_mallows_large_q_reflection(self, q):
        rows = models.mallows_sample_batch(4, q, 100_000, np.random.default_rng(9))
        assert models.empirical_tv(rows, ModelSpec.mallows(4, q)) < 0.01

    @settings(max_examples=15, deadline=None)
    @given(st.integers(1, 60), st.floats(0.05, 20.0), st.integers(0, 2**31))
    def test_batch_rows_are_permutations(self, n, q, seed):
        rng = np.random.default_rng(seed)
        w = WeightVector.geometric(q, n)
        for rows in (
            models.mallows_sample_batch(n, q, 8, rng),
            models.luce_inv_sample_batch(w, 8, rng),
            models.p_shifted_sample_batch(w, 8, rng),
            models.exponential_reduction_sample_batch(w, 8, rng),
        ):
            assert np.array_equal(np.sort(rows, axis=1), np.tile(np.arange(1, n + 1), (8, 1)))
