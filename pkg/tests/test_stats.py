import math

import numpy as np
import pytest
import scipy.special
import scipy.stats

from soundscene_eval.stats import (
    CorrelationMethod,
    pearson,
    rank,
    regularized_incomplete_beta,
    spearman,
    t_two_sided,
)


class TestRank:
    def test_simple(self):
        np.testing.assert_array_equal(rank([10, 20, 30]), [1, 2, 3])

    def test_tie_averaging(self):
        np.testing.assert_array_equal(rank([5, 5, 7]), [1.5, 1.5, 3])

    def test_hand_ranked(self):
        np.testing.assert_array_equal(rank([3, 1, 4, 1]), [3, 1.5, 4, 1.5])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            rank([])


class TestSpearman:
    def test_monotone_is_one(self):
        result = spearman([1, 2, 3, 4, 5], [2, 4, 6, 8, 10])
        assert result.coefficient == 1.0
        assert result.p_value == 0.0
        assert result.method is CorrelationMethod.SPEARMAN

    def test_published_p_for_rho_09_n5(self):
        result = spearman([1, 2, 3, 4, 5], [1, 2, 3, 5, 4])
        assert abs(result.coefficient - 0.9) < 1e-12
        assert abs(result.p_value - 0.037) < 1e-3

    def test_published_p_for_rho_05_n5(self):
        result = spearman([1, 2, 3, 4, 5], [1, 3, 5, 2, 4])
        assert abs(result.coefficient - 0.5) < 1e-12
        assert abs(result.p_value - 0.391) < 1e-3

    def test_matches_scipy_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.integers(0, 6, 12).astype(float)
            y = rng.integers(0, 6, 12).astype(float)
            if np.ptp(x) == 0 or np.ptp(y) == 0:
                continue
            ours = spearman(x, y)
            theirs = scipy.stats.spearmanr(x, y)
            assert abs(ours.coefficient - theirs.statistic) < 1e-12
            assert abs(ours.p_value - theirs.pvalue) < 1e-8

    def test_closed_form_on_tie_free_data(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            n = int(rng.integers(4, 30))
            x = rng.permutation(n).astype(float)
            y = rng.permutation(n).astype(float)
            d2 = float(np.sum((rank(x) - rank(y)) ** 2))
            expected = 1 - 6 * d2 / (n * (n**2 - 1))
            assert abs(spearman(x, y).coefficient - expected) < 1e-12

    def test_invariant_under_monotone_transform_and_swap(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(15)
        y = rng.standard_normal(15)
        base = spearman(x, y)
        assert spearman(np.exp(x), y).coefficient == base.coefficient
        assert spearman(y, x).coefficient == base.coefficient

    def test_errors(self):
        with pytest.raises(ValueError, match="equal-length"):
            spearman([1, 2, 3], [1, 2])
        with pytest.raises(ValueError, match="n >= 3"):
            spearman([1, 2], [1, 2])
        with pytest.raises(ValueError, match="zero variance"):
            spearman([1, 1, 1], [1, 2, 3])


class TestPearson:
    def test_affine_is_one(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert pearson(x, [2 * v + 3 for v in x]).coefficient == 1.0

    def test_negation_is_minus_one(self):
        x = [1.0, 2.0, 5.0]
        assert pearson(x, [-v for v in x]).coefficient == -1.0

    def test_hand_dataset_direct_formula(self):
        x = np.array([1.0, 2, 3, 4, 5])
        y = np.array([2.0, 1, 4, 3, 5])
        xc, yc = x - x.mean(), y - y.mean()
        expected = float(np.sum(xc * yc) / math.sqrt(np.sum(xc**2) * np.sum(yc**2)))
        assert abs(pearson(x, y).coefficient - expected) < 1e-15

    def test_affine_invariance_and_sign_flip(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(20)
        y = rng.standard_normal(20)
        base = pearson(x, y).coefficient
        assert abs(pearson(3 * x + 1, y).coefficient - base) < 1e-12
        assert abs(pearson(-2 * x, y).coefficient + base) < 1e-12

    def test_matches_scipy(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(25)
        y = 0.3 * x + rng.standard_normal(25)
        ours = pearson(x, y)
        theirs = scipy.stats.pearsonr(x, y)
        assert abs(ours.coefficient - theirs.statistic) < 1e-12
        assert abs(ours.p_value - theirs.pvalue) < 1e-8


class TestStudentT:
    def test_t_zero_is_one(self):
        for df in (1, 3, 10, 100):
            assert t_two_sided(0.0, df) == 1.0

    def test_published_chain_values(self):
        # rho=0.5, n=5 gives t exactly 1 at df=3
        assert abs(t_two_sided(1.0, 3) - 0.3910) < 5e-4
        # rho=0.9, n=5 gives t ~= 3.58 at df=3
        assert abs(t_two_sided(3.5777, 3) - 0.0374) < 5e-4

    def test_monotone_decreasing_in_abs_t(self):
        values = [t_two_sided(t, 4) for t in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert t_two_sided(-2.0, 4) == t_two_sided(2.0, 4)

    def test_matches_scipy_grid(self):
        for df in (1, 2, 3, 5, 10, 30):
            for t in (0.1, 0.7, 1.5, 3.0, 7.5):
                expected = 2 * scipy.stats.t.sf(t, df)
                assert abs(t_two_sided(t, df) - expected) < 1e-8 * max(expected, 1e-8)

    def test_df_validation(self):
        with pytest.raises(ValueError):
            t_two_sided(1.0, 0)


class TestIncompleteBeta:
    def test_matches_scipy_betainc(self):
        for a in (0.5, 1.0, 1.5, 2.5, 10.0):
            for b in (0.5, 1.0, 4.0):
                for x in (0.001, 0.2, 0.5, 0.8, 0.999):
                    ours = regularized_incomplete_beta(a, b, x)
                    theirs = float(scipy.special.betainc(a, b, x))
                    assert abs(ours - theirs) <= 1e-8 * max(theirs, 1e-10)

    def test_boundaries(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_rejects_bad_shape_parameters(self):
        with pytest.raises(ValueError):
            regularized_incomplete_beta(0.0, 1.0, 0.5)
