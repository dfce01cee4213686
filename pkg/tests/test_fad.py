import numpy as np
import pytest

from soundscene_eval import (
    EmbeddingBackendId,
    EmbeddingSet,
    GaussianStats,
    fad,
    fad_bias_curve,
    fit_gaussian,
    frechet_distance,
)

BACKEND = EmbeddingBackendId("mock-stats-v1", 8, 16000)


def embedding_set(vectors, prefix="c", backend=None):
    vectors = np.asarray(vectors)
    if backend is None:
        backend = EmbeddingBackendId("test", vectors.shape[1], 0)
    return EmbeddingSet(backend, vectors,
                        [f"{prefix}{i}" for i in range(vectors.shape[0])])


def diagonal_stats(means, variances, n=100):
    means = np.asarray(means, dtype=float)
    return GaussianStats(mean=means, cov=np.diag(variances).astype(float), n=n)


def closed_form_diagonal(mu_a, var_a, mu_b, var_b):
    """Per-dimension scalar Frechet distance: (mu_a-mu_b)^2 + (sd_a-sd_b)^2."""
    mu_a, mu_b = np.asarray(mu_a, float), np.asarray(mu_b, float)
    sd_a, sd_b = np.sqrt(np.asarray(var_a, float)), np.sqrt(np.asarray(var_b, float))
    return float(np.sum((mu_a - mu_b) ** 2) + np.sum((sd_a - sd_b) ** 2))


def random_psd(rng, n, scale=1.0):
    m = rng.standard_normal((n, n))
    return scale * (m @ m.T) / n + 0.1 * np.eye(n)


class TestFitGaussian:
    def test_two_point_formula(self):
        stats = fit_gaussian(embedding_set([[0.0, 0.0], [2.0, 2.0]]))
        np.testing.assert_array_equal(stats.mean, [1.0, 1.0])
        np.testing.assert_array_equal(stats.cov, [[2.0, 2.0], [2.0, 2.0]])
        assert stats.n == 2

    def test_identical_rows_give_degenerate_zero_covariance(self):
        stats = fit_gaussian(embedding_set([[1.0, 2.0]] * 5))
        np.testing.assert_array_equal(stats.cov, np.zeros((2, 2)))

    def test_single_row_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            fit_gaussian(embedding_set([[1.0, 2.0]]))

    def test_seeded_sample_recovers_diagonal_gaussian(self):
        rng = np.random.default_rng(2024)
        true_var = np.array([1.0, 4.0, 0.25, 9.0])
        draws = rng.standard_normal((1000, 4)) * np.sqrt(true_var)
        stats = fit_gaussian(embedding_set(draws))
        for d in range(4):
            assert abs(stats.cov[d, d] - true_var[d]) / true_var[d] < 0.15
        off = stats.cov - np.diag(np.diag(stats.cov))
        assert np.max(np.abs(off)) < 0.15 * np.sqrt(true_var.max())


class TestFrechetDistance:
    def test_identity_is_zero(self):
        rng = np.random.default_rng(0)
        stats = GaussianStats(rng.standard_normal(5), random_psd(rng, 5), n=10)
        assert frechet_distance(stats, stats).value <= 1e-8

    def test_scalar_closed_forms(self):
        a = diagonal_stats([0.0], [1.0])
        assert abs(frechet_distance(a, diagonal_stats([1.0], [1.0])).value - 1.0) < 1e-8
        assert abs(frechet_distance(a, diagonal_stats([0.0], [4.0])).value - 1.0) < 1e-8

    def test_diagonal_three_dims(self):
        a = diagonal_stats([0.0, 0.0, 0.0], [1.0, 1.0, 1.0])
        b = diagonal_stats([1.0, 2.0, 3.0], [4.0, 9.0, 16.0])
        assert abs(frechet_distance(a, b).value - 28.0) < 1e-8

    def test_diagonal_cases_match_closed_form(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            d = int(rng.integers(1, 9))
            mu_a, mu_b = rng.standard_normal(d), rng.standard_normal(d)
            var_a, var_b = rng.uniform(0.1, 4.0, d), rng.uniform(0.1, 4.0, d)
            got = frechet_distance(
                diagonal_stats(mu_a, var_a), diagonal_stats(mu_b, var_b)
            ).value
            assert abs(got - closed_form_diagonal(mu_a, var_a, mu_b, var_b)) < 1e-8

    def test_symmetry_on_random_psd(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            d = int(rng.integers(2, 7))
            a = GaussianStats(rng.standard_normal(d), random_psd(rng, d), n=10)
            b = GaussianStats(rng.standard_normal(d), random_psd(rng, d), n=10)
            forward = frechet_distance(a, b).value
            backward = frechet_distance(b, a).value
            assert abs(forward - backward) < 1e-8

    def test_trace_term_cross_check_vs_direct_eigendecomposition(self):
        # oracle: Tr((Sa Sb)^{1/2}) = sum sqrt(eig(Sa @ Sb)) via plain eig
        rng = np.random.default_rng(123)
        for _ in range(100):
            cov_a = random_psd(rng, 4)
            cov_b = random_psd(rng, 4)
            mean = np.zeros(4)
            got = frechet_distance(
                GaussianStats(mean, cov_a, 10), GaussianStats(mean, cov_b, 10)
            ).value
            eigenvalues = np.linalg.eigvals(cov_a @ cov_b)
            oracle_trace = float(np.sum(np.sqrt(np.maximum(eigenvalues.real, 0.0))))
            oracle = float(np.trace(cov_a) + np.trace(cov_b) - 2 * oracle_trace)
            assert abs(got - max(oracle, 0.0)) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            frechet_distance(diagonal_stats([0.0], [1.0]),
                             diagonal_stats([0.0, 0.0], [1.0, 1.0]))

    def test_non_psd_covariance_rejected(self):
        bad = GaussianStats(np.zeros(2), np.array([[1.0, 0.0], [0.0, -1.0]]), n=5)
        with pytest.raises(ValueError, match="not PSD"):
            frechet_distance(bad, diagonal_stats([0.0, 0.0], [1.0, 1.0]))


class TestFad:
    def test_identical_sets_score_zero(self):
        rng = np.random.default_rng(5)
        vectors = rng.standard_normal((40, 8))
        a = embedding_set(vectors, backend=BACKEND)
        b = embedding_set(vectors, prefix="r", backend=BACKEND)
        assert fad(a, b).value <= 1e-6

    def test_row_permutation_leaves_score_identical(self):
        rng = np.random.default_rng(6)
        vectors = rng.standard_normal((30, 8))
        ref = embedding_set(rng.standard_normal((25, 8)), prefix="r", backend=BACKEND)
        baseline = fad(embedding_set(vectors, backend=BACKEND), ref)
        perm = rng.permutation(30)
        shuffled = EmbeddingSet(BACKEND, vectors[perm],
                                [f"c{i}" for i in perm])
        assert fad(shuffled, ref).value == baseline.value

    def test_backend_mismatch(self):
        a = embedding_set(np.zeros((3, 8)) + 1.0, backend=BACKEND)
        other = EmbeddingBackendId("other", 8, 0)
        b = embedding_set(np.zeros((3, 8)), prefix="r", backend=other)
        with pytest.raises(ValueError, match="backend mismatch"):
            fad(a, b)

    def test_seeded_samples_match_true_parameter_closed_form(self):
        rng = np.random.default_rng(7)
        shift, scale = 0.5, 1.4
        a = embedding_set(rng.standard_normal((2000, 8)), backend=BACKEND)
        b = embedding_set(shift + scale * rng.standard_normal((2000, 8)),
                          prefix="r", backend=BACKEND)
        truth = closed_form_diagonal(
            np.zeros(8), np.ones(8), np.full(8, shift), np.full(8, scale**2)
        )
        got = fad(a, b).value
        assert abs(got - truth) / truth < 0.20


class TestBiasCurve:
    def test_full_size_equals_plain_fad_with_zero_spread(self):
        rng = np.random.default_rng(8)
        a = embedding_set(rng.standard_normal((40, 4)))
        b = embedding_set(rng.standard_normal((40, 4)), prefix="r",
                          backend=a.backend)
        (point,) = fad_bias_curve(a, b, sizes=[40], repeats=5, seed=0)
        assert point.mean_fad == fad(a, b).value
        assert point.std_fad == 0.0

    def test_bias_shrinks_with_size(self):
        rng = np.random.default_rng(9)
        a = embedding_set(rng.standard_normal((2000, 8)))
        b = embedding_set(rng.standard_normal((2000, 8)), prefix="r",
                          backend=a.backend)
        points = fad_bias_curve(a, b, sizes=[10, 50, 250], repeats=10, seed=17)
        means = [p.mean_fad for p in points]
        assert means[0] > means[1] > means[2]

    def test_same_seed_reproduces_curve(self):
        rng = np.random.default_rng(10)
        a = embedding_set(rng.standard_normal((60, 4)))
        b = embedding_set(rng.standard_normal((50, 4)), prefix="r", backend=a.backend)
        first = fad_bias_curve(a, b, sizes=[5, 20], repeats=4, seed=3)
        second = fad_bias_curve(a, b, sizes=[5, 20], repeats=4, seed=3)
        assert first == second

    def test_size_out_of_range(self):
        rng = np.random.default_rng(11)
        a = embedding_set(rng.standard_normal((10, 4)))
        b = embedding_set(rng.standard_normal((10, 4)), prefix="r", backend=a.backend)
        with pytest.raises(ValueError, match="out of range"):
            fad_bias_curve(a, b, sizes=[11], repeats=2, seed=0)
        with pytest.raises(ValueError, match="out of range"):
            fad_bias_curve(a, b, sizes=[1], repeats=2, seed=0)
