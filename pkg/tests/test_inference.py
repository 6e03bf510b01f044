import numpy as np
import pytest
from scipy.special import ndtr

from dirset.estimators import LeastSquaresDirection
from dirset.exceptions import InvalidNull, UnstableLambda
from dirset.inference import (
    chi_square_quantile,
    chi_square_upper_tail,
    direction_covariance,
    wald_direction_test,
)
from dirset.linalg import pd_solve, sample_covariance
from dirset.simulate import Scenario, generate


def case_i_data(seed, n=500, p=3, rho=0.0):
    sc = Scenario(case="I", n=n, p=p, rho=rho, reps=1, seed=seed, estimators=("new",))
    return generate(sc, 0)


def loop_influence(est, x, y):
    """Per-sample recomputation of the influence vectors, one row at a time."""
    d = est.direction_
    proj = np.eye(x.shape[1]) - np.outer(d, d)
    cov = sample_covariance(x)
    rows = []
    for i in range(x.shape[0]):
        if est.centered:
            xt_i = x[i] - x.mean(axis=0)
            core = (y[i] - est.gamma_) / est.lambda_ * xt_i - xt_i * (xt_i @ d)
        else:
            core = y[i] / est.lambda_ * x[i] - x[i] * (x[i] @ d)
        rows.append(proj @ pd_solve(cov, core))
    return np.array(rows)


class TestChiSquare:
    def test_zero_statistic(self):
        assert chi_square_upper_tail(0.0, 3) == 1.0

    def test_two_dof_closed_form(self):
        for x in np.linspace(0.0, 50.0, 26):
            assert chi_square_upper_tail(x, 2) == pytest.approx(np.exp(-x / 2), abs=1e-10)
        assert chi_square_upper_tail(5.991, 2) == pytest.approx(0.05, abs=5e-4)

    def test_one_dof_normal_oracle(self):
        # P(chi2(1) > x) = 2 (1 - Phi(sqrt(x)))
        assert chi_square_upper_tail(3.841, 1) == pytest.approx(
            2.0 * (1.0 - ndtr(np.sqrt(3.841))), abs=1e-10
        )
        assert chi_square_upper_tail(3.841, 1) == pytest.approx(0.05, abs=5e-4)

    def test_monotone_in_statistic(self):
        grid = [chi_square_upper_tail(x, 4) for x in np.linspace(0, 30, 40)]
        assert all(a > b for a, b in zip(grid, grid[1:]))

    def test_quantile_inverts_tail(self):
        q = chi_square_quantile(0.95, 2)
        assert chi_square_upper_tail(q, 2) == pytest.approx(0.05, abs=1e-12)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            chi_square_upper_tail(-1.0, 2)
        with pytest.raises(ValueError):
            chi_square_upper_tail(1.0, 0)


class TestDirectionCovariance:
    @pytest.mark.parametrize("centered", [True, False])
    def test_vectorized_matches_per_sample_loop(self, centered):
        x, y, _ = case_i_data(21, n=200)
        est = LeastSquaresDirection(centered=centered).fit(x, y)
        cov = direction_covariance(est, x, y)
        psi = loop_influence(est, x, y)
        psi -= psi.mean(axis=0)
        expected = psi.T @ psi / x.shape[0]
        np.testing.assert_allclose(cov.sigma_beta, expected, atol=1e-12)

    def test_tangent_plane_degeneracy(self):
        x, y, _ = case_i_data(22)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        fro = np.linalg.norm(cov.sigma_beta)
        assert np.linalg.norm(cov.sigma_beta @ est.direction_) <= 1e-6 * fro

    def test_psd(self):
        x, y, _ = case_i_data(23)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        w = np.linalg.eigvalsh(cov.sigma_beta)
        assert w.min() >= -1e-8 * max(w.max(), 1e-300)

    def test_rank_is_p_minus_one(self):
        x, y, _ = case_i_data(24, n=500, p=3)
        est = LeastSquaresDirection().fit(x, y)
        assert direction_covariance(est, x, y).rank == 2

    def test_two_covariates_rank_at_most_one(self):
        x, y, _ = case_i_data(25, n=300, p=2)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        assert cov.rank <= 1
        assert np.allclose(cov.sigma_beta @ est.direction_, 0.0, atol=1e-12)

    def test_shrinks_like_one_over_n(self):
        # same index vector, two sample sizes: diag(sigma/n) scales as 1/n
        rng = np.random.default_rng(25)
        beta = np.array([0.8, -0.36, 0.48])
        diags = {}
        for n in (500, 2000):
            x = rng.standard_normal((n, 3))
            y = (x @ beta + rng.standard_normal(n) > 0).astype(float)
            est = LeastSquaresDirection().fit(x, y)
            cov = direction_covariance(est, x, y)
            diags[n] = np.diagonal(cov.sigma_beta) / n
        ratio = np.mean(diags[500] / diags[2000])
        assert 3.0 <= ratio <= 5.0

    @pytest.mark.parametrize("centered", [True, False])
    def test_plugin_matches_empirical_sampling_variance(self, centered):
        # oracle: the Monte Carlo variance of sqrt(n)(D - beta) over fresh
        # datasets. Each variant has its own limit (the centered one is
        # tighter: removing the response mean cancels variance for binary
        # responses), so each plug-in is checked against its own estimator.
        rng = np.random.default_rng(26)
        beta = np.array([0.6, -0.64, 0.48])
        beta /= np.linalg.norm(beta)
        n, reps = 1000, 300
        devs, plugs = [], []
        for _ in range(reps):
            x = rng.standard_normal((n, 3))
            y = (x @ beta + rng.standard_normal(n) > 0).astype(float)
            est = LeastSquaresDirection(centered=centered).fit(x, y)
            devs.append(np.sqrt(n) * (est.direction_ - beta))
            plugs.append(direction_covariance(est, x, y).sigma_beta)
        devs = np.array(devs) - np.mean(devs, axis=0)
        empirical = devs.T @ devs / reps
        plug = np.mean(plugs, axis=0)
        rel = np.linalg.norm(empirical - plug) / np.linalg.norm(empirical)
        assert rel <= 0.20

    def test_unstable_lambda_guard(self):
        x, y, _ = case_i_data(27)
        est = LeastSquaresDirection().fit(x, y)
        est.lambda_ = 1e-12
        with pytest.raises(UnstableLambda):
            direction_covariance(est, x, y)

    def test_rejects_non_ls_estimator(self):
        from dirset.baselines import LMRCDirection
        from dirset.exceptions import InputError

        x, y, _ = case_i_data(29)
        est = LMRCDirection().fit(x, y)
        with pytest.raises(InputError):
            direction_covariance(est, x, y)

    def test_standard_errors_shape(self):
        x, y, _ = case_i_data(28)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        se = cov.standard_errors()
        assert se.shape == (3,)
        assert np.all(se >= 0.0)


class TestWald:
    def test_zero_at_fitted_direction(self):
        x, y, _ = case_i_data(31)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        res = wald_direction_test(est, cov, est.direction_, levels=(0.05, 0.01))
        assert res.statistic == pytest.approx(0.0, abs=1e-8)
        assert res.p_value == pytest.approx(1.0)
        assert res.reject_at == {0.05: False, 0.01: False}
        assert res.dof == 2

    def test_size_against_true_direction(self):
        x, y, beta = case_i_data(32, n=2000)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        res = wald_direction_test(est, cov, beta)
        assert res.p_value > 0.001  # truth should not be wildly rejected

    def test_rejects_orthogonal_null(self):
        x, y, _ = case_i_data(33, n=500)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        d = est.direction_
        b0 = np.array([-d[1], d[0], 0.0])
        b0 /= np.linalg.norm(b0)
        res = wald_direction_test(est, cov, b0)
        assert res.p_value < 0.05
        assert res.reject_at[0.05]

    def test_antipode_blind_spot(self):
        # the covariance annihilates the fitted direction, so deviations
        # along it are invisible: H0 at the exact antipode is NOT rejected
        x, y, _ = case_i_data(34, n=500)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        res = wald_direction_test(est, cov, -est.direction_)
        assert res.statistic <= 1e-6
        assert res.p_value > 0.99

    def test_scale_invariance_of_statistic(self):
        x, y, _ = case_i_data(35)
        b0 = np.array([1.0, 0.0, 0.0])
        stats = []
        for c in (1.0, 7.5):
            est = LeastSquaresDirection().fit(x, c * y)
            cov = direction_covariance(est, x, c * y)
            stats.append(wald_direction_test(est, cov, b0).statistic)
        assert stats[1] == pytest.approx(stats[0], rel=1e-6)

    def test_invalid_null(self):
        x, y, _ = case_i_data(36)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        with pytest.raises(InvalidNull):
            wald_direction_test(est, cov, [1.0, 0.0])  # wrong length
        with pytest.raises(InvalidNull):
            wald_direction_test(est, cov, [1.0, 1.0, 0.0])  # not unit norm

    def test_p_value_matches_tail(self):
        x, y, _ = case_i_data(37)
        est = LeastSquaresDirection().fit(x, y)
        cov = direction_covariance(est, x, y)
        b0 = np.array([0.0, 1.0, 0.0])
        res = wald_direction_test(est, cov, b0)
        assert res.p_value == pytest.approx(chi_square_upper_tail(res.statistic, 2))
