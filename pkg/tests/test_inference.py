"""Mean tests, confidence sets, estimator specs, and ball volumes."""

import math

import numpy as np
import pytest
from scipy.special import gamma

from lpboot.bootstrap import gpb_draws
from lpboot.covariance import CovMatrix
from lpboot import inference
from lpboot.inference import (ConfidenceSet, EstimatorSpec, confidence_set,
                              estimate_covariance, lp_ball_volume, run_test)

restriction_stat = inference.test_statistic  # alias keeps pytest collection clean
from lpboot.lp import LpExponent, lp_norm
from lpboot.sampling import RngSeed


class TestEstimatorSpec:
    def test_parse(self):
        assert EstimatorSpec.parse("naive").kind == "naive"
        assert EstimatorSpec.parse("cv").kind == "corr_cv"
        hard = EstimatorSpec.parse("hard(0.25)")
        assert hard.kind == "hard" and hard.lam == 0.25
        bandspec = EstimatorSpec.parse("band(3)")
        assert bandspec.kind == "band" and bandspec.ell == 3
        with pytest.raises(ValueError):
            EstimatorSpec.parse("mystery")

    def test_labels_roundtrip(self):
        for text in ("naive", "corr_cv", "hard(0.25)", "band(3)"):
            assert EstimatorSpec.parse(text).label == text


class TestEstimateCovariance:
    def setup_method(self):
        rng = np.random.default_rng(0)
        self.X = rng.normal(size=(60, 8))

    def test_naive_is_sample_covariance(self):
        S = estimate_covariance(self.X, EstimatorSpec("naive"), RngSeed(0))
        Xc = self.X - self.X.mean(axis=0)
        assert np.allclose(S.values, Xc.T @ Xc / len(self.X))

    def test_hard_zeroes_small_entries(self):
        S = estimate_covariance(self.X, EstimatorSpec("hard", lam=10.0), RngSeed(0))
        assert np.all(S.values.diagonal() == 0.0) or np.all(np.abs(S.values) <= 10.0)

    def test_band_support(self):
        S = estimate_covariance(self.X, EstimatorSpec("band", ell=1), RngSeed(0))
        j, k = np.indices(S.values.shape)
        # PSD projection may refill banded zeros only by tiny eigenvalue clips
        assert np.abs(S.values[np.abs(j - k) >= 2]).max() <= 0.2

    def test_all_kinds_psd(self):
        for spec in (EstimatorSpec("naive"), EstimatorSpec("hard", lam=0.2),
                     EstimatorSpec("band", ell=1),
                     EstimatorSpec("corr_cv", cv_folds=3, cv_grid=(0.0, 0.3, 0.6))):
            S = estimate_covariance(self.X, spec, RngSeed(1))
            assert np.linalg.eigvalsh(S.values).min() >= -1e-9

    def test_cv_deterministic_in_seed(self):
        spec = EstimatorSpec("corr_cv", cv_folds=3, cv_grid=(0.0, 0.2, 0.4, 0.8))
        a = estimate_covariance(self.X, spec, RngSeed(2))
        b = estimate_covariance(self.X, spec, RngSeed(2))
        assert np.array_equal(a.values, b.values)


class TestTestStatistic:
    def test_identity_map_formula(self):
        X = np.array([[1.0, 2.0], [3.0, 4.0]])
        got = restriction_stat(X, np.eye(2), np.zeros(2), LpExponent.finite(1))
        assert got == pytest.approx((4.0 + 6.0) / math.sqrt(2))

    def test_null_shift_cancels(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(40, 3))
        m0 = X.mean(axis=0)
        got = restriction_stat(X, np.eye(3), m0, LpExponent.infinity())
        assert got == pytest.approx(0.0, abs=1e-12)

    def test_restriction_map_applied(self):
        X = np.array([[1.0, 1.0], [1.0, 1.0]])
        M = np.array([[1.0, -1.0]])
        got = restriction_stat(X, M, np.zeros(1), LpExponent.finite(2))
        assert got == 0.0

    def test_rejects_mismatched_shapes(self):
        with pytest.raises(ValueError):
            restriction_stat(np.ones((5, 3)), np.eye(2), np.zeros(2), LpExponent.finite(2))


def make_spec(d, p, alpha=0.05, estimator=None, B=400, seed=0, M=None, m0=None):
    return inference.TestSpec(M=np.eye(d) if M is None else M,
                    m0=np.zeros(d) if m0 is None else m0,
                    p=p, alpha=alpha,
                    estimator=estimator or EstimatorSpec("naive"),
                    B=B, seed=RngSeed(seed))


class TestRunTest:
    def test_detects_large_shift(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(100, 5)) + 2.0
        res = run_test(X, make_spec(5, LpExponent.finite(2)))
        assert res.reject and res.p_value == 0.0

    def test_null_keeps_level(self):
        # empirical size over replicates stays near alpha
        rejects = []
        for rep in range(200):
            X = RngSeed(5).child(rep).generator().standard_normal((50, 4))
            res = run_test(X, make_spec(4, LpExponent.infinity(), seed=rep))
            rejects.append(res.reject)
        assert abs(np.mean(rejects) - 0.05) <= 0.05

    def test_reject_consistent_with_quantile(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(60, 4)) + 0.2
        res = run_test(X, make_spec(4, LpExponent.finite(1)))
        assert res.reject == (res.statistic >= res.critical_value)
        assert 0.0 <= res.p_value <= 1.0

    def test_restriction_map_conjugates_covariance(self):
        # with M selecting one coordinate, the critical value matches a
        # one-dimensional bootstrap of that coordinate alone
        rng = np.random.default_rng(7)
        X = rng.normal(size=(80, 3)) * np.array([1.0, 5.0, 0.2])
        M = np.array([[0.0, 1.0, 0.0]])
        spec = make_spec(1, LpExponent.finite(2), M=M, m0=np.zeros(1), B=2000, seed=8)
        res = run_test(X, spec)
        s2 = X[:, 1].var()
        onedim = gpb_draws(CovMatrix(np.array([[s2]]), psd_certified=True),
                           LpExponent.finite(2), 2000, RngSeed(8).child(2))
        assert res.critical_value == pytest.approx(
            np.quantile(onedim.samples, 0.95), rel=0.1)

    def test_csv_row_shape(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(30, 4))
        spec = make_spec(4, LpExponent.log_dim(), seed=3)
        res = run_test(X, spec)
        row = res.csv_row(spec)
        assert len(row.split(",")) == len(res.csv_header.split(","))
        assert row.split(",")[4] == "logd"


class TestConfidenceSet:
    def test_contains_center(self):
        cs = ConfidenceSet(center=np.zeros(3), radius=0.0, p=LpExponent.finite(2))
        assert cs.contains(np.zeros(3))

    def test_ball_geometry(self):
        cs = ConfidenceSet(center=np.zeros(2), radius=1.0, p=LpExponent.finite(1))
        assert cs.contains(np.array([0.5, 0.5]))
        assert not cs.contains(np.array([0.75, 0.5]))

    def test_duality_with_test(self):
        # the confidence set contains m0 iff the identity-map test accepts
        rng = np.random.default_rng(10)
        X = rng.normal(size=(60, 4)) + 0.15
        for p in (LpExponent.finite(2), LpExponent.infinity()):
            spec = make_spec(4, p, seed=11)
            res = run_test(X, spec)
            cs = confidence_set(X, p, 0.05, EstimatorSpec("naive"), 400, RngSeed(11))
            assert cs.contains(np.zeros(4)) == (not res.reject)

    def test_coverage_rate(self):
        covered = []
        for rep in range(200):
            X = RngSeed(12).child(rep).generator().standard_normal((50, 3))
            cs = confidence_set(X, LpExponent.finite(1), 0.05,
                                EstimatorSpec("naive"), 400, RngSeed(13).child(rep))
            covered.append(cs.contains(np.zeros(3)))
        assert abs(np.mean(covered) - 0.95) <= 0.05


class TestBallVolume:
    def test_euclidean_disc(self):
        assert lp_ball_volume(2, 2.0, 1.0).volume == pytest.approx(math.pi, rel=1e-12)

    def test_interval(self):
        assert lp_ball_volume(1, 7.0, 3.0).volume == pytest.approx(6.0, rel=1e-12)

    def test_cross_polytope(self):
        # ||x||_1 <= 1 in R^3 has volume 2^3 / 3! = 4/3
        assert lp_ball_volume(3, 1.0, 1.0).volume == pytest.approx(4.0 / 3.0, rel=1e-12)

    def test_cube(self):
        assert lp_ball_volume(4, math.inf, 0.5).volume == pytest.approx(1.0, rel=1e-12)

    def test_closed_form_gamma(self):
        d, p, r = 5, 3.0, 1.4
        oracle = (2 * r) ** d * gamma(1 + 1 / p) ** d / gamma(1 + d / p)
        assert lp_ball_volume(d, p, r).volume == pytest.approx(oracle, rel=1e-10)

    def test_overflow_reported_via_log(self):
        v = lp_ball_volume(2000, math.inf, 10.0)
        assert not v.representable and math.isinf(v.volume)
        assert v.log_volume == pytest.approx(2000 * math.log(20.0), rel=1e-12)

    def test_underflow_keeps_log(self):
        v = lp_ball_volume(2000, 1.0, 1.0)
        assert v.volume == 0.0 and v.representable
        assert v.log_volume == pytest.approx(
            2000 * math.log(2.0) - sum(math.log(k) for k in range(1, 2001)), rel=1e-12)

    def test_rejects_bad_args(self):
        for args in ((0, 2.0, 1.0), (2, 0.5, 1.0), (2, 2.0, 0.0)):
            with pytest.raises(ValueError):
                lp_ball_volume(*args)


def test_monte_carlo_volume_oracle():
    # rejection sampling in the bounding cube reproduces the closed form
    d, p, r = 3, 3.0, 1.0
    rng = np.random.default_rng(14)
    m = 200_000
    pts = rng.uniform(-r, r, size=(m, d))
    inside = np.array([lp_norm(row, LpExponent.finite(p)) <= r for row in pts[:20_000]])
    est = inside.mean() * (2 * r) ** d
    assert est == pytest.approx(lp_ball_volume(d, p, r).volume, rel=0.03)
