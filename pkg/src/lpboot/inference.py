"""Hypothesis tests for linear restrictions on high-dimensional means,
simultaneous confidence sets, and lp-ball volumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .bootstrap import EmpiricalDistribution, empirical_quantile, gpb_draws
from .covariance import (CovMatrix, band, correlation_threshold,
                         cv_select_lambda, psd_project, sample_covariance,
                         threshold)
from .lp import LpExponent, lp_norm
from .sampling import RngSeed

DEFAULT_CV_GRID_SIZE = 40
DEFAULT_CV_FOLDS = 10


@dataclass(frozen=True)
class EstimatorSpec:
    """Covariance estimator descriptor: naive sample covariance, hard
    thresholding at a fixed level, cross-validated correlation thresholding,
    or banding."""

    kind: str  # "naive" | "hard" | "corr_cv" | "band"
    lam: float = 0.0          # hard-threshold level
    ell: int = 0              # band width
    cv_folds: int = DEFAULT_CV_FOLDS
    cv_grid: tuple = tuple(np.linspace(0.0, 1.0, DEFAULT_CV_GRID_SIZE))

    @classmethod
    def parse(cls, text: str) -> "EstimatorSpec":
        t = text.strip().lower()
        if t == "naive":
            return cls("naive")
        if t in ("corr_cv", "cv", "corr-cv", "thresholded"):
            return cls("corr_cv")
        if t.startswith("hard"):
            return cls("hard", lam=float(t.split("(")[1].rstrip(")")) if "(" in t else 0.1)
        if t.startswith("band"):
            return cls("band", ell=int(t.split("(")[1].rstrip(")")) if "(" in t else 1)
        raise ValueError(f"unknown estimator {text!r}")

    @property
    def label(self) -> str:
        if self.kind == "hard":
            return f"hard({self.lam:g})"
        if self.kind == "band":
            return f"band({self.ell})"
        return self.kind


def estimate_covariance(X: np.ndarray, spec: EstimatorSpec, seed: RngSeed) -> CovMatrix:
    """Sample covariance regularized per spec; PSD-projected where needed."""
    S = sample_covariance(X)
    if spec.kind == "naive":
        return S
    if spec.kind == "hard":
        return psd_project(threshold(S, spec.lam, "hard"))
    if spec.kind == "band":
        return psd_project(band(S, spec.ell))
    if spec.kind == "corr_cv":
        lam_hat, _ = cv_select_lambda(X, list(spec.cv_grid), spec.cv_folds, seed.child(0))
        return psd_project(correlation_threshold(S, lam_hat))
    raise ValueError(f"unknown estimator kind {spec.kind!r}")


@dataclass
class TestSpec:
    M: np.ndarray
    m0: np.ndarray
    p: LpExponent
    alpha: float
    estimator: EstimatorSpec
    B: int
    seed: RngSeed

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=float)
        self.m0 = np.asarray(self.m0, dtype=float)
        if self.M.ndim != 2 or self.m0.ndim != 1 or self.M.shape[0] != self.m0.size:
            raise ValueError("restriction map and target dimensions are inconsistent")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.B < 1:
            raise ValueError("B must be >= 1")


@dataclass
class TestResult:
    statistic: float
    critical_value: float
    reject: bool
    p_value: float
    distribution: EmpiricalDistribution

    def csv_row(self, spec: TestSpec) -> str:
        from .bootstrap import _seed_label

        return ",".join([
            f"{self.statistic:.17g}", f"{self.critical_value:.17g}",
            f"{self.p_value:.17g}", str(int(self.reject)),
            spec.p.label, f"{spec.alpha:g}", spec.estimator.label,
            str(spec.B), _seed_label(spec.seed),
        ])

    csv_header = "statistic,critical_value,p_value,reject,p,alpha,estimator,B,seed"


def test_statistic(X: np.ndarray, M: np.ndarray, m0: np.ndarray, p: LpExponent) -> float:
    """||n^{-1/2} sum_i (M X_i - m0)||_p."""
    X = np.asarray(X, dtype=float)
    M = np.asarray(M, dtype=float)
    m0 = np.asarray(m0, dtype=float)
    if X.ndim != 2 or M.shape[1] != X.shape[1] or M.shape[0] != m0.size:
        raise ValueError("dimension mismatch")
    n = X.shape[0]
    s = X.sum(axis=0) @ M.T / math.sqrt(n) - math.sqrt(n) * m0
    return lp_norm(s, p, d_context=m0.size)


def run_test(X: np.ndarray, spec: TestSpec) -> TestResult:
    """Bootstrap test of M mu = m0 at level alpha.

    The covariance of the transformed coordinates is the conjugation
    M Sigma_hat M' of the structured estimate, so sparsity assumptions on
    Sigma keep paying off after the restriction map.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[1] != spec.M.shape[1]:
        raise ValueError("data dimension does not match the restriction map")
    stat = test_statistic(X, spec.M, spec.m0, spec.p)
    Sigma = estimate_covariance(X, spec.estimator, spec.seed.child(1))
    Omega = CovMatrix(spec.M @ Sigma.values @ spec.M.T,
                      psd_certified=Sigma.psd_certified,
                      provenance=f"conjugate<-{Sigma.provenance}")
    if not Omega.psd_certified:
        Omega = psd_project(Omega)
    dist = gpb_draws(Omega, spec.p, spec.B, spec.seed.child(2))
    crit = empirical_quantile(dist, 1.0 - spec.alpha)
    p_value = float((dist.samples >= stat).mean())
    return TestResult(statistic=stat, critical_value=crit,
                      reject=bool(stat >= crit), p_value=p_value,
                      distribution=dist)


@dataclass
class ConfidenceSet:
    """Simultaneous lp-ball confidence set for the mean vector."""

    center: np.ndarray
    radius: float
    p: LpExponent

    def contains(self, mu: np.ndarray) -> bool:
        mu = np.asarray(mu, dtype=float)
        if mu.shape != self.center.shape:
            raise ValueError("dimension mismatch")
        diff = self.center - mu
        if not diff.any():
            return True
        return lp_norm(diff, self.p, d_context=self.center.size) <= self.radius


def confidence_set(X: np.ndarray, p: LpExponent, alpha: float,
                   estimator: EstimatorSpec, B: int, seed: RngSeed) -> ConfidenceSet:
    """lp-ball around the sample mean with radius c*(1-alpha)/sqrt(n)."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    Sigma = estimate_covariance(X, estimator, seed.child(1))
    dist = gpb_draws(Sigma, p, B, seed.child(2))
    crit = empirical_quantile(dist, 1.0 - alpha)
    return ConfidenceSet(center=X.mean(axis=0), radius=crit / math.sqrt(n), p=p)


@dataclass
class BallVolume:
    log_volume: float
    volume: float  # inf when not representable in double precision

    @property
    def representable(self) -> bool:
        return math.isfinite(self.volume)


def lp_ball_volume(d: int, p: float, r: float) -> BallVolume:
    """Volume (2r)^d Gamma(1+1/p)^d / Gamma(1+d/p) of the lp-ball of radius r."""
    if d < 1 or not p >= 1.0 or not r > 0.0:
        raise ValueError("need d >= 1, p >= 1, r > 0")
    if math.isinf(p):
        logv = d * math.log(2.0 * r)
    else:
        logv = d * math.log(2.0 * r) + d * gammaln(1.0 + 1.0 / p) - gammaln(1.0 + d / p)
    vol = math.exp(logv) if logv < 709.0 else math.inf
    return BallVolume(log_volume=float(logv), volume=vol)
