"""Empirical probes of the two distributional tools behind the bootstrap
theory: Levy concentration of Gaussian lp-norms and the Kolmogorov-Smirnov
comparison bound between lp-norms under two covariances.

Both probes check direction only (estimate <= C * bound for a configurable
C, default 10); the underlying absolute constants are unspecified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bootstrap import ks_distance, proxy_draws
from .covariance import CovMatrix, cov_diagnostics, cov_error
from .lp import LpExponent, lp_norm, lp_norm_rows
from .sampling import RngSeed, mvn_sample

DEFAULT_C = 10.0


@dataclass
class ProbeReport:
    name: str
    estimate: float
    bound: float
    C: float
    n_mc: int
    passed: bool

    def csv_row(self, instance: str = "") -> str:
        return ",".join([
            self.name, instance, f"{self.estimate:.17g}", f"{self.bound:.17g}",
            f"{self.C:g}", str(self.n_mc), str(int(self.passed)),
        ])

    csv_header = "probe,instance,estimate,bound,C,n_mc,passed"


def _omega(p: LpExponent, d: int, r: int) -> float:
    """Concentration scale: sqrt(p r^(1/p)) for finite p, sqrt(log d) at the
    log-dimension/sup-norm end (the two branches agree within a factor e at
    the seam p = log d)."""
    if p.kind == "finite":
        return math.sqrt(p.p * r ** (1.0 / p.p))
    return math.sqrt(math.log(d))


def levy_concentration(S: CovMatrix, p: LpExponent, eps: float, n_mc: int,
                       rng: RngSeed, C: float = DEFAULT_C) -> ProbeReport:
    """Largest probability mass of ||X||_p, X ~ N(0, S), in any interval of
    width eps * ||sigma||_p / omega_p(d, r); passes when <= C * eps."""
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    if n_mc < 1000:
        raise ValueError("n_mc must be >= 1000")
    d = S.dim
    sigma = np.sqrt(np.diag(S.values))
    if not sigma.any():
        # degenerate covariance: every draw is 0, any window captures all mass
        return ProbeReport("levy", 1.0, eps, C, n_mc, 1.0 <= C * eps)
    diag = cov_diagnostics(S)
    width = eps * lp_norm(sigma, p, d_context=d) / _omega(p, d, max(diag.rank, 1))
    draws = np.sort(lp_norm_rows(mvn_sample(S.factor(), n_mc, rng), p, d_context=d))
    # exact sup over windows anchored at sample points, O(n_mc) two-pointer
    hi = np.searchsorted(draws, draws + width, side="right")
    estimate = float((hi - np.arange(n_mc)).max()) / n_mc
    return ProbeReport("levy", estimate, eps, C, n_mc, estimate <= C * eps)


def comparison_ks(Sx: CovMatrix, Sy: CovMatrix, p: LpExponent, n_mc: int,
                  rng: RngSeed, C: float = DEFAULT_C) -> ProbeReport:
    """KS distance between Monte Carlo lp-norm laws under Sx and Sy, against
    the covariance-difference bound (plus KS sampling noise)."""
    if Sx.dim != Sy.dim:
        raise ValueError("dimension mismatch")
    if n_mc < 1000:
        raise ValueError("n_mc must be >= 1000")
    d = Sx.dim
    Dx = proxy_draws(Sx, p, n_mc, rng.child(0))
    Dy = proxy_draws(Sy, p, n_mc, rng.child(1))
    estimate = ks_distance(Dx, Dy)
    err = cov_error(Sx, Sy, p if p.kind == "finite" else LpExponent.infinity())
    if p.kind == "finite":
        q = p.p
        delta_p = next(iter(err.delta_p.values()))
        sides = []
        for S in (Sx, Sy):
            r = max(cov_diagnostics(S).rank, 1)
            snorm = lp_norm(np.sqrt(np.diag(S.values)), p, d_context=d)
            if snorm > 0.0:
                sides.append(math.sqrt(q * q * d ** (1.0 / q) * r ** (1.0 / q) * delta_p) / snorm)
        bound = min(sides) if sides else math.inf
    else:
        delta_inf = next(iter(err.delta_p.values()))
        delta_op = err.delta_op
        denom = max(float(np.diag(Sx.values).max()), float(np.diag(Sy.values).max()))
        denom = math.sqrt(denom)
        bound = math.inf if denom == 0.0 else math.log(d) * math.sqrt(min(delta_op, delta_inf)) / denom
    # same-law instances sit at pure sampling noise; the two-sample KS scale
    noise = 1.36 * math.sqrt(2.0 / n_mc)
    passed = estimate <= C * bound + noise
    return ProbeReport("comparison_ks", estimate, bound, C, n_mc, passed)
