"""Synthetic benchmarks: deterministic binomial cascades and bivariate fBm.

Both come with closed-form references. For the cascades the joint scaling
exponents are

    zeta(p, q) = 1 - log2(px^(p/2) py^(q/2) + (1-px)^(p/2) (1-py)^(q/2))

and the bivariate fBm is monofractal with zeta(p, q) = p Hx/2 + q Hy/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import gammaln

from .errors import ConfigError, NumericalError
from .signal_io import Signal, SignalKind, SignalPair, is_dyadic

DENSE_MAX = 1 << 12


@dataclass(frozen=True)
class CascadeSpec:
    p_z: float
    iterations: int

    def __post_init__(self):
        if not 0.0 < self.p_z < 1.0:
            raise ConfigError(f"cascade weight p_z={self.p_z} must lie in (0, 1)")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ConfigError(f"iterations={self.iterations} must be a positive integer")


def binomial_measure(spec: CascadeSpec) -> Signal:
    """Deterministic p-model: every cell splits its mass as (p_z, 1 - p_z), left to right."""
    z = np.ones(1)
    w = np.array([spec.p_z, 1.0 - spec.p_z])
    for _ in range(int(spec.iterations)):
        z = np.outer(z, w).ravel()
    return Signal(z, name=f"binomial(p={spec.p_z},i={spec.iterations})", kind=SignalKind.MEASURE)


def analytic_zeta_single(p_z: float, q):
    q = np.asarray(q, dtype=np.float64)
    out = 1.0 - np.log2(p_z**q + (1.0 - p_z) ** q)
    return float(out) if out.ndim == 0 else out


def _cross_terms(p_x, p_y, p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    l1x, l1y = math.log(p_x), math.log(p_y)
    l2x, l2y = math.log1p(-p_x), math.log1p(-p_y)
    e1 = p / 2.0 * l1x + q / 2.0 * l1y
    e2 = p / 2.0 * l2x + q / 2.0 * l2y
    return e1, e2, (l1x, l1y, l2x, l2y)


def analytic_zeta_cross(p_x: float, p_y: float, p, q):
    e1, e2, _ = _cross_terms(p_x, p_y, p, q)
    out = 1.0 - np.logaddexp(e1, e2) / math.log(2.0)
    return float(out) if np.ndim(out) == 0 else out


def analytic_cross_spectrum(p_x: float, p_y: float, p, q):
    """Closed-form (h_x, h_y, D) of the cascade pair at orders (p, q).

    h_x = 2 dzeta/dp = -(w1 log2 p_x + w2 log2(1 - p_x)) with softmax
    weights w1, w2 of the two cascade branches; likewise for h_y.
    """
    e1, e2, (l1x, l1y, l2x, l2y) = _cross_terms(p_x, p_y, p, q)
    lse = np.logaddexp(e1, e2)
    w1, w2 = np.exp(e1 - lse), np.exp(e2 - lse)
    ln2 = math.log(2.0)
    hx = -(w1 * l1x + w2 * l2x) / ln2
    hy = -(w1 * l1y + w2 * l2y) / ln2
    zeta = 1.0 - lse / ln2
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    D = 1.0 + p * hx / 2.0 + q * hy / 2.0 - zeta
    if np.ndim(D) == 0:
        return float(hx), float(hy), float(D)
    return hx, hy, D


def pearson_correlation(x, y) -> float:
    a = x.values if isinstance(x, Signal) else np.asarray(x, dtype=np.float64)
    b = y.values if isinstance(y, Signal) else np.asarray(y, dtype=np.float64)
    if a.size != b.size or a.size < 2:
        raise ConfigError("correlation needs two equal-length series of at least 2 samples")
    a = a - a.mean()
    b = b - b.mean()
    sa, sb = float(a @ a), float(b @ b)
    if sa == 0.0 or sb == 0.0:
        raise NumericalError("correlation undefined: zero variance")
    return float(a @ b / math.sqrt(sa * sb))


# -- bivariate fractional Brownian motion -----------------------------------


def coherence_bound(H_xx: float, H_yy: float) -> float:
    """Largest admissible |rho| for the time-reversible bivariate fBm."""
    s = H_xx + H_yy
    log_num = gammaln(2 * H_xx + 1) + gammaln(2 * H_yy + 1)
    num = math.exp(log_num) * math.sin(math.pi * H_xx) * math.sin(math.pi * H_yy)
    den = math.exp(2 * gammaln(s + 1)) * math.sin(math.pi * s / 2.0) ** 2
    return math.sqrt(num / den)


@dataclass(frozen=True)
class BfbmSpec:
    H_xx: float
    H_yy: float
    rho: float
    n: int
    seed: int = 0

    def __post_init__(self):
        for name in ("H_xx", "H_yy"):
            h = getattr(self, name)
            if not 0.0 < h < 1.0:
                raise ConfigError(f"{name}={h} must lie in (0, 1)")
        if not -1.0 < self.rho < 1.0:
            raise ConfigError(f"rho={self.rho} must lie in (-1, 1)")
        if not is_dyadic(int(self.n)) or self.n < 16:
            raise ConfigError(f"n={self.n} must be a power of two >= 16")
        bound = coherence_bound(self.H_xx, self.H_yy)
        if abs(self.rho) > bound:
            raise ConfigError(
                f"inadmissible bivariate fBm: |rho|={abs(self.rho)} exceeds the coherence bound "
                f"{bound:.4f} for H_xx={self.H_xx}, H_yy={self.H_yy}"
            )


def _fgn_acov(h: np.ndarray, H2: float, scale: float) -> np.ndarray:
    """scale/2 (|h-1|^H2 - 2|h|^H2 + |h+1|^H2); H2 is the summed Hurst exponent."""
    h = np.abs(np.asarray(h, dtype=np.float64))
    return scale / 2.0 * (np.abs(h - 1) ** H2 - 2 * h**H2 + (h + 1) ** H2)


def increment_covariance(spec: BfbmSpec, lags: np.ndarray):
    """Auto- and cross-covariances of the unit-variance increments at ``lags``."""
    gxx = _fgn_acov(lags, 2 * spec.H_xx, 1.0)
    gyy = _fgn_acov(lags, 2 * spec.H_yy, 1.0)
    gxy = _fgn_acov(lags, spec.H_xx + spec.H_yy, spec.rho)
    return gxx, gyy, gxy


def _bfgn_circulant(spec: BfbmSpec, rng: np.random.Generator):
    n = int(spec.n)
    M = 2 * n
    lags = np.concatenate([np.arange(n + 1), np.arange(n - 1, 0, -1)])
    gxx, gyy, gxy = increment_covariance(spec, lags)
    lxx = np.fft.fft(gxx).real
    lyy = np.fft.fft(gyy).real
    lxy = np.fft.fft(gxy).real
    # 2x2 symmetric eigen-system per frequency
    tr = (lxx + lyy) / 2.0
    disc = np.sqrt(((lxx - lyy) / 2.0) ** 2 + lxy**2)
    lam_min = tr - disc
    tol = 1e-10 * max(1.0, float(np.max(np.abs(tr))))
    if np.min(lam_min) < -tol:
        return None
    # Cholesky of [[lxx, lxy], [lxy, lyy]], clipped at zero
    a = np.sqrt(np.maximum(lxx, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(a > 0, lxy / a, 0.0)
    d = np.sqrt(np.maximum(lyy - c**2, 0.0))
    z1 = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    z2 = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    yx = np.fft.fft(a * z1) / math.sqrt(M)
    yy = np.fft.fft(c * z1 + d * z2) / math.sqrt(M)
    return yx.real[:n], yy.real[:n]


def _bfgn_dense(spec: BfbmSpec, rng: np.random.Generator):
    n = int(spec.n)
    lags = np.arange(n)
    gxx, gyy, gxy = increment_covariance(spec, lags)
    C = np.block([[linalg.toeplitz(gxx), linalg.toeplitz(gxy)], [linalg.toeplitz(gxy), linalg.toeplitz(gyy)]])
    try:
        L = linalg.cholesky(C, lower=True)
    except linalg.LinAlgError:
        raise NumericalError("bivariate fGn covariance is not positive definite") from None
    v = L @ rng.standard_normal(2 * n)
    return v[:n], v[n:]


def bfgn(spec: BfbmSpec, method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Unit-variance bivariate fractional Gaussian noise (the fBm increments).

    ``auto`` uses circulant embedding and falls back to a dense Cholesky
    factorization for n <= 4096 when the embedding is not nonnegative definite.
    """
    if method not in ("auto", "circulant", "dense"):
        raise ConfigError(f"unknown bfbm method {method!r}")
    rng = np.random.default_rng(spec.seed)
    if method == "dense":
        return _bfgn_dense(spec, rng)
    out = _bfgn_circulant(spec, rng)
    if out is not None:
        return out
    if method == "auto" and spec.n <= DENSE_MAX:
        return _bfgn_dense(spec, np.random.default_rng(spec.seed))
    raise NumericalError(
        f"circulant embedding is not nonnegative definite for {spec}; "
        f"dense fallback only available for n <= {DENSE_MAX}"
    )


def bfbm(spec: BfbmSpec, method: str = "auto") -> SignalPair:
    """Bivariate fBm paths (cumulative sums of the bivariate fGn)."""
    dx, dy = bfgn(spec, method)
    x = Signal(np.cumsum(dx), name=f"bfbm_x(H={spec.H_xx})", kind=SignalKind.RAW)
    y = Signal(np.cumsum(dy), name=f"bfbm_y(H={spec.H_yy})", kind=SignalKind.RAW)
    return SignalPair(x, y, int(spec.n))
