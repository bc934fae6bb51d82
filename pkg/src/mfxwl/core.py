"""Joint partition functions and multifractal spectra from paired wavelet leaders.

For a moment pair (p, q) and scale j the joint partition function is

    S(p, q, j) = 1/n_j * sum_k Lx(j, k)^(p/2) * Ly(j, k)^(q/2)

and zeta(p, q) is the slope of ln S against j ln 2. Singularity strengths
and the spectrum come either from the Legendre route (finite differences of
zeta) or from the direct route (slopes of mu-weighted log sums, with
mu = normalized summands of S).

Every moment sum is evaluated in log space with a max shift, so extreme
orders do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .errors import ConfigError, NumericalError
from .leaders import LeaderPyramid

LN2 = math.log(2.0)
MU_TOL = 1e-10
FD_SCHEMES = ("central", "forward")


@dataclass(frozen=True)
class MomentGrid:
    p_values: np.ndarray
    q_values: np.ndarray

    def __post_init__(self):
        for name in ("p_values", "q_values"):
            v = np.array(getattr(self, name), dtype=np.float64).ravel()
            if v.size == 0:
                raise ConfigError(f"{name} is empty")
            if v.size > 1:
                dv = np.diff(v)
                if np.any(dv <= 0):
                    raise ConfigError(f"{name} must be strictly ascending")
                if not np.allclose(dv, dv[0], rtol=1e-9, atol=1e-12):
                    raise ConfigError(f"{name} must be uniformly spaced")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def uniform(cls, p_range=(-4.0, 4.0), q_range=(-4.0, 4.0), step=0.5) -> "MomentGrid":
        return cls(_arange(p_range, step), _arange(q_range, step))

    @property
    def dp(self) -> float:
        return float(self.p_values[1] - self.p_values[0]) if self.p_values.size > 1 else float("nan")

    @property
    def dq(self) -> float:
        return float(self.q_values[1] - self.q_values[0]) if self.q_values.size > 1 else float("nan")

    @property
    def shape(self) -> tuple[int, int]:
        return self.p_values.size, self.q_values.size

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.p_values, self.q_values, indexing="ij")


def _arange(bounds, step) -> np.ndarray:
    lo, hi = float(bounds[0]), float(bounds[1])
    if step <= 0:
        raise ConfigError("grid step must be positive")
    if hi < lo:
        raise ConfigError(f"empty range [{lo}, {hi}]")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    # lo + i*step rather than cumulative adds keeps grid nodes exact
    return lo + step * np.arange(n, dtype=np.float64)


@dataclass(frozen=True)
class PartitionTable:
    grid: MomentGrid
    scales: np.ndarray  # j values
    n_j: np.ndarray
    log_S: np.ndarray  # [P, Q, scales]
    A_x: np.ndarray
    A_y: np.ndarray
    A_mu: np.ndarray
    mu_sum: np.ndarray

    @property
    def S(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_S)


@dataclass(frozen=True)
class ZetaSurface:
    grid: MomentGrid
    zeta: np.ndarray
    r2: np.ndarray
    intercept: np.ndarray
    fit_range: tuple[int, int]

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.zeta)


@dataclass(frozen=True)
class SpectrumSurface:
    grid: MomentGrid
    h_x: np.ndarray
    h_y: np.ndarray
    D: np.ndarray
    method: str
    fit_range: tuple[int, int]
    fd_scheme: str | None = None
    r2: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DiagonalResult:
    q_values: np.ndarray
    zeta: np.ndarray
    r2: np.ndarray
    h_legendre: np.ndarray
    D_legendre: np.ndarray
    h_direct: np.ndarray
    D_direct: np.ndarray
    fit_range: tuple[int, int]


# -- moment kernels ---------------------------------------------------------


@_accel.njit(parallel=True)
def _moments_nb(lnx, lny, a, b):
    m = a.size
    n = lnx.size
    log_s = np.empty(m)
    ax = np.empty(m)
    ay = np.empty(m)
    amu = np.empty(m)
    msum = np.empty(m)
    for i in _accel.prange(m):
        w = np.empty(n)
        wmax = -np.inf
        for k in range(n):
            t = 0.0
            if a[i] != 0.0:
                t += a[i] * lnx[k]
            if b[i] != 0.0:
                t += b[i] * lny[k]
            w[k] = t
            if t > wmax:
                wmax = t
        z = 0.0
        for k in range(n):
            z += math.exp(w[k] - wmax)
        lz = math.log(z)
        sx = 0.0
        sy = 0.0
        sm = 0.0
        st = 0.0
        for k in range(n):
            lmu = w[k] - wmax - lz
            mu = math.exp(lmu)
            if mu > 0.0:
                sx += mu * lnx[k]
                sy += mu * lny[k]
                sm += mu * lmu
                st += mu
        log_s[i] = wmax + lz - math.log(n)
        ax[i] = sx
        ay[i] = sy
        amu[i] = sm
        msum[i] = st
    return log_s, ax, ay, amu, msum


def _moments_np(lnx, lny, a, b, chunk=16):
    m, n = a.size, lnx.size
    out = [np.empty(m) for _ in range(5)]
    for s in range(0, m, chunk):
        sl = slice(s, min(s + chunk, m))
        aa, bb = a[sl, None], b[sl, None]
        with np.errstate(invalid="ignore"):
            tx = np.where(aa != 0.0, aa * lnx[None, :], 0.0)
            ty = np.where(bb != 0.0, bb * lny[None, :], 0.0)
        w = tx + ty
        wmax = w.max(axis=1, keepdims=True)
        e = np.exp(w - wmax)
        z = e.sum(axis=1, keepdims=True)
        lz = np.log(z)
        lmu = w - wmax - lz
        mu = np.exp(lmu)
        pos = mu > 0.0
        with np.errstate(invalid="ignore"):
            out[1][sl] = np.where(pos, mu * lnx[None, :], 0.0).sum(axis=1)
            out[2][sl] = np.where(pos, mu * lny[None, :], 0.0).sum(axis=1)
            out[3][sl] = np.where(pos, mu * lmu, 0.0).sum(axis=1)
        out[4][sl] = np.where(pos, mu, 0.0).sum(axis=1)
        out[0][sl] = (wmax + lz)[:, 0] - math.log(n)
    return tuple(out)


def _log_leaders(L: np.ndarray, epsilon: float | None) -> np.ndarray:
    L = np.asarray(L, dtype=np.float64)
    if epsilon is not None:
        L = np.maximum(L, epsilon)
    with np.errstate(divide="ignore"):
        return np.log(L)


def _moment_sums(Lx, Ly, p, q, scales, epsilon=None):
    """Per-(p, q) pair and per-scale log S and accumulators, shape [m, len(scales)]."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    if Lx.N != Ly.N:
        raise ConfigError(f"leader pyramids come from different lengths ({Lx.N} vs {Ly.N})")
    if len(scales) == 0:
        raise NumericalError("empty scale range")
    kernel = _moments_nb if _accel.numba_enabled() else _moments_np
    a, b = p / 2.0, q / 2.0
    shape = (p.size, len(scales))
    res = [np.empty(shape) for _ in range(5)]
    for col, j in enumerate(scales):
        if j not in Lx.scales or j not in Ly.scales:
            raise ConfigError(f"scale j={j} is not available in both leader pyramids")
        lx, ly = Lx.at(j), Ly.at(j)
        if lx.size != ly.size:
            raise ConfigError(f"leader counts differ at j={j}")
        lnx, lny = _log_leaders(lx, epsilon), _log_leaders(ly, epsilon)
        zx, zy = np.isneginf(lnx).any(), np.isneginf(lny).any()
        if (zx and np.any(a < 0)) or (zy and np.any(b < 0)):
            raise NumericalError(
                f"zero wavelet leader at scale j={j} with a negative moment order; "
                "pass an epsilon floor to regularize"
            )
        vals = kernel(lnx, lny, a, b)
        for r, v in zip(res, vals):
            r[:, col] = v
    return res


def partition_table(
    Lx: LeaderPyramid,
    Ly: LeaderPyramid,
    grid: MomentGrid,
    scales=None,
    *,
    epsilon: float | None = None,
) -> PartitionTable:
    """Joint partition function over ``grid`` at every scale in ``scales``.

    ``scales`` defaults to the scales shared by both pyramids. ``epsilon``
    floors leaders (L <- max(L, epsilon)) before taking logs.

    Raises:
        NumericalError: a zero leader meets a negative order, or the mu
            weights fail to normalize.
    """
    if scales is None:
        scales = [j for j in Lx.scales if j in Ly.scales]
    scales = [int(j) for j in scales]
    P, Q = grid.mesh()
    log_s, ax, ay, amu, msum = _moment_sums(Lx, Ly, P.ravel(), Q.ravel(), scales, epsilon)
    finite = np.isfinite(msum)
    if np.any(np.abs(msum[finite] - 1.0) > MU_TOL):
        raise NumericalError("mu weights do not sum to one")
    shape = grid.shape + (len(scales),)
    return PartitionTable(
        grid=grid,
        scales=np.asarray(scales),
        n_j=np.asarray([Lx.n_j(j) for j in scales]),
        log_S=log_s.reshape(shape),
        A_x=ax.reshape(shape),
        A_y=ay.reshape(shape),
        A_mu=amu.reshape(shape),
        mu_sum=msum.reshape(shape),
    )


# -- regression -------------------------------------------------------------


def loglog_fit(xs, ys) -> tuple[float, float, float]:
    """Ordinary least squares line; returns (slope, intercept, r2)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size != ys.size:
        raise ValueError("xs and ys differ in length")
    if xs.size < 3:
        raise ValueError("need at least 3 points for a fit")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("non-finite values in fit")
    s, c, r2 = _fit_rows(xs, ys[None, :])
    if not np.isfinite(s[0]):
        raise ValueError("degenerate abscissa: zero variance")
    return float(s[0]), float(c[0]), float(r2[0])


def _fit_rows(xs, Y):
    """Row-wise OLS of Y[i, :] on xs. Rows with non-finite data give NaN."""
    xs = np.asarray(xs, dtype=np.float64)
    xc = xs - xs.mean()
    sxx = float(xc @ xc)
    n_rows = Y.shape[0]
    if sxx == 0.0:
        nan = np.full(n_rows, np.nan)
        return nan, nan.copy(), nan.copy()
    ok = np.all(np.isfinite(Y), axis=1)
    Yf = np.where(ok[:, None], Y, 0.0)
    ym = Yf.mean(axis=1)
    slope = (Yf - ym[:, None]) @ xc / sxx
    icpt = ym - slope * xs.mean()
    resid = Yf - (slope[:, None] * xs[None, :] + icpt[:, None])
    ss_res = np.sum(resid**2, axis=1)
    ss_tot = np.sum((Yf - ym[:, None]) ** 2, axis=1)
    flat = np.ptp(Yf, axis=1) == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(ss_tot > 0, 1.0 - ss_res / np.where(ss_tot > 0, ss_tot, 1.0), 1.0)
    slope = np.where(flat, 0.0, slope)
    icpt = np.where(flat, Yf[:, 0], icpt)
    r2 = np.where(flat, 1.0, r2)
    for arr in (slope, icpt, r2):
        arr[~ok] = np.nan
    return slope, icpt, r2


def _fit_columns(table: PartitionTable, fit_range):
    j_lo, j_hi = _check_fit_range(table.scales, fit_range)
    sel = (table.scales >= j_lo) & (table.scales <= j_hi)
    return sel, table.scales[sel] * LN2, (j_lo, j_hi)


def _check_fit_range(scales, fit_range) -> tuple[int, int]:
    j_lo, j_hi = int(fit_range[0]), int(fit_range[1])
    scales = [int(j) for j in scales]
    if j_lo >= j_hi:
        raise ConfigError(f"fit range ({j_lo}, {j_hi}) is empty: need j_lo < j_hi")
    if j_lo < min(scales) or j_hi > max(scales):
        raise ConfigError(
            f"fit range exceeds available scales: ({j_lo}, {j_hi}) not within "
            f"[{min(scales)}, {max(scales)}]"
        )
    if sum(j_lo <= j <= j_hi for j in scales) < 3:
        raise ConfigError(f"fit range ({j_lo}, {j_hi}) holds fewer than 3 scales")
    return j_lo, j_hi


def default_fit_range(scales, J: int) -> tuple[int, int]:
    """j from 3 to J - 3, clipped to what the leader pyramid offers."""
    scales = sorted(int(j) for j in scales)
    lo, hi = max(3, scales[0]), min(J - 3, scales[-1])
    if sum(lo <= j <= hi for j in scales) < 3:
        lo, hi = scales[0], scales[-1]
    if sum(lo <= j <= hi for j in scales) < 3:
        raise ConfigError(f"only {len(scales)} scales available; need at least 3 to fit")
    return lo, hi


def _rowfit(values, sel, x, shape):
    s, c, r2 = _fit_rows(x, values[..., sel].reshape(-1, int(sel.sum())))
    return s.reshape(shape), c.reshape(shape), r2.reshape(shape)


# -- estimators ---------------------------------------------------------------


def scaling_exponents(table: PartitionTable, fit_range) -> ZetaSurface:
    """zeta(p, q) as the slope of ln S versus j ln 2; invalid cells become NaN."""
    sel, x, fr = _fit_columns(table, fit_range)
    z, c, r2 = _rowfit(table.log_S, sel, x, table.grid.shape)
    return ZetaSurface(table.grid, z, r2, c, fr)


def _differentiate(z: np.ndarray, step: float, axis: int, scheme: str) -> np.ndarray:
    if scheme == "central":
        return np.gradient(z, step, axis=axis, edge_order=1)
    fwd = np.diff(z, axis=axis) / step
    last = np.take(fwd, [-1], axis=axis)
    return np.concatenate([fwd, last], axis=axis)


def legendre_spectrum(z: ZetaSurface, fd_scheme: str = "central") -> SpectrumSurface:
    """h_x = 2 dzeta/dp, h_y = 2 dzeta/dq, D = 1 + p h_x/2 + q h_y/2 - zeta.

    Central differences in the interior, one-sided at the grid edges. The
    ``forward`` scheme uses forward differences everywhere except the last
    node (backward).
    """
    if fd_scheme not in FD_SCHEMES:
        raise ConfigError(f"unknown finite-difference scheme {fd_scheme!r}")
    P, Q = z.grid.shape
    if P < 3 or Q < 3:
        raise ConfigError(f"grid {P}x{Q} is too small for finite differences (need >= 3 per axis)")
    hx = 2.0 * _differentiate(z.zeta, z.grid.dp, 0, fd_scheme)
    hy = 2.0 * _differentiate(z.zeta, z.grid.dq, 1, fd_scheme)
    pp, qq = z.grid.mesh()
    D = 1.0 + pp * hx / 2.0 + qq * hy / 2.0 - z.zeta
    return SpectrumSurface(z.grid, hx, hy, D, "legendre", z.fit_range, fd_scheme)


def direct_spectrum(table: PartitionTable, fit_range) -> SpectrumSurface:
    """Slopes of sum mu ln Lx, sum mu ln Ly and sum mu ln mu versus j ln 2."""
    sel, x, fr = _fit_columns(table, fit_range)
    shape = table.grid.shape
    hx, _, r2x = _rowfit(table.A_x, sel, x, shape)
    hy, _, r2y = _rowfit(table.A_y, sel, x, shape)
    D, _, r2d = _rowfit(table.A_mu, sel, x, shape)
    return SpectrumSurface(table.grid, hx, hy, D, "direct", fr, None, {"h_x": r2x, "h_y": r2y, "D": r2d})


def diagonal_analysis(
    Lx: LeaderPyramid,
    Ly: LeaderPyramid,
    q_values,
    fit_range,
    *,
    epsilon: float | None = None,
    fd_scheme: str = "central",
) -> DiagonalResult:
    """The p = q restriction, with h_xy = (h_x + h_y) / 2 from both routes.

    The Legendre route differentiates zeta(q, q) along q, which requires a
    uniform q grid of at least 3 points. The direct route regresses
    sum_k mu ln (Lx Ly)^(1/2) on j ln 2.
    """
    q = MomentGrid(q_values, q_values).q_values
    if q.size < 3:
        raise ConfigError("diagonal analysis needs at least 3 moment orders")
    if fd_scheme not in FD_SCHEMES:
        raise ConfigError(f"unknown finite-difference scheme {fd_scheme!r}")
    scales = [j for j in Lx.scales if j in Ly.scales]
    j_lo, j_hi = _check_fit_range(scales, fit_range)
    scales = [j for j in scales if j_lo <= j <= j_hi]
    log_s, ax, ay, amu, msum = _moment_sums(Lx, Ly, q, q, scales, epsilon)
    finite = np.isfinite(msum)
    if np.any(np.abs(msum[finite] - 1.0) > MU_TOL):
        raise NumericalError("mu weights do not sum to one")
    x = np.asarray(scales) * LN2
    zeta, _, r2 = _fit_rows(x, log_s)
    h_dir, _, _ = _fit_rows(x, (ax + ay) / 2.0)
    D_dir, _, _ = _fit_rows(x, amu)
    dq = float(q[1] - q[0])
    h_leg = _differentiate(zeta, dq, 0, fd_scheme)
    D_leg = 1.0 + q * h_leg - zeta
    return DiagonalResult(q, zeta, r2, h_leg, D_leg, h_dir, D_dir, (j_lo, j_hi))


def plane_fit(z: ZetaSurface) -> tuple[float, float, float, float]:
    """Least-squares plane zeta ~ a p + b q + c over valid cells; returns (a, b, c, r2).

    r2 close to one means zeta is linear in the orders, i.e. the pair is
    monofractal.
    """
    pp, qq = z.grid.mesh()
    ok = z.valid
    if ok.sum() < 6:
        raise ConfigError(f"plane fit needs at least 6 valid cells, have {int(ok.sum())}")
    A = np.column_stack([pp[ok], qq[ok], np.ones(int(ok.sum()))])
    y = z.zeta[ok]
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < 3:
        raise ConfigError("degenerate grid: p and q do not both vary")
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), float(coef[2]), r2
