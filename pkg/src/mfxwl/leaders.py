"""Wavelet leaders: supremum of |d| over the 3-interval neighbourhood and all finer scales.

Two passes, both linear in N. The first builds subtree maxima
M(j, k) = max(|d(j, k)|, M(j-1, 2k), M(j-1, 2k+1)), the largest coefficient
inside the dyadic interval at (j, k). The second takes the maximum of M over
the interval and its two same-scale neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _accel
from .dwt import WaveletPyramid
from .errors import ConfigError, NumericalError

BOUNDARY_POLICIES = ("clamp", "discard")


@dataclass(frozen=True)
class LeaderPyramid:
    leaders: tuple  # leaders[i] belongs to scale scales[i]
    scales: tuple
    boundary_policy: str
    j_min: int
    N: int

    def at(self, j: int) -> np.ndarray:
        return self.leaders[self.scales.index(j)]

    def n_j(self, j: int) -> int:
        return self.at(j).size


@_accel.njit
def _subtree_step_nb(d, prev):
    out = np.empty(d.size)
    for k in range(d.size):
        a = abs(d[k])
        b = prev[2 * k]
        c = prev[2 * k + 1]
        if b > a:
            a = b
        if c > a:
            a = c
        out[k] = a
    return out


def _subtree_step_np(d, prev):
    return np.maximum(np.abs(d), np.maximum(prev[0::2], prev[1::2]))


@_accel.njit
def _neighbour_max_nb(m):
    n = m.size
    out = np.empty(n)
    for k in range(n):
        a = m[k]
        if k > 0 and m[k - 1] > a:
            a = m[k - 1]
        if k < n - 1 and m[k + 1] > a:
            a = m[k + 1]
        out[k] = a
    return out


def _neighbour_max_np(m):
    out = m.copy()
    if m.size > 1:
        np.maximum(out[1:], m[:-1], out=out[1:])
        np.maximum(out[:-1], m[1:], out=out[:-1])
    return out


def subtree_maxima(p: WaveletPyramid) -> list[np.ndarray]:
    """M(j, k) for j = 1..J, as a list indexed by j - 1."""
    step = _subtree_step_nb if _accel.numba_enabled() else _subtree_step_np
    out = []
    prev = None
    for d in p.coeffs:
        d = np.ascontiguousarray(d, dtype=np.float64)
        m = np.abs(d) if prev is None else step(d, prev)
        out.append(m)
        prev = m
    return out


def wavelet_leaders(
    p: WaveletPyramid,
    boundary_policy: str = "clamp",
    *,
    min_leaders: int = 4,
    j_min: int = 1,
) -> LeaderPyramid:
    """Leader pyramid L(j, k) for j = j_min .. j_max.

    With ``clamp`` the edge positions use only the neighbours that exist;
    with ``discard`` the two edge positions of every scale are dropped.
    Scales left with fewer than ``min_leaders`` positions are excluded.

    Raises:
        NumericalError: all coefficients are zero (constant signal).
    """
    if boundary_policy not in BOUNDARY_POLICIES:
        raise ConfigError(f"unknown boundary policy {boundary_policy!r}")
    if j_min < 1:
        raise ConfigError("j_min must be >= 1")
    M = subtree_maxima(p)
    if not np.any(M[-1] > 0):
        raise NumericalError("degenerate signal: every wavelet coefficient is zero")

    nmax = _neighbour_max_nb if _accel.numba_enabled() else _neighbour_max_np
    leaders, scales = [], []
    for j in range(j_min, p.J + 1):
        L = nmax(M[j - 1])
        if boundary_policy == "discard":
            L = L[1:-1]
        if L.size < min_leaders:
            continue
        L.setflags(write=False)
        leaders.append(L)
        scales.append(j)
    if not scales:
        raise NumericalError(
            f"no scale has at least {min_leaders} leaders (N={p.N}, policy={boundary_policy})"
        )
    return LeaderPyramid(tuple(leaders), tuple(scales), boundary_policy, j_min, p.N)


def dump_leaders_csv(lp: LeaderPyramid, path) -> None:
    """Debug dump, one row per leader: j, k, L."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("j,k,L\n")
        for j, L in zip(lp.scales, lp.leaders):
            for k, v in enumerate(L):
                fh.write(f"{j},{k},{v!r}\n")
