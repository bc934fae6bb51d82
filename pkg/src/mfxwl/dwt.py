"""Haar (order-1 Daubechies) wavelet pyramid with L1 normalization.

Scale index j runs from 1 (finest, blocks of 2 samples) to J = log2(N). The
coefficient at (j, k) covers samples [k 2^j, (k+1) 2^j) and equals

    d(j, k) = 2^-j * (sum of second half of block - sum of first half)

which is half the difference of the two half-block means. The 2^-j prefactor
is the L1 convention. Do not replace it with the orthonormal 2^-j/2: that
adds (p + q)/4 * j to every log-moment and shifts all scaling exponents.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .signal_io import MIN_LENGTH, Signal, is_dyadic

WAVELETS = ("haar",)
NORMALIZATIONS = ("l1", "l2")


@dataclass(frozen=True)
class WaveletPyramid:
    coeffs: tuple  # coeffs[j - 1] holds d(j, .)
    N: int
    wavelet: str = "haar"
    normalization: str = "l1"

    @property
    def J(self) -> int:
        return len(self.coeffs)

    def at(self, j: int) -> np.ndarray:
        return self.coeffs[j - 1]


def _as_array(signal) -> np.ndarray:
    if isinstance(signal, Signal):
        return signal.values
    return np.asarray(signal, dtype=np.float64).ravel()


def haar_pyramid(
    signal,
    wavelet: str = "haar",
    *,
    min_length: int = MIN_LENGTH,
    normalization: str = "l1",
) -> WaveletPyramid:
    """Full-depth Haar pyramid of a dyadic-length signal.

    ``min_length`` exists for hand-sized checks; analyses keep the default.
    ``normalization="l2"`` rescales d(j, .) by 2^(j/2) and is kept only as a
    negative control for the validation harness.
    """
    if wavelet not in WAVELETS:
        raise InputError(f"unsupported wavelet {wavelet!r}; available: {WAVELETS}")
    if normalization not in NORMALIZATIONS:
        raise InputError(f"unknown normalization {normalization!r}")
    x = _as_array(signal)
    n = x.size
    if not is_dyadic(n):
        raise InputError(f"signal length {n} is not a power of two")
    if n < min_length:
        raise InputError(f"signal length {n} is below the minimum {min_length}")

    s = x.astype(np.float64, copy=True)
    out = []
    while s.size > 1:
        even, odd = s[0::2], s[1::2]
        d = (odd - even) / 2.0
        s = (even + odd) / 2.0
        if normalization == "l2":
            d = d * 2.0 ** ((len(out) + 1) / 2.0)
        d.setflags(write=False)
        out.append(d)
    return WaveletPyramid(tuple(out), n, wavelet, normalization)


def pyramid_scales(p: WaveletPyramid) -> list[tuple[int, int]]:
    return [(j, p.N >> j) for j in range(1, p.J + 1)]


def dump_pyramid_csv(p: WaveletPyramid, path) -> None:
    """Debug dump, one row per coefficient: j, k, d."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("j,k,d\n")
        for j, d in enumerate(p.coeffs, start=1):
            for k, v in enumerate(d):
                fh.write(f"{j},{k},{v!r}\n")
