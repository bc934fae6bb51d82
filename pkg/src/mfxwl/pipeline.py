"""End-to-end analysis of a series pair and its on-disk artifacts."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .core import (
    DiagonalResult,
    MomentGrid,
    PartitionTable,
    SpectrumSurface,
    ZetaSurface,
    default_fit_range,
    diagonal_analysis,
    direct_spectrum,
    legendre_spectrum,
    partition_table,
    plane_fit,
    scaling_exponents,
)
from .dwt import haar_pyramid
from .errors import ConfigError, InputError
from .leaders import BOUNDARY_POLICIES, LeaderPyramid, wavelet_leaders
from .signal_io import Signal, SignalPair, align_pair, apply_transform, load_series

TRANSFORMS = ("none", "returns", "volatility")


@dataclass
class AnalysisConfig:
    p_range: tuple = (-4.0, 4.0)
    q_range: tuple = (-4.0, 4.0)
    step: float = 0.5
    fit_range: tuple | None = None  # None: j from 3 to J - 3
    boundary: str = "clamp"
    fd_scheme: str = "central"
    epsilon: float | None = None
    transform: str = "none"
    # Inputs are treated as increments (returns, measures, noises) and
    # integrated before the wavelet transform. Disable for paths.
    integrate: bool = True
    align: str = "truncate_head"
    min_leaders: int = 4
    x_column: int | str = 0
    y_column: int | str = 0
    header: bool | None = None
    delimiter: str = ","
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("p_range", "q_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise ConfigError(f"{name} must be an increasing pair, got ({lo}, {hi})")
        if not self.step > 0:
            raise ConfigError("step must be positive")
        if self.fit_range is not None:
            lo, hi = self.fit_range
            if int(lo) != lo or int(hi) != hi or lo < 1 or lo >= hi:
                raise ConfigError(f"fit range must be integers with 1 <= j_lo < j_hi, got {self.fit_range}")
        if self.boundary not in BOUNDARY_POLICIES:
            raise ConfigError(f"boundary must be one of {BOUNDARY_POLICIES}")
        if self.fd_scheme not in ("central", "forward"):
            raise ConfigError("fd scheme must be 'central' or 'forward'")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.transform not in TRANSFORMS:
            raise ConfigError(f"transform must be one of {TRANSFORMS}")
        if self.align not in ("truncate_head", "truncate_tail"):
            raise ConfigError("align must be truncate_head or truncate_tail")
        if self.min_leaders < 1:
            raise ConfigError("min_leaders must be >= 1")

    def grid(self) -> MomentGrid:
        return MomentGrid.uniform(self.p_range, self.q_range, self.step)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k in ("p_range", "q_range", "fit_range"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        for k in ("p_range", "q_range", "fit_range"):
            if d.get(k) is not None:
                d[k] = tuple(d[k])
        return cls(**d)


@dataclass
class Analysis:
    config: AnalysisConfig
    pair: SignalPair
    Lx: LeaderPyramid
    Ly: LeaderPyramid
    fit_range: tuple
    table: PartitionTable
    zeta: ZetaSurface
    legendre: SpectrumSurface
    direct: SpectrumSurface
    diagonal: DiagonalResult
    plane: dict = field(default_factory=dict)


def leaders_of(signal, config: AnalysisConfig, *, normalization: str = "l1") -> LeaderPyramid:
    v = signal.values if isinstance(signal, Signal) else np.asarray(signal, dtype=np.float64)
    if config.integrate:
        v = np.cumsum(v)
    p = haar_pyramid(v, normalization=normalization)
    return wavelet_leaders(p, config.boundary, min_leaders=config.min_leaders)


def analyze_pair(pair: SignalPair, config: AnalysisConfig | None = None, *, normalization: str = "l1") -> Analysis:
    """Run the full joint analysis on an aligned pair."""
    config = config or AnalysisConfig()
    Lx = leaders_of(pair.x, config, normalization=normalization)
    Ly = leaders_of(pair.y, config, normalization=normalization)
    scales = [j for j in Lx.scales if j in Ly.scales]
    if config.fit_range is None:
        fr = default_fit_range(scales, pair.octaves)
    else:
        fr = (int(config.fit_range[0]), int(config.fit_range[1]))
    grid = config.grid()
    table = partition_table(Lx, Ly, grid, scales, epsilon=config.epsilon)
    zeta = scaling_exponents(table, fr)
    leg = legendre_spectrum(zeta, config.fd_scheme)
    direct = direct_spectrum(table, fr)
    diag = diagonal_analysis(Lx, Ly, grid.q_values, fr, epsilon=config.epsilon, fd_scheme=config.fd_scheme)
    try:
        a, b, c, r2 = plane_fit(zeta)
        plane = {"a": a, "b": b, "c": c, "r2": r2, "h_x_mean": 2 * a, "h_y_mean": 2 * b, "D_mean": 1 - c}
    except ConfigError as exc:
        plane = {"error": str(exc)}
    return Analysis(config, pair, Lx, Ly, fr, table, zeta, leg, direct, diag, plane)


def load_pair(x_path, y_path, config: AnalysisConfig) -> SignalPair:
    x = load_series(x_path, config.x_column, header=config.header, delimiter=config.delimiter)
    y = load_series(y_path, config.y_column, header=config.header, delimiter=config.delimiter)
    x = apply_transform(x, config.transform)
    y = apply_transform(y, config.transform)
    return align_pair(x, y, config.align)


# -- artifacts ------------------------------------------------------------------


def _num(v) -> str:
    return repr(float(v))


def _jsonable(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 0:
        v = float(a)
        return v if math.isfinite(v) else None
    return [_jsonable(v) for v in a]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_surface(path: Path, grid: MomentGrid, cols: dict) -> None:
    pp, qq = grid.mesh()
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["p", "q", *cols]) + "\n")
        for idx in np.ndindex(*grid.shape):
            row = [_num(pp[idx]), _num(qq[idx])] + [_num(c[idx]) for c in cols.values()]
            fh.write(",".join(row) + "\n")


def write_artifacts(an: Analysis, out_dir) -> dict:
    """Write all surfaces and the JSON summary; returns {filename: sha256}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid, t = an.table.grid, an.table

    pp, qq = grid.mesh()
    with (out / "partition.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("p,q,j,n_j,log_S,A_x,A_y,A_mu\n")
        for idx in np.ndindex(*grid.shape):
            for c, j in enumerate(t.scales):
                i3 = idx + (c,)
                fh.write(
                    f"{_num(pp[idx])},{_num(qq[idx])},{int(j)},{int(t.n_j[c])},"
                    f"{_num(t.log_S[i3])},{_num(t.A_x[i3])},{_num(t.A_y[i3])},{_num(t.A_mu[i3])}\n"
                )
    _write_surface(out / "zeta.csv", grid, {"zeta": an.zeta.zeta, "r2": an.zeta.r2, "intercept": an.zeta.intercept})
    _write_surface(out / "spectrum_legendre.csv", grid, {"h_x": an.legendre.h_x, "h_y": an.legendre.h_y, "D": an.legendre.D})
    _write_surface(
        out / "spectrum_direct.csv",
        grid,
        {
            "h_x": an.direct.h_x,
            "h_y": an.direct.h_y,
            "D": an.direct.D,
            "r2_h_x": an.direct.r2["h_x"],
            "r2_h_y": an.direct.r2["h_y"],
            "r2_D": an.direct.r2["D"],
        },
    )
    d = an.diagonal
    with (out / "diagonal.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("q,zeta,r2,h_legendre,D_legendre,h_direct,D_direct\n")
        for i in range(d.q_values.size):
            vals = (d.q_values[i], d.zeta[i], d.r2[i], d.h_legendre[i], d.D_legendre[i], d.h_direct[i], d.D_direct[i])
            fh.write(",".join(_num(v) for v in vals) + "\n")

    summary = {
        "length": an.pair.length,
        "scales": [int(j) for j in t.scales],
        "n_j": [int(n) for n in t.n_j],
        "fit_range": list(an.fit_range),
        "grid": {
            "p_values": _jsonable(grid.p_values),
            "q_values": _jsonable(grid.q_values),
            "dp": grid.dp,
            "dq": grid.dq,
        },
        "zeta": _jsonable(an.zeta.zeta),
        "zeta_r2": _jsonable(an.zeta.r2),
        "legendre": {"h_x": _jsonable(an.legendre.h_x), "h_y": _jsonable(an.legendre.h_y), "D": _jsonable(an.legendre.D), "fd_scheme": an.legendre.fd_scheme},
        "direct": {"h_x": _jsonable(an.direct.h_x), "h_y": _jsonable(an.direct.h_y), "D": _jsonable(an.direct.D)},
        "diagonal": {
            "q": _jsonable(d.q_values),
            "zeta": _jsonable(d.zeta),
            "h_legendre": _jsonable(d.h_legendre),
            "h_direct": _jsonable(d.h_direct),
            "D_legendre": _jsonable(d.D_legendre),
            "D_direct": _jsonable(d.D_direct),
        },
        "plane_fit": {k: (v if isinstance(v, str) else _jsonable(v)) for k, v in an.plane.items()},
        "diagnostics": {
            "invalid_cells": int((~an.zeta.valid).sum()),
            "min_r2": _jsonable(np.nanmin(an.zeta.r2)) if an.zeta.valid.any() else None,
            "mean_direct_D": _jsonable(np.nanmean(an.direct.D)) if np.isfinite(an.direct.D).any() else None,
        },
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    names = ["partition.csv", "zeta.csv", "spectrum_legendre.csv", "spectrum_direct.csv", "diagonal.csv", "summary.json"]
    return {n: sha256_file(out / n) for n in names}


def write_manifest(out_dir, config: AnalysisConfig, inputs: dict, artifacts: dict) -> Path:
    manifest = {
        "tool": "mfxwl",
        "version": __version__,
        "backend": _accel.backend_name(),
        "config": config.to_dict(),
        "inputs": {k: {"path": str(Path(p).resolve()), "sha256": sha256_file(p)} for k, p in inputs.items()},
        "artifacts": artifacts,
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(path) -> tuple[AnalysisConfig, str, str]:
    """Config and input paths from a manifest; input hashes are re-checked."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"manifest not found: {path}")
    try:
        m = json.loads(path.read_text(encoding="utf-8"))
        cfg = AnalysisConfig.from_dict(m["config"])
        inputs = m["inputs"]
        xp, yp = inputs["x"]["path"], inputs["y"]["path"]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed manifest {path}: {exc}") from None
    for key, p in (("x", xp), ("y", yp)):
        if not Path(p).is_file():
            raise InputError(f"input file not found: {p}")
        if sha256_file(p) != inputs[key]["sha256"]:
            raise InputError(f"input {p} changed since the manifest was written (sha256 mismatch)")
    return cfg, xp, yp


def run_files(x_path, y_path, config: AnalysisConfig, out_dir) -> Analysis:
    pair = load_pair(x_path, y_path, config)
    an = analyze_pair(pair, config)
    arts = write_artifacts(an, out_dir)
    write_manifest(out_dir, config, {"x": x_path, "y": y_path}, arts)
    return an
