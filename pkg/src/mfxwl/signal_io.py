"""Loading, transforming and dyadic alignment of input series."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputError

MIN_LENGTH = 16


class SignalKind(str, Enum):
    RAW = "raw"
    PRICE = "price"
    RETURN = "return"
    VOLATILITY = "volatility"
    MEASURE = "measure"


@dataclass(frozen=True)
class Signal:
    values: np.ndarray
    name: str = ""
    kind: SignalKind = SignalKind.RAW

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).ravel()
        if arr.size == 0:
            raise InputError(f"signal {self.name!r} is empty")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InputError(f"signal {self.name!r} has a non-finite value at index {bad}")
        kind = SignalKind(self.kind)
        if kind is SignalKind.MEASURE and np.any(arr < 0):
            raise InputError(f"measure {self.name!r} has negative mass")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "kind", kind)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SignalPair:
    x: Signal
    y: Signal
    length: int

    def __post_init__(self):
        if len(self.x) != self.length or len(self.y) != self.length:
            raise InputError(
                f"pair components have lengths {len(self.x)} and {len(self.y)}, expected {self.length}"
            )
        if not is_dyadic(self.length) or self.length < MIN_LENGTH:
            raise InputError(f"pair length {self.length} is not a power of two >= {MIN_LENGTH}")

    @property
    def octaves(self) -> int:
        return self.length.bit_length() - 1


def is_dyadic(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def load_series(
    path,
    column: int | str = 0,
    *,
    header: bool | None = None,
    delimiter: str = ",",
    name: str | None = None,
) -> Signal:
    """Read one column of a delimited text file as a raw Signal.

    Args:
        path: CSV file (UTF-8).
        column: zero-based index or header name. A name implies ``header=True``.
        header: whether the first row is a header. ``None`` auto-detects a
            header only when ``column`` is a name.
        delimiter: field separator.
        name: label for the returned signal; defaults to the file stem.

    Raises:
        InputError: missing file, unparseable or blank cell (row number is
            1-based, counting the header), empty column.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    if header is None:
        header = isinstance(column, str) and not column.lstrip("-").isdigit()
    if isinstance(column, str) and column.lstrip("-").isdigit():
        column = int(column)

    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))

    # trailing empty lines are not data
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()

    start = 0
    idx = column
    if header:
        if not rows:
            raise InputError(f"{path}: file is empty")
        names = [c.strip() for c in rows[0]]
        if isinstance(column, str):
            if column not in names:
                raise InputError(f"{path}: no column named {column!r} (have {names})")
            idx = names.index(column)
        start = 1
    elif isinstance(column, str):
        raise InputError(f"{path}: column name {column!r} requires a header row")

    values = []
    for rowno, row in enumerate(rows[start:], start=start + 1):
        if idx >= len(row) or idx < -len(row):
            raise InputError(f"{path}: row {rowno} has no column {column!r}")
        cell = row[idx].strip()
        try:
            v = float(cell)
        except ValueError:
            raise InputError(f"{path}: cannot parse {cell!r} as a number at row {rowno}") from None
        if not math.isfinite(v):
            raise InputError(f"{path}: non-finite value {cell!r} at row {rowno}")
        values.append(v)
    if not values:
        raise InputError(f"{path}: column {column!r} is empty")
    return Signal(np.asarray(values), name=name or path.stem, kind=SignalKind.RAW)


def log_returns(prices: Signal) -> Signal:
    """R(t) = ln I(t) - ln I(t-1); output is one sample shorter."""
    v = prices.values
    if v.size < 2:
        raise InputError("log returns need at least two prices")
    nonpos = np.flatnonzero(v <= 0)
    if nonpos.size:
        raise InputError(f"non-positive price {v[nonpos[0]]!r} at index {int(nonpos[0])}")
    return Signal(np.diff(np.log(v)), name=prices.name, kind=SignalKind.RETURN)


def volatility(returns: Signal) -> Signal:
    if returns.kind not in (SignalKind.RETURN, SignalKind.VOLATILITY):
        raise InputError(f"volatility expects returns, got kind={returns.kind.value}")
    return Signal(np.abs(returns.values), name=returns.name, kind=SignalKind.VOLATILITY)


def align_pair(x: Signal, y: Signal, policy: str = "truncate_head") -> SignalPair:
    """Cut both series to the largest power of two not exceeding the shorter one.

    ``truncate_head`` drops leading samples (keeps the most recent window),
    ``truncate_tail`` drops trailing samples. Never pads.
    """
    if policy not in ("truncate_head", "truncate_tail"):
        raise ConfigError(f"unknown alignment policy {policy!r}")
    m = min(len(x), len(y))
    if m < MIN_LENGTH:
        raise InputError(f"aligned length would be {m}, need at least {MIN_LENGTH}")
    n = 1 << (m.bit_length() - 1)

    def cut(s: Signal) -> Signal:
        v = s.values[-n:] if policy == "truncate_head" else s.values[:n]
        return Signal(v, name=s.name, kind=s.kind)

    return SignalPair(cut(x), cut(y), n)


def apply_transform(s: Signal, transform: str) -> Signal:
    """Transform chain used by the CLI: ``none``, ``returns`` or ``volatility``."""
    if transform == "none":
        return s
    if transform == "returns":
        return log_returns(s)
    if transform == "volatility":
        return volatility(log_returns(s))
    raise ConfigError(f"unknown transform {transform!r}")


def write_columns(path, columns: Sequence[np.ndarray], names: Sequence[str]) -> None:
    """Write equal-length columns as CSV with a header row (round-trip exact)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])
