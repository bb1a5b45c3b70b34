"""
Series files, run configuration and the text/JSON artifacts written by the
command line.

Series files are delimited text (comma or tab) with a ``timestamp,price``
header. Timestamps are either all integer indices or all ISO-8601.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, fields, replace
from datetime import datetime
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError, SeriesFormatError
from .inference import (
    DEFAULT_SHAPE_GRID,
    DEFAULT_SOJOURN_GRID,
    DEFAULT_UNIT_SCALE,
    TRADING_DAYS_PER_YEAR,
    TestConfig,
    ThetaGrid,
)
from .models import DEFAULT_STEP_CAP
from .series_stats import DEFAULT_P, DEFAULT_WINDOW, PricePath

TRADING_MINUTES_PER_DAY = 360
# five-minute bars, 250 trading days of six hours each
DEFAULT_DT = 5.0 / (TRADING_DAYS_PER_YEAR * TRADING_MINUTES_PER_DAY)
SESSION_GAP_POLICIES = ("none", "exclude")


class GapWarning(UserWarning):
    """Consecutive rows of a series are not evenly spaced."""


class DtMismatchWarning(UserWarning):
    """The configured step length disagrees with the file's spacing."""


@dataclass(frozen=True)
class RunConfig:
    dt: float = DEFAULT_DT
    p: float = DEFAULT_P
    window: int = DEFAULT_WINDOW
    r: int = 4
    B: int = 200
    seed: int = 0
    hypothesis: str = "gbm"
    grid: tuple = DEFAULT_SOJOURN_GRID
    shape_grid: tuple = DEFAULT_SHAPE_GRID
    unit_scale: float = DEFAULT_UNIT_SCALE
    step_cap: float = DEFAULT_STEP_CAP
    redraw_limit: int = 20
    session_gap: str = "none"
    out_dir: str = ""

    def __post_init__(self):
        if not self.dt > 0:
            raise InputError(f"dt must be positive, got {self.dt!r}")
        if self.session_gap not in SESSION_GAP_POLICIES:
            raise InputError(f"session_gap must be one of {SESSION_GAP_POLICIES}")
        self.test_config()
        self.theta_grid()

    def test_config(self) -> TestConfig:
        return TestConfig(p=self.p, window=self.window, r=self.r, B=self.B,
                          master_seed=self.seed, redraw_limit=self.redraw_limit,
                          step_cap=self.step_cap)

    def theta_grid(self, hypothesis: Optional[str] = None) -> ThetaGrid:
        return ThetaGrid(hypothesis or self.hypothesis, self.grid, self.shape_grid,
                         self.unit_scale)


def parse_grid(text: str) -> tuple:
    """``"5:15:0.5"`` (inclusive range) or ``"5,10,15"``."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9))
            return tuple(round(start + k * step, 12) for k in range(n + 1))
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None
    if not vals:
        raise InputError("empty grid")
    return vals


_CONVERTERS = {
    "dt": float, "p": float, "window": int, "r": int, "B": int, "seed": int,
    "hypothesis": str, "grid": parse_grid, "shape_grid": parse_grid,
    "unit_scale": float, "step_cap": float, "redraw_limit": int,
    "session_gap": str, "out_dir": str,
}
assert set(_CONVERTERS) == {f.name for f in fields(RunConfig)}


def _convert(key, value):
    if key not in _CONVERTERS:
        raise InputError(f"unknown config key {key!r}")
    try:
        return _CONVERTERS[key](value) if isinstance(value, str) else value
    except ValueError:
        raise InputError(f"bad value for {key}: {value!r}") from None


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = _convert(key, value)
    return out


def make_config(path=None, **overrides) -> RunConfig:
    """Defaults, then the config file, then non-None overrides."""
    values = read_config(path) if path else {}
    values.update({k: _convert(k, v) for k, v in overrides.items() if v is not None})
    return replace(RunConfig(), **values) if values else RunConfig()


def _parse_timestamp(text, lineno):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        raise SeriesFormatError(f"bad timestamp {text!r}", line=lineno) from None


def _spacing(a, b):
    if isinstance(a, datetime):
        return (b - a).total_seconds()
    return b - a


def load_series(file, dt: float = DEFAULT_DT, session_gap: str = "none",
                min_rows: int = 2) -> PricePath:
    """Read a ``timestamp,price`` file into a :class:`PricePath` with step ``dt``.

    Gaps that differ from the modal spacing trigger a :class:`GapWarning`
    naming the rows after them. With ``session_gap="exclude"`` the returns
    across those gaps are dropped and the path is rebuilt from the remaining
    returns; by default every pair of consecutive rows is one step.
    """
    if session_gap not in SESSION_GAP_POLICIES:
        raise InputError(f"session_gap must be one of {SESSION_GAP_POLICIES}")
    path = Path(file)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    lines = text.splitlines()
    if not lines:
        raise SeriesFormatError("empty file", line=1)
    delim = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(lines, delimiter=delim)
    header = [h.strip().lower() for h in next(reader)]
    try:
        i_ts, i_px = header.index("timestamp"), header.index("price")
    except ValueError:
        raise SeriesFormatError("header must name 'timestamp' and 'price' columns", line=1) from None

    stamps, prices, linenos = [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) <= max(i_ts, i_px):
            raise SeriesFormatError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        ts = _parse_timestamp(row[i_ts].strip(), lineno)
        try:
            px = float(row[i_px])
        except ValueError:
            raise SeriesFormatError(f"bad price {row[i_px]!r}", line=lineno) from None
        if not (px > 0 and math.isfinite(px)):
            raise SeriesFormatError(f"price must be positive, got {row[i_px].strip()!r}", line=lineno)
        if stamps and type(ts) is not type(stamps[-1]):
            raise SeriesFormatError("mixed integer and date-time timestamps", line=lineno)
        if stamps and not ts > stamps[-1]:
            raise SeriesFormatError("timestamps must be strictly increasing", line=lineno)
        stamps.append(ts)
        prices.append(px)
        linenos.append(lineno)

    if len(prices) < min_rows:
        raise SeriesFormatError(f"{len(prices)} rows, need at least {min_rows}")

    gaps = [_spacing(a, b) for a, b in zip(stamps, stamps[1:])]
    modal = Counter(gaps).most_common(1)[0][0] if gaps else None
    odd = [k for k, g in enumerate(gaps) if g != modal]
    if odd:
        coverage = 1 - len(odd) / len(gaps)
        listing = ", ".join(str(stamps[k + 1]) for k in odd[:20])
        more = "" if len(odd) <= 20 else f" and {len(odd) - 20} more"
        verdict = "" if coverage >= 0.99 else "; series is not equispaced (modal spacing covers <99%)"
        warnings.warn(f"{path.name}: {len(odd)} irregular gap(s) before {listing}{more}{verdict}",
                      GapWarning, stacklevel=2)

    if modal is not None and isinstance(stamps[0], datetime):
        inferred = modal / 60.0 / (TRADING_DAYS_PER_YEAR * TRADING_MINUTES_PER_DAY)
        if not math.isclose(inferred, dt, rel_tol=0.01):
            warnings.warn(f"{path.name}: spacing implies dt={inferred:.6g} years, using configured "
                          f"dt={dt:.6g}", DtMismatchWarning, stacklevel=2)

    px = np.array(prices)
    if session_gap == "exclude" and odd:
        rets = np.diff(px) / px[:-1]
        keep = np.ones(rets.size, dtype=bool)
        keep[odd] = False
        px = px[0] * np.concatenate(([1.0], np.cumprod(1.0 + rets[keep])))
        if px.size < min_rows:
            raise SeriesFormatError(f"{px.size} rows left after gap exclusion, need {min_rows}")
    return PricePath(px, dt)


def dump_series(path: PricePath, file, states=None) -> None:
    """Write ``index,price`` rows with full float precision."""
    with open(file, "w", newline="") as fh:
        fh.write("timestamp,price" + (",state" if states is not None else "") + "\n")
        for k, s in enumerate(path.prices):
            extra = f",{int(states[k])}" if states is not None else ""
            fh.write(f"{k},{float(s)!r}{extra}\n")


def write_json(obj, file) -> None:
    with open(file, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def format_row(label: str, values, decimals: int, width: int = 10) -> str:
    cells = [f"{v:>{width}.{decimals}f}" for v in values]
    return f"{label:<28}" + "".join(cells)


def format_table(header, rows, decimals: int) -> str:
    """Aligned text table; ``rows`` are ``(label, values)`` pairs."""
    head = f"{header[0]:<28}" + "".join(f"{h:>10}" for h in header[1:])
    lines = [head] + [format_row(label, vals, decimals) for label, vals in rows]
    return "\n".join(lines) + "\n"


def write_matrix(matrix, file, header) -> None:
    """Delimited numeric matrix with full precision."""
    with open(file, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(matrix):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix(file) -> tuple:
    with open(file) as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def five_number_summary(column) -> tuple:
    """Min, lower quartile, median, upper quartile, max (linear interpolation)."""
    q = np.percentile(np.asarray(column, dtype=float), [0, 25, 50, 75, 100])
    return tuple(float(v) for v in q)
