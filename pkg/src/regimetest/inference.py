"""
Surrogate-data Monte Carlo test of a composite model hypothesis.

For each parameter point of a finite subclass of admissible models, ``B``
surrogate paths are simulated on the observation grid and pushed through the
same squeeze-duration pipeline as the observed series. The observed
statistic is ranked against each ensemble componentwise, giving a two-sided
alpha value per point; the composite alpha is the maximum over points.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateStatisticError, InferenceError, InputError, RedrawBudgetExhausted
from .models import (
    DEFAULT_STEP_CAP,
    SeriesSummary,
    gbm_admissible,
    mmgbm_admissible,
    smgbm_admissible,
)
from .series_stats import DEFAULT_P, DEFAULT_WINDOW, StatVector, squeeze_statistic
from .simulate import SimRequest, derive_seed, simulate

HYPOTHESES = ("gbm", "mmgbm", "smgbm")
TRADING_DAYS_PER_YEAR = 250
DEFAULT_UNIT_SCALE = 1.0 / TRADING_DAYS_PER_YEAR
# mean sojourn of state 1 in trading days, 5 to 15 in steps of 0.5
DEFAULT_SOJOURN_GRID = tuple(5.0 + 0.5 * k for k in range(21))
DEFAULT_SHAPE_GRID = (1.0, 2.0, 3.0)
THREADS_ENV = "REGIMETEST_THREADS"


@dataclass(frozen=True)
class TestConfig:
    p: float = DEFAULT_P
    window: int = DEFAULT_WINDOW
    r: int = 4
    B: int = 200
    master_seed: int = 0
    redraw_limit: int = 20
    step_cap: float = DEFAULT_STEP_CAP

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise InputError(f"p must lie in (0, 1), got {self.p!r}")
        if self.r not in (1, 2, 3, 4):
            raise InputError(f"r must be in 1..4, got {self.r!r}")
        if self.B < 1:
            raise InputError(f"B must be positive, got {self.B!r}")
        if self.window < 2:
            raise InputError(f"window must be at least 2, got {self.window!r}")
        if self.redraw_limit < 0:
            raise InputError("redraw_limit must be nonnegative")


@dataclass(frozen=True)
class ThetaPoint:
    index: int
    label: str
    params: object
    sojourn: Optional[float] = None
    shape: Optional[float] = None


@dataclass(frozen=True)
class ThetaGrid:
    """Finite subclass of admissible models searched by the test.

    ``sojourn_grid`` holds mean sojourns of state 1 in units of
    ``unit_scale`` years (trading days by default); ``shape_grid`` is used
    for the semi-Markov hypothesis only.
    """

    hypothesis: str
    sojourn_grid: Sequence[float] = DEFAULT_SOJOURN_GRID
    shape_grid: Sequence[float] = DEFAULT_SHAPE_GRID
    unit_scale: float = DEFAULT_UNIT_SCALE

    def __post_init__(self):
        if self.hypothesis not in HYPOTHESES:
            raise InputError(f"hypothesis must be one of {HYPOTHESES}, got {self.hypothesis!r}")
        object.__setattr__(self, "sojourn_grid", tuple(float(v) for v in self.sojourn_grid))
        object.__setattr__(self, "shape_grid", tuple(float(v) for v in self.shape_grid))
        if self.hypothesis != "gbm" and not self.sojourn_grid:
            raise InputError("sojourn grid must not be empty")
        if self.hypothesis == "smgbm" and not self.shape_grid:
            raise InputError("shape grid must not be empty")
        if not self.unit_scale > 0:
            raise InputError("unit_scale must be positive")

    def points(self, summary: SeriesSummary) -> list[ThetaPoint]:
        """Admissible parameters for every grid point, in seed-index order."""
        if self.hypothesis == "gbm":
            return [ThetaPoint(0, "gbm", gbm_admissible(summary))]
        out = []
        for s in self.sojourn_grid:
            years = s * self.unit_scale
            if self.hypothesis == "mmgbm":
                out.append(ThetaPoint(len(out), f"sojourn={s:g}",
                                      mmgbm_admissible(summary, years), s))
                continue
            for k in self.shape_grid:
                out.append(ThetaPoint(len(out), f"sojourn={s:g},shape={k:g}",
                                      smgbm_admissible(summary, k, years), s, k))
        return out


@dataclass
class Ensemble:
    """Statistic vectors of ``B`` non-degenerate surrogate paths."""

    theta_label: str
    stat_rows: np.ndarray
    degenerate_count: int = 0

    @property
    def B(self) -> int:
        return self.stat_rows.shape[0]


@dataclass
class ThetaRow:
    label: str
    alphas: tuple
    params: dict


@dataclass
class TestReport:
    hypothesis: str
    observed: StatVector
    per_theta: list
    composite: tuple
    config: dict
    ensembles: list = field(default_factory=list, repr=False)

    __test__ = False

    def to_dict(self) -> dict:
        """JSON-ready dump; ensembles are left out."""
        return {
            "hypothesis": self.hypothesis,
            "observed": list(self.observed.t),
            "composite": list(self.composite),
            "per_theta": [
                {"label": row.label, "alphas": list(row.alphas), "params": row.params}
                for row in self.per_theta
            ],
            "degenerate_redraws": {e.theta_label: e.degenerate_count for e in self.ensembles},
            "config": self.config,
        }


@dataclass
class ObjectiveResult:
    labels: list
    values: np.ndarray
    argmin: int
    points: list

    @property
    def best(self) -> ThetaPoint:
        return self.points[self.argmin]


def thread_count() -> int:
    """Worker threads allowed by ``REGIMETEST_THREADS`` (default: all CPUs)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


@contextmanager
def _pool():
    n = thread_count()
    if n <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=n) as ex:
        yield ex


def g_fn(x: int, B: int) -> float:
    """``min(x, B - x) / B``."""
    if not 0 <= x <= B:
        raise InputError(f"count {x} outside 0..{B}")
    return min(x, B - x) / B


def alpha_theta(t_star, ensemble: Ensemble, r: Optional[int] = None) -> tuple:
    """Alpha values ``(alpha_1, ..., alpha_r)`` of the observed statistic
    against one ensemble.

    ``alpha_j = 2 * min over j' <= j of g(c_j')`` where ``c_j`` counts the
    surrogates whose j-th component is not above the observed one (ties
    count).
    """
    t = np.asarray(getattr(t_star, "t", t_star), dtype=float)
    rows = np.asarray(ensemble.stat_rows, dtype=float)
    if r is None:
        r = min(t.size, rows.shape[1])
    if r > t.size or r > rows.shape[1]:
        raise InputError(f"r={r} exceeds available components ({t.size}, {rows.shape[1]})")
    B = rows.shape[0]
    counts = np.count_nonzero(t[None, :r] >= rows[:, :r], axis=0)
    g = np.minimum(counts, B - counts) / B
    return tuple(float(a) for a in 2.0 * np.minimum.accumulate(g))


def _surrogate_row(theta, n_steps, dt, seed, config):
    req = SimRequest(theta, n_steps, dt, seed=seed, step_cap=config.step_cap)
    try:
        _, sv = squeeze_statistic(simulate(req).path, config.p, config.window, config.r)
    except DegenerateStatisticError:
        return None
    return sv.as_array()


def build_ensemble(summary: SeriesSummary, theta, n_steps: int, config: TestConfig,
                   theta_index: int = 0, theta_label: Optional[str] = None,
                   executor=None) -> Ensemble:
    """Simulate ``config.B`` surrogate statistic rows for one parameter point.

    Replication ``i`` uses ``derive_seed(master_seed, theta_index, i)``.
    A path whose statistic is undefined is replaced by a path with the next
    unused replication number (``B``, ``B+1``, ... in row order), at most
    ``redraw_limit * B`` times in total.
    """
    label = theta_label or theta.label()
    if n_steps < config.window + 2:
        raise InputError(f"{n_steps} points are too few for a window of {config.window}")
    if not math.isclose(summary.p, config.p):
        raise InputError(f"summary was computed at p={summary.p}, config has p={config.p}")
    # fail on a bad step size before launching any work
    SimRequest(theta, n_steps, summary.dt, step_cap=config.step_cap)

    B = config.B
    budget = config.redraw_limit * B
    rows = [None] * B
    pending = list(range(B))
    reps = list(range(B))
    next_rep = B
    degenerate = 0

    def run(rep):
        seed = derive_seed(config.master_seed, theta_index, rep)
        return _surrogate_row(theta, n_steps, summary.dt, seed, config)

    while pending:
        jobs = [reps[slot] for slot in pending]
        results = list(executor.map(run, jobs)) if executor is not None else [run(j) for j in jobs]
        still = []
        for slot, res in zip(pending, results):
            if res is not None:
                rows[slot] = res
                continue
            degenerate += 1
            if degenerate > budget:
                raise RedrawBudgetExhausted(
                    f"more than {budget} degenerate surrogate paths; the parameter point "
                    "does not produce enough completed squeezes", theta_label=label)
            reps[slot] = next_rep
            next_rep += 1
            still.append(slot)
        pending = still
    return Ensemble(theta_label=label, stat_rows=np.vstack(rows), degenerate_count=degenerate)


def run_grid(summary: SeriesSummary, grid: ThetaGrid, n_steps: int, config: TestConfig):
    """Ensembles for every grid point, in grid order."""
    points = grid.points(summary)
    out = []
    with _pool() as ex:
        for pt in points:
            try:
                out.append(build_ensemble(summary, pt.params, n_steps, config,
                                          theta_index=pt.index, theta_label=pt.label,
                                          executor=ex))
            except InferenceError:
                raise
            except Exception as exc:
                raise InferenceError(str(exc), theta_label=pt.label) from exc
    return points, out


def _config_echo(config: TestConfig, grid: ThetaGrid, n_steps: int, dt: float) -> dict:
    echo = asdict(config)
    echo.update(
        hypothesis=grid.hypothesis,
        sojourn_grid=list(grid.sojourn_grid) if grid.hypothesis != "gbm" else [],
        shape_grid=list(grid.shape_grid) if grid.hypothesis == "smgbm" else [],
        unit_scale=grid.unit_scale,
        n_steps=n_steps,
        dt=dt,
    )
    return echo


def composite_test(t_star, summary: SeriesSummary, grid: ThetaGrid, n_steps: int,
                   config: TestConfig) -> TestReport:
    """Alpha table over the grid and the composite alpha (componentwise max)."""
    t_star = t_star if isinstance(t_star, StatVector) else StatVector(tuple(t_star))
    if config.B < 2:
        raise InputError("the test needs B >= 2 surrogates per parameter point")
    if t_star.r < config.r:
        raise InputError(f"observed statistic has {t_star.r} components, config.r={config.r}")
    points, ensembles = run_grid(summary, grid, n_steps, config)
    rows = []
    for pt, ens in zip(points, ensembles):
        rows.append(ThetaRow(pt.label, alpha_theta(t_star, ens, config.r), asdict(pt.params)))
    composite = tuple(float(v) for v in np.max([row.alphas for row in rows], axis=0))
    return TestReport(
        hypothesis=grid.hypothesis,
        observed=StatVector(t_star.t[:config.r]),
        per_theta=rows,
        composite=composite,
        config=_config_echo(config, grid, n_steps, summary.dt),
        ensembles=ensembles,
    )


def objective_values(t_star, ensembles) -> np.ndarray:
    """Mean squared distance between the observed statistic and each ensemble row."""
    t = np.asarray(getattr(t_star, "t", t_star), dtype=float)
    return np.array([np.mean(np.sum((e.stat_rows[:, :4] - t[None, :4]) ** 2, axis=1))
                     for e in ensembles])


def objective_grid(t_star, summary: SeriesSummary, grid: ThetaGrid, n_steps: int,
                   config: TestConfig) -> ObjectiveResult:
    """Monte Carlo estimate of the least-squares objective at every grid
    point, with the minimiser (ties go to the smaller sojourn, then the
    smaller shape)."""
    if config.r != 4:
        raise InputError("the objective uses all four components; set r=4")
    t = np.asarray(getattr(t_star, "t", t_star), dtype=float)
    if t.size < 4:
        raise InputError("observed statistic must have four components")
    points, ensembles = run_grid(summary, grid, n_steps, config)
    values = objective_values(t, ensembles)
    best = min(range(len(points)),
               key=lambda i: (values[i], points[i].sojourn or 0.0, points[i].shape or 0.0))
    return ObjectiveResult([p.label for p in points], values, best, points)
