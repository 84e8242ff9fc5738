"""Grid-search calibration of model parameters against observed group fractions.

Each candidate is scored by the RMSE between the observations and the
linearly interpolated ensemble mean, with the same seed set reused for every
candidate (common random numbers). Calendar years map to model steps through
a ``steps_per_year`` scalar, anchored so the first observation is step 0.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelParams
from .ensemble import EnsembleResult, run_ensemble
from .errors import ConfigError, DomainError
from .graph import WsConfig

log = logging.getLogger(__name__)

GROUP_COLUMNS = {"a": 0, "b": 1, "u": 2}
PARAM_ORDER = ("alpha", "gamma", "s_a", "s_b", "init_frac_a", "init_frac_b", "steps_per_year")
_BOUNDS = {
    "alpha": (0.0, math.inf),
    "gamma": (0.0, math.inf),
    "s_a": (0.0, 1.0),
    "s_b": (0.0, 1.0),
    "init_frac_a": (0.0, 1.0),
    "init_frac_b": (0.0, 1.0),
    "steps_per_year": (0.0, math.inf),
}


@dataclass(frozen=True)
class EmpiricalSeries:
    """Observed fractions: ``values[i, j]`` is group ``groups[j]`` at ``years[i]``."""

    years: np.ndarray
    values: np.ndarray
    groups: tuple[str, ...] = ("a",)

    def __post_init__(self):
        years = np.asarray(self.years, dtype=float)
        values = np.asarray(self.values, dtype=float).reshape(len(years), -1)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)
        if values.shape[1] != len(self.groups) or any(g not in GROUP_COLUMNS for g in self.groups):
            raise DomainError(f"column/group mismatch: {values.shape[1]} columns for groups {self.groups}")
        if len(years) == 0:
            raise DomainError("empty series")
        if np.any(np.diff(years) <= 0):
            raise DomainError("years must be strictly increasing")
        if np.any((values < 0) | (values > 1)):
            raise DomainError("fractions must lie in [0, 1]")
        if len(self.groups) == 3 and np.any(values.sum(axis=1) > 1.01):
            raise DomainError("group fractions sum above 1 + 0.01")

    @property
    def span(self) -> float:
        return float(self.years[-1] - self.years[0])


def read_series_csv(path) -> EmpiricalSeries:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header = [h.strip() for h in rows[0]]
    allowed = [["year", "frac_a"], ["year", "frac_a", "frac_b"], ["year", "frac_a", "frac_b", "frac_u"]]
    if header not in allowed:
        raise DomainError(f"unexpected header {header}; expected year,frac_a[,frac_b[,frac_u]]")
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    groups = tuple(h.split("_")[1] for h in header[1:])
    return EmpiricalSeries(data[:, 0], data[:, 1:], groups)


def write_series_csv(series: EmpiricalSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year"] + [f"frac_{g}" for g in series.groups])
        for year, row in zip(series.years.tolist(), series.values.tolist()):
            w.writerow([repr(year)] + [repr(v) for v in row])


def observation_steps(data: EmpiricalSeries, steps_per_year: float) -> np.ndarray:
    return (data.years - data.years[0]) * steps_per_year


def loss(sim: EnsembleResult, data: EmpiricalSeries, steps_per_year: float) -> float:
    """RMSE over every (observation, group) pair against the interpolated ensemble mean."""
    steps = observation_steps(data, steps_per_year)
    last = len(sim.mean) - 1
    for year, s in zip(data.years, steps):
        if s > last + 1e-9:
            raise DomainError(f"observation year {year:g} maps to step {s:g}, beyond simulated step {last}")
    grid = np.arange(len(sim.mean))
    sq = []
    for j, g in enumerate(data.groups):
        model = np.interp(steps, grid, sim.mean[:, GROUP_COLUMNS[g]])
        sq.extend(((model - data.values[:, j]) ** 2).tolist())
    return math.sqrt(math.fsum(sq) / len(sq))


def synthetic_series(
    ws: WsConfig,
    params: ModelParams,
    years,
    steps_per_year: float,
    seeds,
    groups: tuple[str, ...] = ("a",),
) -> EmpiricalSeries:
    """Ensemble-mean fractions sampled at ``years``; a stand-in for observed data."""
    years = np.asarray(years, dtype=float)
    t_max = math.ceil((years[-1] - years[0]) * steps_per_year)
    sim = run_ensemble(ws, params, t_max, seeds)
    steps = (years - years[0]) * steps_per_year
    grid = np.arange(t_max + 1)
    cols = [np.interp(steps, grid, sim.mean[:, GROUP_COLUMNS[g]]) for g in groups]
    return EmpiricalSeries(years, np.column_stack(cols), groups)


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    points: int

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.points)

    @property
    def spacing(self) -> float:
        return 0.0 if self.points == 1 else (self.hi - self.lo) / (self.points - 1)


@dataclass(frozen=True)
class SearchSpace:
    """Each parameter is either a fixed float or an :class:`Axis`.

    With ``complement`` the B status is ``1 - s_a`` and ``s_b`` is ignored.
    """

    alpha: float | Axis = 0.9
    gamma: float | Axis = 0.2
    s_a: float | Axis = 0.1
    s_b: float | Axis = 0.9
    init_frac_a: float | Axis = 0.5
    init_frac_b: float | Axis = 0.5
    steps_per_year: float | Axis = 1.0
    complement: bool = False
    scheme: str = "async"

    def __post_init__(self):
        for name in PARAM_ORDER:
            v = getattr(self, name)
            lo, hi = _BOUNDS[name]
            vals = (v.lo, v.hi) if isinstance(v, Axis) else (v,)
            if isinstance(v, Axis):
                if v.points < 1:
                    raise ConfigError(name, "grid needs at least one point")
                if v.lo > v.hi:
                    raise ConfigError(name, f"min {v.lo} exceeds max {v.hi}")
            if any(not lo <= x <= hi for x in vals):
                raise ConfigError(name, f"values {vals} outside [{lo}, {hi}]")
            if name == "steps_per_year" and min(vals) <= 0:
                raise ConfigError(name, "must be > 0")

    @property
    def free(self) -> tuple[str, ...]:
        return tuple(
            n for n in PARAM_ORDER
            if isinstance(getattr(self, n), Axis) and not (n == "s_b" and self.complement)
        )

    def axis(self, name: str) -> Axis:
        return getattr(self, name)

    def grid(self) -> list[tuple[float, ...]]:
        """Candidates as tuples in ``PARAM_ORDER``."""
        per = []
        for name in PARAM_ORDER:
            v = getattr(self, name)
            per.append(v.values().tolist() if name in self.free else [float(v.lo if isinstance(v, Axis) else v)])
        return list(itertools.product(*per))


@dataclass
class FitResult:
    params: ModelParams
    steps_per_year: float
    loss: float
    surface: list[tuple[tuple[float, ...], float]]
    ensemble_size: int
    seeds: tuple[int, ...]
    coarse_best: tuple[float, ...] = ()
    stages: list[tuple[float, ...]] = field(default_factory=list)

    @property
    def best(self) -> tuple[float, ...]:
        return self.stages[-1]


def _params_for(candidate, space: SearchSpace) -> ModelParams:
    kw = dict(zip(PARAM_ORDER, candidate))
    kw.pop("steps_per_year")
    return ModelParams(scheme=space.scheme, complement=space.complement, **kw)


def _evaluate(candidate, space, data, ws, seeds):
    try:
        params = _params_for(candidate, space)
    except ConfigError as exc:
        log.info("skipping candidate %s: %s", candidate, exc)
        return math.inf
    spy = candidate[-1]
    t_max = math.ceil(data.span * spy - 1e-9)
    sim = run_ensemble(ws, params, t_max, seeds)
    return loss(sim, data, spy)


def _argmin(scored: dict) -> tuple[float, ...]:
    # ties go to the lexicographically smallest candidate
    return min(scored, key=lambda c: (scored[c], c))


def _refined(incumbent, space: SearchSpace, depth: int) -> list[tuple[float, ...]]:
    per = []
    for name, value in zip(PARAM_ORDER, incumbent):
        if name not in space.free:
            per.append([value])
            continue
        ax = space.axis(name)
        h = ax.spacing / 2 ** depth
        per.append(sorted({min(ax.hi, max(ax.lo, value + d)) for d in (-h, 0.0, h)}))
    return list(itertools.product(*per))


def fit(
    data: EmpiricalSeries,
    ws: WsConfig,
    space: SearchSpace,
    ensemble_size: int = 30,
    seeds=0,
    refine_depth: int = 2,
    workers: int | None = None,
) -> FitResult:
    """Exhaustive grid search, then ``refine_depth`` passes of a halved grid around the incumbent.

    ``seeds`` is either an explicit seed list or a base seed ``b`` meaning
    ``range(b, b + ensemble_size)``. The same seeds score every candidate.
    """
    if isinstance(seeds, int):
        seeds = tuple(range(seeds, seeds + ensemble_size))
    seeds = tuple(int(s) for s in seeds)
    if len(seeds) != ensemble_size:
        raise ConfigError("seeds", f"got {len(seeds)} seeds for ensemble size {ensemble_size}")
    coarse = space.grid()
    if not coarse:
        raise ConfigError("grid", "search space is empty")

    scored: dict[tuple[float, ...], float] = {}
    surface: list[tuple[tuple[float, ...], float]] = []

    def score(cands):
        todo = [c for c in dict.fromkeys(cands) if c not in scored]
        if workers and workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                losses = list(pool.map(_evaluate, todo, *zip(*[(space, data, ws, seeds)] * len(todo))))
        else:
            losses = [_evaluate(c, space, data, ws, seeds) for c in todo]
        for c, value in zip(todo, losses):
            scored[c] = value
            surface.append((c, value))

    score(coarse)
    if all(math.isinf(v) for v in scored.values()):
        raise ConfigError("grid", "no candidate in the search space forms valid parameters")
    stages = [_argmin(scored)]
    for depth in range(1, refine_depth + 1):
        score(_refined(stages[-1], space, depth))
        stages.append(_argmin(scored))

    best = stages[-1]
    return FitResult(
        params=_params_for(best, space),
        steps_per_year=best[-1],
        loss=scored[best],
        surface=surface,
        ensemble_size=ensemble_size,
        seeds=seeds,
        coarse_best=stages[0],
        stages=stages,
    )


def write_fit_report(result: FitResult, path) -> None:
    p = result.params
    lines = [
        ("alpha", p.alpha),
        ("gamma", p.gamma),
        ("s_a", p.s_a),
        ("s_b", p.s_b),
        ("complement", p.complement),
        ("init_frac_a", p.init_frac_a),
        ("init_frac_b", p.init_frac_b),
        ("scheme", p.scheme),
        ("steps_per_year", result.steps_per_year),
        ("loss", result.loss),
        ("ensemble_size", result.ensemble_size),
        ("seeds", ",".join(map(str, result.seeds))),
        ("coarse_best", ",".join(repr(v) for v in result.coarse_best)),
        ("candidates", len(result.surface)),
    ]
    with open(path, "w") as fh:
        for k, v in lines:
            fh.write(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n")


def write_loss_surface(result: FitResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(PARAM_ORDER) + ["loss"])
        for cand, value in result.surface:
            w.writerow([repr(v) for v in cand] + [repr(value)])
