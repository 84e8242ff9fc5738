"""Multi-seed runs aggregated into per-step mean and dispersion."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import ModelParams, Trajectory, run
from .errors import ConfigError
from .graph import Graph, WsConfig, watts_strogatz
from .rng import dynamics_stream


class RunFailure(RuntimeError):
    def __init__(self, seed: int, cause: BaseException):
        super().__init__(f"run with seed {seed} failed: {cause!r}")
        self.seed = seed


@dataclass
class EnsembleResult:
    """Per-step statistics over runs; arrays are ``(T+1, 3)`` in group order A, B, U."""

    mean: np.ndarray
    std: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    seeds: tuple[int, ...]
    trajectories: list[Trajectory] | None = None

    @property
    def runs(self) -> int:
        return len(self.seeds)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self.mean))


def _one_run(ws: WsConfig, params: ModelParams, t_max: int, seed: int, shared: Graph | None, snapshot_every):
    try:
        g = shared if shared is not None else watts_strogatz(replace(ws, seed=seed))
        return run(g, params, t_max, dynamics_stream(seed), snapshot_every=snapshot_every)
    except Exception as exc:
        raise RunFailure(seed, exc) from exc


def aggregate(trajectories: list[Trajectory], seeds) -> EnsembleResult:
    """Order-independent statistics: integer count sums and correctly rounded ``fsum``."""
    counts = np.stack([t.counts for t in trajectories])  # (R, T+1, 3)
    runs, n = counts.shape[0], trajectories[0].n
    total = counts.sum(axis=0)
    mean = total / (runs * n)
    frac = counts / n
    std = np.empty_like(mean)
    for idx in np.ndindex(mean.shape):
        m = mean[idx]
        std[idx] = math.sqrt(math.fsum((x - m) ** 2 for x in frac[(slice(None),) + idx]) / runs)
    return EnsembleResult(mean, std, frac.min(axis=0), frac.max(axis=0), tuple(seeds))


def run_ensemble(
    ws: WsConfig,
    params: ModelParams,
    t_max: int,
    seeds,
    *,
    shared_graph: bool = False,
    workers: int | None = None,
    keep_runs: bool = False,
    snapshot_every: int | None = None,
) -> EnsembleResult:
    """One graph plus dynamics run per seed, aggregated.

    By default each seed rebuilds its graph, so dispersion includes topology
    noise. ``shared_graph`` builds one graph from ``ws.seed`` for all runs.
    Results do not depend on ``workers`` or on the order of ``seeds``.
    """
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ConfigError("seeds", "need at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds", "seeds must be distinct")
    shared = watts_strogatz(ws) if shared_graph else None
    args = [(ws, params, t_max, s, shared, snapshot_every) for s in seeds]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(_one_run, *zip(*args)))
    else:
        trajectories = [_one_run(*a) for a in args]
    result = aggregate(trajectories, seeds)
    if keep_runs:
        result.trajectories = trajectories
    return result


ENSEMBLE_HEADER = ("step", "mean_a", "std_a", "mean_b", "std_b", "mean_u", "std_u")


def write_ensemble_csv(result: EnsembleResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENSEMBLE_HEADER)
        for t in range(len(result.mean)):
            row = [t]
            for g in range(3):
                row += [repr(float(result.mean[t, g])), repr(float(result.std[t, g]))]
            w.writerow(row)


def read_ensemble_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(mean, std)`` arrays read back from an ensemble CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != ENSEMBLE_HEADER:
        raise ValueError(f"unexpected ensemble header {rows[0]}")
    data = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    return data[:, 0::2], data[:, 1::2]
