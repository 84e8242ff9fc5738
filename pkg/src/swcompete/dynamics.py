"""Agent states and the neighbour-and-status transition law.

An agent in group Y switches to X with probability ``(k_x/deg)**alpha * s_x**gamma``
where ``k_x`` counts its neighbours currently in X and ``s_x`` is the perceived
status of X. Unassigned agents may join either competing group; nobody ever
moves into the unassigned pool (its status is pinned at 0).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .errors import ConfigError, DomainError
from .graph import Graph

SCHEMES = ("async", "sync")
K_MODES = ("fraction", "count")


class Group(enum.IntEnum):
    A = 0
    B = 1
    U = 2

    @property
    def letter(self) -> str:
        return self.name


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one scenario.

    With ``complement=True`` the status of B is tied to ``1 - s_a`` and any
    ``s_b`` given is ignored. ``k_mode="count"`` uses the raw neighbour count
    clamped at probability 1 instead of the neighbour fraction.
    """

    alpha: float
    gamma: float
    s_a: float
    s_b: float = 0.5
    init_frac_a: float = 0.5
    init_frac_b: float = 0.5
    scheme: str = "async"
    complement: bool = False
    k_mode: str = "fraction"

    def __post_init__(self):
        if self.complement:
            object.__setattr__(self, "s_b", 1.0 - self.s_a)
        for key in ("alpha", "gamma"):
            if not getattr(self, key) >= 0:
                raise ConfigError(key, f"must be >= 0, got {getattr(self, key)}")
        for key in ("s_a", "s_b", "init_frac_a", "init_frac_b"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise ConfigError(key, f"must lie in [0, 1], got {getattr(self, key)}")
        if self.init_frac_a + self.init_frac_b > 1.0 + 1e-12:
            raise ConfigError("init_frac_b", "init_frac_a + init_frac_b exceeds 1")
        if self.scheme not in SCHEMES:
            raise ConfigError("scheme", f"expected one of {SCHEMES}, got {self.scheme!r}")
        if self.k_mode not in K_MODES:
            raise ConfigError("k_mode", f"expected one of {K_MODES}, got {self.k_mode!r}")

    @property
    def s_u(self) -> float:
        return 0.0

    def status(self, group: Group) -> float:
        return (self.s_a, self.s_b, self.s_u)[group]

    def swapped(self) -> "ModelParams":
        """Same scenario with the roles of A and B exchanged."""
        return replace(
            self,
            s_a=self.s_b,
            s_b=self.s_a,
            init_frac_a=self.init_frac_b,
            init_frac_b=self.init_frac_a,
            complement=False,
        )


def init_states(g: Graph, params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Label ``round(f_a*n)`` random nodes A and ``round(f_b*n)`` others B; rest U."""
    n = g.n
    n_a = round(params.init_frac_a * n)
    n_b = round(params.init_frac_b * n)
    if n_a + n_b > n:
        raise ConfigError("init_frac_b", f"rounded counts {n_a} + {n_b} exceed n = {n}")
    order = rng.permutation(n)
    states = np.full(n, Group.U, dtype=np.int8)
    states[order[:n_a]] = Group.A
    states[order[n_a:n_a + n_b]] = Group.B
    return states


def transition_probability(node: int, target: Group, g: Graph, states: np.ndarray, params: ModelParams) -> float:
    """Probability that ``node`` moves to ``target`` given the current states."""
    nbrs = g.neighbors(node)
    target = Group(target)
    if target == Group.U or len(nbrs) == 0:
        return 0.0
    k = int(np.count_nonzero(states[nbrs] == target))
    x = k if params.k_mode == "count" else k / len(nbrs)
    # python's 0.0 ** 0.0 == 1.0 gives the 0^0 = 1 convention
    p = x ** params.alpha * params.status(target) ** params.gamma
    return min(1.0, p)


@numba.njit(cache=True)
def _probability(indptr, indices, states, v, target, alpha, status_pow, count_mode):
    lo = indptr[v]
    hi = indptr[v + 1]
    k = 0
    for e in range(lo, hi):
        if states[indices[e]] == target:
            k += 1
    x = float(k) if count_mode else k / (hi - lo)
    p = x ** alpha * status_pow[target]
    return 1.0 if p > 1.0 else p


@numba.njit(cache=True)
def _try_update(indptr, indices, read, v, draw, alpha, status_pow, count_mode):
    # returns the new label for v (unchanged if no transition fires)
    cur = read[v]
    if indptr[v + 1] == indptr[v]:
        return cur
    if cur == 2:
        first = 0 if draw[0] < 0.5 else 1
        if draw[1] < _probability(indptr, indices, read, v, first, alpha, status_pow, count_mode):
            return first
        second = 1 - first
        if draw[2] < _probability(indptr, indices, read, v, second, alpha, status_pow, count_mode):
            return second
        return cur
    other = 1 - cur
    if draw[1] < _probability(indptr, indices, read, v, other, alpha, status_pow, count_mode):
        return other
    return cur


@numba.njit(cache=True)
def _async_sweep(indptr, indices, states, picks, draws, alpha, status_pow, count_mode, transitions):
    for i in range(picks.shape[0]):
        v = picks[i]
        old = states[v]
        new = _try_update(indptr, indices, states, v, draws[i], alpha, status_pow, count_mode)
        if new != old:
            states[v] = new
            transitions[old, new] += 1


@numba.njit(cache=True)
def _sync_sweep(indptr, indices, states, draws, alpha, status_pow, count_mode, transitions):
    out = states.copy()
    for v in range(states.shape[0]):
        new = _try_update(indptr, indices, states, v, draws[v], alpha, status_pow, count_mode)
        if new != states[v]:
            out[v] = new
            transitions[states[v], new] += 1
    return out


def _status_pow(params: ModelParams) -> np.ndarray:
    return np.array([params.s_a ** params.gamma, params.s_b ** params.gamma, 0.0])


def _step(g, states, params, rng, transitions):
    n = g.n
    count_mode = params.k_mode == "count"
    spow = _status_pow(params)
    if params.scheme == "async":
        picks = rng.integers(0, n, size=n)
        draws = rng.random((n, 3))
        out = states.copy()
        _async_sweep(g.indptr, g.indices, out, picks, draws, params.alpha, spow, count_mode, transitions)
        return out
    draws = rng.random((n, 3))
    return _sync_sweep(g.indptr, g.indices, states, draws, params.alpha, spow, count_mode, transitions)


def step(g: Graph, states: np.ndarray, params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Advance one model step and return the new state vector (input untouched).

    ``async``: n updates of uniformly picked agents against the live state.
    ``sync``: every agent evaluated against the step-start state, committed together.
    Per step the stream yields ``n`` picks (async only) then an ``(n, 3)`` block of
    uniforms: candidate order, first Bernoulli, second Bernoulli.
    """
    if len(states) != g.n:
        raise DomainError(f"state vector length {len(states)} does not match graph size {g.n}")
    return _step(g, states, params, rng, np.zeros((3, 3), dtype=np.int64))


def group_counts(states: np.ndarray) -> np.ndarray:
    return np.bincount(states, minlength=3).astype(np.int64)


@dataclass
class Trajectory:
    """Per-step group counts for ``t = 0..t_max``.

    ``transitions[i, j]`` totals accepted moves from group i to group j.
    ``snapshots`` maps a step to a copy of the state vector at that step.
    """

    n: int
    counts: np.ndarray
    transitions: np.ndarray = field(default_factory=lambda: np.zeros((3, 3), dtype=np.int64))
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self.counts))

    @property
    def fractions(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def final_states(self) -> np.ndarray | None:
        return self.snapshots.get(len(self.counts) - 1)


def run(
    g: Graph,
    params: ModelParams,
    t_max: int,
    rng: np.random.Generator,
    snapshot_every: int | None = None,
    states: np.ndarray | None = None,
) -> Trajectory:
    """Initialise states (unless given) and apply ``t_max`` steps, recording every step.

    With ``snapshot_every`` the state vector is kept at multiples of it and at
    the final step.
    """
    if t_max < 0:
        raise ConfigError("t_max", f"must be >= 0, got {t_max}")
    if states is None:
        states = init_states(g, params, rng)
    counts = np.empty((t_max + 1, 3), dtype=np.int64)
    counts[0] = group_counts(states)
    traj = Trajectory(g.n, counts)

    def keep(t):
        if snapshot_every and (t % snapshot_every == 0 or t == t_max):
            traj.snapshots[t] = states.copy()

    keep(0)
    for t in range(1, t_max + 1):
        states = _step(g, states, params, rng, traj.transitions)
        counts[t] = group_counts(states)
        keep(t)
    return traj


def homophily(g: Graph, states: np.ndarray) -> float:
    """Fraction of edges whose two endpoints carry the same label."""
    if g.edge_count == 0:
        raise DomainError("homophily of an edgeless graph")
    src = np.repeat(np.arange(g.n), g.degrees)
    same = np.count_nonzero(states[src] == states[g.indices])
    return same / (2 * g.edge_count)


TRAJECTORY_HEADER = ("step", "frac_a", "frac_b", "frac_u")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for t, (a, b, u) in enumerate(traj.counts.tolist()):
            w.writerow([t, repr(a / traj.n), repr(b / traj.n), repr(u / traj.n)])


def read_trajectory_csv(path) -> np.ndarray:
    """Return the fraction columns as a ``(T+1, 3)`` array."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != TRAJECTORY_HEADER:
        raise DomainError(f"unexpected trajectory header {rows[0]}")
    return np.array([[float(x) for x in r[1:]] for r in rows[1:]])
