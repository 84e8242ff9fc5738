"""Command-line entry point: ``swcompete {simulate,ensemble,fit,netstat}``.

Settings come from flags and, optionally, a flat ``key=value`` config file
(``--config``); flags win. Every run writes ``manifest.txt`` next to its
outputs holding all effective settings, and that manifest is itself a valid
config file, so ``swcompete --config out/manifest.txt --out other/``
reproduces the run.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .calibrate import Axis, SearchSpace, fit, read_series_csv, write_fit_report, write_loss_surface
from .dynamics import K_MODES, SCHEMES, ModelParams, run, write_trajectory_csv
from .ensemble import run_ensemble, write_ensemble_csv
from .errors import ConfigError, DomainError
from .graph import (
    WsConfig,
    characteristic_path_length,
    clustering_coefficient,
    degree_histogram,
    watts_strogatz,
)
from .graphio import read_graphml, write_dot, write_graphml
from .plot import emit_plot
from .rng import dynamics_stream

FORMAT_VERSION = 1
OUT_ENV = "SWCOMPETE_OUT"
COMMANDS = ("simulate", "ensemble", "fit", "netstat")
# not part of the manifest: where outputs go has no effect on their content
_UNRECORDED = {"command", "config", "out", "workers", "verbose"}
_REQUIRED = {
    "simulate": ("alpha", "gamma", "s_a"),
    "ensemble": ("alpha", "gamma", "s_a"),
    "fit": ("data",),
    "netstat": (),
}

log = logging.getLogger("swcompete")


class UsageError(Exception):
    def __init__(self, key: str | None, message: str):
        super().__init__(f"{'--' + key.replace('_', '-') + ': ' if key else ''}{message}")
        self.key = key


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(None, message)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _value_or_axis(text) -> float | Axis:
    """``0.9`` or ``lo:hi:points``."""
    if isinstance(text, (float, Axis)):
        return text
    parts = str(text).split(":")
    if len(parts) == 1:
        return float(parts[0])
    if len(parts) != 3:
        raise ValueError(f"expected value or lo:hi:points, got {text!r}")
    return Axis(float(parts[0]), float(parts[1]), int(parts[2]))


def _seed_list(text) -> tuple[int, ...]:
    """``0:30`` (half-open range) or ``1,5,9``."""
    if isinstance(text, tuple):
        return text
    text = str(text)
    if ":" in text:
        lo, hi = (int(x) for x in text.split(":"))
        return tuple(range(lo, hi))
    return tuple(int(x) for x in text.split(","))


def _fmt_value(v) -> str:
    if isinstance(v, Axis):
        return f"{v.lo!r}:{v.hi!r}:{v.points}"
    if isinstance(v, tuple):
        return ",".join(map(str, v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _add_network(p):
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--k-ws", type=int, default=14)
    p.add_argument("--rho-ws", type=float, default=0.01)


def _add_model(p, num=float):
    p.add_argument("--alpha", type=num)
    p.add_argument("--gamma", type=num)
    p.add_argument("--s-a", type=num)
    p.add_argument("--s-b", type=num, default=0.5)
    p.add_argument("--complement", type=_bool, nargs="?", const=True, default=False)
    p.add_argument("--init-frac-a", type=num, default=0.5)
    p.add_argument("--init-frac-b", type=num, default=0.5)
    p.add_argument("--scheme", choices=SCHEMES, default="async")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swcompete", description="Group competition on small-world networks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="flat key=value settings file; flags override it")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
        p.add_argument("-v", "--verbose", action="store_true")

    sim = sub.add_parser("simulate", help="one run: trajectory CSV, optional snapshots and SVG")
    common(sim)
    _add_network(sim)
    _add_model(sim)
    sim.add_argument("--k-mode", choices=K_MODES, default="fraction")
    sim.add_argument("--t-max", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--snapshot-every", type=int, default=0, help="0 disables snapshots")
    sim.add_argument("--graph", help="GraphML file to use instead of generating a network")
    sim.add_argument("--plot", type=_bool, nargs="?", const=True, default=False)

    ens = sub.add_parser("ensemble", help="many seeds: ensemble CSV and SVG")
    common(ens)
    _add_network(ens)
    _add_model(ens)
    ens.add_argument("--k-mode", choices=K_MODES, default="fraction")
    ens.add_argument("--t-max", type=int, default=100)
    ens.add_argument("--seeds", type=_seed_list, default=tuple(range(30)), help="lo:hi or a,b,c")
    ens.add_argument("--shared-graph", type=_bool, nargs="?", const=True, default=False)
    ens.add_argument("--graph-seed", type=int, default=0, help="graph seed in shared-graph mode")
    ens.add_argument("--workers", type=int, default=1)

    fitp = sub.add_parser("fit", help="grid-search calibration against a CSV series")
    common(fitp)
    _add_network(fitp)
    _add_model(fitp, num=_value_or_axis)
    fitp.add_argument("--data", help="CSV with header year,frac_a[,frac_b[,frac_u]]")
    fitp.add_argument("--steps-per-year", type=_value_or_axis, default=1.0)
    fitp.add_argument("--ensemble-size", type=int, default=30)
    fitp.add_argument("--seed", type=int, default=0, help="base of the common seed set")
    fitp.add_argument("--refine-depth", type=int, default=2)
    fitp.add_argument("--workers", type=int, default=1)

    net = sub.add_parser("netstat", help="clustering, path length and degree histogram")
    common(net)
    _add_network(net)
    net.add_argument("--seed", type=int, default=0)
    net.add_argument("--graph", help="GraphML file to analyse instead of generating a network")
    net.add_argument("--export", type=_bool, nargs="?", const=True, default=False, help="also write graph.graphml/.dot")
    return parser


def read_config_file(path) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(None, f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


@dataclass
class RunConfig:
    command: str
    values: dict
    ws: WsConfig
    out: Path
    params: ModelParams | None = None
    space: SearchSpace | None = None

    def manifest(self) -> str:
        lines = [f"command={self.command}", f"format_version={FORMAT_VERSION}"]
        for key in sorted(self.values):
            if key not in _UNRECORDED and self.values[key] is not None:
                lines.append(f"{key}={_fmt_value(self.values[key])}")
        return "\n".join(lines) + "\n"


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def parse_config(argv, config_file=None) -> RunConfig:
    """Resolve flags plus optional config file into a validated :class:`RunConfig`."""
    argv = list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    config_file = known.config or config_file
    file_values = read_config_file(config_file) if config_file else {}
    file_values.pop("format_version", None)

    command = next((a for a in argv if a in COMMANDS), None) or file_values.get("command")
    if command is None and {"-h", "--help", "--version"} & set(argv):
        parser.parse_args(argv)  # prints and exits
    if not argv and not file_values:
        raise UsageError(None, "no command given\n" + parser.format_help())
    if command not in COMMANDS:
        raise UsageError("command", f"expected one of {COMMANDS}")
    if command not in argv:
        argv = [command] + argv
    file_values.pop("command", None)

    sub = _subparser(parser, command)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, text in file_values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            raise UsageError(key, f"unknown setting for {command}")
        try:
            defaults[key] = action.type(text) if action.type else text
        except (ValueError, TypeError) as exc:
            raise UsageError(key, str(exc)) from None
        if action.choices is not None and defaults[key] not in action.choices:
            raise UsageError(key, f"invalid choice {text!r}")
    sub.set_defaults(**defaults)

    ns = parser.parse_args(argv)
    values = {k: v for k, v in vars(ns).items()}
    for key in _REQUIRED[command]:
        if values.get(key) is None:
            raise UsageError(key, "required setting is missing")

    out = Path(values.get("out") or os.environ.get(OUT_ENV) or "out")
    try:
        ws = WsConfig(values["n"], values["k_ws"], values["rho_ws"], values.get("seed", values.get("graph_seed", 0)))
        cfg = RunConfig(command, values, ws, out)
        if command in ("simulate", "ensemble"):
            cfg.params = ModelParams(
                alpha=values["alpha"],
                gamma=values["gamma"],
                s_a=values["s_a"],
                s_b=values["s_b"],
                init_frac_a=values["init_frac_a"],
                init_frac_b=values["init_frac_b"],
                scheme=values["scheme"],
                complement=values["complement"],
                k_mode=values["k_mode"],
            )
            if values["t_max"] < 0:
                raise ConfigError("t_max", "must be >= 0")
        elif command == "fit":
            if not Path(values["data"]).is_file():
                raise ConfigError("data", f"no such file {values['data']}")
            cfg.space = SearchSpace(
                alpha=values["alpha"] if values["alpha"] is not None else 0.9,
                gamma=values["gamma"] if values["gamma"] is not None else 0.2,
                s_a=values["s_a"] if values["s_a"] is not None else 0.1,
                s_b=values["s_b"],
                init_frac_a=values["init_frac_a"],
                init_frac_b=values["init_frac_b"],
                steps_per_year=values["steps_per_year"],
                complement=values["complement"],
                scheme=values["scheme"],
            )
        if values.get("graph") and not Path(values["graph"]).is_file():
            raise ConfigError("graph", f"no such file {values['graph']}")
    except ConfigError as exc:
        raise UsageError(exc.key, str(exc).split(": ", 1)[-1]) from None
    return cfg


def _network(cfg: RunConfig):
    if cfg.values.get("graph"):
        g, states = read_graphml(cfg.values["graph"])
        return g, states
    return watts_strogatz(cfg.ws), None


def _simulate(cfg: RunConfig) -> list[Path]:
    g, states = _network(cfg)
    every = cfg.values["snapshot_every"] or None
    traj = run(g, cfg.params, cfg.values["t_max"], dynamics_stream(cfg.values["seed"]), snapshot_every=every, states=states)
    written = [cfg.out / "trajectory.csv"]
    write_trajectory_csv(traj, written[0])
    if every:
        snapdir = cfg.out / "snapshots"
        snapdir.mkdir(exist_ok=True)
        for t, s in sorted(traj.snapshots.items()):
            for ext, writer in ((".graphml", write_graphml), (".dot", write_dot)):
                path = snapdir / f"step_{t:05d}{ext}"
                writer(g, path, s)
                written.append(path)
    if cfg.values["plot"]:
        written.append(cfg.out / "trajectory.svg")
        emit_plot(traj, written[-1])
    return written


def _ensemble(cfg: RunConfig) -> list[Path]:
    v = cfg.values
    ws = WsConfig(v["n"], v["k_ws"], v["rho_ws"], v["graph_seed"])
    res = run_ensemble(ws, cfg.params, v["t_max"], v["seeds"], shared_graph=v["shared_graph"], workers=v["workers"])
    csv_path, svg_path = cfg.out / "ensemble.csv", cfg.out / "ensemble.svg"
    write_ensemble_csv(res, csv_path)
    emit_plot(res, svg_path)
    return [csv_path, svg_path]


def _fit(cfg: RunConfig) -> list[Path]:
    v = cfg.values
    data = read_series_csv(v["data"])
    res = fit(data, cfg.ws, cfg.space, v["ensemble_size"], v["seed"], v["refine_depth"], workers=v["workers"])
    report, surface = cfg.out / "fit_report.txt", cfg.out / "loss_surface.csv"
    write_fit_report(res, report)
    write_loss_surface(res, surface)
    return [report, surface]


def _netstat(cfg: RunConfig) -> list[Path]:
    g, _ = _network(cfg)
    pl = characteristic_path_length(g)
    stats = cfg.out / "netstat.txt"
    with open(stats, "w") as fh:
        fh.write(f"nodes={g.n}\nedges={g.edge_count}\nrewired={g.rewired}\n")
        fh.write(f"clustering_coefficient={clustering_coefficient(g)!r}\n")
        fh.write(f"characteristic_path_length={pl.mean!r}\n")
        fh.write(f"disconnected={pl.disconnected}\ncomponent_size={pl.component_size}\n")
    hist = cfg.out / "degree_histogram.csv"
    with open(hist, "w") as fh:
        fh.write("degree,count\n")
        for d, c in enumerate(degree_histogram(g).tolist()):
            if c:
                fh.write(f"{d},{c}\n")
    written = [stats, hist]
    if cfg.values["export"]:
        written += [cfg.out / "graph.graphml", cfg.out / "graph.dot"]
        write_graphml(g, written[-2])
        write_dot(g, written[-1])
    return written


_HANDLERS = {"simulate": _simulate, "ensemble": _ensemble, "fit": _fit, "netstat": _netstat}


def execute(cfg: RunConfig) -> list[Path]:
    cfg.out.mkdir(parents=True, exist_ok=True)
    manifest = cfg.out / "manifest.txt"
    manifest.write_text(cfg.manifest())
    return [manifest] + _HANDLERS[cfg.command](cfg)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"swcompete: error: {exc}", file=sys.stderr)
        if not argv:
            return 2
        print("run 'swcompete --help' for usage", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if cfg.values.get("verbose") else logging.WARNING)
    try:
        written = execute(cfg)
    except (OSError, DomainError, ConfigError) as exc:
        print(f"swcompete: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
