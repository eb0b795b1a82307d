"""Command-line front end.

Usage::

    snlse <command> [--config FILE] [--key value ...]

Commands: ``evolve``, ``sweep-eps``, ``sweep-tau``, ``compare-reg``, ``dynamics2d``.
Parameters are a flat key=value map; a config file holds ``key=value``
lines with ``#`` comments, and command-line flags override it.  The fully
resolved configuration is written to ``<out-dir>/resolved.cfg``.

Exit codes: 0 success, 2 configuration error, 3 numerical abort, 4 I/O error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import experiments as ex
from .dynamics import BlowUpError, Integrator, Problem, evolve
from .fileformats import FieldFormatError, atomic_write, dump_field, emit_csv, format_float
from .spectral_grid import make_grid
from .initial import ICKind, InitialCondition
from .observables import energy, mass, momentum
from .regularization import DomainError

log = logging.getLogger("snlse")

COMMANDS = ("evolve", "sweep-eps", "sweep-tau", "compare-reg", "dynamics2d")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# key -> help text; every key is accepted by every command, defaults differ
KEYS = {
    "lambda": "interaction strength (nonzero real)",
    "alpha": "exponent in (-1/3, 0); 1 allowed for dynamics2d",
    "epsilon": "regularization parameter, or comma list for sweep-eps",
    "reg": "regularization label(s): exact, ler, ler<n>, shift, rational",
    "n": "LER degree (integer >= 1)",
    "integrator": "tsfp, eifp, or comma list",
    "tau": "time step, or comma list for sweep-tau",
    "T": "final time",
    "a": "left domain endpoint",
    "b": "right domain endpoint",
    "N": "grid points per axis (even, >= 4)",
    "dim": "dimension (1 or 2)",
    "ic": "initial condition: gaussian1d, gausson2d, vortexpair2d, vortexdipole2d",
    "case": "2D scenario: I, II or III",
    "target": "error target: model, scheme or total",
    "snapshots": "comma list of snapshot times",
    "paper-scale": "use the finer 2D meshes h = 1/32, 1/64 (true/false)",
    "floor": "vortex detection floor relative to the peak density",
    "out-dir": "output directory",
    "cache-dir": "reference-solution cache directory",
    "workers": "parallel sweep workers",
}

_BASE = {
    "lambda": "1", "alpha": "-0.2", "a": "-16", "b": "16", "N": "512", "dim": "1",
    "ic": "gaussian1d", "T": "1", "n": "5", "out-dir": "snlse-out", "cache-dir": "",
    "workers": "1", "paper-scale": "false", "floor": "1e-4", "case": "II", "snapshots": "",
    "target": "model",
}

DEFAULTS = {
    "evolve": {**_BASE, "reg": "ler", "epsilon": "1e-4", "integrator": "tsfp", "tau": "1e-3",
               "target": "model"},
    "sweep-eps": {**_BASE, "reg": "ler5,shift,rational", "epsilon": "1e-1,1e-2,1e-3,1e-4,1e-5",
                  "integrator": "tsfp", "tau": "1e-5", "target": "model"},
    "sweep-tau": {**_BASE, "reg": "ler5,shift,rational", "epsilon": "1e-4",
                  "integrator": "tsfp,eifp", "tau": "1e-2,5e-3,2.5e-3,1.25e-3", "target": "scheme"},
    "compare-reg": {**_BASE, "reg": "ler5,shift,rational", "epsilon": "1e-3",
                    "integrator": "tsfp", "tau": "1e-5", "target": "model"},
    "dynamics2d": {**_BASE, "alpha": "-0.1", "reg": "shift", "epsilon": "1e-12",
                   "integrator": "tsfp", "tau": "1e-3", "T": "2", "snapshots": "0,0.5,1,1.5,2"},
}


@dataclass
class CliConfig:
    command: str
    params: dict[str, str]

    def get(self, key: str) -> str:
        return self.params[key]

    def num(self, key: str) -> float:
        return _float(key, self.params[key])

    def nums(self, key: str) -> list[float]:
        return [_float(key, v) for v in _split(self.params[key])]

    def integer(self, key: str) -> int:
        v = self.num(key)
        if v != int(v):
            raise ConfigError(key, f"expected an integer, got {self.params[key]!r}")
        return int(v)

    def flag(self, key: str) -> bool:
        v = self.params[key].strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off", ""):
            return False
        raise ConfigError(key, f"expected true/false, got {self.params[key]!r}")

    def resolved_text(self) -> str:
        lines = [f"# snlse {self.command}", f"command={self.command}"]
        lines += [f"{k}={self.params[k]}" for k in sorted(self.params)]
        return "\n".join(lines) + "\n"


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(key, f"malformed number {value!r}") from None


def read_config_file(path: str | Path) -> dict[str, str]:
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "command":
            continue
        if key not in KEYS:
            raise ConfigError(key, "unknown key")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snlse", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", help="key=value configuration file")
        for key, help_text in KEYS.items():
            p.add_argument(f"--{key}", dest=key, default=None, help=help_text)
    return parser


def parse_config(argv: Sequence[str]) -> CliConfig:
    """Resolve defaults, config file and flags into a validated :class:`CliConfig`."""
    ns = build_parser().parse_args(list(argv))
    params = dict(DEFAULTS[ns.command])
    if ns.config:
        params.update(read_config_file(ns.config))
    for key in KEYS:
        v = getattr(ns, key)
        if v is not None:
            params[key] = v
    cfg = CliConfig(ns.command, params)
    validate(cfg)
    return cfg


def validate(cfg: CliConfig) -> None:
    cmd = cfg.command
    alpha = cfg.num("alpha")
    if not (-1 / 3 < alpha < 0 or (cmd == "dynamics2d" and alpha == 1)):
        extra = " (or 1 for dynamics2d)" if cmd == "dynamics2d" else ""
        raise ConfigError("alpha", f"{alpha} outside the valid interval (-1/3, 0){extra}")
    if cfg.num("lambda") == 0:
        raise ConfigError("lambda", "must be nonzero")
    for key in ("epsilon", "tau"):
        vals = cfg.nums(key)
        if not vals or any(v <= 0 for v in vals):
            raise ConfigError(key, "values must be positive")
    if cfg.num("T") <= 0:
        raise ConfigError("T", "must be positive")
    if not cfg.num("b") > cfg.num("a"):
        raise ConfigError("b", "must exceed a")
    N = cfg.integer("N")
    if N < 4 or N % 2:
        raise ConfigError("N", f"must be an even integer >= 4, got {N}")
    if cfg.integer("dim") not in (1, 2):
        raise ConfigError("dim", "must be 1 or 2")
    if cfg.integer("workers") < 1:
        raise ConfigError("workers", "must be >= 1")
    regs = _split(cfg.get("reg"))
    if not regs:
        raise ConfigError("reg", "no regularization given")
    for label in regs:
        try:
            reg = ex.make_reg(label, alpha if alpha != 1 else -0.2, 0.1)
        except ValueError as exc:
            raise ConfigError("reg", str(exc)) from None
        if label == "ler":
            n = cfg.integer("n")
            if n < 1:
                raise ConfigError("n", f"LER degree must be >= 1, got {n}")
        del reg
    for name in _split(cfg.get("integrator")):
        if name not in ("tsfp", "eifp"):
            raise ConfigError("integrator", f"unknown integrator {name!r}")
    try:
        InitialCondition(ICKind(cfg.get("ic")))
    except ValueError:
        raise ConfigError("ic", f"unknown initial condition {cfg.get('ic')!r}") from None
    if cfg.get("target") not in ("model", "scheme", "total"):
        raise ConfigError("target", f"unknown target {cfg.get('target')!r}")
    if cfg.get("case").upper() not in ("I", "II", "III"):
        raise ConfigError("case", "must be I, II or III")
    cfg.flag("paper-scale")
    for t in cfg.nums("snapshots"):
        if t < 0:
            raise ConfigError("snapshots", "times must be nonnegative")
    if cfg.num("floor") <= 0:
        raise ConfigError("floor", "must be positive")
    if cmd == "sweep-eps" and len(cfg.nums("epsilon")) < 3:
        raise ConfigError("epsilon", "sweep-eps needs at least three values")
    if cmd == "sweep-tau" and len(cfg.nums("tau")) < 3:
        raise ConfigError("tau", "sweep-tau needs at least three values")


# --- commands --------------------------------------------------------------

def _out_dir(cfg: CliConfig) -> Path:
    return Path(cfg.get("out-dir"))


def _cache_dir(cfg: CliConfig):
    return cfg.get("cache-dir") or None


def _problem(cfg: CliConfig) -> Problem:
    grid = make_grid(cfg.num("a"), cfg.num("b"), cfg.integer("N"), cfg.integer("dim"))
    return Problem(cfg.num("lambda"), cfg.num("alpha"), grid,
                   InitialCondition(ICKind(cfg.get("ic"))), cfg.num("T"))


def _reg_labels(cfg: CliConfig) -> list[str]:
    n = cfg.integer("n")
    return [f"ler{n}" if label == "ler" else label for label in _split(cfg.get("reg"))]


def _header(cfg: CliConfig) -> list[str]:
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return [f"generated {stamp}", f"snlse {cfg.command}"]


def cmd_evolve(cfg: CliConfig) -> None:
    problem = _problem(cfg)
    reg = ex.make_reg(_reg_labels(cfg)[0], problem.alpha, cfg.nums("epsilon")[0])
    sim = problem.config(reg, cfg.nums("tau")[0], _split(cfg.get("integrator"))[0])
    times = sorted(set(cfg.nums("snapshots")) | {0.0, sim.T})
    if times[-1] > sim.T:
        raise ConfigError("snapshots", f"time {times[-1]} beyond T={sim.T}")
    final, snaps = evolve(sim, snapshot_times=times)
    out = _out_dir(cfg)
    dump_field(final, out / "final.snls")
    rows = []
    for t in sorted(snaps):
        psi = snaps[t]
        dump_field(psi, out / f"snapshot_t{format_float(t)}.snls")
        e = energy(psi, sim.lam, reg) if reg.kind.value != "exact" or psi.density.min() > 0 else float("nan")
        rows.append([format_float(t), format_float(mass(psi)), format_float(e),
                     *[format_float(p) for p in momentum(psi)]])
    lines = ["t,mass,energy," + ",".join(f"momentum_{i}" for i in range(problem.grid.d))]
    lines += [",".join(r) for r in rows]
    atomic_write(out / "diagnostics.csv", ("\n".join(lines) + "\n").encode())


def _sweep(cfg: CliConfig, axis: str) -> None:
    problem = _problem(cfg)
    values = cfg.nums("epsilon" if axis == "epsilon" else "tau")
    fixed = cfg.nums("tau" if axis == "epsilon" else "epsilon")[0]
    spec = ex.SweepSpec(problem, axis, tuple(values), fixed, regs=tuple(_reg_labels(cfg)),
                        target=cfg.get("target"), integrators=tuple(_split(cfg.get("integrator"))))
    result = ex.run_sweep(spec, cache_dir=_cache_dir(cfg), workers=cfg.integer("workers"))
    emit_csv(_out_dir(cfg) / "sweep.csv", result.rows(), result.slope_lines(), _header(cfg))


def cmd_compare_reg(cfg: CliConfig) -> None:
    problem = _problem(cfg)
    eps = cfg.nums("epsilon")[0]
    tau = cfg.nums("tau")[0]
    rows = []
    for label in _reg_labels(cfg):
        for integ in _split(cfg.get("integrator")):
            spec_target = ex.ErrorTarget(cfg.get("target"))
            report = ex.evaluate_point(problem, label, Integrator(integ), eps, tau, spec_target,
                                       cache_dir=_cache_dir(cfg))
            rows.append(dict(report.metadata, err_wave_l2=report.err_wave_l2,
                             err_density_l1=report.err_density_l1, err_energy=report.err_energy))
    emit_csv(_out_dir(cfg) / "compare.csv", rows, (), _header(cfg))


def cmd_dynamics2d(cfg: CliConfig) -> None:
    times = cfg.nums("snapshots") or list(ex.DEFAULT_SNAPSHOTS_2D)
    res = ex.run_dynamics2d(cfg.get("case"), cfg.num("alpha"), snapshot_times=times,
                            paper_scale=cfg.flag("paper-scale"), tau=cfg.nums("tau")[0],
                            vortex_floor=cfg.num("floor"), epsilon=cfg.nums("epsilon")[0])
    out = _out_dir(cfg)
    summary = ["t,max_density,mass,vortex_count,total_charge"]
    vort = ["t,x,y,charge"]
    for t in res.times:
        if t not in res.vortices:
            continue
        vs = res.vortices[t]
        summary.append(",".join([format_float(t), format_float(res.max_density[t]),
                                 format_float(res.mass[t]), str(len(vs)), str(sum(v.charge for v in vs))]))
        vort += [",".join([format_float(t), format_float(v.position[0]), format_float(v.position[1]),
                           str(v.charge)]) for v in vs]
        dump_field(res.snapshots[t], out / f"density_case{res.case}_t{format_float(t)}.snls")
    meta = "".join(f"# {k}={v}\n" for k, v in res.metadata.items())
    atomic_write(out / "summary.csv", (meta + "\n".join(summary) + "\n").encode())
    atomic_write(out / "vortices.csv", (meta + "\n".join(vort) + "\n").encode())
    if res.aborted_at is not None:
        raise BlowUpError(int(round(res.aborted_at / res.config.tau)), res.aborted_at)


HANDLERS = {
    "evolve": cmd_evolve,
    "sweep-eps": lambda cfg: _sweep(cfg, "epsilon"),
    "sweep-tau": lambda cfg: _sweep(cfg, "tau"),
    "compare-reg": cmd_compare_reg,
    "dynamics2d": cmd_dynamics2d,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    except ConfigError as exc:
        print(f"snlse: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"snlse: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        out = _out_dir(cfg)
        out.mkdir(parents=True, exist_ok=True)
        atomic_write(out / "resolved.cfg", cfg.resolved_text().encode("utf-8"))
        HANDLERS[cfg.command](cfg)
    except (BlowUpError, DomainError, ex.SweepPointError) as exc:
        print(f"snlse: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, FieldFormatError) as exc:
        print(f"snlse: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # e.g. T not a multiple of tau, checked when the run is built
        print(f"snlse: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
