"""Convergence sweeps, slope fitting and the 2D vortex scenarios."""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import (REFERENCE_EPSILON, REFERENCE_TAU, BlowUpError, Integrator, Problem,
                       SimulationConfig, evolve, reference_solution, run)
from .spectral_grid import Field, make_grid
from .initial import (GAUSSIAN_1D, GAUSSON_2D, VORTEX_DIPOLE_2D, VORTEX_PAIR_2D, ICKind,
                      InitialCondition, sample_initial)
from .observables import ErrorReport, Vortex, error_norms, locate_vortices, mass
from .regularization import Kind, Regularization

__all__ = [
    "ErrorTarget", "SweepSpec", "SweepResult", "SweepPointError", "make_reg", "fit_slope",
    "run_sweep", "evaluate_point", "default_problem", "run_dynamics2d", "Dynamics2DResult", "sample_initial",
    "InitialCondition", "ICKind",
]

PAPER_DOMAIN_1D = (-16.0, 16.0)
PAPER_N_1D = 512
DEFAULT_SNAPSHOTS_2D = (0.0, 0.5, 1.0, 1.5, 2.0)


def default_problem(alpha: float = -0.2, lam: float = 1.0, T: float = 1.0,
                    a: float = PAPER_DOMAIN_1D[0], b: float = PAPER_DOMAIN_1D[1],
                    N: int = PAPER_N_1D) -> Problem:
    """1D Gaussian problem on ``[-16, 16]`` with ``h = 1/16`` (the convergence-study setup)."""
    return Problem(lam, alpha, make_grid(a, b, N), GAUSSIAN_1D, T)


def make_reg(label: str, alpha: float, epsilon: float) -> Regularization:
    """Build a regularization from a label: ``exact``, ``shift``, ``rational``, ``ler`` or ``ler<n>``."""
    label = label.strip().lower()
    if label == "exact":
        return Regularization.exact(alpha)
    if label == "shift":
        return Regularization.shift(alpha, epsilon)
    if label == "rational":
        return Regularization.rational(alpha, epsilon)
    if label.startswith("ler"):
        rest = label[3:]
        if rest and not rest.isdigit():
            raise ValueError(f"bad LER label {label!r}")
        return Regularization.ler(alpha, epsilon, int(rest) if rest else 5)
    raise ValueError(f"unknown regularization {label!r}")


def fit_slope(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(value)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise ValueError("need at least two (value, error) pairs")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise ValueError("values and errors must be positive and finite")
    return float(np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)[0])


class ErrorTarget(str, enum.Enum):
    MODEL = "model"    # regularized exact solution vs singular reference
    SCHEME = "scheme"  # numerical solution vs same-eps regularized reference
    TOTAL = "total"    # numerical solution vs singular reference


@dataclass(frozen=True)
class SweepSpec:
    """One convergence study.

    ``axis='epsilon'`` varies the regularization parameter with ``fixed`` as
    the time step; ``axis='tau'`` varies the step with ``fixed`` as epsilon.
    For the ``model`` target the time step is irrelevant: the regularized
    solution is the fine-step reference itself.
    """

    problem: Problem
    axis: str
    values: tuple[float, ...]
    fixed: float
    regs: tuple[str, ...] = ("ler5", "shift", "rational")
    target: ErrorTarget = ErrorTarget.MODEL
    integrators: tuple[Integrator, ...] = (Integrator.TSFP,)
    reference_tau: float = REFERENCE_TAU
    reference_epsilon: float = REFERENCE_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "target", ErrorTarget(self.target))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "integrators", tuple(Integrator(i) for i in self.integrators))
        if self.axis not in ("epsilon", "tau"):
            raise ValueError(f"axis must be 'epsilon' or 'tau', got {self.axis!r}")
        if len(self.values) < 3:
            raise ValueError("a sweep needs at least three values")
        if any(v <= 0 for v in self.values) or any(a <= b for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be positive and strictly decreasing")
        if not self.fixed > 0:
            raise ValueError("the fixed counterpart must be positive")
        for label in self.regs:
            make_reg(label, self.problem.alpha, 0.1)

    def points(self):
        """Yield ``(reg_label, integrator, epsilon, tau)`` in table order."""
        for label in self.regs:
            for integ in self.integrators:
                for v in self.values:
                    eps, tau = (v, self.fixed) if self.axis == "epsilon" else (self.fixed, v)
                    yield label, integ, eps, tau


class SweepPointError(RuntimeError):
    def __init__(self, params: dict, cause: Exception):
        super().__init__(f"sweep point {params} failed: {cause}")
        self.params = params


@dataclass
class SweepResult:
    spec: SweepSpec
    reports: list[ErrorReport]
    slopes: dict[tuple[str, str, str], float] = field(default_factory=dict)

    def series(self, reg: str, integrator: Integrator | str = Integrator.TSFP,
               metric: str = "err_wave_l2") -> list[tuple[float, float]]:
        """``(swept value, error)`` pairs of one curve."""
        integrator = Integrator(integrator).value
        out = []
        for r in self.reports:
            md = r.metadata
            if md["reg"] == reg and md["integrator"] == integrator:
                out.append((md[self.spec.axis], getattr(r, metric)))
        return out

    def rows(self) -> list[dict]:
        return [dict(r.metadata, err_wave_l2=r.err_wave_l2, err_density_l1=r.err_density_l1,
                     err_energy=r.err_energy) for r in self.reports]

    def slope_lines(self) -> list[tuple[str, float]]:
        multi = len(self.spec.integrators) > 1
        out = []
        for (reg, integ, metric), v in self.slopes.items():
            label = f"{reg}@{integ}" if multi else reg
            if metric != "err_wave_l2":
                label += f":{metric}"
            out.append((label, v))
        return out


METRICS = ("err_wave_l2", "err_density_l1", "err_energy")


def evaluate_point(problem: Problem, label: str, integrator: Integrator | str, epsilon: float,
                   tau: float, target: ErrorTarget | str = ErrorTarget.MODEL, *,
                   reference_tau: float = REFERENCE_TAU, reference_epsilon: float = REFERENCE_EPSILON,
                   cache_dir=None) -> ErrorReport:
    """Errors of one (regularization, integrator, epsilon, tau) point against the target reference."""
    p, integ, target = problem, Integrator(integrator), ErrorTarget(target)
    reg = make_reg(label, p.alpha, epsilon)
    md = {"reg": reg.label, "alpha": p.alpha, "epsilon": epsilon,
          "n": reg.n if reg.kind is Kind.LER else 0, "integrator": integ.value,
          "tau": reference_tau if target is ErrorTarget.MODEL else tau}
    try:
        if target is ErrorTarget.MODEL:
            psi = reference_solution(p, reg, tau=reference_tau, cache_dir=cache_dir)
        else:
            psi = run(p.config(reg, tau, integ))
        if target is ErrorTarget.SCHEME:
            ref = reference_solution(p, reg, tau=reference_tau, cache_dir=cache_dir)
        else:
            ref = reference_solution(p, None, tau=reference_tau, epsilon=reference_epsilon,
                                     cache_dir=cache_dir)
    except BlowUpError as exc:
        raise SweepPointError(md, exc) from exc
    psi0 = sample_initial(p.initial, p.grid)
    return error_norms(ref, psi, p.lam, reg, psi0, **md)


def _evaluate_point(spec: SweepSpec, label: str, integ: Integrator, eps: float, tau: float,
                    cache_dir) -> ErrorReport:
    return evaluate_point(spec.problem, label, integ, eps, tau, spec.target,
                          reference_tau=spec.reference_tau,
                          reference_epsilon=spec.reference_epsilon, cache_dir=cache_dir)


def _prefetch_references(spec: SweepSpec, cache_dir) -> None:
    """Build shared references up front so parallel workers only read the cache."""
    p = spec.problem
    if spec.target is ErrorTarget.SCHEME:
        for label, eps in {(lbl, e) for lbl, _, e, _ in spec.points()}:
            reference_solution(p, make_reg(label, p.alpha, eps), tau=spec.reference_tau,
                               cache_dir=cache_dir)
    else:
        reference_solution(p, None, tau=spec.reference_tau, epsilon=spec.reference_epsilon,
                           cache_dir=cache_dir)


def _point_star(args):
    return _evaluate_point(*args)


def run_sweep(spec: SweepSpec, cache_dir: str | os.PathLike | None = None,
              workers: int = 1) -> SweepResult:
    """Evaluate every sweep point and fit log-log slopes per curve and metric.

    Slopes are NaN for curves containing a zero error (e.g. self-comparison).
    With ``workers > 1`` points run in separate processes; the table keeps
    input order either way.
    """
    jobs = [(spec, label, integ, eps, tau, cache_dir) for label, integ, eps, tau in spec.points()]
    if workers > 1:
        _prefetch_references(spec, cache_dir)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_point_star, jobs))
    else:
        reports = [_evaluate_point(*job) for job in jobs]

    result = SweepResult(spec, reports)
    for label in spec.regs:
        reg_label = make_reg(label, spec.problem.alpha, 0.1).label
        for integ in spec.integrators:
            for metric in METRICS:
                pts = result.series(reg_label, integ, metric)
                try:
                    result.slopes[(reg_label, integ.value, metric)] = fit_slope(pts)
                except ValueError:
                    result.slopes[(reg_label, integ.value, metric)] = math.nan
    return result


# --- 2D dynamics -----------------------------------------------------------

_CASES = {
    "I": dict(initial=GAUSSON_2D, lam=-10.0, domain=(-8.0, 8.0), paper_h=1 / 64),
    "II": dict(initial=VORTEX_PAIR_2D, lam=1.0, domain=(-16.0, 16.0), paper_h=1 / 32),
    "III": dict(initial=VORTEX_DIPOLE_2D, lam=1.0, domain=(-16.0, 16.0), paper_h=1 / 32),
}
DESK_H_2D = 1 / 16
DEFAULT_VORTEX_FLOOR = 1e-4


@dataclass
class Dynamics2DResult:
    case: str
    alpha: float
    config: SimulationConfig
    times: tuple[float, ...]
    vortices: dict[float, list[Vortex]]
    max_density: dict[float, float]
    mass: dict[float, float]
    snapshots: dict[float, Field]
    metadata: dict = field(default_factory=dict)
    aborted_at: float | None = None


def dynamics2d_config(case: str, alpha: float, *, paper_scale: bool = False,
                      h: float | None = None, tau: float = 1e-3, T: float = 2.0,
                      epsilon: float = REFERENCE_EPSILON) -> SimulationConfig:
    """TSFP configuration for Case I/II/III; ``alpha = 1`` runs the cubic equation unregularized."""
    spec = _CASES[case.upper()]
    if h is None:
        h = spec["paper_h"] if paper_scale else DESK_H_2D
    a, b = spec["domain"]
    N = int(round((b - a) / h))
    reg = Regularization.exact(1.0) if alpha == 1 else Regularization.shift(alpha, epsilon)
    return SimulationConfig(spec["lam"], reg, Integrator.TSFP, tau, T,
                            make_grid(a, b, N, d=2), spec["initial"])


def run_dynamics2d(case: str, alpha: float, *, snapshot_times: Sequence[float] = DEFAULT_SNAPSHOTS_2D,
                   paper_scale: bool = False, h: float | None = None, tau: float = 1e-3,
                   vortex_floor: float = DEFAULT_VORTEX_FLOOR, keep_snapshots: bool = True,
                   epsilon: float = REFERENCE_EPSILON) -> Dynamics2DResult:
    """Evolve one 2D scenario and locate vortices at each snapshot.

    ``vortex_floor`` is relative to the snapshot's peak density.  A blow-up
    is not raised: the result carries ``aborted_at`` and the snapshots taken
    before it.
    """
    times = tuple(sorted(float(t) for t in snapshot_times))
    cfg = dynamics2d_config(case, alpha, paper_scale=paper_scale, h=h, tau=tau, T=max(times),
                            epsilon=epsilon)
    aborted = None
    try:
        _, snaps = evolve(cfg, snapshot_times=times)
    except BlowUpError as exc:
        aborted = exc.time
        snaps = exc.snapshots
    vortices, peaks, masses = {}, {}, {}
    for t, psi in snaps.items():
        rho_max = float(psi.density.max())
        vortices[t] = locate_vortices(psi, vortex_floor * rho_max)
        peaks[t] = rho_max
        masses[t] = mass(psi)
    meta = {"case": case.upper(), "alpha": alpha, "lambda": cfg.lam, "tau": tau,
            "h": cfg.grid.h[0], "domain": (cfg.grid.a[0], cfg.grid.b[0]), "N": cfg.grid.N[0],
            "epsilon": cfg.reg.epsilon, "reg": cfg.reg.label, "snapshot_times": times,
            "vortex_floor": vortex_floor, "paper_scale": paper_scale}
    return Dynamics2DResult(case.upper(), alpha, cfg, times, vortices, peaks, masses,
                            snaps if keep_snapshots else {}, meta, aborted)
