"""First-order time integrators for ``i psi_t = -Laplacian psi + lam f_reg(|psi|^2) psi``.

Two fully discrete schemes on a periodic Fourier grid:

* ``tsfp``: Lie-Trotter splitting, kinetic flow first, then the pointwise
  nonlinear phase rotation.  Conserves the discrete mass.
* ``eifp``: first-order Lawson (exponential Euler) step, i.e. the free
  propagator applied to an explicit Euler update of the nonlinear term.
"""
from __future__ import annotations

import enum
import hashlib
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .fileformats import FieldFormatError, dump_field, load_field
from .spectral_grid import Field, Grid, analyse, free_propagate, propagator, synthesise
from .initial import InitialCondition, sample_initial
from .regularization import Kind, Regularization, f_reg

log = logging.getLogger(__name__)

REFERENCE_TAU = 1e-5
REFERENCE_EPSILON = 1e-12


class Integrator(str, enum.Enum):
    TSFP = "tsfp"
    EIFP = "eifp"


class BlowUpError(RuntimeError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, step: int, time: float, snapshots: dict | None = None):
        super().__init__(f"non-finite field at step {step} (t = {time:g})")
        self.step = step
        self.time = time
        self.snapshots = snapshots or {}


def step_count(T: float, tau: float) -> int:
    M = int(round(T / tau))
    if abs(M * tau - T) > 1e-9 * T:
        raise ValueError(f"T={T} is not an integer multiple of tau={tau}")
    return M


@dataclass(frozen=True)
class SimulationConfig:
    lam: float
    reg: Regularization
    integrator: Integrator
    tau: float
    T: float
    grid: Grid
    initial: InitialCondition
    allow_free: bool = False  # permit lam = 0 (free equation, for tests)

    def __post_init__(self):
        object.__setattr__(self, "integrator", Integrator(self.integrator))
        if self.lam == 0 and not self.allow_free:
            raise ValueError("lambda must be nonzero (pass allow_free=True for the free equation)")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.T >= 0:
            raise ValueError(f"T must be nonnegative, got {self.T}")
        if self.T > 0:
            step_count(self.T, self.tau)

    @property
    def steps(self) -> int:
        return step_count(self.T, self.tau) if self.T > 0 else 0


@dataclass(frozen=True)
class Problem:
    """A configuration without its regularization and time step."""

    lam: float
    alpha: float
    grid: Grid
    initial: InitialCondition
    T: float = 1.0

    def config(self, reg: Regularization, tau: float,
               integrator: Integrator | str = Integrator.TSFP) -> SimulationConfig:
        if reg.alpha != self.alpha:
            raise ValueError(f"regularization alpha {reg.alpha} differs from problem alpha {self.alpha}")
        return SimulationConfig(self.lam, reg, integrator, tau, self.T, self.grid, self.initial)


def flow_B(w: Field, t: float, lam: float, reg: Regularization) -> Field:
    """Exact flow of ``i w_t = lam f_reg(|w|^2) w``: a pointwise phase rotation."""
    if t == 0:
        return Field(w.grid, w.values.copy())
    return Field(w.grid, w.values * np.exp(-1j * t * lam * f_reg(w.density, reg)))


def make_stepper(grid: Grid, tau: float, lam: float, f: Callable[[np.ndarray], np.ndarray],
                 integrator: Integrator | str) -> Callable[[np.ndarray], np.ndarray]:
    """Return ``step(values) -> values`` for one time step on raw arrays.

    ``f`` maps a density array to the nonlinearity values.
    """
    integrator = Integrator(integrator)
    kinetic = propagator(grid, tau)

    if integrator is Integrator.TSFP:
        def step(psi):
            psi = synthesise(kinetic * analyse(psi))
            rho = psi.real**2 + psi.imag**2
            return psi * np.exp((-1j * tau * lam) * f(rho))
    else:
        def step(psi):
            rho = psi.real**2 + psi.imag**2
            return synthesise(kinetic * analyse(psi - (1j * lam * tau) * f(rho) * psi))
    return step


def tsfp_step(psi: Field, cfg: SimulationConfig) -> Field:
    return flow_B(free_propagate(psi, cfg.tau), cfg.tau, cfg.lam, cfg.reg)


def eifp_step(psi: Field, cfg: SimulationConfig) -> Field:
    g = f_reg(psi.density, cfg.reg) * psi.values
    return free_propagate(Field(psi.grid, psi.values - 1j * cfg.lam * cfg.tau * g), cfg.tau)


def _nonlinearity(reg: Regularization) -> Callable[[np.ndarray], np.ndarray]:
    return lambda rho: f_reg(rho, reg)


def evolve(cfg: SimulationConfig, psi0: Field | None = None,
           snapshot_times: Iterable[float] = (), *,
           nonlinearity: Callable[[np.ndarray], np.ndarray] | None = None,
           ) -> tuple[Field, dict[float, Field]]:
    """Advance the initial data ``cfg.steps`` steps.

    Returns the final field and a dict of snapshots keyed by the requested
    times (each must be an integer multiple of ``tau`` within ``[0, T]``).
    ``nonlinearity`` overrides ``f_reg`` (used by invariance tests).
    """
    if psi0 is None:
        psi0 = sample_initial(cfg.initial, cfg.grid)
    if psi0.grid != cfg.grid:
        raise ValueError("initial field grid does not match the configuration grid")
    M = cfg.steps
    wanted: dict[int, list[float]] = {}
    for t in snapshot_times:
        m = step_count(t, cfg.tau) if t > 0 else 0
        if m > M:
            raise ValueError(f"snapshot time {t} beyond T={cfg.T}")
        wanted.setdefault(m, []).append(t)

    f = nonlinearity or _nonlinearity(cfg.reg)
    step = make_stepper(cfg.grid, cfg.tau, cfg.lam, f, cfg.integrator)
    snaps: dict[float, Field] = {}
    psi = psi0.values.copy()
    for t in wanted.get(0, ()):
        snaps[t] = Field(cfg.grid, psi.copy())
    for m in range(1, M + 1):
        psi = step(psi)
        if not np.isfinite(psi).all():
            raise BlowUpError(m, m * cfg.tau, snaps)
        for t in wanted.get(m, ()):
            snaps[t] = Field(cfg.grid, psi.copy())
    return Field(cfg.grid, psi), snaps


def run(cfg: SimulationConfig, psi0: Field | None = None) -> Field:
    """Final field of :func:`evolve` without snapshots."""
    return evolve(cfg, psi0)[0]


def default_cache_dir() -> Path:
    env = os.environ.get("SNLSE_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "snlse"


def _cache_key(cfg: SimulationConfig) -> str:
    g, r = cfg.grid, cfg.reg
    parts = [
        "v1", cfg.integrator.value, repr(float(cfg.lam)), repr(float(cfg.tau)), repr(float(cfg.T)),
        repr(g.a), repr(g.b), repr(g.N), cfg.initial.key,
        r.kind.value, repr(float(r.alpha)), repr(float(r.epsilon)),
        str(r.n) if r.kind is Kind.LER else "-",
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:32]


def reference_solution(problem: Problem, reg: Regularization | None = None, *,
                       tau: float = REFERENCE_TAU, epsilon: float = REFERENCE_EPSILON,
                       cache_dir: str | os.PathLike | None = None, use_cache: bool = True) -> Field:
    """Fine-step TSFP solution used as 'exact'.

    ``reg=None`` requests the singular solution, approximated with the shift
    regularization at ``epsilon`` (default 1e-12).  Results are cached on
    disk as binary field dumps keyed by a hash of every parameter.
    """
    if reg is None:
        reg = Regularization.shift(problem.alpha, epsilon)
    cfg = problem.config(reg, tau, Integrator.TSFP)
    path = None
    if use_cache:
        path = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        path = path / f"ref-{_cache_key(cfg)}.snls"
        if path.exists():
            try:
                psi = load_field(path)
                if psi.grid == cfg.grid:
                    return psi
            except (FieldFormatError, ValueError) as exc:
                log.warning("discarding corrupt reference cache %s: %s", path, exc)
    log.info("computing reference %s eps=%g tau=%g (%d steps)", reg.label, reg.epsilon, tau, cfg.steps)
    psi = run(cfg)
    if path is not None:
        dump_field(psi, path)
    return psi
