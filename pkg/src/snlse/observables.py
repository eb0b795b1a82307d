"""Conserved quantities, discrete error norms and a 2D vortex locator.

All integrals use the periodic rectangle rule ``h^d * sum_j``, which is
spectrally accurate for smooth periodic integrands.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .spectral_grid import Field, spectral_gradient
from .regularization import DomainError, F_reg, Kind, Regularization


def mass(psi: Field) -> float:
    return psi.grid.cell_volume * float(np.sum(psi.density))


def momentum(psi: Field) -> np.ndarray:
    """``Im int conj(psi) grad psi`` with the Nyquist mode dropped from the derivative."""
    grads = spectral_gradient(psi.values, psi.grid, keep_nyquist=False)
    conj = np.conj(psi.values)
    return np.array([psi.grid.cell_volume * float(np.sum((conj * g).imag)) for g in grads])


def kinetic_energy(psi: Field) -> float:
    grads = spectral_gradient(psi.values, psi.grid)
    return psi.grid.cell_volume * float(sum(np.sum(g.real**2 + g.imag**2) for g in grads))


def energy(psi: Field, lam: float, reg: Regularization) -> float:
    """``int |grad psi|^2 + lam F_reg(|psi|^2)``.

    Raises :class:`~snlse.regularization.DomainError` for the exact kind when
    some node has zero density.
    """
    if reg.kind is Kind.EXACT and reg.alpha < 0 and np.any(psi.density == 0):
        idx = tuple(int(i) for i in np.argwhere(psi.density == 0)[0])
        raise DomainError(f"exact energy undefined: zero density at node {idx}")
    potential = psi.grid.cell_volume * float(np.sum(F_reg(psi.density, reg)))
    return kinetic_energy(psi) + lam * potential


@dataclass(frozen=True)
class ErrorReport:
    err_wave_l2: float
    err_density_l1: float
    err_energy: float
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("err_wave_l2", "err_density_l1", "err_energy"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")


def l2_distance(a: Field, b: Field) -> float:
    _check_same_grid(a, b)
    diff = a.values - b.values
    return math.sqrt(a.grid.cell_volume * float(np.sum(diff.real**2 + diff.imag**2)))


def density_l1_distance(a: Field, b: Field) -> float:
    _check_same_grid(a, b)
    return a.grid.cell_volume * float(np.sum(np.abs(a.density - b.density)))


def _check_same_grid(a: Field, b: Field):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def energy_error(psi0: Field, lam: float, reg: Regularization) -> float:
    """``|E(psi0) - E_reg(psi0)|``; the kinetic parts cancel, so only ``F - F_reg`` is summed."""
    exact = Regularization.exact(reg.alpha)
    rho = psi0.density
    if np.any(rho == 0):
        energy(psi0, lam, exact)  # raises DomainError with the node
    diff = F_reg(rho, exact) - F_reg(rho, reg)
    return abs(lam) * abs(psi0.grid.cell_volume * float(np.sum(diff)))


def error_norms(psi_ref: Field, psi: Field, lam: float, reg_for_energy: Regularization,
                psi0: Field, **metadata) -> ErrorReport:
    """Wave L2, density L1 and initial-data energy errors.

    The energy error is evaluated on ``psi0`` only; it measures the model
    change, not the drift along the trajectory.
    """
    _check_same_grid(psi_ref, psi)
    _check_same_grid(psi_ref, psi0)
    return ErrorReport(
        err_wave_l2=l2_distance(psi_ref, psi),
        err_density_l1=density_l1_distance(psi_ref, psi),
        err_energy=energy_error(psi0, lam, reg_for_energy),
        metadata=metadata,
    )


@dataclass(frozen=True)
class Vortex:
    position: tuple[float, float]
    charge: int


def _wrap(dphi):
    return (dphi + np.pi) % (2 * np.pi) - np.pi


def _plaquette_winding(phase: np.ndarray) -> np.ndarray:
    """Integer winding of plaquette ``(i, j)`` (corners ``i..i+1``, ``j..j+1``).

    Each edge increment is computed once, so neighbouring plaquettes see
    exactly opposite contributions and sums over regions telescope.
    """
    dx = _wrap(np.roll(phase, -1, axis=0) - phase)  # edge (i, j) -> (i+1, j)
    dy = _wrap(np.roll(phase, -1, axis=1) - phase)  # edge (i, j) -> (i, j+1)
    circ = dx + np.roll(dy, -1, axis=0) - np.roll(dx, -1, axis=1) - dy
    return np.rint(circ / (2 * np.pi)).astype(int)


def locate_vortices(psi: Field, density_floor: float | None = None) -> list[Vortex]:
    """Phase singularities of a 2D field.

    Plaquettes whose four corners all exceed ``density_floor`` report a
    vortex at their center when the principal-value phase increments around
    them add up to ``2*pi*m`` with ``m != 0``.

    Nodes below the floor are grouped into 8-connected regions.  A region
    not touching the domain edge is a vortex core whose phase is unresolved
    (``|psi|`` too small); its charge is the winding along the surrounding
    resolved nodes, computed as the sum of the windings of every plaquette
    touching the region, and it is reported at the region's centroid.
    Regions touching the edge (the low-density far field) are ignored.
    Default floor: ``1e-8 * max |psi|^2``.
    """
    g = psi.grid
    if g.d != 2:
        raise ValueError("vortex detection needs a 2D field")
    rho = psi.density
    if density_floor is None:
        density_floor = 1e-8 * float(rho.max())
    phase = np.angle(psi.values)
    low = rho <= density_floor
    hx, hy = g.h
    x, y = g.nodes
    nx, ny = g.N

    def sh(a, i, j):
        return np.roll(a, (-i, -j), axis=(0, 1))

    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    winding = _plaquette_winding(phase)
    touches_low = np.logical_or.reduce([sh(low, i, j) for i, j in corners])
    # drop the wrap-around plaquettes; the field need not be resolved across the seam
    interior = np.zeros(g.shape, dtype=bool)
    interior[:-1, :-1] = True

    found = []
    hits = interior & ~touches_low & (winding != 0)
    for i, j in zip(*np.nonzero(hits)):
        found.append(Vortex((float(x[i] + hx / 2), float(y[j] + hy / 2)), int(winding[i, j])))

    labels, count = ndimage.label(low, structure=np.ones((3, 3), dtype=int))
    if count:
        edge = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
        # plaquettes touching each region: dilate the node mask by one node towards lower indices
        for lab in range(1, count + 1):
            if lab in edge:
                continue
            nodes = labels == lab
            plaq = nodes | sh(nodes, 1, 0) | sh(nodes, 0, 1) | sh(nodes, 1, 1)
            m = int(winding[plaq & interior].sum())
            if m != 0:
                ii, jj = np.nonzero(nodes)
                found.append(Vortex((float(x[ii].mean()), float(y[jj].mean())), m))
    found.sort(key=lambda v: (v.position[0], v.position[1]))
    return found
