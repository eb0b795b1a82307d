"""Periodic uniform grids and Fourier analysis/synthesis.

Coefficients are stored in FFT-native order: array index ``k`` along an axis
holds the mode ``l = k`` for ``k < N/2`` and ``l = k - N`` otherwise, so the
wavenumber set is ``mu_l = 2*pi*l/(b - a)`` for ``l`` in ``{-N/2, ..., N/2-1}``.
Use :func:`mode_numbers` for the explicit index -> ``l`` map.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class Grid:
    """Tensor-product periodic grid on ``[a, b)`` per axis.

    ``a``, ``b`` and ``N`` are tuples with one entry per axis. Nodes are
    ``x_j = a + j*h`` for ``j = 0..N-1``; the periodic node ``x_N = b`` is
    implicit.
    """

    a: tuple[float, ...]
    b: tuple[float, ...]
    N: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.a) == len(self.b) == len(self.N)):
            raise ValueError("a, b and N must have one entry per axis")
        if len(self.N) not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {len(self.N)}")
        for a, b, n in zip(self.a, self.b, self.N):
            if not b > a:
                raise ValueError(f"need b > a, got a={a}, b={b}")
            if n < 4 or n % 2:
                raise ValueError(f"N must be an even integer >= 4, got {n}")

    @property
    def d(self) -> int:
        return len(self.N)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.N

    @property
    def size(self) -> int:
        return int(np.prod(self.N))

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.a, self.b))

    @property
    def h(self) -> tuple[float, ...]:
        return tuple((b - a) / n for a, b, n in zip(self.a, self.b, self.N))

    @property
    def cell_volume(self) -> float:
        """``h^d`` (product of per-axis mesh sizes)."""
        return float(np.prod(self.h))

    @cached_property
    def nodes(self) -> tuple[np.ndarray, ...]:
        """1D node arrays per axis."""
        return tuple(a + np.arange(n) * h for a, n, h in zip(self.a, self.N, self.h))

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Broadcast node arrays with ``indexing='ij'``."""
        return tuple(np.meshgrid(*self.nodes, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """``mu_l`` per axis in FFT-native order."""
        return tuple(2 * np.pi * mode_numbers(n) / L for n, L in zip(self.N, self.lengths))

    @cached_property
    def mu2(self) -> np.ndarray:
        """Symbol of ``-Laplacian``: ``sum_axes mu^2`` broadcast to the grid shape."""
        out = np.zeros(self.shape)
        for axis, mu in enumerate(self.wavenumbers):
            out = out + _along(mu**2, axis, self.d)
        return out


def _along(v: np.ndarray, axis: int, d: int) -> np.ndarray:
    shape = [1] * d
    shape[axis] = v.size
    return v.reshape(shape)


def mode_numbers(N: int) -> np.ndarray:
    """Integer mode ``l`` stored at each FFT-native index (``[0..N/2-1, -N/2..-1]``)."""
    return np.fft.fftfreq(N, d=1.0 / N).astype(np.int64)


def mode_index(l: int, N: int) -> int:
    """FFT-native array index holding mode ``l``."""
    if not -N // 2 <= l < N // 2:
        raise ValueError(f"mode {l} outside [-{N // 2}, {N // 2 - 1}]")
    return l % N


def make_grid(a: float | Sequence[float], b: float | Sequence[float],
              N: int | Sequence[int], d: int = 1) -> Grid:
    """Build a ``d``-dimensional grid; scalar arguments are repeated per axis."""
    if d not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {d}")

    def per_axis(v, cast):
        if np.ndim(v) == 0:
            return (cast(v),) * d
        v = tuple(cast(x) for x in v)
        if len(v) != d:
            raise ValueError(f"expected {d} per-axis values, got {len(v)}")
        return v

    Ns = per_axis(N, lambda x: x)
    for n in Ns:
        if int(n) != n:
            raise ValueError(f"N must be an integer, got {n}")
    return Grid(per_axis(a, float), per_axis(b, float), tuple(int(n) for n in Ns))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a wave function at the grid nodes."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def density(self) -> np.ndarray:
        return self.values.real**2 + self.values.imag**2


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Interpolation coefficients ``psi~_l`` in FFT-native order."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != self.grid.shape:
            raise ValueError(f"coeffs shape {coeffs.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coeffs", coeffs)

    def mode(self, *l: int) -> complex:
        """Coefficient of mode ``l`` (one integer per axis)."""
        idx = tuple(mode_index(li, n) for li, n in zip(l, self.grid.N))
        return complex(self.coeffs[idx])


# Raw-array kernels used in the time loop; the Field wrappers below add checks.

def analyse(values: np.ndarray) -> np.ndarray:
    """``(1/N^d) * sum_j psi_j exp(-i mu_l (x_j - a))``."""
    return sfft.fftn(values, norm="forward")


def synthesise(coeffs: np.ndarray) -> np.ndarray:
    """``sum_l c_l exp(i mu_l (x_j - a))``."""
    return sfft.ifftn(coeffs, norm="forward")


def propagator(grid: Grid, t: float) -> np.ndarray:
    """Fourier multiplier ``exp(-i t |mu|^2)`` of the free flow ``exp(i t Laplacian)``."""
    return np.exp(-1j * t * grid.mu2)


def to_spectral(f: Field) -> SpectralCoeffs:
    return SpectralCoeffs(f.grid, analyse(f.values))


def from_spectral(c: SpectralCoeffs) -> Field:
    return Field(c.grid, synthesise(c.coeffs))


def free_propagate(f: Field, t: float) -> Field:
    """Exact free Schroedinger flow ``i psi_t = -Laplacian psi`` over time ``t``.

    The Nyquist mode is propagated like any other; it is an eigenmode of the
    discrete propagator.
    """
    if t == 0:
        return Field(f.grid, f.values.copy())
    return Field(f.grid, synthesise(propagator(f.grid, t) * analyse(f.values)))


def spectral_gradient(values: np.ndarray, grid: Grid, keep_nyquist: bool = True) -> list[np.ndarray]:
    """Per-axis derivatives obtained by synthesising ``i mu_l psi~_l``.

    ``keep_nyquist=False`` zeroes the ``l = -N/2`` mode, which makes the
    derivative of a real field real.
    """
    coeffs = analyse(values)
    out = []
    for axis, mu in enumerate(grid.wavenumbers):
        mu = mu.copy()
        if not keep_nyquist:
            mu[grid.N[axis] // 2] = 0.0
        out.append(synthesise(1j * _along(mu, axis, grid.d) * coeffs))
    return out
