"""Units, the periodic 1D lattice and the unitary spectral transforms.

Everything downstream works on a ring of length ``L`` sampled at ``n``
equally spaced points ``x_j = -L/2 + j*dx``.  Wrap-around is physical
transport around the ring, which keeps lattice shifts exactly unitary.

Transform convention (continuum-normalised, unitary)::

    psi_k(k_m) = dx / sqrt(2 pi) * sum_j exp(-i k_m x_j) psi(x_j)
    psi(x_j)   = dk / sqrt(2 pi) * sum_m exp(+i k_m x_j) psi_k(k_m)

so that ``sum |psi_k|^2 dk == sum |psi|^2 dx``.  Wavenumbers are stored in
FFT order, ``k_m = 2 pi m / L`` with ``m`` in ``[0, n/2) U [-n/2, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

__all__ = [
    "PhysicalConstants",
    "NATURAL_UNITS",
    "Grid",
    "Direction",
    "Polarization",
    "DIRECTIONS",
    "POLARIZATIONS",
    "make_grid",
    "to_momentum",
    "from_momentum",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """Unit system shared by every formula.

    ``mu`` is never stored; it follows from ``c = (epsilon * mu) ** -0.5``.
    """

    hbar: float = 1.0
    c: float = 1.0
    epsilon: float = 1.0
    area: float = 1.0

    def __post_init__(self) -> None:
        for name in ("hbar", "c", "epsilon", "area"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")

    @property
    def mu(self) -> float:
        return 1.0 / (self.epsilon * self.c * self.c)


NATURAL_UNITS = PhysicalConstants()


class Direction(IntEnum):
    """Propagation direction ``s``; +1 moves toward increasing x."""

    RIGHT = 1
    LEFT = -1

    @property
    def index(self) -> int:
        return 0 if self is Direction.RIGHT else 1


class Polarization(Enum):
    H = "H"
    V = "V"

    @property
    def index(self) -> int:
        return 0 if self is Polarization.H else 1


# Axis order of every (s, lambda, x) amplitude array in the package.
DIRECTIONS = (Direction.RIGHT, Direction.LEFT)
POLARIZATIONS = (Polarization.H, Polarization.V)


@dataclass(frozen=True, eq=False)
class Grid:
    """Periodic lattice and its conjugate wavenumber lattice."""

    n_points: int
    length: float
    positions: np.ndarray = field(repr=False)
    wavenumbers: np.ndarray = field(repr=False)

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def dk(self) -> float:
        return 2.0 * math.pi / self.length

    @property
    def x_min(self) -> float:
        return -0.5 * self.length

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    @property
    def displacements(self) -> np.ndarray:
        """Signed lattice displacements ``j*dx`` in wrap order (0, dx, ..., -dx)."""
        j = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)
        return j * self.dx

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self.n_points == other.n_points and self.length == other.length

    def __hash__(self) -> int:
        return hash((self.n_points, self.length))


def make_grid(n_points: int, length: float) -> Grid:
    """Build a periodic grid of ``n_points`` sites on a ring of ``length``.

    ``n_points`` must be even and at least 4 so that every wavenumber except
    0 and the Nyquist mode has a ``-k`` partner.
    """
    if isinstance(n_points, bool) or int(n_points) != n_points:
        raise ValueError(f"n_points must be an integer, got {n_points!r}")
    n_points = int(n_points)
    if n_points < 4 or n_points % 2:
        raise ValueError(f"n_points must be even and >= 4, got {n_points}")
    length = float(length)
    if not (math.isfinite(length) and length > 0):
        raise ValueError(f"length must be positive, got {length!r}")

    dx = length / n_points
    positions = -0.5 * length + dx * np.arange(n_points)
    wavenumbers = 2.0 * math.pi * np.fft.fftfreq(n_points, d=dx)
    positions.setflags(write=False)
    wavenumbers.setflags(write=False)
    return Grid(n_points, length, positions, wavenumbers)


def _check_length(values: np.ndarray, grid: Grid) -> None:
    if values.shape[-1] != grid.n_points:
        raise ValueError(
            f"last axis has {values.shape[-1]} samples, grid has {grid.n_points}"
        )


def to_momentum(values, grid: Grid) -> np.ndarray:
    """Unitary forward transform along the last axis."""
    values = np.asarray(values, dtype=complex)
    _check_length(values, grid)
    phase = np.exp(-1j * grid.wavenumbers * grid.x_min)
    return np.fft.fft(values, axis=-1) * phase * (grid.dx / math.sqrt(2.0 * math.pi))


def from_momentum(values, grid: Grid) -> np.ndarray:
    """Exact inverse of :func:`to_momentum`."""
    values = np.asarray(values, dtype=complex)
    _check_length(values, grid)
    phase = np.exp(1j * grid.wavenumbers * grid.x_min)
    scale = grid.n_points * grid.dk / math.sqrt(2.0 * math.pi)
    return np.fft.ifft(values * phase, axis=-1) * scale
