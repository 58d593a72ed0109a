"""Single-photon amplitude fields psi_{s,lambda}(x) on a periodic grid.

Amplitudes are stored as a complex array of shape ``(2, 2, n)`` indexed by
direction (``s = +1, -1``), polarisation (``H, V``) and lattice site.  They
carry units of length**-1/2, so ``|psi|^2 dx`` is a probability.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    DIRECTIONS,
    POLARIZATIONS,
    Direction,
    Grid,
    Polarization,
    from_momentum,
    make_grid,
    to_momentum,
)

__all__ = [
    "WavePacket",
    "SpectralPacket",
    "make_gaussian",
    "make_blip",
    "make_plane_wave",
    "make_monochromatic",
    "inner_product",
    "norm_squared",
    "normalize",
    "detection_probability",
    "position_moments",
    "write_packet_csv",
    "read_packet_csv",
]


def _direction(s) -> Direction:
    return s if isinstance(s, Direction) else Direction(int(s))


def _polarization(pol) -> Polarization:
    return pol if isinstance(pol, Polarization) else Polarization(str(pol))


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=complex)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class WavePacket:
    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _frozen(self.amplitudes)
        if amps.shape != (2, 2, self.grid.n_points):
            raise ValueError(
                f"amplitudes must have shape (2, 2, {self.grid.n_points}), got {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def channel(self, s, pol) -> np.ndarray:
        return self.amplitudes[_direction(s).index, _polarization(pol).index]

    def to_spectral(self) -> "SpectralPacket":
        return SpectralPacket(self.grid, to_momentum(self.amplitudes, self.grid))

    def scaled(self, factor: complex) -> "WavePacket":
        return WavePacket(self.grid, self.amplitudes * factor)

    def __add__(self, other: "WavePacket") -> "WavePacket":
        _check_same_grid(self, other)
        return WavePacket(self.grid, self.amplitudes + other.amplitudes)

    @classmethod
    def zeros(cls, grid: Grid) -> "WavePacket":
        return cls(grid, np.zeros((2, 2, grid.n_points), dtype=complex))

    @classmethod
    def from_channel(cls, grid: Grid, s, pol, values) -> "WavePacket":
        amps = np.zeros((2, 2, grid.n_points), dtype=complex)
        amps[_direction(s).index, _polarization(pol).index] = values
        return cls(grid, amps)


@dataclass(frozen=True, eq=False)
class SpectralPacket:
    """Momentum-space amplitudes psi_{s,lambda}(k_m), FFT-ordered."""

    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _frozen(self.amplitudes)
        if amps.shape != (2, 2, self.grid.n_points):
            raise ValueError(
                f"amplitudes must have shape (2, 2, {self.grid.n_points}), got {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def to_position(self) -> WavePacket:
        return WavePacket(self.grid, from_momentum(self.amplitudes, self.grid))


def _check_same_grid(p1, p2) -> None:
    if p1.grid != p2.grid:
        raise ValueError(f"grid mismatch: {p1.grid} vs {p2.grid}")


def _wrapped(x: np.ndarray, grid: Grid) -> np.ndarray:
    """Minimal-image displacement on the ring, in [-L/2, L/2)."""
    L = grid.length
    return (x + 0.5 * L) % L - 0.5 * L


def make_gaussian(grid: Grid, s, pol, center_x: float, sigma_x: float, k0: float = 0.0) -> WavePacket:
    """Normalised Gaussian ``exp(-(x-x0)^2 / (4 sigma^2)) * exp(i k0 x)`` on one channel.

    ``sigma_x`` is the standard deviation of ``|psi|^2``.  The envelope uses
    the minimal-image distance, so a packet near the seam is continuous
    across it.
    """
    if sigma_x < 2.0 * grid.dx:
        raise ValueError(f"sigma_x={sigma_x} is below 2*dx={2 * grid.dx}; not resolvable")
    lo, hi = grid.x_min, grid.x_min + grid.length
    if not (lo <= center_x < hi):
        raise ValueError(f"center_x={center_x} outside domain [{lo}, {hi})")
    d = _wrapped(grid.positions - center_x, grid)
    values = np.exp(-(d**2) / (4.0 * sigma_x**2)) * np.exp(1j * k0 * grid.positions)
    return normalize(WavePacket.from_channel(grid, s, pol, values))


def make_blip(grid: Grid, s, pol, index: int) -> WavePacket:
    """Unit-norm lattice blip: amplitude ``1/sqrt(dx)`` at one site."""
    if isinstance(index, bool) or int(index) != index:
        raise ValueError(f"index must be an integer, got {index!r}")
    index = int(index)
    if not 0 <= index < grid.n_points:
        raise IndexError(f"site index {index} out of range [0, {grid.n_points})")
    values = np.zeros(grid.n_points, dtype=complex)
    values[index] = 1.0 / math.sqrt(grid.dx)
    return WavePacket.from_channel(grid, s, pol, values)


def make_plane_wave(grid: Grid, s, pol, mode: int) -> WavePacket:
    """Unit-norm plane wave ``exp(i k_m x) / sqrt(L)`` for lattice mode ``m``."""
    k = 2.0 * math.pi * mode / grid.length
    values = np.exp(1j * k * grid.positions) / math.sqrt(grid.length)
    return WavePacket.from_channel(grid, s, pol, values)


def make_monochromatic(grid: Grid, s, pol, mode: int) -> WavePacket:
    """Single momentum mode with unit norm, built in momentum space.

    Unlike :func:`make_plane_wave` the spectrum is exactly one non-zero
    entry ``1/sqrt(dk)``, so momentum-space observables are exact.
    """
    m = int(mode) % grid.n_points
    spec = np.zeros((2, 2, grid.n_points), dtype=complex)
    spec[_direction(s).index, _polarization(pol).index, m] = 1.0 / math.sqrt(grid.dk)
    return SpectralPacket(grid, spec).to_position()


def inner_product(p1: WavePacket, p2: WavePacket) -> complex:
    """``<p1|p2> = sum_{s,lambda,j} conj(psi1) psi2 dx``."""
    _check_same_grid(p1, p2)
    return complex(np.vdot(p1.amplitudes, p2.amplitudes) * p1.grid.dx)


def norm_squared(p: WavePacket) -> float:
    return float(np.sum(np.abs(p.amplitudes) ** 2) * p.grid.dx)


def normalize(p: WavePacket) -> WavePacket:
    n2 = norm_squared(p)
    if not n2 > 0:
        raise ValueError("cannot normalise a zero packet")
    return p.scaled(1.0 / math.sqrt(n2))


def detection_probability(p: WavePacket, s, pol, index: int) -> float:
    """Probability ``|psi_{s,lambda}(x_j)|^2 dx`` of finding the photon at one site."""
    if not 0 <= index < p.grid.n_points:
        raise IndexError(f"site index {index} out of range [0, {p.grid.n_points})")
    return float(abs(p.channel(s, pol)[index]) ** 2 * p.grid.dx)


def position_moments(p: WavePacket) -> tuple[float, float]:
    """Circular mean and variance of ``|psi|^2`` summed over channels.

    The mean comes from the phase of the first Fourier moment; the variance
    uses minimal-image displacements from it, so a packet straddling the
    seam is handled correctly as long as it is narrow compared with L.
    """
    grid = p.grid
    density = np.sum(np.abs(p.amplitudes) ** 2, axis=(0, 1)) * grid.dx
    total = density.sum()
    theta = 2.0 * math.pi * (grid.positions - grid.x_min) / grid.length
    z = np.sum(density * np.exp(1j * theta)) / total
    mean = grid.x_min + (np.angle(z) % (2.0 * math.pi)) * grid.length / (2.0 * math.pi)
    d = _wrapped(grid.positions - mean, grid)
    return float(mean), float(np.sum(density * d**2) / total)


# -- CSV ---------------------------------------------------------------------

_CSV_HEADER = ["s", "lambda", "x", "re_psi", "im_psi"]


def write_packet_csv(p: WavePacket, path) -> None:
    """Write rows ordered by (s = +1, -1), (lambda = H, V), ascending x."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_HEADER)
        for s in DIRECTIONS:
            for pol in POLARIZATIONS:
                values = p.channel(s, pol)
                for x, v in zip(p.grid.positions, values):
                    writer.writerow([f"{int(s):+d}", pol.value, repr(float(x)),
                                     repr(float(v.real)), repr(float(v.imag))])


def read_packet_csv(path, grid: Grid | None = None) -> WavePacket:
    """Read a packet written by :func:`write_packet_csv`.

    The grid is reconstructed from the x column (``L = -2 x_0``); if ``grid``
    is given the file must match it.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CSV_HEADER:
            raise ValueError(f"{path}: expected header {_CSV_HEADER}, got {header}")
        rows = list(reader)

    channels: dict[tuple[int, int], list[tuple[float, complex]]] = {}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 5:
            raise ValueError(f"{path}:{lineno}: expected 5 columns, got {len(row)}")
        try:
            s = _direction(int(row[0]))
            pol = _polarization(row[1])
            x, re, im = float(row[2]), float(row[3]), float(row[4])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        channels.setdefault((s.index, pol.index), []).append((x, complex(re, im)))

    if len(channels) != 4:
        raise ValueError(f"{path}: expected 4 channels, found {len(channels)}")
    sizes = {len(v) for v in channels.values()}
    if len(sizes) != 1:
        raise ValueError(f"{path}: channels have unequal lengths {sorted(sizes)}")
    n = sizes.pop()

    xs = np.array([x for x, _ in channels[(0, 0)]])
    if grid is None:
        grid = make_grid(n, -2.0 * xs[0])
    if grid.n_points != n:
        raise ValueError(f"{path}: file has {n} sites, grid has {grid.n_points}")

    amps = np.zeros((2, 2, n), dtype=complex)
    for (si, pi), entries in channels.items():
        x_col = np.array([x for x, _ in entries])
        if not np.allclose(x_col, grid.positions, rtol=0, atol=1e-9 * grid.length):
            raise ValueError(f"{path}: x column does not match the grid")
        amps[si, pi] = [v for _, v in entries]
    return WavePacket(grid, amps)
