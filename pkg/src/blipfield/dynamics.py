"""Free propagation of single-photon packets.

Three routes to the same evolution ``psi_s(x, t) = psi_s(x - s c t, 0)``:

* :func:`shift_evolve` - exact circular lattice shift (integer ``c t / dx`` only)
* :func:`spectral_evolve` - phase ``exp(-i s c k t)`` per momentum mode
* :func:`apply_h_dyn` - the generator ``-i hbar s c d/dx``, applied spectrally

The derivative is spectral so that the generator reproduces the shift
exactly on the ring.  :func:`central_difference_h_dyn` exists only as a
convergence diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import DIRECTIONS, NATURAL_UNITS, Grid, PhysicalConstants, from_momentum, to_momentum
from .wavepacket import WavePacket, make_blip, norm_squared

__all__ = [
    "EvolutionReport",
    "direction_signs",
    "shift_sites",
    "shift_evolve",
    "spectral_evolve",
    "apply_h_dyn",
    "h_dyn_matrix",
    "central_difference_h_dyn",
    "spectral_derivative",
    "schrodinger_residual",
    "evolve_with_report",
]

_SHIFT_TOL = 1e-9


@dataclass(frozen=True)
class EvolutionReport:
    method: str
    time: float
    norm_drift: float
    max_deviation: float | None = None
    reference_method: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def direction_signs() -> np.ndarray:
    """``s`` broadcastable against a ``(2, 2, n)`` amplitude array."""
    return np.array([int(s) for s in DIRECTIONS], dtype=float)[:, None, None]


def shift_sites(grid: Grid, t: float, constants: PhysicalConstants = NATURAL_UNITS) -> int | None:
    """Number of sites a right-mover travels in time ``t``, or None if fractional."""
    sites = constants.c * t / grid.dx
    nearest = round(sites)
    if abs(sites - nearest) > _SHIFT_TOL * max(1.0, abs(sites)):
        return None
    return int(nearest)


def shift_evolve(p: WavePacket, t: float, constants: PhysicalConstants = NATURAL_UNITS) -> WavePacket:
    n = shift_sites(p.grid, t, constants)
    if n is None:
        raise ValueError(
            f"c*t/dx = {constants.c * t / p.grid.dx} is not an integer; use spectral_evolve"
        )
    amps = np.empty_like(p.amplitudes)
    for i, s in enumerate(DIRECTIONS):
        amps[i] = np.roll(p.amplitudes[i], int(s) * n, axis=-1)
    return WavePacket(p.grid, amps)


def spectral_evolve(p: WavePacket, t: float, constants: PhysicalConstants = NATURAL_UNITS) -> WavePacket:
    grid = p.grid
    phase = np.exp(-1j * direction_signs() * constants.c * grid.wavenumbers * t)
    return WavePacket(grid, from_momentum(to_momentum(p.amplitudes, grid) * phase, grid))


def spectral_derivative(values: np.ndarray, grid: Grid) -> np.ndarray:
    """d/dx along the last axis as multiplication by ``i k`` (Nyquist kept)."""
    return from_momentum(1j * grid.wavenumbers * to_momentum(values, grid), grid)


def apply_h_dyn(p: WavePacket, constants: PhysicalConstants = NATURAL_UNITS) -> WavePacket:
    """``H_dyn psi`` with ``H_dyn = -i hbar s c d/dx`` on each channel.

    In momentum space this is multiplication by ``hbar s c k``.
    """
    grid = p.grid
    spec = to_momentum(p.amplitudes, grid)
    spec = constants.hbar * constants.c * direction_signs() * grid.wavenumbers * spec
    return WavePacket(grid, from_momentum(spec, grid))


def h_dyn_matrix(grid: Grid, s, constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
    """Dense one-channel H_dyn in the orthonormal lattice-blip basis.

    Column j is ``H_dyn`` applied to the unit blip at site j, expressed as
    ``sqrt(dx) * psi`` so the matrix acts on unit-norm coordinate vectors.
    """
    cols = []
    pol = "H"
    for j in range(grid.n_points):
        out = apply_h_dyn(make_blip(grid, s, pol, j), constants)
        cols.append(out.channel(s, pol) * math.sqrt(grid.dx))
    return np.column_stack(cols)


def central_difference_h_dyn(grid: Grid, s, constants: PhysicalConstants = NATURAL_UNITS) -> np.ndarray:
    """Antisymmetric-stencil H_dyn on the ring (diagnostic only).

    Hermitian, but its spectrum is ``hbar s c sin(k dx)/dx`` rather than
    ``hbar s c k``; it converges to the spectral operator as dx -> 0.
    """
    n = grid.n_points
    d = np.zeros((n, n))
    idx = np.arange(n)
    d[idx, (idx + 1) % n] = 0.5 / grid.dx
    d[idx, (idx - 1) % n] = -0.5 / grid.dx
    return -1j * constants.hbar * int(s) * constants.c * d


def schrodinger_residual(
    p: WavePacket, t: float, dt: float, constants: PhysicalConstants = NATURAL_UNITS
) -> float:
    """Max-norm of ``d_t psi + s c d_x psi`` at time ``t``.

    ``d_t`` is a central difference of spectrally evolved samples at
    ``t +- dt``; ``d_x`` is spectral.  The result falls as ``dt**2``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    later = spectral_evolve(p, t + dt, constants).amplitudes
    earlier = spectral_evolve(p, t - dt, constants).amplitudes
    now = spectral_evolve(p, t, constants).amplitudes
    dpsi_dt = (later - earlier) / (2.0 * dt)
    transport = direction_signs() * constants.c * spectral_derivative(now, p.grid)
    return float(np.max(np.abs(dpsi_dt + transport)))


def evolve_with_report(
    p: WavePacket, t: float, constants: PhysicalConstants = NATURAL_UNITS, method: str = "spectral"
) -> tuple[WavePacket, EvolutionReport]:
    """Evolve by ``t`` and cross-check against the other route when possible."""
    if method not in ("spectral", "shift"):
        raise ValueError(f"unknown method {method!r}")
    exact_shift = shift_sites(p.grid, t, constants) is not None
    if method == "shift":
        out = shift_evolve(p, t, constants)
    else:
        out = spectral_evolve(p, t, constants)

    n0 = norm_squared(p)
    drift = abs(norm_squared(out) - n0) / n0 if n0 > 0 else 0.0
    deviation = reference = None
    if exact_shift:
        reference = "spectral" if method == "shift" else "shift"
        other = spectral_evolve(p, t, constants) if method == "shift" else shift_evolve(p, t, constants)
        deviation = float(np.max(np.abs(out.amplitudes - other.amplitudes)))
    return out, EvolutionReport(method, float(t), float(drift), deviation, reference)
