"""Energy observable on single-photon states and the classical energy functional."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DIRECTIONS, NATURAL_UNITS, POLARIZATIONS, PhysicalConstants
from .dynamics import spectral_evolve
from .wavepacket import WavePacket

__all__ = [
    "EnergyBreakdown",
    "channel_label",
    "energy_expectation",
    "vacuum_energy",
    "classical_energy",
    "classical_energy_from_fields",
    "conservation_probe",
]


def channel_label(s, pol) -> str:
    return f"{int(s):+d}{pol.value}"


@dataclass(frozen=True)
class EnergyBreakdown:
    total: float
    per_channel: dict[str, float]
    vacuum_reference: float

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "per_channel": dict(self.per_channel),
            "vacuum_reference": self.vacuum_reference,
        }


def vacuum_energy(grid, constants: PhysicalConstants = NATURAL_UNITS) -> float:
    """Zero-point term ``sum_{s,lambda,m} hbar c |k_m| / 2`` of the truncated lattice.

    Diagnostic only; it diverges with the number of modes.
    """
    return float(4 * 0.5 * constants.hbar * constants.c * np.sum(np.abs(grid.wavenumbers)))


def energy_expectation(p: WavePacket, constants: PhysicalConstants = NATURAL_UNITS) -> EnergyBreakdown:
    """Vacuum-subtracted ``<1_psi|H_energy|1_psi>``.

    For one photon the pair-creation terms of the energy observable have zero
    expectation and what remains is ``sum hbar c |k| |psi_k|^2 dk``.
    """
    grid = p.grid
    spec = p.to_spectral().amplitudes
    weight = constants.hbar * constants.c * np.abs(grid.wavenumbers) * grid.dk
    per = np.sum(weight * np.abs(spec) ** 2, axis=-1)
    per_channel = {
        channel_label(s, pol): float(per[s.index, pol.index])
        for s in DIRECTIONS
        for pol in POLARIZATIONS
    }
    return EnergyBreakdown(
        total=float(np.sum(per)),
        per_channel=per_channel,
        vacuum_reference=vacuum_energy(grid, constants),
    )


def classical_energy(e_fields, dx: float, constants: PhysicalConstants = NATURAL_UNITS) -> float:
    """Direction-resolved form ``sum_{s,lambda} int A eps c^2 |E_{s,lambda}|^2 dx``.

    ``e_fields`` has shape ``(2, 2, n)`` (or any leading shape ending in n).
    """
    e_fields = np.asarray(e_fields)
    pref = constants.area * constants.epsilon * constants.c**2
    return float(pref * np.sum(np.abs(e_fields) ** 2) * dx)


def classical_energy_from_fields(e_total, b_total, dx: float, constants: PhysicalConstants = NATURAL_UNITS) -> float:
    """``int A/2 (eps |E|^2 + |B|^2 / mu) dx`` from total field vectors.

    ``e_total`` and ``b_total`` have shape ``(2, n)``: (y, z) components.
    """
    e_total = np.asarray(e_total)
    b_total = np.asarray(b_total)
    if e_total.shape != b_total.shape:
        raise ValueError(f"E and B shapes differ: {e_total.shape} vs {b_total.shape}")
    density = constants.epsilon * np.abs(e_total) ** 2 + np.abs(b_total) ** 2 / constants.mu
    return float(0.5 * constants.area * np.sum(density) * dx)


def conservation_probe(p: WavePacket, times, constants: PhysicalConstants = NATURAL_UNITS) -> float:
    """Largest drift of the energy expectation over ``times``.

    Relative to the initial energy; absolute when that energy is zero.
    """
    e0 = energy_expectation(p, constants).total
    drifts = [abs(energy_expectation(spectral_evolve(p, t, constants), constants).total - e0) for t in times]
    worst = max(drifts, default=0.0)
    return worst / e0 if e0 > 0 else worst
