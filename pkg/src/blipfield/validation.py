"""Self-check battery run by ``blipfield validate``.

Each check measures one physical identity at desk scale and compares it with
a fixed tolerance.  The report is plain data so it serialises straight to
JSON.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .core import NATURAL_UNITS, PhysicalConstants, from_momentum, make_grid, to_momentum
from .dynamics import apply_h_dyn, h_dyn_matrix, shift_evolve, spectral_evolve
from .energy import classical_energy, classical_energy_from_fields, conservation_probe, energy_expectation
from .fields import intensity_profile, kernel_fourier, kernel_tail_exponent, poynting_profile
from .oracles import (
    ClassicalField,
    build_fock_set,
    channel_modes,
    commutator_norm,
    dalembert_evolve,
    default_modes,
    maxwell_residual,
    oracle_field_moment,
    single_excitation_energy,
)
from .wavepacket import (
    WavePacket,
    inner_product,
    make_gaussian,
    make_monochromatic,
    norm_squared,
    normalize,
    position_moments,
)

__all__ = ["Check", "CHECKS", "run_checks"]


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    threshold: float
    passed: bool
    relation: str = "<"

    def to_dict(self) -> dict:
        return asdict(self)


def _below(name: str, measured: float, threshold: float) -> Check:
    return Check(name, float(measured), float(threshold), bool(measured < threshold), "<")


def _within(name: str, measured: float, target: float, tol: float) -> Check:
    target = float(target)
    dev = abs(measured - target)
    return Check(name, float(measured), float(tol), bool(dev <= tol), f"|x-({target!r})|<=")


def check_transport(rng, constants):
    grid = make_grid(1024, 64.0)
    p = make_gaussian(grid, 1, "H", 0.0, 1.0, 0.0)
    t = 64 * grid.dx / constants.c
    diff = np.max(np.abs(shift_evolve(p, t, constants).amplitudes - spectral_evolve(p, t, constants).amplitudes))
    return [_below("transport_shift_vs_spectral", diff, 1e-10)]


def check_dispersion_and_unitarity(rng, constants):
    grid = make_grid(1024, 64.0)
    p = make_gaussian(grid, 1, "H", -10.0, 1.0, 3.0)
    _, var0 = position_moments(p)
    n0 = norm_squared(p)
    var_drift = norm_drift = 0.0
    q = p
    for _ in range(100):
        q = spectral_evolve(q, 0.37, constants)
        var_drift = max(var_drift, abs(position_moments(q)[1] - var0) / var0)
        norm_drift = max(norm_drift, abs(norm_squared(q) - n0) / n0)

    a = 16.0
    right = make_gaussian(grid, 1, "H", -a, 1.0, 0.0)
    left = make_gaussian(grid, -1, "H", a, 1.0, 0.0)
    overlap = max(
        abs(inner_product(spectral_evolve(right, t, constants), spectral_evolve(left, t, constants)))
        for t in np.linspace(0.0, 2.0 * a / constants.c, 20)
    )
    return [
        _below("no_dispersion_variance_drift", var_drift, 1e-9),
        _below("unitarity_norm_drift", norm_drift, 1e-10),
        _below("counter_propagating_overlap", overlap, 1e-12),
    ]


def check_spectrum(rng, constants):
    grid = make_grid(32, 8.0)
    n = grid.n_points
    dft = np.exp(-1j * np.outer(grid.wavenumbers, grid.positions)) / math.sqrt(n)
    worst_off = worst_diag = 0.0
    for s in (1, -1):
        h = dft @ h_dyn_matrix(grid, s, constants) @ dft.conj().T
        expected = constants.hbar * s * constants.c * grid.wavenumbers
        worst_diag = max(worst_diag, np.max(np.abs(np.diag(h) - expected)))
        worst_off = max(worst_off, np.max(np.abs(h - np.diag(np.diag(h)))))
    return [
        _below("h_dyn_momentum_diagonal_offdiag", worst_off, 1e-12),
        _below("h_dyn_eigenvalues_hbar_s_c_k", worst_diag, 1e-12),
    ]


def check_energy(rng, constants):
    grid = make_grid(256, 64.0)
    mode = 5
    k0 = grid.wavenumbers[mode]
    fast = energy_expectation(make_monochromatic(grid, 1, "H", mode), constants).total
    fock = build_fock_set(default_modes(grid), 2, constants)
    oracle = single_excitation_energy(fock, 0)
    k_oracle = fock.modes[0].k

    narrow = make_grid(2048, 512.0)
    sigma_k = 0.1
    gauss = make_gaussian(narrow, 1, "H", 0.0, 1.0 / (2.0 * sigma_k), 2.0)
    total = energy_expectation(gauss, constants).total

    times = np.linspace(0.0, 50.0, 100)
    drift = conservation_probe(make_gaussian(grid, 1, "V", 3.0, 1.5, 1.0), times, constants)
    return [
        _within("monochromatic_energy_fast", fast, constants.hbar * constants.c * abs(k0), 1e-12),
        _within("monochromatic_energy_oracle", oracle, constants.hbar * constants.c * abs(k_oracle), 1e-12),
        _within("narrowband_gaussian_energy", total, constants.hbar * constants.c * 2.0, 1e-3),
        _below("energy_conservation_drift", drift, 1e-10),
    ]


def check_kernel(rng, constants):
    grid = make_grid(4096, 4096.0)
    value = float(kernel_fourier(math.pi, NATURAL_UNITS))
    slope = kernel_tail_exponent(grid, constants)
    islope = kernel_tail_exponent(grid, constants, squared=True)
    return [
        _within("kernel_fourier_at_pi", value, 1.0, 1e-12),
        _within("kernel_tail_slope", slope, -1.5, 0.05),
        _within("intensity_tail_slope", islope, -3.0, 0.1),
    ]


def check_commutators(rng, constants):
    fock = build_fock_set(default_modes(), 2, constants)
    mask = fock.safe
    h = fock.h_energy[np.ix_(mask, mask)]
    lam = float(np.linalg.eigvalsh(h).min())
    rel = lam / np.linalg.norm(fock.h_energy, 2)
    return [
        _below("commutator_energy_dyn", commutator_norm(fock, "energy-dyn"), 1e-10),
        _below("commutator_dyn_number", commutator_norm(fock, "dyn-number"), 1e-12),
        Check("h_energy_min_eigenvalue", rel, -1e-10, bool(rel >= -1e-10), ">="),
    ]


def _bump(grid, center, width):
    d = (grid.positions - center + 0.5 * grid.length) % grid.length - 0.5 * grid.length
    return np.exp(-(d**2) / (2.0 * width**2))


def _classical(grid, constants):
    comps = np.zeros((2, 2, grid.n_points))
    comps[0, 0] = _bump(grid, -3.0, 1.0)
    comps[0, 1] = 0.5 * _bump(grid, 1.0, 0.8)
    comps[1, 0] = -0.7 * _bump(grid, 2.0, 1.2)
    comps[1, 1] = 0.3 * _bump(grid, -1.0, 0.9)
    return ClassicalField(grid, comps, constants)


def check_classical(rng, constants):
    coarse = make_grid(128, 32.0)
    fine = make_grid(256, 32.0)
    courant = 0.5
    r_coarse = maxwell_residual(_classical(coarse, constants), courant * coarse.dx / constants.c)
    r_fine = maxwell_residual(_classical(fine, constants), courant * fine.dx / constants.c)
    ratio = min(r_coarse[i] / r_fine[i] for i in range(2))
    ratio_hi = max(r_coarse[i] / r_fine[i] for i in range(2))

    grid = make_grid(256, 32.0)
    field = ClassicalField(grid, rng.standard_normal((2, 2, grid.n_points)), constants)
    field = dalembert_evolve(field, 0.731)
    e8 = classical_energy(field.components, grid.dx, constants)
    e3 = classical_energy_from_fields(field.total_e(), field.total_b(), grid.dx, constants)
    return [
        _within("maxwell_convergence_ratio_min", ratio, 4.0, 1.0),
        _within("maxwell_convergence_ratio_max", ratio_hi, 4.0, 1.0),
        _below("energy_forms_agree", abs(e8 - e3) / e8, 1e-12),
    ]


def check_poynting(rng, constants):
    grid = make_grid(1024, 64.0)
    right = make_gaussian(grid, 1, "H", 0.0, 1.0, 2.0)
    left = make_gaussian(grid, -1, "H", 0.0, 1.0, 2.0)
    s_right = poynting_profile(right, constants=constants)
    s_left = poynting_profile(left, constants=constants)
    flux = constants.area * s_right.sum() * grid.dx
    ratio = flux / energy_expectation(right, constants).total
    return [
        Check("poynting_right_mover_min", float(s_right.min()), -1e-15, bool(s_right.min() >= -1e-15), ">="),
        _within("poynting_flux_over_energy", ratio, constants.c, 1e-9 * constants.c),
        _below("poynting_sign_flip", float(np.max(np.abs(s_left + s_right))), 1e-15 + 1e-12 * np.max(np.abs(s_right))),
    ]


def check_fields_vs_oracle(rng, constants):
    grid = make_grid(16, 8.0)
    fock = build_fock_set(channel_modes(grid, 1, "H"), 2, constants,
                          max_total=2, nyquist=math.pi / grid.dx, grid=grid)
    amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    p = normalize(WavePacket.from_channel(grid, 1, "H", amps))
    fast = intensity_profile(p, constants=constants)[0]
    oracle = np.array([oracle_field_moment(fock, p, x) for x in grid.positions])
    return [_below("intensity_vs_fock_oracle", float(np.max(np.abs(fast - oracle))), 1e-8)]


def check_sign_split(rng, constants):
    grid = make_grid(256, 64.0)
    mode = 7
    k = grid.wavenumbers[mode]
    p = make_monochromatic(grid, -1, "H", mode)
    h_dyn = inner_product(p, apply_h_dyn(p, constants)).real
    energy = energy_expectation(p, constants).total
    hck = constants.hbar * constants.c * k
    return [
        _within("sign_split_h_dyn", h_dyn, -hck, 1e-12 * hck),
        _within("sign_split_energy", energy, hck, 1e-12 * hck),
    ]


def check_parseval(rng, constants):
    grid = make_grid(512, 40.0)
    psi = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    spec = to_momentum(psi, grid)
    lhs = np.sum(np.abs(spec) ** 2) * grid.dk
    rhs = np.sum(np.abs(psi) ** 2) * grid.dx
    back = from_momentum(spec, grid)
    return [
        _below("parseval", abs(lhs - rhs) / rhs, 1e-12),
        _below("transform_round_trip", float(np.max(np.abs(back - psi))), 1e-12),
    ]


CHECKS: list[Callable] = [
    check_parseval,
    check_transport,
    check_dispersion_and_unitarity,
    check_spectrum,
    check_energy,
    check_kernel,
    check_commutators,
    check_classical,
    check_poynting,
    check_fields_vs_oracle,
    check_sign_split,
]


def run_checks(seed: int = 0, constants: PhysicalConstants = NATURAL_UNITS) -> list[Check]:
    rng = np.random.default_rng(seed)
    results: list[Check] = []
    for check in CHECKS:
        results.extend(check(rng, constants))
    return results
