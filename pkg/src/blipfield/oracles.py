"""Brute-force ground truth for the production modules.

Two independent checks live here:

* a classical solver: direction-resolved fields ``E_{s,lambda}(x)``
  transported by index arithmetic, total E and B assembled from them, and
  central-difference residuals of the first-order Maxwell equations;
* dense matrices on a truncated bosonic Fock space over a handful of
  momentum modes, used to verify commutators, spectra and vacuum-subtracted
  expectations.

Bosonic matrices cannot be exact at the occupancy cap, so every operator
identity is asserted only on the *safe subspace*: states whose occupancies
are all below the cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .core import DIRECTIONS, NATURAL_UNITS, POLARIZATIONS, Grid, PhysicalConstants
from .fields import kernel_fourier
from .wavepacket import WavePacket

__all__ = [
    "ClassicalField",
    "dalembert_evolve",
    "maxwell_residual",
    "Mode",
    "FockOperatorSet",
    "build_fock_set",
    "default_modes",
    "channel_modes",
    "commutator_norm",
    "ccr_deviation",
    "heisenberg_shift_error",
    "one_photon_block",
    "single_excitation_energy",
    "oracle_field_moment",
    "MAX_DIMENSION",
]

MAX_DIMENSION = 4096


# -- classical fields ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClassicalField:
    """Real direction-resolved fields ``E_{s,lambda}(x)``, shape ``(2, 2, n)``."""

    grid: Grid
    components: np.ndarray
    constants: PhysicalConstants = NATURAL_UNITS

    def __post_init__(self) -> None:
        comps = np.array(self.components, dtype=float)
        if comps.shape != (2, 2, self.grid.n_points):
            raise ValueError(f"components must have shape (2, 2, {self.grid.n_points})")
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    def total_e(self) -> np.ndarray:
        """``E = sum_s c (E_sH y + E_sV z)``; rows (y, z)."""
        c = self.constants.c
        return c * self.components.sum(axis=0)

    def total_b(self) -> np.ndarray:
        """``B = sum_s s (-E_sV y + E_sH z)``; rows (y, z)."""
        by = np.zeros(self.grid.n_points)
        bz = np.zeros(self.grid.n_points)
        for i, s in enumerate(DIRECTIONS):
            by -= int(s) * self.components[i, 1]
            bz += int(s) * self.components[i, 0]
        return np.stack([by, bz])


def dalembert_evolve(f: ClassicalField, t: float) -> ClassicalField:
    """``E_{s,lambda}(x, t) = E_{s,lambda}(x - s c t, 0)`` on the ring.

    Integer lattice shifts use index arithmetic; anything else uses a real
    FFT phase shift.
    """
    grid = f.grid
    sites = f.constants.c * t / grid.dx
    n = grid.n_points
    out = np.empty_like(f.components)
    if abs(sites - round(sites)) <= 1e-9 * max(1.0, abs(sites)):
        shift = int(round(sites))
        idx = np.arange(n)
        for i, s in enumerate(DIRECTIONS):
            out[i] = f.components[i][..., (idx - int(s) * shift) % n]
    else:
        k = 2.0 * math.pi * np.fft.rfftfreq(n, d=grid.dx)
        spec = np.fft.rfft(f.components, axis=-1)
        for i, s in enumerate(DIRECTIONS):
            phase = np.exp(-1j * int(s) * k * f.constants.c * t)
            if n % 2 == 0:
                # keep the unpaired Nyquist coefficient real
                phase[-1] = phase[-1].real
            out[i] = np.fft.irfft(spec[i] * phase, n=n, axis=-1)
    return ClassicalField(grid, out, f.constants)


def _ddx(values: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(values, -1, axis=-1) - np.roll(values, 1, axis=-1)) / (2.0 * dx)


def maxwell_residual(f_t0: ClassicalField, dt: float) -> tuple[float, float]:
    """Max-norm residuals of both first-order Maxwell equations at ``t0``.

    Line one is ``dE/dx = +-dB/dt``, line two ``c^2 dB/dx = +-dE/dt``, with
    ``+`` when E is V-polarised and B is H-polarised.  All derivatives are
    second-order central differences; time samples at ``t0 +- dt`` come
    from :func:`dalembert_evolve`.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    dx = f_t0.grid.dx
    c2 = f_t0.constants.c ** 2
    later = dalembert_evolve(f_t0, dt)
    earlier = dalembert_evolve(f_t0, -dt)

    e, b = f_t0.total_e(), f_t0.total_b()
    de_dt = (later.total_e() - earlier.total_e()) / (2.0 * dt)
    db_dt = (later.total_b() - earlier.total_b()) / (2.0 * dt)
    de_dx, db_dx = _ddx(e, dx), _ddx(b, dx)

    # (E_y, B_z) pair carries the minus sign, (E_z, B_y) the plus sign.
    line1 = np.concatenate([de_dx[0] + db_dt[1], de_dx[1] - db_dt[0]])
    line2 = np.concatenate([c2 * db_dx[1] + de_dt[0], c2 * db_dx[0] - de_dt[1]])
    return float(np.max(np.abs(line1))), float(np.max(np.abs(line2)))


# -- truncated Fock space -----------------------------------------------------

class Mode(NamedTuple):
    s: int
    k: float
    pol: str = "H"


@dataclass(frozen=True, eq=False)
class FockOperatorSet:
    modes: tuple[Mode, ...]
    n_max: int
    max_total: int | None
    basis: np.ndarray = field(repr=False)
    annihilators: tuple[np.ndarray, ...] = field(repr=False)
    h_dyn: np.ndarray = field(repr=False)
    h_energy: np.ndarray = field(repr=False)
    number: np.ndarray = field(repr=False)
    vacuum_energy: float
    constants: PhysicalConstants = NATURAL_UNITS
    grid: Grid | None = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def safe(self) -> np.ndarray:
        """Boolean mask of basis states strictly below every cap."""
        ok = np.all(self.basis <= self.n_max - 1, axis=1)
        if self.max_total is not None:
            ok &= self.basis.sum(axis=1) <= self.max_total - 1
        return ok

    def creator(self, m: int) -> np.ndarray:
        return self.annihilators[m].conj().T

    def vacuum(self) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=complex)
        vec[0] = 1.0
        return vec

    def one_photon(self, coefficients) -> np.ndarray:
        """``sum_m coefficients[m] a_m^dagger |0>``."""
        vac = self.vacuum()
        state = np.zeros(self.dimension, dtype=complex)
        for m, amp in enumerate(coefficients):
            if amp:
                state += amp * (self.creator(m) @ vac)
        return state


def _enumerate_basis(n_modes: int, n_max: int, max_total: int | None) -> list[tuple[int, ...]]:
    cap = n_modes * n_max if max_total is None else max_total
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], remaining: int) -> None:
        if len(prefix) == n_modes:
            out.append(tuple(prefix))
            return
        for n in range(min(n_max, remaining) + 1):
            prefix.append(n)
            rec(prefix, remaining - n)
            prefix.pop()

    rec([], cap)
    # vacuum first, then by total occupancy
    out.sort(key=lambda occ: (sum(occ), tuple(-n for n in occ)))
    return out


def _count_basis(n_modes: int, n_max: int, max_total: int | None) -> int:
    cap = n_modes * n_max if max_total is None else max_total
    ways = np.zeros(cap + 1, dtype=object)
    ways[0] = 1
    for _ in range(n_modes):
        nxt = np.zeros_like(ways)
        for total in range(cap + 1):
            for n in range(min(n_max, total) + 1):
                nxt[total] += ways[total - n]
        ways = nxt
    return int(sum(ways))


def _partners(modes: tuple[Mode, ...], nyquist: float | None) -> list[int]:
    partners = []
    for m, mode in enumerate(modes):
        if nyquist is not None and math.isclose(abs(mode.k), nyquist, rel_tol=1e-12):
            target = -mode.k
            candidates = [j for j, o in enumerate(modes)
                          if o.s == mode.s and o.pol == mode.pol
                          and math.isclose(abs(o.k), nyquist, rel_tol=1e-12)]
        else:
            target = -mode.k
            candidates = [j for j, o in enumerate(modes)
                          if o.s == mode.s and o.pol == mode.pol
                          and math.isclose(o.k, target, rel_tol=1e-12, abs_tol=1e-15)]
        if not candidates:
            raise ValueError(f"mode {mode} has no partner at k={target}; modes must be closed under k -> -k")
        partners.append(candidates[0])
    return partners


def build_fock_set(
    modes,
    n_max: int,
    constants: PhysicalConstants = NATURAL_UNITS,
    *,
    max_total: int | None = None,
    nyquist: float | None = None,
    grid: Grid | None = None,
) -> FockOperatorSet:
    """Dense ladder operators, H_dyn and H_energy on a truncated Fock space.

    ``modes`` are unit-normalised momentum modes; the list must be closed
    under ``k -> -k`` within each (s, lambda).  A mode at ``|k| == nyquist``
    is its own partner.  ``max_total`` optionally caps the total photon
    number as well as the per-mode occupancy.

    The energy observable is assembled pair-wise,

        H_energy = sum_m (A eps pi c^2 / 2) O_m^dagger O_m,
        O_m = Rk(k_m) a_m + Rk(-k_m) a_{-m}^dagger,

    which includes the pair-creation terms ``a_m^dagger a_{-m}^dagger``.
    """
    modes = tuple(Mode(int(m[0]), float(m[1]), *(m[2:] if len(m) > 2 else ())) for m in modes)
    if not modes:
        raise ValueError("need at least one mode")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    for mode in modes:
        if mode.s not in (1, -1) or mode.pol not in ("H", "V"):
            raise ValueError(f"bad mode {mode}")
    dim = _count_basis(len(modes), n_max, max_total)
    if dim > MAX_DIMENSION:
        raise ValueError(f"Fock dimension {dim} exceeds cap {MAX_DIMENSION}")
    partners = _partners(modes, nyquist)

    basis_list = _enumerate_basis(len(modes), n_max, max_total)
    index = {occ: i for i, occ in enumerate(basis_list)}
    basis = np.array(basis_list, dtype=int)

    annihilators = []
    for m in range(len(modes)):
        a = np.zeros((dim, dim))
        for i, occ in enumerate(basis_list):
            if occ[m]:
                lowered = occ[:m] + (occ[m] - 1,) + occ[m + 1:]
                a[index[lowered], i] = math.sqrt(occ[m])
        annihilators.append(a)

    number_ops = [a.T @ a for a in annihilators]
    number = sum(number_ops)
    hbar, c = constants.hbar, constants.c
    h_dyn = sum(hbar * mode.s * c * mode.k * n_op for mode, n_op in zip(modes, number_ops))

    rk = kernel_fourier([mode.k for mode in modes], constants)
    pref = constants.area * constants.epsilon * math.pi * c**2 / 2.0
    h_energy = np.zeros((dim, dim))
    for m, partner in enumerate(partners):
        o = rk[m] * annihilators[m] + rk[partner] * annihilators[partner].T
        h_energy += pref * (o.T @ o)
    vacuum_energy = float(h_energy[0, 0])

    for arr in (*annihilators, number, h_dyn, h_energy):
        arr.setflags(write=False)
    return FockOperatorSet(
        modes=modes,
        n_max=n_max,
        max_total=max_total,
        basis=basis,
        annihilators=tuple(annihilators),
        h_dyn=h_dyn,
        h_energy=h_energy,
        number=number,
        vacuum_energy=vacuum_energy,
        constants=constants,
        grid=grid,
    )


def default_modes(grid: Grid | None = None) -> list[Mode]:
    """Six modes: three +-k pairs, (s=+1, k1), (s=-1, k1), (s=+1, k2)."""
    if grid is None:
        k1, k2 = 1.0, 2.0
    else:
        k1, k2 = grid.wavenumbers[1], grid.wavenumbers[2]
    return [Mode(1, k1), Mode(1, -k1), Mode(-1, k1), Mode(-1, -k1), Mode(1, k2), Mode(1, -k2)]


def channel_modes(grid: Grid, s, pol) -> list[Mode]:
    """Every lattice momentum of one (s, lambda) channel, FFT order."""
    return [Mode(int(s), float(k), getattr(pol, "value", pol)) for k in grid.wavenumbers]


def _restrict(op: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return op[np.ix_(mask, mask)]


def _pair(fock: FockOperatorSet, which: str) -> list[tuple[np.ndarray, np.ndarray]]:
    a = fock.annihilators
    if which == "energy-dyn":
        return [(fock.h_energy, fock.h_dyn)]
    if which == "dyn-number":
        return [(fock.h_dyn, fock.number)]
    if which == "annihilators":
        return [(a[i], a[j]) for i in range(len(a)) for j in range(len(a))]
    if which == "creators":
        return [(a[i].T, a[j].T) for i in range(len(a)) for j in range(len(a))]
    raise ValueError(f"unknown commutator tag {which!r}")


def commutator_norm(fock: FockOperatorSet, which: str) -> float:
    """Relative Frobenius norm ``||[A, B]|| / (||A|| ||B||)`` on the safe subspace.

    Tags: ``energy-dyn``, ``dyn-number``, ``annihilators``, ``creators``.
    The two ladder tags return the worst pair.
    """
    mask = fock.safe
    worst = 0.0
    for lhs, rhs in _pair(fock, which):
        denom = np.linalg.norm(lhs) * np.linalg.norm(rhs)
        if denom == 0:
            continue
        comm = _restrict(lhs @ rhs - rhs @ lhs, mask)
        worst = max(worst, float(np.linalg.norm(comm) / denom))
    return worst


def ccr_deviation(fock: FockOperatorSet) -> float:
    """Worst ``|| [a_m, a_n^dagger] - delta_mn 1 ||_F`` on the safe subspace."""
    mask = fock.safe
    eye = np.eye(int(mask.sum()))
    worst = 0.0
    for m, am in enumerate(fock.annihilators):
        for n, an in enumerate(fock.annihilators):
            comm = _restrict(am @ an.T - an.T @ am, mask)
            target = eye if m == n else 0.0
            worst = max(worst, float(np.linalg.norm(comm - target)))
    return worst


def heisenberg_shift_error(fock: FockOperatorSet, t: float) -> float:
    """Worst deviation of ``U^dagger a_m U`` from ``exp(-i s c k t) a_m``.

    ``U = exp(-i H_dyn t / hbar)`` is computed with a dense matrix exponential.
    """
    u = scipy.linalg.expm(-1j * fock.h_dyn * t / fock.constants.hbar)
    worst = 0.0
    for mode, a in zip(fock.modes, fock.annihilators):
        heis = u.conj().T @ a @ u
        expected = np.exp(-1j * mode.s * fock.constants.c * mode.k * t) * a
        worst = max(worst, float(np.max(np.abs(heis - expected))))
    return worst


def one_photon_block(fock: FockOperatorSet, op: np.ndarray) -> np.ndarray:
    """Restriction of ``op`` to the one-photon sector, ordered like ``fock.modes``."""
    rows = []
    for m in range(len(fock.modes)):
        occ = np.zeros(len(fock.modes), dtype=int)
        occ[m] = 1
        rows.append(int(np.flatnonzero(np.all(fock.basis == occ, axis=1))[0]))
    return op[np.ix_(rows, rows)]


def single_excitation_energy(fock: FockOperatorSet, m: int) -> float:
    """``<1_m|H_energy|1_m> - <0|H_energy|0>``."""
    state = fock.one_photon([1.0 if j == m else 0.0 for j in range(len(fock.modes))])
    return float(np.real(np.vdot(state, fock.h_energy @ state))) - fock.vacuum_energy


def _direct_kernel(grid: Grid, constants: PhysicalConstants) -> np.ndarray:
    """``R(y_j)`` by explicit O(n^2) cosine summation."""
    k = grid.wavenumbers
    y = grid.displacements
    rk = kernel_fourier(k, constants)
    return grid.dk / math.sqrt(2.0 * math.pi) * np.cos(np.outer(y, k)) @ rk


def oracle_field_moment(fock: FockOperatorSet, p: WavePacket, x: float) -> float:
    """Dense-matrix ``<1_psi|E_i(x)^2|1_psi> - <1_psi|1_psi> <0|E_i(x)^2|0>``.

    ``fock`` must be built from :func:`channel_modes` of one (s, lambda)
    channel of ``p.grid`` (``grid`` passed to :func:`build_fock_set`), with
    at most 16 sites.  ``p`` must be supported on that channel only.  The
    Cartesian component is y for H and z for V.  Modes of the other
    channels add the same vacuum term to both expectations and are omitted.
    """
    grid = fock.grid
    if grid is None or grid != p.grid:
        raise ValueError("Fock set was not built on the packet's grid")
    if grid.n_points > 16:
        raise ValueError(f"oracle limited to 16 sites, grid has {grid.n_points}")
    s, pol = fock.modes[0].s, fock.modes[0].pol
    if any((m.s, m.pol) != (s, pol) for m in fock.modes) or len(fock.modes) != grid.n_points:
        raise ValueError("Fock set must hold every lattice mode of exactly one channel")
    si = 0 if s == 1 else 1
    pi = 0 if pol == "H" else 1
    others = np.abs(np.delete(p.amplitudes.reshape(4, -1), 2 * si + pi, axis=0))
    if np.any(others > 0):
        raise ValueError("packet has amplitude outside the oracle's channel")

    site = int(round((x - grid.x_min) / grid.dx))
    if not (0 <= site < grid.n_points) or not math.isclose(grid.positions[site], x, abs_tol=1e-9 * grid.dx):
        raise ValueError(f"x={x} is not a lattice site")

    n = grid.n_points
    xs = grid.positions
    ks = np.array([m.k for m in fock.modes])
    modes_x = np.exp(1j * np.outer(xs, ks)) / math.sqrt(grid.length)  # u_m(x_j)

    kern = _direct_kernel(grid, fock.constants)
    rel = (site - np.arange(n)) % n
    row = kern[rel] * grid.dx  # R(x_site - x_j) dx
    weights = row @ modes_x  # <0|R(x)|1_m>

    reg = sum(w * a for w, a in zip(weights, fock.annihilators))
    e_field = 0.5 * fock.constants.c * (reg + reg.conj().T)

    coeffs = grid.dx * (modes_x.conj().T @ p.amplitudes[si, pi])
    one = fock.one_photon(coeffs)
    vac = fock.vacuum()
    # vacuum term weighted by <1|1> so unnormalised packets scale like the fast path
    weight = np.vdot(one, one).real
    return float(np.vdot(e_field @ one, e_field @ one).real - weight * np.vdot(e_field @ vac, e_field @ vac).real)
