import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blipfield.core import PhysicalConstants, make_grid
from blipfield.dynamics import (
    apply_h_dyn,
    central_difference_h_dyn,
    evolve_with_report,
    h_dyn_matrix,
    schrodinger_residual,
    shift_evolve,
    spectral_evolve,
)
from blipfield.wavepacket import (
    WavePacket,
    inner_product,
    make_blip,
    make_gaussian,
    make_monochromatic,
    make_plane_wave,
    norm_squared,
    normalize,
    position_moments,
)


def test_blip_moves_right_by_five_sites(grid):
    b = make_blip(grid, 1, "H", 100)
    out = shift_evolve(b, 5 * grid.dx)
    np.testing.assert_array_equal(out.amplitudes, make_blip(grid, 1, "H", 105).amplitudes)


def test_left_mover_moves_left(grid):
    b = make_blip(grid, -1, "V", 100)
    out = shift_evolve(b, 5 * grid.dx)
    np.testing.assert_array_equal(out.amplitudes, make_blip(grid, -1, "V", 95).amplitudes)


def test_shift_respects_speed_of_light():
    g = make_grid(64, 64.0)
    pc = PhysicalConstants(c=2.0)
    out = shift_evolve(make_blip(g, 1, "H", 0), 3.0, pc)
    assert np.flatnonzero(out.channel(1, "H"))[0] == 6


def test_shift_wraps_around_ring():
    g = make_grid(16, 16.0)
    out = shift_evolve(make_blip(g, 1, "H", 14), 4.0)
    assert np.flatnonzero(out.channel(1, "H"))[0] == 2


def test_shift_rejects_fractional(grid):
    with pytest.raises(ValueError):
        shift_evolve(make_blip(grid, 1, "H", 0), 0.3 * grid.dx)


def test_shift_zero_is_identity(grid, rng):
    p = WavePacket(grid, rng.standard_normal((2, 2, grid.n_points)))
    np.testing.assert_array_equal(shift_evolve(p, 0.0).amplitudes, p.amplitudes)


def test_shift_group_property(grid):
    p = make_gaussian(grid, 1, "H", 0.0, 1.0, 1.0) + make_gaussian(grid, -1, "V", 3.0, 0.5)
    t1, t2 = 7 * grid.dx, 13 * grid.dx
    two_step = shift_evolve(shift_evolve(p, t1), t2)
    np.testing.assert_array_equal(two_step.amplitudes, shift_evolve(p, t1 + t2).amplitudes)
    assert norm_squared(two_step) == norm_squared(p)


def test_figure1_packets_meet_and_stay_orthogonal():
    g = make_grid(1024, 64.0)
    a = 16.0
    right = make_gaussian(g, 1, "H", -a, 1.0)
    left = make_gaussian(g, -1, "H", a, 1.0)
    assert inner_product(right, left) == 0
    r_t, l_t = shift_evolve(right, a), shift_evolve(left, a)
    assert position_moments(r_t)[0] == pytest.approx(0.0, abs=1e-9)
    assert position_moments(l_t)[0] == pytest.approx(0.0, abs=1e-9)
    # identical envelopes, full spatial overlap, still orthogonal
    np.testing.assert_allclose(np.abs(r_t.channel(1, "H")), np.abs(l_t.channel(-1, "H")), atol=1e-15)
    assert abs(inner_product(r_t, l_t)) < 1e-12


def test_spectral_matches_shift_64_sites(grid):
    p = make_gaussian(grid, 1, "H", 0.0, 1.0) + make_gaussian(grid, -1, "V", 5.0, 1.0, 2.0)
    t = 64 * grid.dx
    diff = np.max(np.abs(spectral_evolve(p, t).amplitudes - shift_evolve(p, t).amplitudes))
    assert diff < 1e-10


def test_spectral_zero_is_identity(grid, rng):
    p = WavePacket(grid, rng.standard_normal((2, 2, grid.n_points)))
    assert np.max(np.abs(spectral_evolve(p, 0.0).amplitudes - p.amplitudes)) < 1e-13


def test_spectral_does_not_disperse(grid):
    p = make_gaussian(grid, 1, "H", -10.0, 1.0, 3.0)
    _, var0 = position_moments(p)
    for t in (0.123, 1.7, 9.99, 23.4):
        _, var = position_moments(spectral_evolve(p, t))
        assert abs(var / var0 - 1) < 1e-9


def test_spectral_fractional_shift_matches_analytic_gaussian():
    g = make_grid(512, 32.0)
    sigma = 1.0
    t = 3.3 * g.dx
    moved = spectral_evolve(make_gaussian(g, 1, "H", 0.0, sigma), t)
    d = g.positions - t
    expected = np.exp(-d**2 / (4 * sigma**2))
    expected /= math.sqrt(np.sum(expected**2) * g.dx)
    assert np.max(np.abs(moved.channel(1, "H") - expected)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(t1=st.floats(-20, 20), t2=st.floats(-20, 20))
def test_spectral_group_property(t1, t2):
    g = make_grid(128, 16.0)
    p = make_gaussian(g, 1, "H", 0.0, 0.5, 2.0) + make_gaussian(g, -1, "V", 2.0, 0.7)
    lhs = spectral_evolve(spectral_evolve(p, t1), t2).amplitudes
    rhs = spectral_evolve(p, t1 + t2).amplitudes
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_spectral_unitarity_over_100_steps(grid, rng):
    p = normalize(WavePacket(grid, rng.standard_normal((2, 2, grid.n_points))
                             + 1j * rng.standard_normal((2, 2, grid.n_points))))
    n0 = norm_squared(p)
    q = p
    for _ in range(100):
        prev = norm_squared(q)
        q = spectral_evolve(q, 0.311)
        assert abs(norm_squared(q) - prev) <= 1e-12 * prev
    assert abs(norm_squared(q) - n0) < 1e-10


def test_plane_wave_is_h_dyn_eigenvector(grid):
    for s in (1, -1):
        p = make_plane_wave(grid, s, "H", 3)
        k = grid.wavenumbers[3]
        out = apply_h_dyn(p)
        np.testing.assert_allclose(out.amplitudes, s * k * p.amplitudes, atol=1e-12)


def test_h_dyn_eigenvalue_scales_with_constants(grid):
    pc = PhysicalConstants(hbar=2.0, c=3.0)
    p = make_plane_wave(grid, 1, "V", -4)
    k = grid.wavenumbers[-4]
    np.testing.assert_allclose(apply_h_dyn(p, pc).amplitudes, 6.0 * k * p.amplitudes, atol=1e-12)


def test_h_dyn_left_mover_is_negated_right_mover(grid):
    env = make_gaussian(grid, 1, "H", 0.0, 1.0, 1.5).channel(1, "H")
    right = apply_h_dyn(WavePacket.from_channel(grid, 1, "H", env)).channel(1, "H")
    left = apply_h_dyn(WavePacket.from_channel(grid, -1, "H", env)).channel(-1, "H")
    np.testing.assert_allclose(left, -right, atol=1e-14)


def test_h_dyn_expectation_real(grid, rng):
    p = WavePacket(grid, rng.standard_normal((2, 2, grid.n_points)) + 1j * rng.standard_normal((2, 2, grid.n_points)))
    val = inner_product(p, apply_h_dyn(p))
    assert abs(val.imag) < 1e-10 * max(1.0, abs(val.real))


def test_h_dyn_matrix_hermitian_and_momentum_diagonal():
    g = make_grid(32, 5.0)
    dft = np.exp(-1j * np.outer(g.wavenumbers, g.positions)) / math.sqrt(g.n_points)
    for s in (1, -1):
        h = h_dyn_matrix(g, s)
        assert np.max(np.abs(h - h.conj().T)) < 1e-12
        hk = dft @ h @ dft.conj().T
        np.testing.assert_allclose(np.diag(hk), s * g.wavenumbers, atol=1e-12)
        assert np.max(np.abs(hk - np.diag(np.diag(hk)))) < 1e-12


def test_generator_reproduces_spectral_evolution(grid):
    p = make_gaussian(grid, 1, "H", 0.0, 1.0, 1.0) + make_gaussian(grid, -1, "V", 4.0, 1.0)
    errs = []
    for dt in (0.02, 0.01):
        euler = p.amplitudes - 1j * dt * apply_h_dyn(p).amplitudes
        errs.append(np.max(np.abs(euler - spectral_evolve(p, dt).amplitudes)))
    # first-order step, so the defect is O(dt^2)
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_central_difference_converges_to_spectral():
    errs = []
    for n in (64, 128, 256):
        g = make_grid(n, 16.0)
        p = make_gaussian(g, 1, "H", 0.0, 1.0)
        vec = p.channel(1, "H")
        fd = central_difference_h_dyn(g, 1) @ vec
        sp = apply_h_dyn(p).channel(1, "H")
        errs.append(np.max(np.abs(fd - sp)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)
    h = central_difference_h_dyn(make_grid(16, 1.0), -1)
    assert np.max(np.abs(h - h.conj().T)) == 0


def test_residual_second_order(grid):
    p = make_gaussian(grid, 1, "H", 0.0, 1.0, 1.0)
    r1 = schrodinger_residual(p, 0.5, 0.1)
    r2 = schrodinger_residual(p, 0.5, 0.05)
    assert r1 / r2 == pytest.approx(4.0, rel=0.2)


def test_residual_plane_wave_matches_taylor_remainder():
    g = make_grid(4096, 64.0)
    k = g.wavenumbers[1]
    p = make_plane_wave(g, -1, "V", 1)
    dt = g.dx / 10
    res = schrodinger_residual(p, 1.0, dt)
    expected = abs(k - math.sin(k * dt) / dt) / math.sqrt(g.length)
    assert res < 1e-10
    assert res == pytest.approx(expected, rel=0.05, abs=2e-13)


def test_residual_zero_packet(grid):
    assert schrodinger_residual(WavePacket.zeros(grid), 0.0, 0.1) == 0.0


def test_residual_rejects_bad_dt(grid):
    with pytest.raises(ValueError):
        schrodinger_residual(WavePacket.zeros(grid), 0.0, 0.0)


def test_evolve_with_report(grid):
    p = make_gaussian(grid, 1, "H", 0.0, 1.0)
    out, rep = evolve_with_report(p, 10 * grid.dx)
    assert rep.method == "spectral" and rep.reference_method == "shift"
    assert rep.max_deviation < 1e-10 and 0 <= rep.norm_drift < 1e-12
    out, rep = evolve_with_report(p, 0.3 * grid.dx)
    assert rep.max_deviation is None
    with pytest.raises(ValueError):
        evolve_with_report(p, 0.1, method="rk4")


def test_monochromatic_evolution_is_phase_only(grid):
    p = make_monochromatic(grid, -1, "H", 9)
    t = 2.345
    k = grid.wavenumbers[9]
    out = spectral_evolve(p, t)
    np.testing.assert_allclose(out.amplitudes, np.exp(1j * k * t) * p.amplitudes, atol=1e-13)


def test_channels_evolve_independently(grid):
    right = make_gaussian(grid, 1, "H", 0.0, 1.0, 1.0)
    left = make_gaussian(grid, -1, "V", 2.0, 1.0)
    both = spectral_evolve(right + left, 3.7).amplitudes
    apart = spectral_evolve(right, 3.7).amplitudes + spectral_evolve(left, 3.7).amplitudes
    assert np.max(np.abs(both - apart)) < 1e-14
