"""Reference Hamiltonians, exact/Cayley integrators, continuum propagators."""

import numpy as np
import pytest

from plasticwalk import (
    CProfile,
    DomainError,
    SizeError,
    SpinorField,
    curved_dirac_reference,
    dirac_propagator,
    evolve_crank_nicolson,
    evolve_exact,
    lattice_hamiltonian_curved,
    lattice_hamiltonian_flat,
    make_wavepacket,
    ring_momenta,
    trig_interpolate,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def random_field(n, rng, dx=1.0):
    data = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return SpinorField(data / np.linalg.norm(data), dx)


def sine_profile(length, c0=0.5, a=0.3):
    return CProfile.sine_bump(c0, a, length)


# ---------------------------------------------------------------------------
# construction


def test_flat_zero_speed_is_pure_mass():
    h = lattice_hamiltonian_flat(8, 1.0, 0.5, 0.0)
    w = np.linalg.eigvalsh(h.dense())
    np.testing.assert_allclose(np.sort(w), [-0.5] * 8 + [0.5] * 8, atol=1e-14)


def test_flat_massless_unit_speed_spectrum_n4():
    # ring momenta {0, pi/2, pi, 3pi/2} at dx = 1: energies +-sin(k)
    h = lattice_hamiltonian_flat(4, 1.0, 0.0, 1.0)
    w = np.sort(np.linalg.eigvalsh(h.dense()))
    expected = np.sort(
        np.concatenate([[-abs(np.sin(k)), abs(np.sin(k))] for k in ring_momenta(4, 1.0)])
    )
    np.testing.assert_allclose(w, expected, atol=1e-13)


def test_flat_hermiticity_random_pairing():
    rng = np.random.default_rng(2)
    h = lattice_hamiltonian_flat(16, 0.5, 0.7, 0.9)
    dense = h.dense()
    assert np.max(np.abs(dense - dense.conj().T)) <= 1e-13
    for _ in range(10):
        phi, psi = random_field(16, rng, 0.5), random_field(16, rng, 0.5)
        lhs = np.vdot(phi.data.reshape(-1), h.apply(psi.data).reshape(-1))
        rhs = np.conj(np.vdot(psi.data.reshape(-1), h.apply(phi.data).reshape(-1)))
        assert abs(lhs - rhs) <= 1e-12


def test_flat_dispersion_all_ring_momenta():
    n, dx, c, m = 32, 0.5, 0.8, 0.3
    h = lattice_hamiltonian_flat(n, dx, m, c)
    w = np.sort(np.linalg.eigvalsh(h.dense()))
    energies = np.sqrt((c * np.sin(ring_momenta(n, dx) * dx) / dx) ** 2 + m ** 2)
    expected = np.sort(np.concatenate([-energies, energies]))
    np.testing.assert_allclose(w, expected, atol=1e-12)


def test_fermion_doubling_zero_modes():
    n, dx = 16, 1.0
    c = 0.9
    for k in (0.0, np.pi / dx, -np.pi / dx):
        e = np.sqrt((c * np.sin(k * dx) / dx) ** 2)
        assert e <= 1e-12


def test_flat_domain_checks():
    with pytest.raises(DomainError):
        lattice_hamiltonian_flat(1, 1.0, 0.0, 0.5)
    with pytest.raises(DomainError):
        lattice_hamiltonian_flat(8, -1.0, 0.0, 0.5)
    with pytest.raises(DomainError):
        lattice_hamiltonian_flat(8, 1.0, 0.0, 1.5)
    with pytest.raises(DomainError):
        lattice_hamiltonian_flat(8, 1.0, -0.2, 0.5)


def test_curved_homogeneous_equals_flat_exactly():
    flat = lattice_hamiltonian_flat(12, 0.5, 0.3, 0.6)
    curved = lattice_hamiltonian_curved(12, 0.5, 0.3, CProfile.constant(0.6))
    assert np.array_equal(flat.dense(), curved.dense())


def test_curved_hermiticity():
    length = 32 * 1.0
    h = lattice_hamiltonian_curved(32, 1.0, 0.1, sine_profile(length))
    dense = h.dense()
    assert np.max(np.abs(dense - dense.conj().T)) <= 1e-13


def _analytic_test_field(n, dx, length):
    x = np.arange(n) * dx
    data = np.empty((n, 2), dtype=complex)
    data[:, 0] = np.exp(1j * 2 * np.pi * 3 * x / length) * (1.2 + np.cos(2 * np.pi * x / length))
    data[:, 1] = np.exp(-1j * 2 * np.pi * 2 * x / length) * (0.7 + np.sin(2 * np.pi * x / length))
    return SpinorField(data, dx)


def _curved_target(field, cprofile_params, m, length):
    c0, a = cprofile_params
    x = field.positions()
    c = c0 + a * np.sin(2 * np.pi * x / length)
    dc = a * (2 * np.pi / length) * np.cos(2 * np.pi * x / length)
    psi = field.data
    k_plus = 2 * np.pi * 3 / length
    k_minus = -2 * np.pi * 2 / length
    dpsi = np.empty_like(psi)
    dpsi[:, 0] = (
        1j * k_plus * psi[:, 0]
        + np.exp(1j * k_plus * x) * (-np.sin(2 * np.pi * x / length)) * 2 * np.pi / length
    )
    dpsi[:, 1] = (
        1j * k_minus * psi[:, 1]
        + np.exp(1j * k_minus * x) * (np.cos(2 * np.pi * x / length)) * 2 * np.pi / length
    )
    out = np.empty_like(psi)
    # c sx (-i d_x) psi - (i/2) sx (dc) psi - m sz psi
    out[:, 0] = -1j * c * dpsi[:, 1] - 0.5j * dc * psi[:, 1] - m * psi[:, 0]
    out[:, 1] = -1j * c * dpsi[:, 0] - 0.5j * dc * psi[:, 0] + m * psi[:, 1]
    return out


@pytest.mark.parametrize("curved", [True, False])
def test_continuum_consistency_second_order(curved):
    # applying H to smooth samples converges at order >= 2 to the continuum action
    length, m = 16.0, 0.25
    c0, a = (0.5, 0.3) if curved else (0.6, 0.0)
    errs, dxs = [], []
    for n in (64, 128, 256):
        dx = length / n
        field = _analytic_test_field(n, dx, length)
        if curved:
            h = lattice_hamiltonian_curved(n, dx, m, sine_profile(length, c0, a))
        else:
            h = lattice_hamiltonian_flat(n, dx, m, c0)
        target = _curved_target(field, (c0, a), m, length)
        errs.append(np.max(np.abs(h.apply(field.data) - target)))
        dxs.append(dx)
    order = np.polyfit(np.log(dxs), np.log(errs), 1)[0]
    assert order >= 2.0 - 0.1


# ---------------------------------------------------------------------------
# exact evolution


def test_evolve_exact_time_zero():
    rng = np.random.default_rng(4)
    h = lattice_hamiltonian_flat(8, 1.0, 0.2, 0.5)
    f = random_field(8, rng)
    np.testing.assert_allclose(evolve_exact(h, f, 0.0).data, f.data, atol=1e-14)


def test_evolve_exact_pure_mass_phase():
    # plus component has energy -m, so it gains phase e^{+imT}
    h = lattice_hamiltonian_flat(6, 1.0, 0.5, 0.0)
    data = np.zeros((6, 2), dtype=complex)
    data[2, 0] = 1.0
    out = evolve_exact(h, SpinorField(data, 1.0), 2.0)
    expected = np.zeros_like(data)
    expected[2, 0] = 0.54030230586813972 + 0.84147098480789651j
    np.testing.assert_allclose(out.data, expected, atol=1e-12)


def test_evolve_exact_norm_and_budget():
    rng = np.random.default_rng(6)
    h = lattice_hamiltonian_curved(32, 0.5, 0.4, sine_profile(16.0))
    f = random_field(32, rng, 0.5)
    out = evolve_exact(h, f, 3.7)
    assert abs(out.norm() - 1.0) <= 1e-11
    big = lattice_hamiltonian_flat(3000, 1.0, 0.0, 0.5)
    with pytest.raises(SizeError):
        evolve_exact(big, random_field(3000, rng), 1.0)


# ---------------------------------------------------------------------------
# Cayley stepping


def test_cn_matches_exact():
    rng = np.random.default_rng(8)
    h = lattice_hamiltonian_curved(32, 1.0, 0.3, sine_profile(32.0))
    f = random_field(32, rng)
    exact = evolve_exact(h, f, 1.0)
    stepped = evolve_crank_nicolson(h, f, 1.0, 2048)
    assert np.max(np.abs(exact.data - stepped.data)) <= 1e-6


def test_cn_norm_drift_long_run():
    rng = np.random.default_rng(10)
    h = lattice_hamiltonian_flat(16, 1.0, 0.2, 0.8)
    f = random_field(16, rng)
    out = evolve_crank_nicolson(h, f, 10.0, 10_000)
    assert abs(out.norm() - 1.0) <= 1e-9


def test_cn_second_order():
    rng = np.random.default_rng(12)
    h = lattice_hamiltonian_flat(24, 1.0, 0.4, 0.7)
    f = random_field(24, rng)
    exact = evolve_exact(h, f, 2.0)
    errs = []
    step_counts = [32, 64, 128]
    for steps in step_counts:
        out = evolve_crank_nicolson(h, f, 2.0, steps)
        errs.append(np.max(np.abs(out.data - exact.data)))
    taus = 2.0 / np.array(step_counts)
    order = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert 1.8 <= order <= 2.2


def test_cn_rejects_bad_steps():
    h = lattice_hamiltonian_flat(8, 1.0, 0.0, 0.5)
    f = random_field(8, np.random.default_rng(0))
    with pytest.raises(DomainError):
        evolve_crank_nicolson(h, f, 1.0, 0)


# ---------------------------------------------------------------------------
# continuum propagator


def test_dirac_propagator_zero_momentum_block():
    prop = dirac_propagator(8, 1.0, 0.7, 0.5, T=1.3)
    i0 = int(np.argmin(np.abs(prop.ks)))
    expected = np.diag([np.exp(1j * 0.7 * 1.3), np.exp(-1j * 0.7 * 1.3)])
    np.testing.assert_allclose(prop.blocks[i0], expected, atol=1e-13)


def test_dirac_propagator_blocks_unitary():
    prop = dirac_propagator(32, 0.5, 0.3, 0.9, T=2.0)
    for b in prop.blocks:
        np.testing.assert_allclose(b.conj().T @ b, np.eye(2), atol=1e-13)


def test_dirac_massless_packet_translates():
    n, dx, T = 128, 0.5, 8.0
    packet = make_wavepacket(n, dx, x0=24.0, w=4.0, k0=0.8, chirality_mix=0.5)
    # components along (1, 1)/sqrt(2) move right by exactly T when c = 1, m = 0
    data = np.empty((n, 2), dtype=complex)
    env = packet.data[:, 0] * np.sqrt(2)
    data[:, 0] = env / np.sqrt(2)
    data[:, 1] = env / np.sqrt(2)
    f = SpinorField(data / np.linalg.norm(data), dx)
    out = dirac_propagator(n, dx, 0.0, 1.0, T).apply(f)
    shifted = np.roll(f.data, int(T / dx), axis=0)
    np.testing.assert_allclose(out.data, shifted, atol=1e-12)


def test_zitterbewegung_frequency():
    # a packet at rest with equal-phase components (zero-momentum eigenbasis
    # is the mass basis, so this mixes both energy branches maximally): the
    # position expectation oscillates at 2m on top of a slow drift
    n, dx, m = 256, 0.25, 1.0
    length = n * dx
    packet = make_wavepacket(n, dx, x0=length / 2, w=2.0, k0=0.0, chirality_mix=0.5)
    window = 4 * np.pi
    samples = 128
    ts = np.linspace(0.0, window, samples, endpoint=False)
    xs = packet.positions()
    means = []
    for t in ts:
        out = dirac_propagator(n, dx, m, 1.0, float(t)).apply(packet)
        dens = out.density()
        means.append(float(np.sum(xs * dens)))
    sig = np.array(means)
    sig -= np.polyval(np.polyfit(ts, sig, 1), ts)
    spec = np.abs(np.fft.rfft(sig))
    freqs = 2 * np.pi * np.fft.rfftfreq(samples, d=window / samples)
    peak = int(np.argmax(spec[1:])) + 1
    # parabolic refinement of the peak
    if 1 <= peak < len(spec) - 1:
        a, b, c = spec[peak - 1], spec[peak], spec[peak + 1]
        shift = 0.5 * (a - c) / (a - 2 * b + c)
    else:
        shift = 0.0
    freq = freqs[peak] + shift * (freqs[1] - freqs[0])
    assert abs(freq - 2 * m) / (2 * m) <= 0.05


# ---------------------------------------------------------------------------
# curved continuum reference


def test_curved_reference_matches_momentum_propagator_for_flat_profile():
    n, dx, m, T = 64, 1.0, 0.2, 1.0
    packet = make_wavepacket(n, dx, x0=32.0, w=6.0, k0=0.4)
    ref = curved_dirac_reference(packet, CProfile.constant(0.5), m, T, refinement=8)
    prop = dirac_propagator(n, dx, m, 0.5, T).apply(packet)
    assert np.max(np.abs(ref.data - prop.data)) <= 1e-4


def test_curved_reference_self_convergence():
    n, dx, m, T = 64, 1.0, 0.1, 1.0
    length = n * dx
    packet = make_wavepacket(n, dx, x0=32.0, w=6.0, k0=0.3)
    prof = sine_profile(length)
    sols = {r: curved_dirac_reference(packet, prof, m, T, refinement=r) for r in (2, 4, 8)}
    d_coarse = np.linalg.norm(sols[2].data - sols[4].data)
    d_fine = np.linalg.norm(sols[4].data - sols[8].data)
    order = np.log2(d_coarse / d_fine)
    assert order >= 1.8


def test_curved_reference_norm_preserved():
    n, dx, T = 48, 0.5, 1.5
    packet = make_wavepacket(n, dx, x0=12.0, w=2.5, k0=0.5)
    prof = CProfile.gaussian_well(0.8, 0.3, center=12.0, width=3.0)
    out = curved_dirac_reference(packet, prof, 0.0, T, refinement=4)
    assert abs(out.norm() - 1.0) <= 1e-9


def test_trig_interpolation_exact_on_band_limited():
    n, dx = 16, 1.0
    x = np.arange(n) * dx
    data = np.stack(
        [np.exp(1j * 2 * np.pi * 2 * x / (n * dx)), np.cos(2 * np.pi * 3 * x / (n * dx))], axis=1
    ).astype(complex)
    f = SpinorField(data, dx)
    fine = trig_interpolate(f, 4)
    xf = fine.positions()
    expected = np.stack(
        [np.exp(1j * 2 * np.pi * 2 * xf / (n * dx)), np.cos(2 * np.pi * 3 * xf / (n * dx))], axis=1
    )
    np.testing.assert_allclose(fine.data, expected, atol=1e-12)


def test_default_cn_steps_rule():
    from plasticwalk import default_cn_steps

    # tau = min(dx/4, T/256)
    assert default_cn_steps(0.01, 2.0) == 800       # dx/4 = 0.0025 binds
    assert default_cn_steps(10.0, 2.0) == 256       # T/256 binds


def test_restrict_inverts_interpolation_on_grid_points():
    from plasticwalk.hamiltonians import restrict

    rng = np.random.default_rng(14)
    f = random_field(24, rng, dx=0.5)
    for r in (2, 3, 4):
        back = restrict(trig_interpolate(f, r), r)
        np.testing.assert_allclose(back.data, f.data, atol=1e-13)
        assert back.dx == pytest.approx(f.dx)
