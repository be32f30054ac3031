"""Lattice core: energies, phase derivative, Fourier identities, I/O."""

import math

import numpy as np
import pytest

from dnlslab import lattice
from dnlslab.lattice import (GibbsSpec, LatticeField, energy, fourier,
                             gradient_energy, hamiltonian, inverse_fourier,
                             laplacian, mass, phase_gradient)
from dnlslab.rng import stream


def random_field(n, seed=0):
    rng = stream(seed, n)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# --- oracles: plain scalar loops with exact accumulation -------------------

def mass_oracle(psi):
    n = len(psi)
    return math.fsum(abs(z) ** 2 for z in psi) / n


def energy_oracle(psi, p=3.0, kappa=-1):
    n = len(psi)
    g = math.fsum(0.5 * n * abs(psi[x] - psi[x - 1]) ** 2 for x in range(n))
    pot = math.fsum(abs(z) ** (p + 1) for z in psi) / ((p + 1) * n)
    return g, pot, g + kappa * pot


def laplacian_oracle(psi):
    n = len(psi)
    return np.array([n * n * (psi[(x + 1) % n] - 2 * psi[x] + psi[x - 1])
                     for x in range(n)])


def test_mass_constant_field():
    for n in (2, 5, 64):
        psi = np.full(n, math.sqrt(3.7), complex)
        assert mass(psi) == pytest.approx(3.7, rel=1e-14)


def test_mass_zero_field():
    assert mass(np.zeros(8, complex)) == 0.0


def test_mass_matches_scalar_loop():
    psi = random_field(8)
    assert mass(psi) == pytest.approx(mass_oracle(psi), rel=1e-14)


def test_mass_accumulation_large_n():
    # pairwise accumulation keeps large lattices at oracle accuracy
    psi = random_field(2**14, seed=3)
    assert mass(psi) == pytest.approx(mass_oracle(psi), rel=1e-12)
    g, _, _ = energy_oracle(psi)
    assert gradient_energy(psi) == pytest.approx(g, rel=1e-12)


def test_energy_constant_field():
    m, n = 2.5, 16
    eb = energy(np.full(n, math.sqrt(m), complex))
    assert eb.kinetic == 0.0
    assert eb.potential == pytest.approx(m * m / 4, rel=1e-14)
    assert eb.total == pytest.approx(-m * m / 4, rel=1e-14)


def test_energy_plane_wave():
    m, n = 1.8, 12
    x = np.arange(n)
    psi = math.sqrt(m) * np.exp(2j * np.pi * x / n)
    eb = energy(psi)
    assert eb.kinetic == pytest.approx(
        (n * n * m / 2) * 4 * math.sin(math.pi / n) ** 2, rel=1e-13)
    assert eb.potential == pytest.approx(m * m / 4, rel=1e-13)


def test_energy_matches_naive_loop():
    psi = random_field(16, seed=1)
    g, pot, tot = energy_oracle(psi)
    eb = energy(psi)
    assert eb.kinetic == pytest.approx(g, rel=1e-13)
    assert eb.potential == pytest.approx(pot, rel=1e-13)
    assert eb.total == pytest.approx(tot, rel=1e-13)


def test_energy_general_p_kappa():
    psi = random_field(10, seed=2)
    g, pot, tot = energy_oracle(psi, p=2.4, kappa=1)
    eb = energy(psi, p=2.4, kappa=1)
    assert eb.total == pytest.approx(tot, rel=1e-13)
    assert eb.total == pytest.approx(g + pot, rel=1e-13)


def test_energy_dimension_mismatch():
    spec = GibbsSpec(n=8, m=1.0, beta=1.0)
    with pytest.raises(ValueError, match="spec.n"):
        energy(random_field(16), spec)


def test_laplacian_constant_and_eigenvector():
    n = 16
    assert np.abs(laplacian(np.full(n, 2.0 + 1j))).max() == 0.0
    for k in (1, 3, 7):
        psi = np.exp(2j * np.pi * k * np.arange(n) / n)
        lam = -n * n * 4 * math.sin(math.pi * k / n) ** 2
        assert np.abs(laplacian(psi) - lam * psi).max() < 1e-9 * n * n


def test_laplacian_matches_stencil():
    psi = random_field(13, seed=4)
    assert np.array_equal(laplacian(psi), laplacian_oracle(psi))


def test_phase_gradient_real_and_constant_fields():
    assert np.abs(phase_gradient(np.abs(random_field(9, seed=5)) + 0j)).max() == 0.0
    assert np.abs(phase_gradient(np.full(7, 1.3 - 0.8j))).max() < 1e-14


def test_phase_gradient_finite_difference():
    psi = random_field(8, seed=6)
    g = phase_gradient(psi)
    h = 1e-6
    for x in range(8):
        plus, minus = psi.copy(), psi.copy()
        plus[x] *= np.exp(1j * h)
        minus[x] *= np.exp(-1j * h)
        fd = (hamiltonian(plus) - hamiltonian(minus)) / (2 * h)
        assert abs(fd - g[x]) <= 1e-7


def test_phase_gradient_fd_every_n():
    h = 1e-6
    for n in (2, 3, 17):
        psi = random_field(n, seed=n)
        g = phase_gradient(psi)
        x = n // 2
        plus, minus = psi.copy(), psi.copy()
        plus[x] *= np.exp(1j * h)
        minus[x] *= np.exp(-1j * h)
        fd = (hamiltonian(plus) - hamiltonian(minus)) / (2 * h)
        assert abs(fd - g[x]) <= 1e-6 * max(1.0, abs(g[x]))


def test_fourier_delta_flat_spectrum():
    n, m = 16, 2.0
    psi = np.zeros(n, complex)
    psi[0] = math.sqrt(n * m)
    assert np.abs(np.abs(fourier(psi)) - math.sqrt(m)).max() < 1e-13


def test_fourier_round_trip():
    psi = random_field(32, seed=7)
    assert np.abs(inverse_fourier(fourier(psi)) - psi).max() < 1e-13


def test_parseval_and_gradient_identity_all_n():
    for n in range(2, 65):
        psi = random_field(n, seed=n)
        modes = fourier(psi)
        assert np.sum(np.abs(psi) ** 2) == pytest.approx(
            np.sum(np.abs(modes) ** 2), rel=1e-12)
        lhs = np.sum(np.abs(psi - np.roll(psi, 1)) ** 2)
        rhs = np.sum(lattice.omega_sq(n) * np.abs(modes) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_gauge_and_translation_invariance():
    psi = random_field(24, seed=8)
    e0 = hamiltonian(psi)
    for gam in (0.3, 1.7, 5.0):
        assert hamiltonian(np.exp(1j * gam) * psi) == pytest.approx(e0, rel=1e-13)
    for shift in (1, 7, 23):
        assert hamiltonian(np.roll(psi, shift)) == pytest.approx(e0, rel=1e-13)


def test_field_validation():
    with pytest.raises(ValueError):
        LatticeField(np.array([1.0 + 0j]))
    with pytest.raises(ValueError):
        LatticeField(np.array([1.0, np.nan], complex))
    with pytest.raises(ValueError):
        GibbsSpec(n=8, m=-1.0, beta=1.0)
    with pytest.raises(ValueError):
        GibbsSpec(n=8, m=1.0, beta=1.0, p=0.5)
    with pytest.raises(ValueError):
        GibbsSpec(n=8, m=1.0, beta=1.0, kappa=2)


def test_binary_round_trip_bit_exact(tmp_path):
    psi = random_field(19, seed=9)
    path = tmp_path / "f.bin"
    lattice.save_field_binary(psi, path)
    back = lattice.load_field_binary(path)
    assert np.array_equal(back.values, psi)
    assert back.values.dtype == np.complex128


def test_json_round_trip(tmp_path):
    psi = random_field(6, seed=10)
    path = tmp_path / "f.json"
    lattice.save_field_json(psi, path)
    back = lattice.load_field_json(path)
    assert np.array_equal(back.values, psi)


def test_binary_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTAFLD1" + b"\0" * 32)
    with pytest.raises(ValueError, match="magic"):
        lattice.load_field_binary(path)
