"""Elliptic kernel and the dnoidal standing wave."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from dnlslab import elliptic
from dnlslab.elliptic import (agm_complete_K, complete_E, dnoidal_mass,
                              jacobi, soliton_energy, soliton_eval,
                              soliton_params)
from dnlslab.rng import stream


# --- quadrature oracles of the defining integrals ---------------------------

def K_oracle(k):
    val, _ = quad(lambda t: 1.0 / math.sqrt(1 - (k * math.sin(t)) ** 2),
                  0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def E_oracle(k):
    val, _ = quad(lambda t: math.sqrt(1 - (k * math.sin(t)) ** 2),
                  0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def test_K_limits_and_monotonicity():
    assert agm_complete_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert agm_complete_K(0.3) < agm_complete_K(0.6) < agm_complete_K(0.9)


def test_K_against_quadrature():
    for k in (0.2, 0.5, 0.9, 0.99):
        assert agm_complete_K(k) == pytest.approx(K_oracle(k), abs=1e-10)


def test_K_domain_error():
    with pytest.raises(ValueError):
        agm_complete_K(1.0)
    with pytest.raises(ValueError):
        agm_complete_K(-0.1)


def test_E_limits_and_quadrature():
    assert complete_E(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert complete_E(1.0) == 1.0
    for k in (0.3, 0.7, 0.95):
        assert complete_E(k) == pytest.approx(E_oracle(k), abs=1e-10)


def test_jacobi_degenerate_moduli():
    u = np.linspace(-3, 3, 11)
    sn, cn, dn = jacobi(u, 0.0)
    assert np.abs(sn - np.sin(u)).max() < 1e-15
    assert np.abs(cn - np.cos(u)).max() < 1e-15
    assert np.abs(dn - 1.0).max() == 0.0
    sn, cn, dn = jacobi(u, 1.0)
    assert np.abs(sn - np.tanh(u)).max() < 1e-15
    assert np.abs(cn - 1 / np.cosh(u)).max() < 1e-15
    assert np.abs(dn - 1 / np.cosh(u)).max() < 1e-15


def test_jacobi_derivative_of_dn():
    u0, k = 0.7, 0.6
    h = 1e-6
    dnp = (jacobi(u0 + h, k)[2] - jacobi(u0 - h, k)[2]) / (2 * h)
    sn, cn, _ = jacobi(u0, k)
    assert abs(dnp - (-k * k * cn * sn)) <= 1e-7


def test_pythagorean_identities_random():
    rng = stream(42, 0)
    u = rng.uniform(-20, 20, 10_000)
    k = rng.uniform(0.0, 1.0, 10_000)
    for i in range(0, 10_000, 500):
        ui, ki = u[i], k[i]
        sn, cn, dn = jacobi(ui, ki)
        assert abs(sn * sn + cn * cn - 1) <= 1e-12
        assert abs(ki * ki * sn * sn + dn * dn - 1) <= 1e-12
    # vectorized full batch
    for ki in (0.15, 0.55, 0.95):
        sn, cn, dn = jacobi(u, ki)
        assert np.abs(sn**2 + cn**2 - 1).max() <= 1e-12
        assert np.abs(ki**2 * sn**2 + dn**2 - 1).max() <= 1e-12


def test_dn_periodicity():
    rng = stream(43, 0)
    u = rng.uniform(-10, 10, 200)
    for k in (0.1, 0.3, 0.5, 0.7, 0.9):
        K = agm_complete_K(k)
        d1 = jacobi(u, k)[2]
        d2 = jacobi(u + 2 * K, k)[2]
        assert np.abs(d1 - d2).max() <= 1e-10


def test_constant_branch_small_mass():
    p = soliton_params(0.5, 1.0)
    assert p.branch == "constant"
    assert p.alpha == pytest.approx(math.sqrt(0.5), rel=1e-14)
    assert p.omega == pytest.approx(0.5, rel=1e-14)
    assert soliton_eval(p, 0.37) == pytest.approx(math.sqrt(0.5), rel=1e-14)


def test_dnoidal_branch_beats_constant():
    p = soliton_params(25.0, 1.0)
    assert p.branch == "dnoidal"
    assert soliton_energy(p) < -25.0**2 / 4  # strictly below -156.25


def test_dnoidal_mass_self_consistency():
    p = soliton_params(25.0, 1.0)
    val, _ = quad(lambda x: soliton_eval(p, x) ** 2, 0.0, 1.0,
                  epsabs=1e-12, epsrel=1e-12, limit=400)
    assert val == pytest.approx(25.0, abs=1e-9)


def test_dnoidal_crest_and_trough():
    p = soliton_params(25.0, 1.0)
    assert soliton_eval(p, 0.0) == pytest.approx(p.alpha, rel=1e-13)
    trough = p.alpha * math.sqrt(1 - p.k**2)
    assert soliton_eval(p, 0.5) == pytest.approx(trough, rel=1e-10)
    # oracle route: alpha * dn(K, k)
    assert soliton_eval(p, 0.5) == pytest.approx(
        p.alpha * jacobi(agm_complete_K(p.k), p.k)[2], rel=1e-12)


def test_soliton_profile_periodic_even():
    p = soliton_params(25.0, 1.0)
    xs = np.linspace(0, 1, 33)
    q = soliton_eval(p, xs)
    assert np.all(q >= 0)
    assert np.abs(q - soliton_eval(p, xs + 1.0)).max() < 1e-10
    assert np.abs(q - soliton_eval(p, -xs)).max() < 1e-10


def test_constant_energy_exact():
    for m in (0.5, 2.0):
        p = soliton_params(m, 1.0)
        assert soliton_energy(p) == pytest.approx(-m * m / 4, rel=1e-14)


def test_energy_routes_agree_dnoidal():
    # soliton_energy raises internally if quadrature and virial disagree
    p = soliton_params(25.0, 1.0)
    e = soliton_energy(p, tol=1e-8)
    assert e < 0


def test_ode_residual_fine_grid():
    p = soliton_params(25.0, 1.0)
    n = 8192
    xs = np.arange(n) / n
    q = np.asarray(soliton_eval(p, xs), float)
    # 4th-order centered second difference
    qpp = (-np.roll(q, 2) + 16 * np.roll(q, 1) - 30 * q
           + 16 * np.roll(q, -1) - np.roll(q, -2)) * (n * n / 12.0)
    resid = qpp - p.omega * q + q**3
    assert np.abs(resid).max() <= 1e-6 * np.max(np.abs(q)) ** 3


def test_omega_lower_bound():
    for m in (0.5, 5.0, 25.0):
        p = soliton_params(m, 1.0)
        q4, _ = quad(lambda x: soliton_eval(p, x) ** 4, 0.0, 1.0, limit=400)
        assert p.omega >= q4 / (2 * m) + m / 2 - 1e-8


def test_existence_threshold_and_mass_equation():
    # one-arch dnoidal mass is monotone increasing in the modulus
    ks = np.linspace(1e-6, 0.999999, 40)
    ms = [dnoidal_mass(k) for k in ks]
    assert np.all(np.diff(ms) > 0)
    assert ms[0] == pytest.approx(2 * math.pi**2, rel=1e-4)
    # just above the threshold the dnoidal branch wins already
    m = 2 * math.pi**2 + 0.5
    assert soliton_params(m).branch == "dnoidal"
    m = 2 * math.pi**2 - 0.5
    assert soliton_params(m).branch == "constant"


def test_soliton_samples_shape():
    p = soliton_params(25.0)
    s = elliptic.soliton_samples(p, 64)
    assert s.shape == (64,) and s.dtype == np.complex128
    assert s[0] == pytest.approx(p.alpha, rel=1e-12)
