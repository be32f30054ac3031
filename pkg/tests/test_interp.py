"""Piecewise-linear bridge: exact norms, reduced distance, padding."""

import math

import numpy as np
import pytest

from dnlslab import elliptic, interp, variational
from dnlslab.interp import (InterpolatedField, eval_interp, gn_ratio,
                            h1_norm_sq, interpolate, line_gradient_energy,
                            line_lp_norm, lp_norm_interp, pad_to_line,
                            seminorm_distance, continuous_energy)
from dnlslab.lattice import gradient_energy, hamiltonian, mass
from dnlslab.rng import stream


def random_field(n, seed=0, mass_target=None):
    rng = stream(seed, n)
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if mass_target is not None:
        psi *= math.sqrt(mass_target * n) / np.linalg.norm(psi)
    return psi


def lemma_rhs(psi, p):
    m = mass(psi)
    g = gradient_energy(psi)
    return p * (2 * g) ** 0.5 * (m**0.5 + g**0.5) ** (p - 1) / len(psi)


def test_constant_interpolant():
    f = interpolate(np.full(8, 2.0 - 1.0j))
    ys = np.linspace(0, 1, 37)
    assert np.abs(eval_interp(f, ys) - (2.0 - 1.0j)).max() < 1e-15


def test_knot_agreement():
    psi = random_field(16, seed=1)
    f = interpolate(psi)
    assert np.abs(eval_interp(f, np.arange(16) / 16) - psi).max() == 0.0


def test_kinetic_identity():
    psi = random_field(32, seed=2)
    # quadrature oracle: the weak derivative is cellwise constant
    n = 32
    slopes = (np.roll(psi, -1) - psi) * n
    kin_oracle = 0.5 * np.sum(np.abs(slopes) ** 2) / n
    assert gradient_energy(psi) == pytest.approx(kin_oracle, rel=1e-13)
    # and h1_norm_sq decomposes exactly into 2 G_n + L2^2
    f = interpolate(psi)
    l2 = lp_norm_interp(f, 2)
    assert h1_norm_sq(f) == pytest.approx(2 * gradient_energy(psi) + l2**2,
                                          rel=1e-12)


def test_lp_norm_constant():
    m = 1.9
    f = interpolate(np.full(8, math.sqrt(m), complex))
    assert lp_norm_interp(f, 2) == pytest.approx(math.sqrt(m), rel=1e-14)


def test_lp_exact_matches_quadrature_mode():
    psi = random_field(24, seed=3)
    f = interpolate(psi)
    for p in (2, 4):
        assert lp_norm_interp(f, p) == pytest.approx(
            lp_norm_interp(f, p, mode="quadrature"), rel=1e-12)
    with pytest.raises(ValueError):
        lp_norm_interp(f, 3)


def test_lemma_bound_and_jensen_many_fields():
    cnt = 0
    for n in (8, 16, 32, 64, 128):
        for seed in range(500):
            psi = random_field(n, seed=seed, mass_target=1.0)
            f = interpolate(psi)
            for p in (2, 4):
                lp_interp = lp_norm_interp(f, p) ** p
                lp_disc = float(np.sum(np.abs(psi) ** p)) / n
                assert abs(lp_interp - lp_disc) <= lemma_rhs(psi, p) + 1e-12
                assert lp_interp <= lp_disc + 1e-12  # Jensen
            cnt += 1
    assert cnt == 2500


def test_continuous_energy_constant():
    m = 2.2
    psi = np.full(16, math.sqrt(m), complex)
    assert continuous_energy(interpolate(psi)) == pytest.approx(-m * m / 4,
                                                                rel=1e-13)
    assert continuous_energy(interpolate(psi)) == pytest.approx(
        hamiltonian(psi), rel=1e-13)


def test_energy_comparison_soliton_sequence():
    # n |H(interp) - H_n| stays below the analytic constant from the
    # p=4 interpolation lemma with G capped over the sequence
    m = 25.0
    gmax = 0.0
    vals = {}
    for n in (16, 32, 64, 128, 256):
        q = variational.discrete_soliton(n, m)
        gmax = max(gmax, gradient_energy(q))
        vals[n] = n * abs(continuous_energy(interpolate(q)) - hamiltonian(q))
    cap = (2 * gmax) ** 0.5 * (m**0.5 + gmax**0.5) ** 3  # lemma constant / 4 * 4
    for n, v in vals.items():
        assert v <= cap
    assert vals[256] <= max(vals[16], vals[32])  # no growth in n


def test_energy_comparison_smooth_profile_rate():
    # smooth profile: the discrete/continuous gap shrinks like 1/n
    def smooth(n):
        x = np.arange(n) / n
        return 1.0 + 0.5 * np.sin(2 * np.pi * x) + 0.25j * np.cos(4 * np.pi * x)

    gaps = {n: abs(continuous_energy(interpolate(smooth(n)))
                   - hamiltonian(smooth(n))) for n in (32, 256)}
    assert gaps[256] <= gaps[32] / 4.0


def test_seminorm_self_distance():
    for n in (8, 33):
        f = interpolate(random_field(n, seed=n))
        d, gamma, shift = seminorm_distance(f, f)
        assert d <= 1e-10


def test_seminorm_recovers_grid_symmetry():
    psi = random_field(32, seed=5)
    f = interpolate(psi)
    gamma0, shift_sites = 1.1, 5
    g = InterpolatedField(np.exp(1j * gamma0) * np.roll(psi, -shift_sites))
    d, gamma, shift = seminorm_distance(f, g)
    assert d <= 1e-8
    assert gamma == pytest.approx(gamma0, abs=1e-6)
    assert shift == pytest.approx(shift_sites / 32, abs=1e-9)


def test_seminorm_fractional_shift_smooth_field():
    # re-interpolating a fractionally shifted smooth profile costs an H^1
    # commutator bounded by |f''|_inf h; the recovered shift lands within
    # a cell of the true offset
    n = 64
    x = np.arange(n) / n
    psi = np.exp(np.cos(2 * np.pi * x)) + 0.3j * np.sin(2 * np.pi * x)
    x0 = 0.2371
    g = InterpolatedField(np.exp(0.7j) * eval_interp(interpolate(psi), x + x0))
    d, gamma, shift = seminorm_distance(interpolate(psi), g)
    assert shift == pytest.approx(x0, abs=1.0 / n)
    fpp_max = (2 * np.pi) ** 2 * np.e * 2  # coarse |f''| bound for this profile
    assert d <= fpp_max / n


def test_seminorm_pseudometric():
    rng = stream(77, 0)
    for trial in range(4):
        fa = interpolate(random_field(16, seed=100 + trial, mass_target=1.0))
        fb = interpolate(random_field(16, seed=200 + trial, mass_target=1.0))
        fc = interpolate(random_field(16, seed=300 + trial, mass_target=1.0))
        dab = seminorm_distance(fa, fb)[0]
        dba = seminorm_distance(fb, fa)[0]
        assert dab == pytest.approx(dba, abs=1e-9)
        dac = seminorm_distance(fa, fc)[0]
        dcb = seminorm_distance(fc, fb)[0]
        assert dab <= dac + dcb + 1e-8


def test_soliton_interpolant_converges():
    from dnlslab.experiments import matched_soliton_distance

    params = elliptic.soliton_params(25.0)
    dists = {}
    for n in (64, 128, 256):
        q = variational.discrete_soliton(n, 25.0)
        dists[n] = matched_soliton_distance(q, params)
    assert dists[256] <= 0.05
    assert dists[256] < dists[128] < dists[64]


def test_gn_ratio_cases():
    m, n = 2.0, 16
    assert gn_ratio(np.full(n, math.sqrt(m), complex)) == pytest.approx(1.0,
                                                                        rel=1e-14)
    x = np.arange(n)
    pw = math.sqrt(m) * np.exp(2j * np.pi * x / n)
    expect = m * m / (m**1.5 * n * math.sqrt(2 * m) * math.sin(math.pi / n)
                      + m * m)
    assert gn_ratio(pw) == pytest.approx(expect, rel=1e-12)
    with pytest.raises(ValueError):
        gn_ratio(np.zeros(8, complex))


def test_padding_gradient_identity():
    psi = random_field(16, seed=9)
    pl = pad_to_line(psi)
    fn = pl.values[2 * pl.n]  # value at x = n, the rotated minimum site
    lhs = line_gradient_energy(pl)
    rhs = gradient_energy(psi) / pl.n + abs(fn) ** 2 / pl.n
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_padding_lp_identity_and_sandwich():
    psi = random_field(12, seed=10)
    pl = pad_to_line(psi)
    n = pl.n
    fn = abs(pl.values[2 * n])
    for p in (2, 4):
        lp_line = line_lp_norm(pl, p) ** p
        # exact ladder-sum identity
        ramp = sum(2 * (x / n) ** p for x in range(n)) + 1.0
        lp_core = float(np.sum(np.abs(psi) ** p))
        assert lp_line == pytest.approx(lp_core + fn**p * ramp, rel=1e-12)
        # integral sandwich with n-explicit constants
        c1 = 2 * (1 / (p + 1) - 1 / n) + 1 / n
        c2 = 2 / (p + 1) + 1 / n
        per = lp_line / n
        disc = lp_core / n
        assert disc + c1 * fn**p <= per + 1e-12
        assert per <= disc + c2 * fn**p + 1e-12


def test_padding_constant_field_closed_form():
    m, n = 4.0, 8
    pl = pad_to_line(np.full(n, math.sqrt(m), complex))
    # trapezoid: only the two ramps carry gradient
    assert line_gradient_energy(pl) == pytest.approx(m / n, rel=1e-13)
    # whole-line GN ratio on the padded field is finite and positive
    r = (line_lp_norm(pl, 4) ** 4
         / (line_lp_norm(pl, 2) ** 3 * line_gradient_energy(pl) ** 0.5))
    assert 0 < r < np.inf


def test_padding_minimum_rotation():
    psi = random_field(16, seed=11)
    pl = pad_to_line(psi)
    assert abs(pl.values[2 * pl.n]) == pytest.approx(np.abs(psi).min(),
                                                     rel=1e-14)
