"""Empirical Gagliardo-Nirenberg constant and the derived bounds."""

import math

import numpy as np
import pytest

from dnlslab import gn
from dnlslab.interp import gn_ratio
from dnlslab.lattice import gradient_energy, hamiltonian
from dnlslab.rng import stream
from dnlslab.sampling import uniform_sphere_sample


def test_constant_attains_unity():
    sup, worst = gn.gn_scan(n_random=200, sizes=(4, 16))
    assert sup >= 1.0 - 1e-14
    assert worst[1] == "structured"


def test_persisted_constant_loads():
    c = gn.gn_constant()
    assert c > 1.0
    assert c == pytest.approx(1.0, rel=1e-6)


def test_no_violations_at_stored_constant_small_scan():
    assert gn.count_violations(gn.gn_constant(), n_random=2000,
                               sizes=(4, 8, 32)) == 0


def test_theta_bound_formula():
    c = 1.25
    m = 2.0
    assert gn.theta_bound(m, c) == pytest.approx(c * c * 8 / 64 + c * 4 / 4)


def test_grad_bound_discriminant_positive():
    # theta's form keeps the root real for any eps > 0 at e0n = -theta(m)
    for m in (0.5, 5.0, 25.0):
        c = gn.gn_constant()
        e_worst = -gn.theta_bound(m, c)
        cap = gn.grad_bound_constant(m, 1e-6, e_worst, c=c)
        assert cap > 0


def test_energy_lower_bound_chain_random_fields():
    # H_n >= G - (C/4)(m^{3/2} G^{1/2} + m^2) is gn_ratio <= C in disguise
    c = gn.gn_constant()
    rng = stream(9, 0)
    for n in (4, 16, 64):
        for _ in range(200):
            m = float(rng.uniform(0.2, 10.0))
            psi = uniform_sphere_sample(n, m, rng)
            g = gradient_energy(psi)
            bound = g - (c / 4.0) * (m**1.5 * math.sqrt(g) + m * m)
            assert hamiltonian(psi) >= bound - 1e-10 * max(1.0, abs(bound))
