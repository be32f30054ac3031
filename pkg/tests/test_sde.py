"""Splitting integrator: conservation, dissipation, ergodic agreement."""

import math

import numpy as np
import pytest

from dnlslab import sde, variational
from dnlslab.lattice import GibbsSpec, hamiltonian, mass
from dnlslab.rng import stream
from dnlslab.sampling import McmcConfig, effective_sample_size, mcmc_gibbs, uniform_sphere_sample
from dnlslab.sde import SdeParams, default_dt, integrate, step


def test_params_validation():
    with pytest.raises(ValueError):
        SdeParams(n=8, m=1.0, gamma=-1.0, beta=1.0, dt=1e-3)
    with pytest.raises(ValueError):
        SdeParams(n=8, m=1.0, gamma=1.0, beta=0.0, dt=1e-3)
    with pytest.raises(ValueError):
        SdeParams(n=8, m=1.0, gamma=1.0, beta=1.0, dt=1e-3, scheme="euler")
    p = SdeParams(n=8, m=1.0, gamma=1.0, beta=math.inf, dt=1e-3)
    assert p.beta_inv == 0.0 and p.noise_amp == 0.0


def test_mass_conservation_along_flow():
    n, m = 32, 4.0
    rng = stream(21, 0)
    psi0 = uniform_sphere_sample(n, m, rng)
    params = SdeParams(n=n, m=m, gamma=1.0, beta=5.0, dt=1e-3,
                       record_every=1000)
    traj = integrate(psi0, params, 100.0, rng)  # 1e5 steps
    assert abs(mass(traj.final) - m) <= 1e-13 * m


def test_gamma_zero_energy_drift_second_order():
    # halving dt quarters the Hamiltonian drift of the deterministic flow
    # (asymptotic statement: needs a resolved, smooth initial state)
    n, m = 32, 1.0
    x = np.arange(n) / n
    psi0 = 1.0 + 0.4 * np.cos(2 * np.pi * x) + 0.25j * np.sin(4 * np.pi * x)
    psi0 = psi0 * math.sqrt(n * m) / np.linalg.norm(psi0)
    h0 = hamiltonian(psi0)

    def drift(dt):
        params = SdeParams(n=n, m=m, gamma=0.0, beta=1.0, dt=dt,
                           record_every=max(int(0.01 / dt), 1),
                           renorm_every=0)
        traj = integrate(psi0, params, 1.0, stream(22, 0))
        return np.abs(traj.series("H") - h0).max()

    d1, d2 = drift(1e-3), drift(5e-4)
    assert d2 <= d1 / 3.0
    assert d1 / d2 <= 6.0


def test_zero_temperature_monotone_and_soliton_stationary():
    # the discrete soliton is a critical point: the trajectory parks there
    # and H is constant up to the Strang wiggle, which scales as dt^2
    n, m = 64, 25.0
    q = variational.discrete_soliton(n, m)
    params = SdeParams(n=n, m=m, gamma=1.0, beta=math.inf, dt=2e-5,
                       record_every=1000)
    traj = integrate(q, params, 10.0, stream(23, 0),
                     track_energy_increments=True)
    h = traj.series("H")
    assert np.abs(h - h[0]).max() <= 1e-8
    assert traj.max_energy_increment <= params.monotone_tol


def test_zero_temperature_relaxes_random_start():
    from dnlslab.experiments import relaxation_run

    traj, dist = relaxation_run(64, 25.0, 1.0, 40.0, seed=24, dt=1e-4)
    h = traj.series("H")
    assert np.all(np.diff(h) <= params_tol(traj))
    e0n = variational.minimize_energy(64, 25.0).energy
    assert h[-1] == pytest.approx(e0n, abs=1e-5)
    assert dist <= 0.1


def params_tol(traj):
    return 1e-9 * (1.0 + np.abs(traj.series("H")[:-1]))


def test_time_reversal_deterministic():
    n, m = 16, 2.0
    rng = stream(25, 0)
    psi0 = uniform_sphere_sample(n, m, rng)
    params_f = SdeParams(n=n, m=m, gamma=0.0, beta=1.0, dt=1e-3)
    params_b = SdeParams(n=n, m=m, gamma=0.0, beta=1.0, dt=-1e-3)
    back = step(step(psi0, params_f), params_b)
    assert np.abs(back - psi0).max() <= 1e-11


def test_gauge_covariance_pathwise():
    n, m = 16, 2.0
    rng = stream(26, 0)
    psi0 = uniform_sphere_sample(n, m, rng)
    params = SdeParams(n=n, m=m, gamma=1.0, beta=4.0, dt=1e-3)
    xi = stream(27, 0).standard_normal(n)
    gam = 0.83
    a = step(np.exp(1j * gam) * psi0, params, xi=xi)
    b = np.exp(1j * gam) * step(psi0, params, xi=xi)
    assert np.abs(a - b).max() <= 1e-12 * np.abs(a).max()


def test_schemes_run_and_conserve_mass():
    n, m = 16, 2.0
    rng = stream(28, 0)
    psi0 = uniform_sphere_sample(n, m, rng)
    for scheme in ("strang", "lie", "strang-midpoint"):
        params = SdeParams(n=n, m=m, gamma=1.0, beta=3.0, dt=1e-3,
                           scheme=scheme, record_every=100)
        traj = integrate(psi0, params, 5.0, stream(28, 1))
        assert abs(mass(traj.final) - m) <= 1e-12 * m


def test_finite_beta_matches_mcmc():
    # the two samplers target the same measure (n, m, beta) = (8, 1, 5)
    n, m, beta = 8, 1.0, 5.0
    rng = stream(29, 0)
    psi0 = uniform_sphere_sample(n, m, rng)
    params = SdeParams(n=n, m=m, gamma=1.0, beta=beta, dt=2e-3,
                       record_every=50)
    mean_sde, se_sde, _ = sde.stationary_energy_stats(psi0, params, 2000.0,
                                                      rng)
    res = mcmc_gibbs(GibbsSpec(n=n, m=m, beta=beta),
                     McmcConfig(steps=2_000_000, burn_in=200_000,
                                thinning=100, seed=30))
    se_mc = res.energies.std() / math.sqrt(max(res.ess, 1.0))
    comb = math.hypot(se_sde, se_mc)
    assert abs(mean_sde - res.energies.mean()) <= 3 * comb


def test_weak_order_stationary_mean_dt_robust():
    n, m, beta = 8, 1.0, 3.0
    rng = stream(31, 0)
    psi0 = uniform_sphere_sample(n, m, rng)
    means = {}
    for dt in (4e-3, 2e-3):
        params = SdeParams(n=n, m=m, gamma=1.0, beta=beta, dt=dt,
                           record_every=int(0.1 / dt))
        mu, se, _ = sde.stationary_energy_stats(psi0, params, 1500.0,
                                                stream(31, int(1 / dt)))
        means[dt] = (mu, se)
    diff = abs(means[4e-3][0] - means[2e-3][0])
    comb = math.hypot(means[4e-3][1], means[2e-3][1])
    assert diff <= 3 * comb + 5e-3 * abs(means[2e-3][0])


def test_default_dt_scaling():
    assert default_dt(32) == pytest.approx(1e-3)
    assert default_dt(64) == pytest.approx(2.5e-4)
