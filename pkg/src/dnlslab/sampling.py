"""Sampling on the mass sphere: exact uniform draws, Metropolis chains for
the canonical Gibbs measure, and the large-deviation estimators.

Uniform sampling uses the Gaussian representation: with Z_1..Z_n i.i.d.
standard complex normals, sqrt(m n) Z / |Z| is uniform on the sphere
{(1/n) sum |psi|^2 = m}.  The same representation turns the probability of
an anomalously small lattice gradient into a Gaussian-ratio event

    P( n^2 m sum |Z_j - Z_{j-1}|^2 / sum |Z_j|^2 <= 2 g ),

which Monte Carlo can reach directly without touching the sphere, and
which is bounded above by the computable Chernoff product
prod_k 1/(lambda (omega_k^2 - g_o) + 1), g_o = 2g/(n^2 m).

The Metropolis chain mixes two exactly mass-preserving reversible moves:
Givens rotations of random coordinate pairs and single-site phase kicks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import mcmc_block
from .lattice import hamiltonian, omega_sq
from .rng import stream

__all__ = [
    "McmcConfig",
    "McmcResult",
    "LdReport",
    "uniform_sphere_sample",
    "mcmc_gibbs",
    "integrated_autocorr_time",
    "effective_sample_size",
    "ld_prob_grad",
    "chernoff_upper",
    "product_upper",
    "sin_product_identity_error",
    "lower_bound_volume",
    "wilson_interval",
]

RENORM_EVERY = 10_000
_BLOCK = 1 << 18


def uniform_sphere_sample(n, m, rng):
    """One exact-mass uniform draw from the sphere (1/n) sum |psi|^2 = m."""
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return np.sqrt(m * n) * z / np.linalg.norm(z)


@dataclass(frozen=True)
class McmcConfig:
    """Metropolis chain settings.

    pair_weight is the probability of a pair-rotation proposal (the rest
    are single-site phase kicks); delta_rot the proposal angle scale,
    auto-tuned during burn-in toward 30-50% acceptance when tune=True.
    """

    steps: int
    burn_in: int = 0
    pair_weight: float = 0.7
    delta_rot: float = 0.5
    thinning: int = 100
    seed: int = 0
    tune: bool = True

    def __post_init__(self):
        if not 0.0 <= self.pair_weight <= 1.0:
            raise ValueError("pair_weight must lie in [0, 1]")
        if not 0.0 < self.delta_rot <= math.pi:
            raise ValueError("delta_rot must lie in (0, pi]")
        if self.steps <= 0 or self.burn_in < 0 or self.thinning <= 0:
            raise ValueError("steps/burn_in/thinning out of range")


@dataclass
class McmcResult:
    samples: np.ndarray          # (k, n) complex, thinned post burn-in
    energies: np.ndarray         # H_n per sample
    final: np.ndarray            # final chain state
    acceptance: dict             # per proposal kind
    delta_rot: float             # scale actually used after tuning
    ess: float                   # effective sample size of the H series


def _run_blocks(v, n, beta, p, kappa, cfg, rng, nsteps, delta, samples_out,
                thin, target_sq):
    """Drive mcmc_block over pregenerated randomness; returns counters."""
    acc = np.zeros(2, np.int64)
    prop = np.zeros(2, np.int64)
    done = 0
    nsamp = 0
    while done < nsteps:
        b = min(_BLOCK, nsteps - done)
        u_type = rng.random(b)
        idx1 = rng.integers(0, 2 * n, b)
        idx2off = rng.integers(1, 2 * n, b)
        ang = rng.uniform(-1.0, 1.0, b)
        logu = np.log(rng.random(b))
        nsamp = mcmc_block(v, n, beta, p, kappa, cfg.pair_weight, delta,
                           u_type, idx1, idx2off, ang, logu, done,
                           RENORM_EVERY, target_sq, thin, samples_out,
                           nsamp, acc, prop)
        done += b
    return acc, prop, nsamp


def mcmc_gibbs(spec, cfg, psi0=None):
    """Metropolis chain targeting exp(-beta H_n) d(uniform on sphere).

    Starts from psi0 (or a uniform draw), burns in with proposal-scale
    tuning, then samples with the scale frozen.  Mass is invariant up to
    roundoff and re-projected every 10^4 steps.
    """
    n, m = spec.n, spec.m
    rng = stream(cfg.seed, 0)
    if psi0 is None:
        psi0 = uniform_sphere_sample(n, m, rng)
    v = np.ascontiguousarray(np.asarray(psi0, np.complex128).view(np.float64).copy())
    target_sq = float(np.sum(v * v))
    delta = cfg.delta_rot
    # burn-in with multiplicative tuning toward acceptance in [0.3, 0.5]
    if cfg.burn_in > 0:
        chunks = 10
        per = max(cfg.burn_in // chunks, 1)
        dummy = np.empty((0, 2 * n))
        for _ in range(chunks):
            acc, prop, _ = _run_blocks(v, n, spec.beta, spec.p, spec.kappa,
                                       cfg, rng, per, delta, dummy, 0, target_sq)
            if cfg.tune:
                rate = acc.sum() / max(prop.sum(), 1)
                if rate < 0.3:
                    delta = max(delta * 0.7, 1e-4)
                elif rate > 0.5:
                    delta = min(delta * 1.3, math.pi)
    k = cfg.steps // cfg.thinning
    samples_out = np.empty((k, 2 * n), np.float64)
    acc, prop, nsamp = _run_blocks(v, n, spec.beta, spec.p, spec.kappa, cfg,
                                   rng, cfg.steps, delta, samples_out,
                                   cfg.thinning, target_sq)
    samples = samples_out[:nsamp].view(np.complex128)
    energies = np.array([hamiltonian(s, spec.p, spec.kappa) for s in samples])
    ess = effective_sample_size(energies) if nsamp > 3 else float(nsamp)
    acceptance = {
        "pair": acc[0] / max(prop[0], 1),
        "phase": acc[1] / max(prop[1], 1),
        "overall": acc.sum() / max(prop.sum(), 1),
    }
    return McmcResult(samples=samples, energies=energies,
                      final=v.view(np.complex128).copy(),
                      acceptance=acceptance, delta_rot=delta, ess=ess)


def integrated_autocorr_time(series):
    """Geyer initial-positive-sequence estimate of the IACT."""
    x = np.asarray(series, float)
    x = x - x.mean()
    nlen = x.size
    if nlen < 4 or np.allclose(x, 0):
        return 1.0
    f = np.fft.rfft(x, 2 * nlen)
    acf = np.fft.irfft(f * np.conj(f))[:nlen].real
    if acf[0] <= 0:
        return 1.0
    acf /= acf[0]
    tau = 1.0
    for k in range(1, nlen // 2):
        gamma = acf[2 * k - 1] + acf[2 * k]
        if gamma <= 0:
            break
        tau += 2.0 * gamma
    return max(tau, 1.0)


def effective_sample_size(series):
    series = np.asarray(series, float)
    return series.size / integrated_autocorr_time(series)


# --- large deviations of the uniform measure ------------------------------


@dataclass(frozen=True)
class LdReport:
    """Monte Carlo estimate and analytic upper bounds for P(G_n <= g)."""

    n: int
    m: float
    g: float
    g_o: float
    n_samples: int
    hits: int
    mc_estimate: float
    ci99: tuple
    chernoff_half: float
    chernoff_opt: float
    delta_opt: float
    product_upper: float
    lambda_opt: float


def wilson_interval(hits, total, z=2.5758293035489004):
    """Wilson score interval (default z: two-sided 99%)."""
    if total == 0:
        return (0.0, 1.0)
    phat = hits / total
    denom = 1.0 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total**2)) / denom
    return (max(center - half, 0.0), min(center + half, 1.0))


def chernoff_upper(n, m, g, delta):
    """Closed-form upper bound for P(G_n < g) at parameter delta in (0,1)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    logval = (-math.log(delta) - (n - 1) * math.log1p(-delta)
              + (n - 1) * math.log(2.0 * g / m) - 2.0 * n * math.log(n))
    return math.exp(logval)


def optimal_chernoff_delta(n):
    """argmin over delta of 1/(delta (1-delta)^{n-1}) is delta = 1/n."""
    return 1.0 / n


def product_upper(n, m, g):
    """Best Chernoff product bound prod_k 1/(lambda (omega_k^2 - g_o) + 1).

    Minimized over lambda in (0, 1/g_o) by golden section on the convex
    log-sum; the k = n factor (omega_n = 0) forces lambda g_o < 1, which
    also keeps every factor positive.  Returns (bound, lambda_opt).
    """
    g_o = 2.0 * g / (n * n * m)
    w2 = omega_sq(n)

    def neg_log_prod(lam):
        return -np.sum(np.log1p(lam * (w2 - g_o)))

    lo, hi = 1e-12 / g_o, (1.0 - 1e-12) / g_o
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = neg_log_prod(c), neg_log_prod(d)
    for _ in range(200):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = neg_log_prod(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = neg_log_prod(d)
        if b - a <= 1e-14 * hi:
            break
    lam = 0.5 * (a + b)
    return math.exp(neg_log_prod(lam)), lam


def ld_prob_grad(n, m, g, n_samples, rng, batch=1 << 20):
    """Estimate P(G_n(psi) <= g) under the uniform sphere measure.

    Uses the Gaussian-ratio representation (no sphere sampling), so tiny
    probabilities remain reachable at desk scale; fills both analytic
    upper bounds alongside the Wilson 99% interval.
    """
    if g <= 0:
        raise ValueError("threshold g must be positive")
    hits = 0
    left = n_samples
    thr = 2.0 * g / (n * n * m)
    while left > 0:
        b = min(batch, left)
        z = rng.standard_normal((b, n)) + 1j * rng.standard_normal((b, n))
        num = np.sum(np.abs(z - np.roll(z, 1, axis=1)) ** 2, axis=1)
        den = np.sum(np.abs(z) ** 2, axis=1)
        hits += int(np.count_nonzero(num <= thr * den))
        left -= b
    p_hat = hits / n_samples
    dopt = optimal_chernoff_delta(n)
    prod, lam = product_upper(n, m, g)
    return LdReport(
        n=n, m=m, g=g, g_o=2.0 * g / (n * n * m), n_samples=n_samples,
        hits=hits, mc_estimate=p_hat, ci99=wilson_interval(hits, n_samples),
        chernoff_half=chernoff_upper(n, m, g, 0.5),
        chernoff_opt=chernoff_upper(n, m, g, dopt), delta_opt=dopt,
        product_upper=prod, lambda_opt=lam,
    )


def sin_product_identity_error(n):
    """Relative error of prod_{k<n} sin(pi k/n) = n / 2^{n-1}."""
    ks = np.arange(1, n)
    lhs = float(np.prod(np.sin(np.pi * ks / n)))
    rhs = n / 2.0 ** (n - 1)
    return abs(lhs - rhs) / rhs


def lower_bound_volume(n, delta, q, n_samples, rng, batch=1 << 18):
    """Monte Carlo volume fraction of the box set behind the entropy bound.

    q holds the 2n real components of a (real, nonnegative) discrete
    soliton ordered so the largest is last.  Samples xi uniformly in
    [-delta/2n, delta/2n]^{2n-1} and returns the fraction satisfying
    |sum xi_j q_j| <= q_{2n} delta / (2 sqrt(n)); Chebyshev guarantees at
    least 1/3.
    """
    q = np.asarray(q, float)
    if q.size != 2 * n:
        raise ValueError(f"need 2n = {2*n} components, got {q.size}")
    if np.any(q < 0) or not np.all(q[-1] >= q):
        raise ValueError("components must be nonnegative with the max last")
    half = delta / (2.0 * n)
    thr = q[-1] * delta / (2.0 * math.sqrt(n))
    hits = 0
    left = n_samples
    while left > 0:
        b = min(batch, left)
        xi = rng.uniform(-half, half, (b, 2 * n - 1))
        s = xi @ q[:-1]
        hits += int(np.count_nonzero(np.abs(s) <= thr))
        left -= b
    return hits / n_samples
