"""Core lattice fields and energies on the discrete 1-D torus.

A configuration is a complex field psi(1..n) with periodic identification
psi(0) == psi(n), stored as a length-n complex128 array (index x-1 holds
psi(x)).  The continuum scaling is fixed to mesh 1/n on the unit torus, so

    mass    M_n(psi) = (1/n) sum |psi(x)|^2
    kinetic G_n(psi) = (1/n) sum (n^2/2) |psi(x) - psi(x-1)|^2
    H_n(psi)         = G_n + kappa/(p+1) * (1/n) sum |psi(x)|^{p+1}

with kappa = -1, p = 3 the focusing cubic case where H_n = G_n - V_n and
V_n = (1/4n) sum |psi|^4.

Everything here is a pure function of its inputs; fields are never mutated.
Plain complex ndarrays and LatticeField wrappers are both accepted.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LatticeField",
    "GibbsSpec",
    "EnergyBreakdown",
    "as_values",
    "mass",
    "gradient_energy",
    "potential_energy",
    "energy",
    "hamiltonian",
    "laplacian",
    "phase_gradient",
    "energy_gradient",
    "fourier",
    "inverse_fourier",
    "omega",
    "omega_sq",
    "save_field_binary",
    "load_field_binary",
    "save_field_json",
    "load_field_json",
]

_MAGIC = b"DNLSFLD1"


def as_values(psi):
    """Return the complex value array behind a field-like object."""
    if isinstance(psi, LatticeField):
        return psi.values
    return np.asarray(psi, dtype=np.complex128)


@dataclass(frozen=True)
class LatticeField:
    """Complex configuration on the discrete torus of size n >= 2."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("field needs a 1-D array of length >= 2")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size

    def mass(self):
        return mass(self.values)


@dataclass(frozen=True)
class GibbsSpec:
    """Parameters (n, m, beta, p, kappa) of the canonical Gibbs measure.

    kappa = -1 is focusing, +1 defocusing.  beta is the inverse temperature
    of the exp(-beta H_n) reweighting of the uniform sphere measure;
    beta = 0 is the uniform measure itself (the measure is perfectly well
    defined there, and sampling tests lean on it).
    """

    n: int
    m: float
    beta: float
    p: float = 3.0
    kappa: int = -1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not self.m > 0:
            raise ValueError("mass m must be positive")
        if not self.beta >= 0:
            raise ValueError("beta must be nonnegative")
        if not self.p > 1:
            raise ValueError("nonlinearity exponent p must be > 1")
        if self.kappa not in (-1, 1):
            raise ValueError("kappa must be -1 or +1")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Kinetic / potential / total split of the lattice Hamiltonian.

    potential is the unsigned term (1/(p+1)) (1/n) sum |psi|^{p+1}; the
    total is kinetic + kappa * potential, so the focusing cubic case reads
    total = kinetic - potential.
    """

    kinetic: float
    potential: float
    total: float


def mass(psi):
    """(1/n) sum |psi(x)|^2 (pairwise-accumulated)."""
    v = as_values(psi)
    return float(np.sum(np.abs(v) ** 2)) / v.size


def gradient_energy(psi):
    """Kinetic part G_n = (n/2) sum |psi(x) - psi(x-1)|^2."""
    v = as_values(psi)
    d = v - np.roll(v, 1)
    return 0.5 * v.size * float(np.sum(np.abs(d) ** 2))


def potential_energy(psi, p=3.0):
    """Unsigned potential (1/(p+1)) (1/n) sum |psi|^{p+1}."""
    v = as_values(psi)
    if p == 3.0:
        s = float(np.sum(np.abs(v) ** 4))
    else:
        s = float(np.sum(np.abs(v) ** (p + 1.0)))
    return s / ((p + 1.0) * v.size)


def energy(psi, spec=None, p=3.0, kappa=-1):
    """Energy breakdown of H_n; dimensions must match when a spec is given."""
    v = as_values(psi)
    if spec is not None:
        if spec.n != v.size:
            raise ValueError(f"field size {v.size} != spec.n {spec.n}")
        p, kappa = spec.p, spec.kappa
    g = gradient_energy(v)
    pot = potential_energy(v, p)
    return EnergyBreakdown(kinetic=g, potential=pot, total=g + kappa * pot)


def hamiltonian(psi, p=3.0, kappa=-1):
    """Scalar H_n(psi)."""
    return gradient_energy(psi) + kappa * potential_energy(psi, p)


def laplacian(psi):
    """Discrete periodic Laplacian n^2 (psi(x+1) - 2 psi(x) + psi(x-1))."""
    v = as_values(psi)
    n = v.size
    return (n * n) * (np.roll(v, -1) - 2.0 * v + np.roll(v, 1))


def phase_gradient(psi):
    """Derivative of H_n with respect to the phase at each site.

    Equals (1/n) Im[psi(x) conj(Delta psi)(x)]; the |psi|^{p+1} potential is
    phase-invariant and contributes nothing.
    """
    v = as_values(psi)
    lap = laplacian(v)
    return np.imag(v * np.conj(lap)) / v.size


def energy_gradient(psi, p=3.0, kappa=-1):
    """Complex gradient dH/dpsi_r + i dH/dpsi_i, one entry per site."""
    v = as_values(psi)
    n = v.size
    if p == 3.0:
        nl = np.abs(v) ** 2 * v
    else:
        nl = np.abs(v) ** (p - 1.0) * v
    return (-laplacian(v) + kappa * nl) / n


def omega(n):
    """Lattice frequencies omega_k = 2 |sin(pi k / n)|, k = 0..n-1."""
    return 2.0 * np.abs(np.sin(np.pi * np.arange(n) / n))


def omega_sq(n):
    return omega(n) ** 2


def fourier(psi):
    """Unitary DFT: psi_hat(k) = n^{-1/2} sum psi(x) e^{-2 pi i k x / n}."""
    v = as_values(psi)
    return np.fft.fft(v) / np.sqrt(v.size)


def inverse_fourier(modes):
    modes = np.asarray(modes, dtype=np.complex128)
    return np.fft.ifft(modes) * np.sqrt(modes.size)


# --- serialization -------------------------------------------------------
#
# Binary layout: 8-byte magic, uint64 n, then 2n little-endian float64
# (re, im per site in site order).  Round trip is bit-exact.

def save_field_binary(psi, path):
    v = as_values(psi)
    raw = v.astype(np.complex128).view(np.float64)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", v.size))
        fh.write(raw.astype("<f8").tobytes())


def load_field_binary(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"not a field file: bad magic {magic!r}")
        (n,) = struct.unpack("<Q", fh.read(8))
        raw = np.frombuffer(fh.read(16 * n), dtype="<f8")
    if raw.size != 2 * n:
        raise ValueError("truncated field file")
    return LatticeField(raw.astype(np.float64).view(np.complex128).copy())


def save_field_json(psi, path):
    v = as_values(psi)
    comps = v.view(np.float64)
    doc = {"n": int(v.size), "components": [float(c) for c in comps]}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_field_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    comps = np.asarray(doc["components"], dtype=np.float64)
    if comps.size != 2 * doc["n"]:
        raise ValueError("component count does not match n")
    return LatticeField(comps.view(np.complex128).copy())
