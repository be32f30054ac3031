"""Numerical verification of the Hormander bracket condition on the sphere.

The noise acts through the site phase rotations Y_x and the drift through
the Hamiltonian field A_n; hypoellipticity needs the Lie algebra they
generate to span the tangent space of the mass sphere, which has dimension
2n - 1.  All the fields involved are polynomial in the 2n real coordinates
(v[2x], v[2x+1]) = (Re psi(x+1), Im psi(x+1)) once p = 3, so brackets can
be formed symbolically and evaluated exactly.

Rotation fields R_{a,b} = v_a d_b - v_b d_a are the building blocks; they
obey so(2n) structure constants

    [R_{a1,a2}, R_{a3,a4}] = d_{a1,a4} R_{a2,a3} + d_{a2,a3} R_{a1,a4}
                           - d_{a1,a3} R_{a2,a4} - d_{a2,a4} R_{a1,a3}

under the convention [X, Y](v) = DY(v) X(v) - DX(v) Y(v).  Two rank modes:

* "explicit-family": evaluate the closed family {R_{x^r,x^i},
  R_{x^r,y^i} - R_{x^i,y^r}, R_{x^r,y^r} + R_{x^i,y^i}} at the point and
  take the numerical rank (singular values above 1e-10 sigma_max).
* "nested-brackets": grow the algebra from {Y_x, A_n} by repeated
  bracketing up to a configurable depth, pruning by symbolic coefficient
  span, then evaluate the resulting basis at the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PolyVectorField",
    "rotation_field",
    "phase_field",
    "hamiltonian_field",
    "commutator",
    "bracket",
    "explicit_family",
    "nested_family",
    "lie_rank",
    "lie_rank_report",
    "tangency_defect",
    "RANK_RTOL",
]

RANK_RTOL = 1e-10


def _ri(x, part, n):
    """Coordinate index of site x (1-based) real/imag component."""
    return 2 * ((x - 1) % n) + (0 if part == "r" else 1)


@dataclass(frozen=True)
class PolyVectorField:
    """Polynomial vector field on R^{2n}.

    components[c] maps a monomial (tuple of per-coordinate exponents,
    length 2n) to its coefficient in component c.  Supports exact
    evaluation, exact Jacobians, and exact Lie brackets.
    """

    dim: int
    components: tuple  # tuple of dicts monomial -> coeff

    @staticmethod
    def zero(dim):
        return PolyVectorField(dim, tuple({} for _ in range(dim)))

    def is_zero(self, tol=0.0):
        return all(all(abs(cf) <= tol for cf in comp.values())
                   for comp in self.components)

    def evaluate(self, v):
        v = np.asarray(v, float)
        out = np.zeros(self.dim)
        for c, comp in enumerate(self.components):
            acc = 0.0
            for mono, cf in comp.items():
                term = cf
                for i, e in enumerate(mono):
                    if e:
                        term *= v[i] ** e
                acc += term
            out[c] = acc
        return out

    def jacobian(self, v):
        v = np.asarray(v, float)
        jac = np.zeros((self.dim, self.dim))
        for c, comp in enumerate(self.components):
            for mono, cf in comp.items():
                for i, e in enumerate(mono):
                    if not e:
                        continue
                    term = cf * e
                    for j, ej in enumerate(mono):
                        pw = ej - 1 if j == i else ej
                        if pw:
                            term *= v[j] ** pw
                    jac[c, i] += term
        return jac

    def coeff_vector(self, index):
        """Flat coefficient vector over the monomial basis in `index`
        (a dict monomial -> slot, extended in place).  Layout is
        monomial-major so older vectors only need zero padding when the
        index grows."""
        for comp in self.components:
            for mono in comp:
                if mono not in index:
                    index[mono] = len(index)
        vec = np.zeros(self.dim * len(index))
        for c, comp in enumerate(self.components):
            for mono, cf in comp.items():
                vec[index[mono] * self.dim + c] = cf
        return vec


def _add_term(comp, mono, cf):
    new = comp.get(mono, 0.0) + cf
    if new == 0.0:
        comp.pop(mono, None)
    else:
        comp[mono] = new


def _mono_unit(dim, i):
    m = [0] * dim
    m[i] = 1
    return tuple(m)


def rotation_field(n, a, b):
    """R_{a,b} = v_a d_b - v_b d_a on R^{2n}; a, b are coordinate indices."""
    dim = 2 * n
    comps = [dict() for _ in range(dim)]
    _add_term(comps[b], _mono_unit(dim, a), 1.0)
    _add_term(comps[a], _mono_unit(dim, b), -1.0)
    return PolyVectorField(dim, tuple(comps))


def rotation(n, x, mu, y, nu):
    """R_{x^mu, y^nu} with 1-based sites and parts in {'r','i'}."""
    return rotation_field(n, _ri(x, mu, n), _ri(y, nu, n))


def phase_field(n, x):
    """Y_x = d/d theta(x) = R_{x^r, x^i}."""
    return rotation(n, x, "r", x, "i")


def _field_sum(dim, fields, signs=None):
    comps = [dict() for _ in range(dim)]
    for idx, f in enumerate(fields):
        sgn = 1.0 if signs is None else signs[idx]
        for c, comp in enumerate(f.components):
            for mono, cf in comp.items():
                _add_term(comps[c], mono, sgn * cf)
    return PolyVectorField(dim, tuple(comps))


def hamiltonian_field(n, kappa=-1):
    """Drift field A_n for the cubic lattice (p = 3, unit mesh scaling).

    Derived from H = sum |psi(x)-psi(x-1)|^2/2 + kappa/4 sum |psi|^4:
    the linear part is sum_x R_{(x+1)^r,x^i} + R_{x^r,(x+1)^i} - 2 R_{x^r,x^i}
    and the nonlinear part -kappa |psi(x)|^2 Y_x.  The overall positive
    rescaling of the mesh does not change the generated Lie algebra.
    """
    dim = 2 * n
    comps = [dict() for _ in range(dim)]
    for x in range(1, n + 1):
        for f, sgn in ((rotation(n, x + 1, "r", x, "i"), 1.0),
                       (rotation(n, x, "r", x + 1, "i"), 1.0),
                       (rotation(n, x, "r", x, "i"), -2.0)):
            for c, comp in enumerate(f.components):
                for mono, cf in comp.items():
                    _add_term(comps[c], mono, sgn * cf)
        # -kappa (v_r^2 + v_i^2) (v_r d_i - v_i d_r) at site x
        r = _ri(x, "r", n)
        i = _ri(x, "i", n)
        for sq in (r, i):
            for lead, tgt, sgn in ((r, i, -float(kappa)), (i, r, float(kappa))):
                mono = [0] * dim
                mono[sq] += 2
                mono[lead] += 1
                _add_term(comps[tgt], tuple(mono), sgn)
    return PolyVectorField(dim, tuple(comps))


def bracket(x_field, y_field):
    """Symbolic Lie bracket [X, Y] = DY X - DX Y (exact)."""
    dim = x_field.dim
    comps = [dict() for _ in range(dim)]

    def accumulate(fsrc, gsrc, sign):
        # sign * sum_i dG_c/dv_i * F_i
        for c, gcomp in enumerate(gsrc.components):
            for gmono, gcf in gcomp.items():
                for i, e in enumerate(gmono):
                    if not e:
                        continue
                    dmono = list(gmono)
                    dmono[i] -= 1
                    fcomp = fsrc.components[i]
                    for fmono, fcf in fcomp.items():
                        mono = tuple(a + b for a, b in zip(dmono, fmono))
                        _add_term(comps[c], mono, sign * e * gcf * fcf)

    accumulate(x_field, y_field, 1.0)
    accumulate(y_field, x_field, -1.0)
    return PolyVectorField(dim, tuple(comps))


def commutator(x_field, y_field, point):
    """[X, Y] evaluated at a point via exact analytic Jacobians."""
    point = np.asarray(point, float)
    return (y_field.jacobian(point) @ x_field.evaluate(point)
            - x_field.jacobian(point) @ y_field.evaluate(point))


def tangency_defect(field, point):
    """|<field(v), v>| — zero for any field tangent to the sphere."""
    point = np.asarray(point, float)
    return abs(float(field.evaluate(point) @ point))


@lru_cache(maxsize=32)
def explicit_family(n):
    """The closed rotation family spanning the algebra in the cubic case."""
    fields = [phase_field(n, x) for x in range(1, n + 1)]
    for x in range(1, n + 1):
        for y in range(x + 1, n + 1):
            fields.append(_field_sum(2 * n, (rotation(n, x, "r", y, "i"),
                                             rotation(n, x, "i", y, "r")),
                                     (1.0, -1.0)))
            fields.append(_field_sum(2 * n, (rotation(n, x, "r", y, "r"),
                                             rotation(n, x, "i", y, "i")),
                                     (1.0, 1.0)))
    return tuple(fields)


@lru_cache(maxsize=32)
def nested_family(n, kappa=-1, depth=4, max_fields=600):
    """Basis of the Lie algebra generated by {Y_x, A_n}, built by bracketing.

    New fields are kept only when they enlarge the symbolic coefficient
    span, which is enough to span the full algebra because the bracket is
    bilinear.  Returns (fields, depth_reached) where depth_reached is the
    first bracket depth at which the span stopped growing (or `depth`).
    """
    gens = [phase_field(n, x) for x in range(1, n + 1)]
    gens.append(hamiltonian_field(n, kappa))
    index = {}
    basis_rows = []
    kept = []

    def try_keep(f):
        # rows added here are independent by construction, so the basis
        # never needs re-extraction, only zero padding as the index grows
        if f.is_zero():
            return False
        vec = f.coeff_vector(index)
        width = len(index) * f.dim
        rows = [np.pad(r, (0, width - r.size)) for r in basis_rows]
        rows.append(vec)
        mat = np.vstack(rows)
        if np.linalg.matrix_rank(mat, tol=1e-9) > len(basis_rows):
            basis_rows[:] = rows
            kept.append(f)
            return True
        return False

    for g in gens:
        try_keep(g)
    frontier = list(kept)
    depth_reached = depth
    for d in range(1, depth + 1):
        new = []
        for f in frontier:
            for g in list(kept):
                if len(kept) + len(new) >= max_fields:
                    break
                br = bracket(f, g)
                if try_keep(br):
                    new.append(br)
        if not new:
            depth_reached = d
            break
        frontier = new
    return tuple(kept), depth_reached


def _stack_rank(fields, point):
    vals = np.array([f.evaluate(point) for f in fields])
    if not vals.size:
        return 0
    sv = np.linalg.svd(vals, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > RANK_RTOL * sv[0]))


def lie_rank(psi, mode="explicit-family", kappa=-1, depth=4):
    """Tangent rank of the generated Lie algebra at the configuration psi.

    psi is a complex array (any n >= 1); full rank is 2n - 1.  Dense
    linear algebra: intended for n <= 12.
    """
    rank, _ = lie_rank_report(psi, mode=mode, kappa=kappa, depth=depth)
    return rank


def lie_rank_report(psi, mode="explicit-family", kappa=-1, depth=4):
    """(rank, info) where info carries the bracket depth actually used."""
    psi = np.asarray(psi, np.complex128)
    n = psi.size
    if n < 1:
        raise ValueError("need at least one site")
    if not np.any(np.abs(psi) > 0):
        raise ValueError("zero field is not on any mass sphere")
    point = np.ascontiguousarray(psi.view(np.float64))
    if mode == "explicit-family":
        fields = explicit_family(n)
        return _stack_rank(fields, point), {"mode": mode, "fields": len(fields)}
    if mode == "nested-brackets":
        fields, depth_reached = nested_family(n, kappa=kappa, depth=depth)
        return _stack_rank(fields, point), {
            "mode": mode, "fields": len(fields), "depth": depth_reached,
        }
    raise ValueError(f"unknown mode {mode!r}")
