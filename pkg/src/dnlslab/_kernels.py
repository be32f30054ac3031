"""Numba hot loops for the Metropolis chain and the splitting integrator.

Randomness is pregenerated in blocks by the callers (Philox streams), so
kernels are pure deterministic functions of their inputs.  Fields are
complex128 arrays; the Metropolis kernel works on the interleaved real
view (v[2x], v[2x+1]) = (Re psi(x+1), Im psi(x+1)).
"""

import numba
import numpy as np

__all__ = ["mcmc_block", "sde_block"]


@numba.njit(cache=True)
def _local_energy(v, n, p, kappa, edges, nedge, sites, nsite):
    """Energy terms touching the given edge left-endpoints and sites."""
    acc = 0.0
    for e in range(nedge):
        x = edges[e]
        xp = x + 1 if x + 1 < n else 0
        dr = v[2 * xp] - v[2 * x]
        di = v[2 * xp + 1] - v[2 * x + 1]
        acc += 0.5 * n * (dr * dr + di * di)
    for si in range(nsite):
        x = sites[si]
        rho2 = v[2 * x] * v[2 * x] + v[2 * x + 1] * v[2 * x + 1]
        acc += kappa / (p + 1.0) / n * rho2 ** ((p + 1.0) * 0.5)
    return acc


@numba.njit(cache=True)
def mcmc_block(v, n, beta, p, kappa, pair_w, delta, u_type, idx1, idx2off,
               ang_raw, logu, step0, renorm_every, target_sq, thin,
               samples_out, nsamp0, acc_counts, prop_counts):
    """Run len(u_type) Metropolis proposals in place.

    Proposal (i): Givens rotation of a random pair of the 2n real
    coordinates; (ii): single-site phase rotation.  Both preserve the
    sphere exactly; acceptance is min(1, exp(-beta dH)).  Thinned states
    are copied into samples_out rows starting at nsamp0.  Returns the
    number of samples written.
    """
    nsteps = u_type.shape[0]
    nsamp = nsamp0
    edges = np.empty(4, np.int64)
    sites = np.empty(2, np.int64)
    for s in range(nsteps):
        th = ang_raw[s] * delta
        c = np.cos(th)
        sn = np.sin(th)
        if u_type[s] < pair_w:
            # pair Givens rotation
            a = idx1[s]
            b = (a + idx2off[s]) % (2 * n)
            xa = a // 2
            xb = b // 2
            sites[0] = xa
            nsite = 1
            if xb != xa:
                sites[1] = xb
                nsite = 2
            nedge = 0
            for si in range(nsite):
                x = sites[si]
                xm = x - 1 if x >= 1 else n - 1
                dup = False
                for e in range(nedge):
                    if edges[e] == xm:
                        dup = True
                if not dup:
                    edges[nedge] = xm
                    nedge += 1
                dup = False
                for e in range(nedge):
                    if edges[e] == x:
                        dup = True
                if not dup:
                    edges[nedge] = x
                    nedge += 1
            e_old = _local_energy(v, n, p, kappa, edges, nedge, sites, nsite)
            va = v[a]
            vb = v[b]
            v[a] = c * va - sn * vb
            v[b] = sn * va + c * vb
            e_new = _local_energy(v, n, p, kappa, edges, nedge, sites, nsite)
            prop_counts[0] += 1
            if -beta * (e_new - e_old) >= logu[s]:
                acc_counts[0] += 1
            else:
                v[a] = va
                v[b] = vb
        else:
            # single-site phase rotation: potential is phase-invariant
            x = idx1[s] // 2
            xm = x - 1 if x >= 1 else n - 1
            edges[0] = xm
            edges[1] = x
            sites[0] = x
            e_old = _local_energy(v, n, p, kappa, edges, 2, sites, 0)
            vr = v[2 * x]
            vi = v[2 * x + 1]
            v[2 * x] = c * vr - sn * vi
            v[2 * x + 1] = sn * vr + c * vi
            e_new = _local_energy(v, n, p, kappa, edges, 2, sites, 0)
            prop_counts[1] += 1
            if -beta * (e_new - e_old) >= logu[s]:
                acc_counts[1] += 1
            else:
                v[2 * x] = vr
                v[2 * x + 1] = vi
        gstep = step0 + s + 1
        if gstep % renorm_every == 0:
            ss = 0.0
            for i in range(2 * n):
                ss += v[i] * v[i]
            sc = np.sqrt(target_sq / ss)
            for i in range(2 * n):
                v[i] *= sc
        if thin > 0 and gstep % thin == 0 and nsamp < samples_out.shape[0]:
            for i in range(2 * n):
                samples_out[nsamp, i] = v[i]
            nsamp += 1
    return nsamp


@numba.njit(cache=True)
def _hamiltonian_terms(psi, n, p, kappa):
    g = 0.0
    pot = 0.0
    for x in range(n):
        xm = x - 1 if x >= 1 else n - 1
        dr = psi[x].real - psi[xm].real
        di = psi[x].imag - psi[xm].imag
        g += dr * dr + di * di
        rho2 = psi[x].real ** 2 + psi[x].imag ** 2
        pot += rho2 ** ((p + 1.0) * 0.5)
    g *= 0.5 * n
    pot /= (p + 1.0) * n
    return g, pot


@numba.njit(cache=True)
def _phase_rotate(psi, out, theta_arr, n):
    for x in range(n):
        c = np.cos(theta_arr[x])
        s = np.sin(theta_arr[x])
        out[x] = complex(psi[x].real * c - psi[x].imag * s,
                         psi[x].real * s + psi[x].imag * c)


@numba.njit(cache=True)
def _theta_grad(psi, out, n):
    n2 = float(n) * float(n)
    for x in range(n):
        xp = x + 1 if x + 1 < n else 0
        xm = x - 1 if x >= 1 else n - 1
        lr = n2 * (psi[xp].real - 2.0 * psi[x].real + psi[xm].real)
        li = n2 * (psi[xp].imag - 2.0 * psi[x].imag + psi[xm].imag)
        out[x] = (psi[x].imag * lr - psi[x].real * li) / n


@numba.njit(cache=True)
def _matvec(U, x, out, n):
    for i in range(n):
        acc = 0.0 + 0.0j
        for j in range(n):
            acc += U[i, j] * x[j]
        out[i] = acc


@numba.njit(cache=True)
def _drift_rotation(psi, gamma, span, scheme, phase_cap, adjoint, tmp, gv, th):
    """Dissipative phase rotation over `span`, angle capped via substeps.

    The gradient is frozen at each (sub)rotation's start; scheme 2
    re-evaluates it at the half-rotated midpoint state instead.  With
    adjoint=True (and no capping engaged) the rotation angle is fixed by
    Picard iteration at the endpoint state, giving the implicit partner of
    the explicit rotation so the surrounding cycle is palindromic.
    """
    n = psi.shape[0]
    _theta_grad(psi, gv, n)
    gmax = 0.0
    for x in range(n):
        ag = abs(gv[x])
        if ag > gmax:
            gmax = ag
    nsub = int(gamma * abs(span) * gmax / phase_cap) + 1
    if adjoint and nsub == 1 and scheme != 2:
        for _ in range(3):
            for x in range(n):
                th[x] = -gamma * span * gv[x]
            _phase_rotate(psi, tmp, th, n)
            _theta_grad(tmp, gv, n)
        for x in range(n):
            th[x] = -gamma * span * gv[x]
        _phase_rotate(psi, tmp, th, n)
        for x in range(n):
            psi[x] = tmp[x]
        return
    dsub = span / nsub
    for sub in range(nsub):
        if sub > 0:
            _theta_grad(psi, gv, n)
        if scheme == 2:  # midpoint drift: half-rotate, re-evaluate
            for x in range(n):
                th[x] = -0.5 * gamma * dsub * gv[x]
            _phase_rotate(psi, tmp, th, n)
            _theta_grad(tmp, gv, n)
        for x in range(n):
            th[x] = -gamma * dsub * gv[x]
        _phase_rotate(psi, tmp, th, n)
        for x in range(n):
            psi[x] = tmp[x]


@numba.njit(cache=True)
def _cycle(psi, uh, uf, dts, gamma, noise_amp, kappa, p, xis_row, scheme,
           phase_cap, tmp, gv, th):
    """One splitting cycle of length dts (noise applied iff noise_amp>0)."""
    n = psi.shape[0]
    half_nl = 0.5 * dts if scheme != 1 else dts
    if scheme != 1:  # Strang: leading linear half-step
        _matvec(uh, psi, tmp, n)
    else:  # Lie: full linear step
        _matvec(uf, psi, tmp, n)
    for x in range(n):
        a2 = tmp[x].real ** 2 + tmp[x].imag ** 2
        th[x] = -kappa * half_nl * a2 ** ((p - 1.0) * 0.5)
    _phase_rotate(tmp, psi, th, n)
    # dissipative + noise flow: the Ito drift of the noisy phase factor is
    # absorbed exactly (pure phase), and the drift rotation is split
    # symetrically around the noise kick, which removes the O(dt)
    # stationary bias of the frozen-gradient arrangement; the Lie scheme
    # keeps the plain frozen-at-start order as the first-order reference
    if gamma > 0.0:
        if noise_amp > 0.0:
            if scheme != 1:
                _drift_rotation(psi, gamma, 0.5 * dts, scheme, phase_cap,
                                False, tmp, gv, th)
            for x in range(n):
                th[x] = -noise_amp * xis_row[x]
            _phase_rotate(psi, tmp, th, n)
            for x in range(n):
                psi[x] = tmp[x]
            span = 0.5 * dts if scheme != 1 else dts
            _drift_rotation(psi, gamma, span, scheme, phase_cap,
                            scheme != 1, tmp, gv, th)
        else:
            _drift_rotation(psi, gamma, dts, scheme, phase_cap, False,
                            tmp, gv, th)
    if scheme != 1:  # Strang: trailing nonlinear + linear half-steps
        for x in range(n):
            a2 = psi[x].real ** 2 + psi[x].imag ** 2
            th[x] = -kappa * half_nl * a2 ** ((p - 1.0) * 0.5)
        _phase_rotate(psi, tmp, th, n)
        _matvec(uh, tmp, psi, n)


@numba.njit(cache=True)
def _step_level(psi, gamma, dt, kappa, p, phase_cap, lmax, gv):
    """Dyadic refinement level so per-site phase increments stay capped.

    Only meaningful for the deterministic flows (the caller restricts
    adaptivity to noise_amp == 0).
    """
    n = psi.shape[0]
    rmax = 0.0
    for x in range(n):
        a2 = psi[x].real ** 2 + psi[x].imag ** 2
        ph = abs(dt) * a2 ** ((p - 1.0) * 0.5)
        if ph > rmax:
            rmax = ph
    if gamma > 0.0:
        _theta_grad(psi, gv, n)
        for x in range(n):
            ph = gamma * abs(dt) * abs(gv[x])
            if ph > rmax:
                rmax = ph
    level = 0
    while rmax > phase_cap and level < lmax:
        rmax *= 0.5
        level += 1
    return level


@numba.njit(cache=True)
def _monotone_step(psi, uh_stack, uf_stack, dt, gamma, kappa, p, scheme,
                   phase_cap, mono_tol, tmp, gv, th, save):
    """One zero-noise step, refined until the energy increase is within
    mono_tol.  The exact dissipative flow is monotone, so refinement
    converges; the phase-cap predictor seeds the level to avoid redo churn."""
    n = psi.shape[0]
    lmax = uh_stack.shape[0] - 1
    g0, v0 = _hamiltonian_terms(psi, n, p, kappa)
    h0 = g0 + kappa * v0
    for x in range(n):
        save[x] = psi[x]
    level = _step_level(psi, gamma, dt, kappa, p, phase_cap, lmax, gv)
    while True:
        ncyc = 1 << level
        dts = dt / ncyc
        for _ in range(ncyc):
            _cycle(psi, uh_stack[level], uf_stack[level], dts, gamma, 0.0,
                   kappa, p, gv, scheme, phase_cap, tmp, gv, th)
        g1, v1 = _hamiltonian_terms(psi, n, p, kappa)
        h1 = g1 + kappa * v1
        if h1 - h0 <= mono_tol or level >= lmax:
            return
        level += 1
        for x in range(n):
            psi[x] = save[x]


@numba.njit(cache=True)
def sde_block(psi, uh_stack, uf_stack, dt, gamma, beta_inv, noise_amp,
              kappa, p, xis, step0, scheme, renorm_every, target_sq,
              phase_cap, mono_tol, rec_every, rec_out, rec_idx0, track_dh):
    """Advance len(xis) splitting steps in place.

    scheme: 0 = Strang A(dt/2) B(dt/2) C(dt) B(dt/2) A(dt/2),
            1 = Lie A(dt) B(dt) C(dt),
            2 = Strang with the dissipative angle recomputed at substep
                midpoints (midpoint drift variant).
    uh_stack[L] / uf_stack[L] are the linear unitaries for dt / 2^L: the
    zero-temperature dissipative flow (gamma > 0, no noise) verifies the
    per-step energy change and redoes the step with 2^L refined cycles
    until the increase is within mono_tol, keeping rough transients stable
    and H monotone; mass is exact at every level since every flow is
    unitary or a per-site rotation.
    Records (H, G, V, |dH/dtheta|) every rec_every steps; returns
    (next record index, max positive per-step H increment seen).
    """
    n = psi.shape[0]
    nsteps = xis.shape[0]
    tmp = np.empty(n, np.complex128)
    gv = np.empty(n, np.float64)
    th = np.empty(n, np.float64)
    save = np.empty(n, np.complex128)
    rec_idx = rec_idx0
    max_inc = -1.0e300
    h_prev = 0.0
    if track_dh:
        g0, v0 = _hamiltonian_terms(psi, n, p, kappa)
        h_prev = g0 + kappa * v0
    verified = noise_amp == 0.0 and gamma > 0.0 and mono_tol > 0.0
    for s in range(nsteps):
        if verified:
            _monotone_step(psi, uh_stack, uf_stack, dt, gamma, kappa, p,
                           scheme, phase_cap, mono_tol, tmp, gv, th, save)
        else:
            _cycle(psi, uh_stack[0], uf_stack[0], dt, gamma, noise_amp,
                   kappa, p, xis[s], scheme, phase_cap, tmp, gv, th)
        gstep = step0 + s + 1
        if renorm_every > 0 and gstep % renorm_every == 0:
            ss = 0.0
            for x in range(n):
                ss += psi[x].real ** 2 + psi[x].imag ** 2
            sc = np.sqrt(target_sq / ss)
            for x in range(n):
                psi[x] *= sc
        if track_dh:
            g1, v1 = _hamiltonian_terms(psi, n, p, kappa)
            h1 = g1 + kappa * v1
            inc = h1 - h_prev
            if inc > max_inc:
                max_inc = inc
            h_prev = h1
        if rec_every > 0 and gstep % rec_every == 0 and rec_idx < rec_out.shape[0]:
            g1, v1 = _hamiltonian_terms(psi, n, p, kappa)
            _theta_grad(psi, gv, n)
            gn = 0.0
            for x in range(n):
                gn += gv[x] * gv[x]
            rec_out[rec_idx, 0] = g1 + kappa * v1
            rec_out[rec_idx, 1] = g1
            rec_out[rec_idx, 2] = v1
            rec_out[rec_idx, 3] = np.sqrt(gn)
            rec_idx += 1
    return rec_idx, max_inc
