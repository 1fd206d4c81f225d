"""Compiled inner loops shared by the propagator, hopping machinery and engine.

The deterministic segment step is a time-reversible symmetric composition:
each substep kicks the momenta with the non-harmonic part of the mean-surface
force and rotates every bath mode exactly under its harmonic frequency; three
substeps with Yoshida fourth-order weights make up one step of length tau.
The purely harmonic part therefore carries no integration error at all, which
is what keeps the segment energy drift orders of magnitude below the hop
filter scale.

The adiabatic phase is accumulated by midpoint quadrature along the numerical
path, one evaluation per rotation substep.

All functions are written for scaled units (M = 1, hbar = 1) and a two-level
subsystem; pair indices are 1 or 2.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

# Yoshida fourth-order composition weights
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1
YOSHIDA = (_W1, _W0, _W1)

SCHEME_PRIMITIVE = 0
SCHEME_ENERGY_CONSERVING = 1
JUMP_EXACT_RESCALE = 0
JUMP_FIRST_ORDER_SHIFT = 1

_JIT = dict(cache=True, fastmath=True)


def step_tables(w: np.ndarray, c: np.ndarray, tau: float):
    """Precomputed per-substep rotation and midpoint-quadrature coefficients.

    Returns (cw, wsw, swow, amid, bmid, yw_tau); the first five are (3, N)
    arrays, yw_tau the three substep durations.  The w -> 0 limit (free
    streaming) is taken explicitly.
    """
    n = w.shape[0]
    cw = np.empty((3, n))
    wsw = np.empty((3, n))
    swow = np.empty((3, n))
    amid = np.empty((3, n))
    bmid = np.empty((3, n))
    yw_tau = np.empty(3)
    pos = w > 0.0
    for k, yk in enumerate(YOSHIDA):
        h = yk * tau
        th = w * h
        cw[k] = np.cos(th)
        sw = np.sin(th)
        wsw[k] = w * sw
        swow[k] = np.where(pos, np.divide(sw, w, out=np.full(n, h), where=pos), h)
        th2 = 0.5 * th
        amid[k] = c * np.cos(th2)
        s2 = np.sin(th2)
        bmid[k] = np.where(
            pos, np.divide(c * s2, w, out=c * (0.5 * h), where=pos), c * (0.5 * h)
        )
        yw_tau[k] = h
    return cw, wsw, swow, amid, bmid, yw_tau


@njit(**_JIT)
def segment_step(R, P, ket, bra, theta, omega_t, c, cw, wsw, swow, amid, bmid, yw_tau):
    """One deterministic segment step; mutates R and P, returns (theta, gamma)."""
    n = R.shape[0]
    gamma = 0.0
    for j in range(n):
        gamma += c[j] * R[j]
    diagonal = ket == bra
    sgn = 1.0 if ket == 1 else -1.0
    for k in range(3):
        h = yw_tau[k]
        gmid = 0.0
        gnew = 0.0
        if diagonal:
            G = np.sqrt(omega_t * omega_t + gamma * gamma)
            kf = 0.5 * h * sgn * gamma / G
            for j in range(n):
                pj = P[j] + kf * c[j]
                rj = R[j]
                rn = cw[k, j] * rj + swow[k, j] * pj
                P[j] = -wsw[k, j] * rj + cw[k, j] * pj
                R[j] = rn
                gnew += c[j] * rn
            G2 = np.sqrt(omega_t * omega_t + gnew * gnew)
            kf2 = 0.5 * h * sgn * gnew / G2
            for j in range(n):
                P[j] += kf2 * c[j]
        else:
            for j in range(n):
                pj = P[j]
                rj = R[j]
                gmid += amid[k, j] * rj + bmid[k, j] * pj
                rn = cw[k, j] * rj + swow[k, j] * pj
                P[j] = -wsw[k, j] * rj + cw[k, j] * pj
                R[j] = rn
                gnew += c[j] * rn
            Gm = np.sqrt(omega_t * omega_t + gmid * gmid)
            freq = -2.0 * Gm if ket == 1 else 2.0 * Gm
            theta += h * freq
        gamma = gnew
    return theta, gamma


@njit(**_JIT)
def propose(on_ket, ket, bra, q, gamma, omega_t, cnorm, tau, jump_id):
    """Hop proposal on one index side at the current post-step configuration.

    q = c . P.  Returns (matrix_element, rate_x, delta_ebar, frustrated,
    pd, pd_new, residual) where pd is the momentum component along the
    coupling direction and pd_new its value after the jump.
    """
    G = np.sqrt(omega_t * omega_t + gamma * gamma)
    pdot12 = -omega_t * q / (2.0 * G * G)  # P . d_12
    if on_ket:
        cur = ket
        # m = -tau * P . d_{target,cur}
        m = -tau * (-pdot12) if cur == 1 else -tau * pdot12
    else:
        cur = bra
        # m = -tau * P . d_{cur,target}
        m = -tau * pdot12 if cur == 1 else -tau * (-pdot12)
    de = G if cur == 1 else -G  # mean-surface potential change, new minus old
    x = abs(m)
    pd = q / cnorm
    frustrated = False
    pdn = pd
    resid = 0.0
    if jump_id == JUMP_EXACT_RESCALE:
        disc = pd * pd - 2.0 * de
        if disc < 0.0:
            frustrated = True
        else:
            root = np.sqrt(disc)
            pdn = root if pd >= 0.0 else -root
            resid = 0.5 * (pdn * pdn - pd * pd) + de
    else:
        if pd == 0.0:
            if de != 0.0:
                frustrated = True
        else:
            pdn = pd - de / pd
            resid = 0.5 * (pdn * pdn - pd * pd) + de
    return m, x, de, frustrated, pd, pdn, resid


@njit(**_JIT)
def hop_weight(resid, frustrated, scheme_id, c_energy):
    if frustrated:
        return 0.0
    if scheme_id == SCHEME_ENERGY_CONSERVING and abs(resid) > c_energy:
        return 0.0
    return 1.0


@njit(**_JIT)
def run_subtraj(
    R,
    P,
    ket,
    bra,
    A,
    theta,
    omega_t,
    c,
    cnorm,
    cw,
    wsw,
    swow,
    amid,
    bmid,
    yw_tau,
    tau,
    n_steps,
    stride,
    scheme_id,
    c_energy,
    jump_id,
    weight_cap,
    u,
    est_out,
    absw_out,
    istats,
    fstats,
    record_state,
    rec_R,
    rec_P,
    rec_ket,
    rec_bra,
    rec_A,
    rec_theta,
    hop_step,
    hop_side,
    hop_target,
    hop_resid,
):
    """Propagate one stochastic sub-trajectory; mutates R, P and output arrays.

    u is the (n_steps, 2) uniform-variate table (ket test, bra test).
    istats accumulates [accepted, frustrated, filtered, accepted_over_c,
    attempts]; fstats accumulates [max accepted |residual|, max |A|].
    Returns (ket, bra, A, theta, flagged).
    """
    n = R.shape[0]
    gamma = 0.0
    for j in range(n):
        gamma += c[j] * R[j]
    maxa = abs(A)
    n_hops = 0
    rec = 0

    for step in range(-1, n_steps):
        if step >= 0:
            theta, gamma = segment_step(
                R, P, ket, bra, theta, omega_t, c, cw, wsw, swow, amid, bmid, yw_tau
            )
            q = 0.0
            for j in range(n):
                q += c[j] * P[j]
            hopped = False
            for side in range(2):
                if hopped or cnorm == 0.0:
                    break
                on_ket = side == 0
                uval = u[step, side]
                m, x, de, frustrated, pd, pdn, resid = propose(
                    on_ket, ket, bra, q, gamma, omega_t, cnorm, tau, jump_id
                )
                if x == 0.0 and not frustrated:
                    continue
                istats[4] += 1
                wgt = hop_weight(resid, frustrated, scheme_id, c_energy)
                if frustrated:
                    istats[1] += 1
                elif wgt == 0.0:
                    istats[2] += 1
                xw = x * wgt
                p = xw / (1.0 + xw)
                if uval < p:
                    # accepted hop: momentum jump, index change, reweight
                    shift = pdn - pd
                    for j in range(n):
                        P[j] += (c[j] / cnorm) * shift
                    if on_ket:
                        ket = 3 - ket
                    else:
                        bra = 3 - bra
                    A *= m / p
                    hopped = True
                    istats[0] += 1
                    ar = abs(resid)
                    if ar > fstats[0]:
                        fstats[0] = ar
                    if scheme_id == SCHEME_ENERGY_CONSERVING and ar > c_energy:
                        istats[3] += 1
                    if record_state and n_hops < hop_step.shape[0]:
                        hop_step[n_hops] = step
                        hop_side[n_hops] = side
                        hop_target[n_hops] = ket if on_ket else bra
                        hop_resid[n_hops] = resid
                    n_hops += 1
                else:
                    A *= 1.0 / (1.0 - p)
            aa = abs(A)
            if aa > maxa:
                maxa = aa

        if step == -1 or (step + 1) % stride == 0:
            G = np.sqrt(omega_t * omega_t + gamma * gamma)
            if ket == bra:
                elem = gamma / G if ket == 1 else -gamma / G
            else:
                elem = omega_t / G
            est_out[rec] = A * np.cos(theta) * elem
            absw_out[rec] = abs(A)
            if record_state:
                for j in range(n):
                    rec_R[rec, j] = R[j]
                    rec_P[rec, j] = P[j]
                rec_ket[rec] = ket
                rec_bra[rec] = bra
                rec_A[rec] = A
                rec_theta[rec] = theta
            rec += 1

    if maxa > fstats[1]:
        fstats[1] = maxa
    flagged = (not np.isfinite(A)) or maxa > weight_cap
    return ket, bra, A, theta, n_hops, flagged


@njit(parallel=True, **_JIT)
def run_batch(
    R0,
    P0,
    ket0,
    bra0,
    A0,
    omega_t,
    c,
    cnorm,
    cw,
    wsw,
    swow,
    amid,
    bmid,
    yw_tau,
    tau,
    n_steps,
    stride,
    scheme_id,
    c_energy,
    jump_id,
    weight_cap,
    u,
    est_out,
    absw_out,
    istats,
    fstats,
    flagged,
    record_state,
    rec_R,
    rec_P,
    rec_ket,
    rec_bra,
    rec_A,
    rec_theta,
    hop_step,
    hop_side,
    hop_target,
    hop_resid,
    n_hops_out,
):
    """Propagate a batch of sub-trajectories; one independent slot per row.

    The recorded-state and hop-log arrays carry a leading batch axis; pass
    zero-width arrays with record_state False to skip recording.  This is
    the single execution path for both the ensemble runner and the recording
    runner, so their numbers agree bit for bit.
    """
    nb = R0.shape[0]
    for b in prange(nb):
        _, _, _, _, n_hops, fl = run_subtraj(
            R0[b],
            P0[b],
            ket0[b],
            bra0[b],
            A0[b],
            0.0,
            omega_t,
            c,
            cnorm,
            cw,
            wsw,
            swow,
            amid,
            bmid,
            yw_tau,
            tau,
            n_steps,
            stride,
            scheme_id,
            c_energy,
            jump_id,
            weight_cap,
            u[b],
            est_out[b],
            absw_out[b],
            istats[b],
            fstats[b],
            record_state,
            rec_R[b],
            rec_P[b],
            rec_ket[b],
            rec_bra[b],
            rec_A[b],
            rec_theta[b],
            hop_step[b],
            hop_side[b],
            hop_target[b],
            hop_resid[b],
        )
        flagged[b] = fl
        n_hops_out[b] = n_hops
