"""Pure-numpy Monte Carlo kernels.

Reference implementation of the step recipes in schemes.py; the compiled
kernels in _kernels.pyx mirror the per-element operation order exactly.
Paths are processed in memory-bounded chunks; results do not depend on the
chunking (see the stream contract in rng.py).
"""
from __future__ import annotations

import numpy as np

from . import rng

_BYTES_BUDGET = 192_000_000


def _chunk_size(n_steps: int) -> int:
    per_path = 80 * n_steps * rng.N_COMP // 4  # raw + u + z, rough
    return max(256, int(_BYTES_BUDGET // max(per_path, 1)))


def _draws(seed, p_lo, p_hi, n_steps, antithetic):
    """Uniforms and normals for output paths [p_lo, p_hi)."""
    if not antithetic:
        u = rng.to_uniform(rng.raw_words(seed, p_lo, p_hi, n_steps))
    else:
        s_lo, s_hi = p_lo >> 1, ((p_hi - 1) >> 1) + 1
        base = rng.to_uniform(rng.raw_words(seed, s_lo, s_hi, n_steps))
        u = np.repeat(base, 2, axis=0)[p_lo - 2 * s_lo: p_lo - 2 * s_lo + (p_hi - p_lo)]
        u = u.copy()
        odd = (np.arange(p_lo, p_hi) & 1).astype(bool)
        u[odd] = 1.0 - u[odd]
    z = rng.norm_ppf(u)
    return u, z


def rho_step(r, u, z, al0, al1, b0, b1, b2):
    """Bounded moment-matched correlation step; returns (new r, overshoots).

    Conditional variances below rounding dust (1e-14 scale) are treated as
    exactly deterministic so that zero-noise parameter sets produce
    bit-identical paths."""
    m = al0 + al1 * r
    s2 = np.maximum(b0 + b1 * r + b2 * (r * r) - m * m, 0.0)
    s2 = np.where(s2 <= 1e-14 * (1.0 + m * m), 0.0, s2)
    s = np.sqrt(s2)
    gap_p = 1.0 - m
    gap_m = 1.0 + m
    side = np.where(gap_p <= gap_m, 1.0, -1.0)
    gap = np.minimum(gap_p, gap_m)
    with np.errstate(all="ignore"):
        psi = s2 / (gap * gap)
        ip = 2.0 / psi
        bq2 = ip - 1.0 + np.sqrt(ip) * np.sqrt(ip - 1.0)
        aq = gap / (1.0 + bq2)
        sb = np.sqrt(bq2)
        quad = side * (1.0 - aq * ((sb + z) * (sb + z)))
        pp = (psi - 1.0) / (psi + 1.0)
        be = 2.0 / (gap * (psi + 1.0))
        ue = np.where(u <= pp, 0.0, np.log((1.0 - pp) / (1.0 - u)) / be)
        expo = side * (1.0 - ue)
        cand = np.where(gap > 5.5 * s, m + s * z,
                        np.where(psi <= 2.0, quad, expo))
    cand = np.where(s2 > 0.0, cand, m)
    over = int(np.count_nonzero(np.abs(cand) > 1.0))
    return np.clip(cand, -1.0 + 1e-12, 1.0 - 1e-12), over


def qe_step(v, u, z, f, mb, a2, b2):
    """Quadratic-exponential step of a square-root variance process."""
    m = v * f + mb
    s2 = v * a2 + b2
    with np.errstate(all="ignore"):
        psi = s2 / (m * m)
        ip = 2.0 / psi
        bq2 = ip - 1.0 + np.sqrt(ip) * np.sqrt(ip - 1.0)
        aq = m / (1.0 + bq2)
        sb = np.sqrt(bq2)
        quad = aq * ((sb + z) * (sb + z))
        pp = (psi - 1.0) / (psi + 1.0)
        be = (1.0 - pp) / m
        expo = np.where(u <= pp, 0.0, np.log((1.0 - pp) / (1.0 - u)) / be)
        out = np.where(psi <= 1.5, quad, expo)
    return np.where(s2 > 0.0, out, m)


def run_moments(pvec, seed, n_paths, n_steps, antithetic):
    """Linear-factor law; returns per-path (v1p, v2p, rp) and overshoot count."""
    dt = pvec[0]
    al0, al1, rb0, rb1, rb2 = pvec[1:6]
    f1, vl1, f2, vl2 = pvec[6:10]
    e1, e2, s1, s2f, r12, r12c = pvec[10:16]
    qa1, qb1, qa2, qb2, qc, qd = pvec[16:22]
    v01, v02, rho0, sg01, sg02 = pvec[22:27]
    hdt = 0.5 * dt
    v1p = np.empty(n_paths)
    v2p = np.empty(n_paths)
    rp = np.empty(n_paths)
    overs = 0
    chunk = _chunk_size(n_steps)
    if antithetic:
        chunk += chunk & 1
    for lo in range(0, n_paths, chunk):
        hi = min(lo + chunk, n_paths)
        u, z = _draws(seed, lo, hi, n_steps, antithetic)
        n = hi - lo
        sg1 = np.full(n, sg01)
        sg2 = np.full(n, sg02)
        v1 = np.full(n, v01)
        v2 = np.full(n, v02)
        r = np.full(n, rho0)
        a1p = np.zeros(n)
        a2p = np.zeros(n)
        arp = np.zeros(n)
        for k in range(n_steps):
            a1p += hdt * v1
            a2p += hdt * v2
            arp += hdt * r
            v11 = qa1 * (sg1 * sg1) + qb1
            v22 = qa2 * (sg2 * sg2) + qb2
            v12 = qc * (sg1 * sg2) + qd
            lim = 0.999 * np.sqrt(v11 * v22)
            v12 = np.clip(v12, -lim, lim)
            l11 = np.sqrt(v11)
            with np.errstate(all="ignore"):
                l21 = np.where(v11 > 0.0, v12 / l11, 0.0)
            l22 = np.sqrt(np.maximum(v22 - l21 * l21, 0.0))
            v1 = vl1 + (v1 - vl1) * f1 + l11 * z[:, k, 3]
            v2 = vl2 + (v2 - vl2) * f2 + l21 * z[:, k, 3] + l22 * z[:, k, 4]
            sg1, sg2 = (sg1 * e1 + s1 * z[:, k, 1],
                        sg2 * e2 + s2f * (r12 * z[:, k, 1] + r12c * z[:, k, 2]))
            r, ov = rho_step(r, u[:, k, 0], z[:, k, 0], al0, al1, rb0, rb1, rb2)
            overs += ov
            a1p += hdt * v1
            a2p += hdt * v2
            arp += hdt * r
        v1p[lo:hi] = a1p
        v2p[lo:hi] = a2p
        rp[lo:hi] = arp
    return v1p, v2p, rp, overs


def run_price(pvec, vol_mode, seed, n_paths, n_steps, antithetic, store=False):
    """Price-law kernel: returns per-path terminal log prices, integrated
    triple and overshoot count; with store=True also the full trajectories."""
    dt = pvec[0]
    sqdt = pvec[1]
    rate = pvec[2]
    al0, al1, rb0, rb1, rb2 = pvec[3:8]
    f1, mb1, a21, b21 = pvec[8:12]
    f2, mb2, a22, b22 = pvec[12:16]
    rv, rvc = pvec[16:18]
    eo1, so1, eo2, so2, ro12, ro12c = pvec[18:24]
    v01, v02, rho0, sg01, sg02 = pvec[24:29]
    hdt = 0.5 * dt
    ls1 = np.empty(n_paths)
    ls2 = np.empty(n_paths)
    v1p = np.empty(n_paths)
    v2p = np.empty(n_paths)
    rp = np.empty(n_paths)
    overs = 0
    traj = None
    if store:
        traj = {name: np.empty((n_paths, n_steps + 1)) for name in
                ("ls1", "ls2", "v1", "v2", "rho", "v1p", "v2p", "rhop")}
    chunk = _chunk_size(n_steps)
    if antithetic:
        chunk += chunk & 1
    for lo in range(0, n_paths, chunk):
        hi = min(lo + chunk, n_paths)
        u, z = _draws(seed, lo, hi, n_steps, antithetic)
        n = hi - lo
        v1 = np.full(n, v01)
        v2 = np.full(n, v02)
        sg1 = np.full(n, sg01)
        sg2 = np.full(n, sg02)
        r = np.full(n, rho0)
        l1 = np.zeros(n)
        l2 = np.zeros(n)
        a1p = np.zeros(n)
        a2p = np.zeros(n)
        arp = np.zeros(n)

        def snap(k):
            for name, arr in (("ls1", l1), ("ls2", l2), ("v1", v1), ("v2", v2),
                              ("rho", r), ("v1p", a1p), ("v2p", a2p), ("rhop", arp)):
                traj[name][lo:hi, k] = arr

        if store:
            snap(0)
        for k in range(n_steps):
            sq1 = np.sqrt(v1)
            sq2 = np.sqrt(v2)
            rc = np.sqrt(1.0 - r * r)
            l1 = l1 + (rate - 0.5 * v1) * dt + sq1 * sqdt * z[:, k, 3]
            l2 = l2 + (rate - 0.5 * v2) * dt + sq2 * sqdt * (r * z[:, k, 3] + rc * z[:, k, 4])
            a1p += hdt * v1
            a2p += hdt * v2
            arp += hdt * r
            if vol_mode == 1:
                sg1, sg2 = (sg1 * eo1 + so1 * z[:, k, 1],
                            sg2 * eo2 + so2 * (ro12 * z[:, k, 1] + ro12c * z[:, k, 2]))
                v1 = sg1 * sg1
                v2 = sg2 * sg2
            else:
                z2c = rv * z[:, k, 1] + rvc * z[:, k, 2]
                v1 = qe_step(v1, u[:, k, 1], z[:, k, 1], f1, mb1, a21, b21)
                v2 = qe_step(v2, u[:, k, 2], z2c, f2, mb2, a22, b22)
            r, ov = rho_step(r, u[:, k, 0], z[:, k, 0], al0, al1, rb0, rb1, rb2)
            overs += ov
            a1p += hdt * v1
            a2p += hdt * v2
            arp += hdt * r
            if store:
                snap(k + 1)
        ls1[lo:hi] = l1
        ls2[lo:hi] = l2
        v1p[lo:hi] = a1p
        v2p[lo:hi] = a2p
        rp[lo:hi] = arp
    return ls1, ls2, v1p, v2p, rp, overs, traj


def run_price_full_euler(pvec, seed, n_paths, n_steps, antithetic):
    """Literal Euler scheme (truncated variance drift/diffusion, Euler
    correlation with hard clamping).  Kept for scheme-bias comparisons; the
    clamp counter here counts every clamped correlation step."""
    dt = pvec[0]
    sqdt = pvec[1]
    rate = pvec[2]
    # recover SDE coefficients from the packed QE constants
    f1, mb1 = pvec[8], pvec[9]
    f2, mb2 = pvec[12], pvec[13]
    vl1 = mb1 / (1.0 - f1)
    vl2 = mb2 / (1.0 - f2)
    c1 = -np.log(f1) / dt
    c2 = -np.log(f2) / dt
    xi1 = np.sqrt(pvec[10] * c1 / (f1 * (1.0 - f1)))
    xi2 = np.sqrt(pvec[14] * c2 / (f2 * (1.0 - f2)))
    rv, rvc = pvec[16:18]
    v01, v02, rho0 = pvec[24:27]
    al1 = pvec[4]
    g = -np.log(al1) / dt
    gl = pvec[3] / (1.0 - al1)
    lam_b2 = pvec[7]
    ab2 = max(-np.log(lam_b2) / dt - 2.0 * g, 0.0)
    ab = np.sqrt(ab2)
    ls1 = np.empty(n_paths)
    ls2 = np.empty(n_paths)
    v1p = np.empty(n_paths)
    v2p = np.empty(n_paths)
    rp = np.empty(n_paths)
    clamps = 0
    hdt = 0.5 * dt
    chunk = _chunk_size(n_steps)
    for lo in range(0, n_paths, chunk):
        hi = min(lo + chunk, n_paths)
        _, z = _draws(seed, lo, hi, n_steps, antithetic)
        n = hi - lo
        v1 = np.full(n, v01)
        v2 = np.full(n, v02)
        r = np.full(n, rho0)
        l1 = np.zeros(n)
        l2 = np.zeros(n)
        a1p = np.zeros(n)
        a2p = np.zeros(n)
        arp = np.zeros(n)
        for k in range(n_steps):
            v1c = np.maximum(v1, 0.0)
            v2c = np.maximum(v2, 0.0)
            rc = np.sqrt(1.0 - r * r)
            l1 = l1 + (rate - 0.5 * v1c) * dt + np.sqrt(v1c) * sqdt * z[:, k, 3]
            l2 = l2 + (rate - 0.5 * v2c) * dt + np.sqrt(v2c) * sqdt * (r * z[:, k, 3] + rc * z[:, k, 4])
            a1p += hdt * v1c
            a2p += hdt * v2c
            arp += hdt * r
            v1 = v1 + c1 * (vl1 - v1c) * dt + xi1 * np.sqrt(v1c) * sqdt * z[:, k, 1]
            v2 = v2 + c2 * (vl2 - v2c) * dt + xi2 * np.sqrt(v2c) * sqdt * (rv * z[:, k, 1] + rvc * z[:, k, 2])
            cand = r + g * (gl - r) * dt + ab * np.sqrt(np.maximum(1.0 - r * r, 0.0)) * sqdt * z[:, k, 0]
            clamps += int(np.count_nonzero(np.abs(cand) > 1.0 - 1e-12))
            r = np.clip(cand, -1.0 + 1e-12, 1.0 - 1e-12)
            a1p += hdt * np.maximum(v1, 0.0)
            a2p += hdt * np.maximum(v2, 0.0)
            arp += hdt * r
        ls1[lo:hi] = l1
        ls2[lo:hi] = l2
        v1p[lo:hi] = a1p
        v2p[lo:hi] = a2p
        rp[lo:hi] = arp
    return ls1, ls2, v1p, v2p, rp, clamps, None
