# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Monte Carlo kernels.

Mirrors kernels_numpy.py operation for operation (see schemes.py for the
step recipes and rng.py for the stream contract).  Each path owns a
counter-based random stream and all per-path state lives on the worker's
stack, so the path loop parallelizes without any effect on results.
"""
from cython.parallel import prange

cdef extern from *:
    """
    #include <stdint.h>
    #include <math.h>

    typedef struct {
        uint64_t c0, c1, c2, c3, k0, k1;
        uint64_t buf[4];
        int pos;
    } philox_t;

    static void philox_init(philox_t *st, uint64_t key, uint64_t ctr0) {
        st->c0 = ctr0; st->c1 = 0; st->c2 = 0; st->c3 = 0;
        st->k0 = key; st->k1 = 0;
        st->pos = 4;
    }

    static uint64_t philox_mulhi(uint64_t a, uint64_t b) {
    #if defined(__SIZEOF_INT128__)
        return (uint64_t)(((__uint128_t)a * b) >> 64);
    #else
        uint64_t ahi = a >> 32, alo = a & 0xFFFFFFFFULL;
        uint64_t bhi = b >> 32, blo = b & 0xFFFFFFFFULL;
        uint64_t t = alo * blo;
        uint64_t w1 = ahi * blo + (t >> 32);
        uint64_t w2 = alo * bhi + (w1 & 0xFFFFFFFFULL);
        return ahi * bhi + (w1 >> 32) + (w2 >> 32);
    #endif
    }

    static void philox_block(philox_t *st) {
        uint64_t x0, x1, x2, x3, k0, k1, hi0, lo0, hi1, lo1, y0, y1, y2, y3;
        int i;
        if (++st->c0 == 0) { if (++st->c1 == 0) { if (++st->c2 == 0) { ++st->c3; } } }
        x0 = st->c0; x1 = st->c1; x2 = st->c2; x3 = st->c3;
        k0 = st->k0; k1 = st->k1;
        for (i = 0; i < 10; i++) {
            hi0 = philox_mulhi(0xD2E7470EE14C6C93ULL, x0);
            lo0 = 0xD2E7470EE14C6C93ULL * x0;
            hi1 = philox_mulhi(0xCA5A826395121157ULL, x2);
            lo1 = 0xCA5A826395121157ULL * x2;
            y0 = hi1 ^ x1 ^ k0;
            y1 = lo1;
            y2 = hi0 ^ x3 ^ k1;
            y3 = lo0;
            x0 = y0; x1 = y1; x2 = y2; x3 = y3;
            k0 += 0x9E3779B97F4A7C15ULL;
            k1 += 0xBB67AE8584CAA73BULL;
        }
        st->buf[0] = x0; st->buf[1] = x1; st->buf[2] = x2; st->buf[3] = x3;
        st->pos = 0;
    }

    static uint64_t philox_next(philox_t *st) {
        if (st->pos >= 4) philox_block(st);
        return st->buf[st->pos++];
    }

    static double philox_uniform(philox_t *st) {
        return ((double)(philox_next(st) >> 12) + 0.5) * 2.220446049250313e-16;
    }

    /* inverse normal CDF, same constants and branch structure as rng.norm_ppf */
    static double ppnd16(double u) {
        double q = u - 0.5;
        double r, num, den, val;
        if (fabs(q) <= 0.425) {
            r = 0.180625 - q * q;
            num = 2.5090809287301226727e3;
            num = num * r + 3.3430575583588128105e4;
            num = num * r + 6.7265770927008700853e4;
            num = num * r + 4.5921953931549871457e4;
            num = num * r + 1.3731693765509461125e4;
            num = num * r + 1.9715909503065514427e3;
            num = num * r + 1.3314166789178437745e2;
            num = num * r + 3.3871328727963666080e0;
            den = 5.2264952788528545610e3;
            den = den * r + 2.8729085735721942674e4;
            den = den * r + 3.9307895800092710610e4;
            den = den * r + 2.1213794301586595867e4;
            den = den * r + 5.3941960214247511077e3;
            den = den * r + 6.8718700749205790830e2;
            den = den * r + 4.2313330701600911252e1;
            den = den * r + 1.0;
            return q * num / den;
        }
        r = (q < 0.0) ? u : 1.0 - u;
        r = sqrt(-log(r));
        if (r <= 5.0) {
            r = r - 1.6;
            num = 7.74545014278341407640e-4;
            num = num * r + 2.27238449892691845833e-2;
            num = num * r + 2.41780725177450611770e-1;
            num = num * r + 1.27045825245236838258e0;
            num = num * r + 3.64784832476320460504e0;
            num = num * r + 5.76949722146069140550e0;
            num = num * r + 4.63033784615654529590e0;
            num = num * r + 1.42343711074968357734e0;
            den = 1.05075007164441684324e-9;
            den = den * r + 5.47593808499534494600e-4;
            den = den * r + 1.51986665636164571966e-2;
            den = den * r + 1.48103976427480074590e-1;
            den = den * r + 6.89767334985100004550e-1;
            den = den * r + 1.67638483018380384940e0;
            den = den * r + 2.05319162663775882187e0;
            den = den * r + 1.0;
        } else {
            r = r - 5.0;
            num = 2.01033439929228813265e-7;
            num = num * r + 2.71155556874348757815e-5;
            num = num * r + 1.24266094738807843860e-3;
            num = num * r + 2.65321895265761230930e-2;
            num = num * r + 2.96560571828504891230e-1;
            num = num * r + 1.78482653991729133580e0;
            num = num * r + 5.46378491116411436990e0;
            num = num * r + 6.65790464350110377720e0;
            den = 2.04426310338993978564e-15;
            den = den * r + 1.42151175831644588870e-7;
            den = den * r + 1.84631831751005468180e-5;
            den = den * r + 7.86869131145613259100e-4;
            den = den * r + 1.48753612908506148525e-2;
            den = den * r + 1.36929880922735805310e-1;
            den = den * r + 5.99832206555887937690e-1;
            den = den * r + 1.0;
        }
        val = num / den;
        return (q < 0.0) ? -val : val;
    }
    """
    ctypedef struct philox_t:
        unsigned long long c0
        unsigned long long c1
        unsigned long long c2
        unsigned long long c3
        unsigned long long k0
        unsigned long long k1
        unsigned long long buf[4]
        int pos
    void philox_init(philox_t *st, unsigned long long key, unsigned long long ctr0) nogil
    double philox_uniform(philox_t *st) nogil
    double ppnd16(double u) nogil

from libc.math cimport fabs, log, sqrt


cdef inline double _rho_step(double r, double u, double z,
                             double al0, double al1, double b0, double b1,
                             double b2, long long *overs) noexcept nogil:
    cdef double m, s2, s, gap_p, gap_m, side, gap, psi, ip, bq2, aq, sb
    cdef double pp, be, ue, cand
    m = al0 + al1 * r
    s2 = b0 + b1 * r + b2 * (r * r) - m * m
    if s2 <= 1e-14 * (1.0 + m * m):
        s2 = 0.0
    if s2 > 0.0:
        s = sqrt(s2)
        gap_p = 1.0 - m
        gap_m = 1.0 + m
        if gap_p <= gap_m:
            side = 1.0
            gap = gap_p
        else:
            side = -1.0
            gap = gap_m
        if gap > 5.5 * s:
            cand = m + s * z
        else:
            psi = s2 / (gap * gap)
            if psi <= 2.0:
                ip = 2.0 / psi
                bq2 = ip - 1.0 + sqrt(ip) * sqrt(ip - 1.0)
                aq = gap / (1.0 + bq2)
                sb = sqrt(bq2)
                cand = side * (1.0 - aq * ((sb + z) * (sb + z)))
            else:
                pp = (psi - 1.0) / (psi + 1.0)
                be = 2.0 / (gap * (psi + 1.0))
                if u <= pp:
                    ue = 0.0
                else:
                    ue = log((1.0 - pp) / (1.0 - u)) / be
                cand = side * (1.0 - ue)
    else:
        cand = m
    if fabs(cand) > 1.0:
        overs[0] += 1
    if cand > 1.0 - 1e-12:
        cand = 1.0 - 1e-12
    elif cand < -1.0 + 1e-12:
        cand = -1.0 + 1e-12
    return cand


cdef inline double _qe_step(double v, double u, double z,
                            double f, double mb, double a2, double b2) noexcept nogil:
    cdef double m, s2, psi, ip, bq2, aq, sb, pp, be
    m = v * f + mb
    s2 = v * a2 + b2
    if s2 <= 0.0:
        return m
    psi = s2 / (m * m)
    if psi <= 1.5:
        ip = 2.0 / psi
        bq2 = ip - 1.0 + sqrt(ip) * sqrt(ip - 1.0)
        aq = m / (1.0 + bq2)
        sb = sqrt(bq2)
        return aq * ((sb + z) * (sb + z))
    pp = (psi - 1.0) / (psi + 1.0)
    if u <= pp:
        return 0.0
    be = (1.0 - pp) / m
    return log((1.0 - pp) / (1.0 - u)) / be


cdef void _mom_path(const double *pv, unsigned long long seed,
                    unsigned long long ctr0, bint mirror, Py_ssize_t n_steps,
                    double *o_v1p, double *o_v2p, double *o_rp,
                    long long *o_overs) noexcept nogil:
    cdef philox_t st
    cdef double dt = pv[0], hdt = 0.5 * pv[0]
    cdef double al0 = pv[1], al1 = pv[2], rb0 = pv[3], rb1 = pv[4], rb2 = pv[5]
    cdef double f1 = pv[6], vl1 = pv[7], f2 = pv[8], vl2 = pv[9]
    cdef double e1 = pv[10], e2 = pv[11], s1 = pv[12], s2f = pv[13]
    cdef double r12 = pv[14], r12c = pv[15]
    cdef double qa1 = pv[16], qb1 = pv[17], qa2 = pv[18], qb2 = pv[19]
    cdef double qc = pv[20], qd = pv[21]
    cdef double sg1 = pv[25], sg2 = pv[26], v1 = pv[22], v2 = pv[23], r = pv[24]
    cdef double a1p = 0.0, a2p = 0.0, arp = 0.0
    cdef double u0, u1, u2, u3, u4, z0, z1, z2, z3, z4
    cdef double v11, v22, v12, lim, l11, l21, l22, sg1n, sg2n
    cdef long long ov = 0
    cdef Py_ssize_t k

    philox_init(&st, seed, ctr0)
    for k in range(n_steps):
        u0 = philox_uniform(&st)
        u1 = philox_uniform(&st)
        u2 = philox_uniform(&st)
        u3 = philox_uniform(&st)
        u4 = philox_uniform(&st)
        if mirror:
            u0 = 1.0 - u0; u1 = 1.0 - u1; u2 = 1.0 - u2
            u3 = 1.0 - u3; u4 = 1.0 - u4
        z0 = ppnd16(u0); z1 = ppnd16(u1); z2 = ppnd16(u2)
        z3 = ppnd16(u3); z4 = ppnd16(u4)
        a1p = a1p + hdt * v1
        a2p = a2p + hdt * v2
        arp = arp + hdt * r
        v11 = qa1 * (sg1 * sg1) + qb1
        v22 = qa2 * (sg2 * sg2) + qb2
        v12 = qc * (sg1 * sg2) + qd
        lim = 0.999 * sqrt(v11 * v22)
        if v12 > lim:
            v12 = lim
        elif v12 < -lim:
            v12 = -lim
        l11 = sqrt(v11)
        if v11 > 0.0:
            l21 = v12 / l11
        else:
            l21 = 0.0
        l22 = v22 - l21 * l21
        if l22 < 0.0:
            l22 = 0.0
        l22 = sqrt(l22)
        v1 = vl1 + (v1 - vl1) * f1 + l11 * z3
        v2 = vl2 + (v2 - vl2) * f2 + l21 * z3 + l22 * z4
        sg1n = sg1 * e1 + s1 * z1
        sg2n = sg2 * e2 + s2f * (r12 * z1 + r12c * z2)
        sg1 = sg1n
        sg2 = sg2n
        r = _rho_step(r, u0, z0, al0, al1, rb0, rb1, rb2, &ov)
        a1p = a1p + hdt * v1
        a2p = a2p + hdt * v2
        arp = arp + hdt * r
    o_v1p[0] = a1p
    o_v2p[0] = a2p
    o_rp[0] = arp
    o_overs[0] = ov


cdef void _price_path(const double *pv, int vol_mode, unsigned long long seed,
                      unsigned long long ctr0, bint mirror, Py_ssize_t n_steps,
                      double *o_ls1, double *o_ls2, double *o_v1p,
                      double *o_v2p, double *o_rp, long long *o_overs) noexcept nogil:
    cdef philox_t st
    cdef double dt = pv[0], sqdt = pv[1], rate = pv[2], hdt = 0.5 * pv[0]
    cdef double al0 = pv[3], al1 = pv[4], rb0 = pv[5], rb1 = pv[6], rb2 = pv[7]
    cdef double f1 = pv[8], mb1 = pv[9], a21 = pv[10], b21 = pv[11]
    cdef double f2 = pv[12], mb2 = pv[13], a22 = pv[14], b22 = pv[15]
    cdef double rv = pv[16], rvc = pv[17]
    cdef double eo1 = pv[18], so1 = pv[19], eo2 = pv[20], so2 = pv[21]
    cdef double ro12 = pv[22], ro12c = pv[23]
    cdef double v1 = pv[24], v2 = pv[25], r = pv[26], sg1 = pv[27], sg2 = pv[28]
    cdef double l1 = 0.0, l2 = 0.0, a1p = 0.0, a2p = 0.0, arp = 0.0
    cdef double u0, u1, u2, u3, u4, z0, z1, z2, z3, z4, z2c
    cdef double sq1, sq2, rc
    cdef long long ov = 0
    cdef Py_ssize_t k

    philox_init(&st, seed, ctr0)
    for k in range(n_steps):
        u0 = philox_uniform(&st)
        u1 = philox_uniform(&st)
        u2 = philox_uniform(&st)
        u3 = philox_uniform(&st)
        u4 = philox_uniform(&st)
        if mirror:
            u0 = 1.0 - u0; u1 = 1.0 - u1; u2 = 1.0 - u2
            u3 = 1.0 - u3; u4 = 1.0 - u4
        z0 = ppnd16(u0); z1 = ppnd16(u1); z2 = ppnd16(u2)
        z3 = ppnd16(u3); z4 = ppnd16(u4)
        sq1 = sqrt(v1)
        sq2 = sqrt(v2)
        rc = sqrt(1.0 - r * r)
        l1 = l1 + (rate - 0.5 * v1) * dt + sq1 * sqdt * z3
        l2 = l2 + (rate - 0.5 * v2) * dt + sq2 * sqdt * (r * z3 + rc * z4)
        a1p = a1p + hdt * v1
        a2p = a2p + hdt * v2
        arp = arp + hdt * r
        if vol_mode == 1:
            sg1 = sg1 * eo1 + so1 * z1
            sg2 = sg2 * eo2 + so2 * (ro12 * z1 + ro12c * z2)
            v1 = sg1 * sg1
            v2 = sg2 * sg2
        else:
            z2c = rv * z1 + rvc * z2
            v1 = _qe_step(v1, u1, z1, f1, mb1, a21, b21)
            v2 = _qe_step(v2, u2, z2c, f2, mb2, a22, b22)
        r = _rho_step(r, u0, z0, al0, al1, rb0, rb1, rb2, &ov)
        a1p = a1p + hdt * v1
        a2p = a2p + hdt * v2
        arp = arp + hdt * r
    o_ls1[0] = l1
    o_ls2[0] = l2
    o_v1p[0] = a1p
    o_v2p[0] = a2p
    o_rp[0] = arp
    o_overs[0] = ov


def run_moments(double[::1] pvec, unsigned long long seed,
                Py_ssize_t n_paths, Py_ssize_t n_steps, bint antithetic,
                int n_threads,
                double[::1] v1p, double[::1] v2p, double[::1] rp,
                long long[::1] overs):
    cdef unsigned long long nblk = <unsigned long long> ((n_steps * 5 + 3) // 4)
    cdef Py_ssize_t p
    cdef unsigned long long sp
    cdef bint mirror
    for p in prange(n_paths, nogil=True, schedule='static', num_threads=n_threads):
        if antithetic:
            sp = <unsigned long long> (p >> 1)
            mirror = (p & 1) != 0
        else:
            sp = <unsigned long long> p
            mirror = False
        _mom_path(&pvec[0], seed, sp * nblk, mirror, n_steps,
                  &v1p[p], &v2p[p], &rp[p], &overs[p])


def run_price(double[::1] pvec, int vol_mode, unsigned long long seed,
              Py_ssize_t n_paths, Py_ssize_t n_steps, bint antithetic,
              int n_threads,
              double[::1] ls1, double[::1] ls2,
              double[::1] v1p, double[::1] v2p, double[::1] rp,
              long long[::1] overs):
    cdef unsigned long long nblk = <unsigned long long> ((n_steps * 5 + 3) // 4)
    cdef Py_ssize_t p
    cdef unsigned long long sp
    cdef bint mirror
    for p in prange(n_paths, nogil=True, schedule='static', num_threads=n_threads):
        if antithetic:
            sp = <unsigned long long> (p >> 1)
            mirror = (p & 1) != 0
        else:
            sp = <unsigned long long> p
            mirror = False
        _price_path(&pvec[0], vol_mode, seed, sp * nblk, mirror, n_steps,
                    &ls1[p], &ls2[p], &v1p[p], &v2p[p], &rp[p], &overs[p])
