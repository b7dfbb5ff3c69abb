"""Closed-form integrated moments.

Re-derived from the linear conditional-moment structure of the three SDE
blocks (the printed versions of some coefficients are unreliable; see
paper_verbatim for those).  Every formula here is validated against the ODE
backend to ~1e-12 relative and against Monte Carlo in the test suite.

Removable singularities at coincident mean-reversion rates are absorbed by
the entire helper functions phi / phim / psi below, so the formulas are valid
on the whole admissible parameter domain, including c1 == c2.
"""
from __future__ import annotations

import math

from ..params import ModelParams
from .types import CorrMoments, CrossMoments, VarMoments

_SERIES_CUT = 1e-5


def phi(x: float, t: float) -> float:
    """(e^{x t} - 1)/x, entire in x; phi(0, t) = t."""
    xt = x * t
    if abs(xt) < _SERIES_CUT:
        return t * (1.0 + xt / 2.0 + xt * xt / 6.0 + xt ** 3 / 24.0 + xt ** 4 / 120.0)
    return math.expm1(xt) / x


def phim(m: int, x: float, t: float) -> float:
    """int_0^t u^m e^{x u} du."""
    if m == 0:
        return phi(x, t)
    if abs(x * t) < _SERIES_CUT:
        out, term = 0.0, 1.0
        for k in range(9):
            out += term * t ** (m + k + 1) / (m + k + 1)
            term *= x / (k + 1)
        return out
    return (t ** m * math.exp(x * t) - m * phim(m - 1, x, t)) / x


def psi(x: float, c: float, t: float) -> float:
    """int_0^t e^{-c w} phi(x, w) dw, entire in x."""
    if abs(x) * max(t, 1.0) > 1e-4:
        return (phi(x - c, t) - phi(-c, t)) / x
    out, fact = 0.0, 1.0
    for k in range(8):
        fact *= k + 1
        out += x ** k / fact * phim(k + 1, -c, t)
    return out


def corr_moments(params: ModelParams, rho0: float, t: float) -> CorrMoments:
    """Moments of the bounded mean-reverting correlation and its integral."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    g, gl, a = params.gamma_bar, params.gamma_level, params.alpha_bar
    k = rho0 - gl
    lam = 2.0 * g + a * a
    a1 = (2.0 * g * gl * gl + a * a) / lam
    a2 = 2.0 * g * gl * k / (g + a * a)
    q = rho0 * rho0 - a1 - a2
    eg = math.exp(-g * t)
    el = math.exp(-lam * t)
    mr1 = gl + k * eg
    mr2 = a1 + a2 * eg + q * el
    mr1p = gl * t + (k / g) * (1.0 - eg)
    # second integrated moment: solve y' + g y = b(t) with
    # b = ((rho0 + g gl t)^2 + a^2 t - a^2 I2(t) - mr2(t)) / g
    c0 = (rho0 * rho0 - a1 - a * a * a2 / g - a * a * q / lam) / g
    c1 = (2.0 * rho0 * g * gl + a * a * (1.0 - a1)) / g
    p2 = gl * gl
    p1 = (c1 - 2.0 * gl * gl) / g
    p0 = (c0 - p1) / g
    b3 = a2 * (a * a - g) / (g * g)
    b4 = 2.0 * q / (lam * (g + a * a))
    mr2p = p0 + p1 * t + p2 * t * t + b3 * t * eg + b4 * el - (p0 + b4) * eg
    if a == 0.0:  # deterministic path: exact zero variance, no rounding dust
        mr2 = mr1 * mr1
        mr2p = mr1p * mr1p
    return CorrMoments(t=t, mr1=mr1, mr2=mr2, mr1_plus=mr1p, mr2_plus=mr2p)


def var_moments(params: ModelParams, v0: float, asset: int, t: float) -> VarMoments:
    """Moments of one squared volatility and its integral (asset in {1, 2})."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    j = asset - 1
    c, vl, xi = params.c[j], params.v_level[j], params.xi[j]
    return _var_moments_raw(c, vl, xi, v0, t, asset)


def _var_moments_raw(c, vl, xi, v0, t, asset=1):
    d = v0 - vl
    ec = math.exp(-c * t)
    e2c = math.exp(-2.0 * c * t)
    mv1 = vl + d * ec
    mv1p = vl * t + (d / c) * (1.0 - ec)
    d0 = (2.0 * c * vl + xi * xi) * vl / (2.0 * c)
    d1 = (2.0 * c * vl + xi * xi) * d / c
    d2 = v0 * v0 - d0 - d1
    mv2 = d0 + d1 * ec + d2 * e2c
    k0 = (v0 * v0 + xi * xi * d / c - d0) / c
    k1 = vl * (2.0 * c * v0 + xi * xi) / c
    p2 = vl * vl
    p1 = (k1 - 2.0 * p2) / c
    p0 = (k0 - p1) / c
    g2 = -(xi * xi * d / c + d1) / c
    mv2p = (p0 + p1 * t + p2 * t * t + g2 * t * ec
            + (d2 / (c * c)) * e2c - (p0 + d2 / (c * c)) * ec)
    if xi == 0.0:  # deterministic path
        mv2 = mv1 * mv1
        mv2p = mv1p * mv1p
    return VarMoments(t=t, asset=asset, mv1=mv1, mv2=mv2, mv1_plus=mv1p, mv2_plus=mv2p)


def cross_moments(params: ModelParams, v0: tuple[float, float], t: float) -> CrossMoments:
    """Product moments of the squared-volatility pair and their integrals."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    c1, c2 = params.c
    vl1, vl2 = params.v_level
    xi1, xi2 = params.xi
    rv = params.rho_v
    v01, v02 = v0
    s = 0.5 * (c1 + c2)
    S = c1 + c2
    ss0 = math.sqrt(v01 * v02)
    # E[sigma1 sigma2]: linear decay at rate s towards F/s
    F = 0.25 * xi1 * xi2 * rv
    P = F / s
    Q = ss0 - P
    est = math.exp(-s * t)
    ms12 = P + Q * est
    # E[V1 V2]
    d1v, d2v = v01 - vl1, v02 - vl2
    m_inf = vl1 * vl2 + xi1 * xi2 * rv * P / S
    a_c2 = vl1 * d2v
    a_c1 = vl2 * d1v
    a_s = xi1 * xi2 * rv * Q / s
    h = v01 * v02 - (m_inf + a_c2 + a_c1 + a_s)
    mv12 = (m_inf + a_c2 * math.exp(-c2 * t) + a_c1 * math.exp(-c1 * t)
            + a_s * est + h * math.exp(-S * t))
    # cov(V1+, V2+) = int int e^{-c1 u - c2 w} rho_v xi1 xi2 H(u ^ w) du dw,
    # H(x) = int_0^x e^{S v} ms12(v) dv = (P/S)(e^{Sx}-1) + (Q/s)(e^{sx}-1)
    rt = xi1 * xi2 * rv

    def w_term(mu):
        w1 = psi(mu - c1, c2, t) - psi(-c1, c2, t)
        w2 = psi(mu - c2, c1, t) - psi(-c2, c1, t)
        return w1 + w2

    cov_plus = rt * ((P / S) * w_term(S) + (Q / s) * w_term(s)) if rt != 0.0 else 0.0
    m1p1 = _var_moments_raw(c1, vl1, xi1, v01, t).mv1_plus
    m1p2 = _var_moments_raw(c2, vl2, xi2, v02, t).mv1_plus
    return CrossMoments(t=t, ms12=ms12, mv12=mv12,
                        mv12_plus=cov_plus + m1p1 * m1p2, cov_plus=cov_plus)
