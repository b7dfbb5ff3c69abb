"""Printed-coefficient variants of the moment formulas, evaluated literally.

Kept for divergence reporting only: several printed coefficients disagree
with the underlying derivations (and with Monte Carlo), and the printed
cross-moment solution is singular at c1 == c2.  Values returned here may be
non-finite; callers must not feed them into pricing.
"""
from __future__ import annotations

import math

from ..params import ModelParams
from .closed_form import corr_moments as _cf_corr
from .closed_form import var_moments as _cf_var
from .types import CorrMoments, CrossMoments, VarMoments


def corr_var_plus_verbatim(params: ModelParams, rho0: float, t: float) -> float:
    """Printed expanded form of Var(rho+_t)."""
    g, gl, a = params.gamma_bar, params.gamma_level, params.alpha_bar
    k = (rho0 - gl) / g
    lam = 2 * g + a * a
    a1 = (2 * g * gl * gl + a * a) / lam
    a2 = 2 * g * gl * (rho0 - gl) / (g + a * a)
    b0 = (1 / g ** 2) * (-a1 + rho0 ** 2 - 2 * gl + 2 / g ** 2
                         - (a * a / g ** 2) * (1 + a1 / g + a2)
                         - a * a * (rho0 ** 2 - a1 - a2) / (g * lam))
    b1 = (1 / g) * (-a2 + 2 * gl - 2 / g ** 2 + a * a / g - a1 * a * a / g ** 2)
    b2 = 1.0
    b3 = a2 * a * a / g ** 3
    b4 = -(a * a / g ** 2) * (rho0 ** 2 - a1 - a2) / (lam * (g + a * a))
    return (b0 + k * k + (b1 + 2 * gl * k) * t + (b2 + gl * gl) * t * t
            + (b3 - 2 * gl * k) * t * math.exp(-g * t) + b4 * math.exp(-lam * t)
            - (b0 + b4 + 2 * k * k) * math.exp(-g * t) + k * k * math.exp(-2 * g * t))


def corr_moments_verbatim(params: ModelParams, rho0: float, t: float) -> CorrMoments:
    """First moment as printed (correct); second integrated moment from the
    printed variance expansion."""
    cf = _cf_corr(params, rho0, t)
    var_v = corr_var_plus_verbatim(params, rho0, t)
    return CorrMoments(t=t, mr1=cf.mr1, mr2=cf.mr2, mr1_plus=cf.mr1_plus,
                       mr2_plus=var_v + cf.mr1_plus ** 2)


def var_mv2_plus_verbatim(params: ModelParams, v0: float, asset: int, t: float) -> float:
    """Printed E[(V+_t)^2], including the printed d1 and the e^{-3ct} term."""
    j = asset - 1
    c, vl, xi = params.c[j], params.v_level[j], params.xi[j]
    d0 = (2 * c * vl + xi * xi) * vl / (2 * c)
    d1 = (2 * c + xi * xi) * (v0 - vl) / c
    ic3 = 1 / c ** 3
    p1 = (ic3 * vl * vl * t * t
          + ic3 * ((2 - vl / c) * vl + xi * xi * vl) * t
          + ic3 * (v0 * v0 + 2 * vl * vl / (c * c) - xi * xi * vl / c))
    c_coef = ic3 * (xi * xi * vl / c + d0 + d1 / 2 - 2 * vl * vl / (c * c))
    g0 = -ic3 * (d0 + v0 * v0 - d1)
    g1 = -ic3
    g2 = ic3 * xi * xi * (v0 - vl)
    return (p1 + c_coef * math.exp(-c * t) + g0 * math.exp(-2 * c * t)
            + g1 * math.exp(-3 * c * t) + g2 * t * math.exp(-c * t))


def var_moments_verbatim(params: ModelParams, v0: float, asset: int, t: float) -> VarMoments:
    cf = _cf_var(params, v0, asset, t)
    return VarMoments(t=t, asset=asset, mv1=cf.mv1, mv2=cf.mv2,
                      mv1_plus=cf.mv1_plus,
                      mv2_plus=var_mv2_plus_verbatim(params, v0, asset, t))


def cross_moments_verbatim(params: ModelParams, v0: tuple[float, float],
                           t: float) -> CrossMoments:
    """Printed cross-moment solution.

    The B_j terms carry a 1/(c2 - c1) factor as printed, so the result is
    +-inf or nan when the mean-reversion rates coincide.
    """
    c1, c2 = params.c
    vl1, vl2 = params.v_level
    xi1, xi2 = params.xi
    rv = params.rho_v
    v01, v02 = v0
    ss0 = math.sqrt(v01 * v02)
    S = c1 + c2
    ms12 = (xi1 * xi2 * rv / (2 * S)) * (1 - math.exp(-0.5 * S * t)) \
        + ss0 * math.exp(-0.5 * S * t)
    p3 = v01 * v02 + c2 * v01 * vl2 * t + c1 * v02 * vl1 * t + c1 * c2 * vl1 * vl2 * t * t
    m11 = vl1 + (v01 - vl1) * math.exp(-c1 * t)
    m12 = vl2 + (v02 - vl2) * math.exp(-c2 * t)
    a_t = (xi1 * xi2 * rv / (2 * S)) * (t - (2 / S) * (1 - math.exp(-0.5 * S * t))) \
        + (2 * ss0 / S) * (1 - math.exp(-0.5 * S * t))

    def b_j(j, cj):
        sign = (-1.0) ** j
        with_zero = c2 - c1
        try:
            frac = 2 * sign / with_zero * (math.exp(0.5 * sign * with_zero * t) - 1)
        except ZeroDivisionError:
            frac = math.inf
        return (xi1 * xi2 * rv / (2 * S)) * ((math.exp(cj * t) - 1) / cj - frac) + ss0 * frac

    b1 = b_j(1, c1)
    b2 = b_j(2, c2)
    mv12p = (1 / (c1 * c2)) * (
        p3 - (v01 + c1 * vl1 * t) * m12 - (v02 + c2 * vl2 * t) * m11 + ms12
        - xi1 * xi2 * rv * math.exp(-c1 * t) * b1
        - xi1 * xi2 * rv * math.exp(-c2 * t) * b2
        + xi1 * xi2 * rv * a_t)
    m1p1 = _cf_var(params, v01, 1, t).mv1_plus
    m1p2 = _cf_var(params, v02, 2, t).mv1_plus
    return CrossMoments(t=t, ms12=ms12, mv12=math.nan, mv12_plus=mv12p,
                        cov_plus=mv12p - m1p1 * m1p2)
