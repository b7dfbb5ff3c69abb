"""Per-step coefficient packing shared by the numpy and compiled kernels.

Both kernel families receive the same float64 coefficient vector, computed
once here, so their per-path arithmetic is identical operation for
operation.

Step recipes (one step of size dt; slots are the N_COMP=5 draws per step):

correlation (slot 0, uses both the uniform u and z = ppf(u)):
    m  = al0 + al1*r;  s2 = max(b0 + b1*r + b2*r*r - m*m, 0)
    deterministic when s2 == 0; Gaussian m + s*z when the nearer bound is
    more than 5.5 s away; otherwise a bounded sampler with the same first
    two moments: a squared-Gaussian branch towards the nearer bound when
    psi = s2/gap^2 <= 2, else an atom-plus-exponential branch driven by u.
    Candidates beyond |1| count as hard clamps.

price kernel (law of the square-root variance pair + bounded correlation):
    legs (slots 3, 4, start-of-step coefficients):
        ls1 += (rate - V1/2) dt + sqrt(V1) sqdt z3
        ls2 += (rate - V2/2) dt + sqrt(V2) sqdt (rho z3 + sqrt(1-rho^2) z4)
    variance updates (slots 1, 2), quadratic-exponential with exact
    conditional mean/variance; vol_mode 1 replaces them with the exact
    bivariate OU transition of the signed volatilities (V = sigma^2),
    valid when the level identity holds.

moments kernel (linear-factor law): the variance noise is modulated by a
latent Gaussian factor pair with E[sigma_j^2] = E[V_j] and the product-mean
recursion of the formula stack, which makes all first/second integrated
moments exact for free (c, v_level, xi); V innovations are Gaussian with
the exact conditional covariance given the factors (slots 3, 4), factors
use slots 1, 2.
"""
from __future__ import annotations

import math

import numpy as np

from ..params import MarketState, ModelParams

PRICE_PVEC_LEN = 29
MOM_PVEC_LEN = 27

VOL_MODE_QE = 0
VOL_MODE_EXACT_OU = 1

RHO_GAUSS_GAPS = 5.5
QE_PSI_SWITCH = 1.5


class RealizabilityError(ValueError):
    """The linear-factor law does not exist for these parameters."""


def rho_step_coeffs(gamma_bar: float, gamma_level: float, alpha_bar: float,
                    dt: float) -> tuple[float, float, float, float, float]:
    """(al0, al1, b0, b1, b2): exact one-step conditional moment coefficients."""
    g, gl, a = gamma_bar, gamma_level, alpha_bar
    lam = 2.0 * g + a * a
    e1 = math.exp(-g * dt)
    el = math.exp(-lam * dt)
    a1c = (2.0 * g * gl * gl + a * a) / lam
    k2 = 2.0 * g * gl / (g + a * a)
    al0 = gl * (1.0 - e1)
    b1 = k2 * (e1 - el)
    b0 = a1c * (1.0 - el) - gl * b1
    return al0, e1, b0, b1, el


def pack_price(params: ModelParams, state: MarketState, dt: float,
               vol_mode: int) -> np.ndarray:
    p = np.zeros(PRICE_PVEC_LEN)
    p[0] = dt
    p[1] = math.sqrt(dt)
    p[2] = state.rate
    p[3:8] = rho_step_coeffs(params.gamma_bar, params.gamma_level,
                             params.alpha_bar, dt)
    for j in (0, 1):
        c, vl, xi = params.c[j], params.v_level[j], params.xi[j]
        f = math.exp(-c * dt)
        base = 8 + 4 * j
        p[base] = f
        p[base + 1] = vl * (1.0 - f)
        p[base + 2] = xi * xi * f * (1.0 - f) / c
        p[base + 3] = vl * xi * xi * (1.0 - f) ** 2 / (2.0 * c)
    rv = params.rho_v
    p[16] = rv
    p[17] = math.sqrt(max(0.0, 1.0 - rv * rv))
    if vol_mode == VOL_MODE_EXACT_OU:
        a1, a2 = params.alpha
        b1, b2 = params.beta
        eo1, eo2 = math.exp(-a1 * dt), math.exp(-a2 * dt)
        so1 = b1 * math.sqrt((1.0 - eo1 * eo1) / (2.0 * a1))
        so2 = b2 * math.sqrt((1.0 - eo2 * eo2) / (2.0 * a2))
        cov = rv * b1 * b2 * (1.0 - math.exp(-(a1 + a2) * dt)) / (a1 + a2)
        r12 = cov / (so1 * so2) if so1 > 0 and so2 > 0 else 0.0
        p[18:24] = (eo1, so1, eo2, so2, r12, math.sqrt(max(0.0, 1.0 - r12 * r12)))
    p[24] = state.v0[0]
    p[25] = state.v0[1]
    p[26] = state.rho0
    p[27] = math.sqrt(state.v0[0])
    p[28] = math.sqrt(state.v0[1])
    return p


def factor_correlation(params: ModelParams) -> float:
    """Driver correlation of the latent factor pair in the moments law."""
    b1 = math.sqrt(params.c[0] * params.v_level[0])
    b2 = math.sqrt(params.c[1] * params.v_level[1])
    return params.rho_v * params.xi[0] * params.xi[1] / (4.0 * b1 * b2)


def pack_moments(params: ModelParams, state: MarketState, dt: float) -> np.ndarray:
    rpp = factor_correlation(params)
    if abs(rpp) > 1.0:
        raise RealizabilityError(
            f"factor correlation {rpp:.4f} outside [-1, 1]: the product-moment "
            "closure is not realizable for these parameters "
            "(|rho_v| xi1 xi2 must not exceed 4 sqrt(c1 c2 v_level1 v_level2))")
    p = np.zeros(MOM_PVEC_LEN)
    p[0] = dt
    p[1:6] = rho_step_coeffs(params.gamma_bar, params.gamma_level,
                             params.alpha_bar, dt)
    c1, c2 = params.c
    vl1, vl2 = params.v_level
    xi1, xi2 = params.xi
    bt1 = math.sqrt(c1 * vl1)
    bt2 = math.sqrt(c2 * vl2)
    p[6] = math.exp(-c1 * dt)
    p[7] = vl1
    p[8] = math.exp(-c2 * dt)
    p[9] = vl2
    e1 = math.exp(-0.5 * c1 * dt)
    e2 = math.exp(-0.5 * c2 * dt)
    s1 = bt1 * math.sqrt((1.0 - e1 * e1) / c1)
    s2 = bt2 * math.sqrt((1.0 - e2 * e2) / c2)
    s_ = 0.5 * (c1 + c2)
    cov = rpp * bt1 * bt2 * (1.0 - math.exp(-s_ * dt)) / s_
    r12 = cov / (s1 * s2)
    p[10:16] = (e1, e2, s1, s2, r12, math.sqrt(max(0.0, 1.0 - r12 * r12)))
    sdt = c1 + c2
    a1 = math.exp(-2.0 * c1 * dt) * math.expm1(c1 * dt) / c1
    b1c = (bt1 * bt1 / c1) * ((1.0 - math.exp(-2.0 * c1 * dt)) / (2.0 * c1) - a1)
    a2 = math.exp(-2.0 * c2 * dt) * math.expm1(c2 * dt) / c2
    b2c = (bt2 * bt2 / c2) * ((1.0 - math.exp(-2.0 * c2 * dt)) / (2.0 * c2) - a2)
    at = math.exp(-sdt * dt) * math.expm1(s_ * dt) / s_
    btc = (bt1 * bt2 * rpp / s_) * ((1.0 - math.exp(-sdt * dt)) / sdt - at)
    p[16] = xi1 * xi1 * a1
    p[17] = xi1 * xi1 * b1c
    p[18] = xi2 * xi2 * a2
    p[19] = xi2 * xi2 * b2c
    p[20] = xi1 * xi2 * params.rho_v * at
    p[21] = xi1 * xi2 * params.rho_v * btc
    p[22] = state.v0[0]
    p[23] = state.v0[1]
    p[24] = state.rho0
    p[25] = math.sqrt(state.v0[0])
    p[26] = math.sqrt(state.v0[1])
    return p
