"""Conditional Margrabe price as a function of the integrated triple.

The price is evaluated at x = (x1, x2, x3) = (integrated squared vol 1,
integrated squared vol 2, integrated correlation), with effective variance

    v(x) = x1 + x2 - 2 sqrt(x1 x2) x3.

The product form x1*x2 that appears in one printed version of v is kept in
``m4_paper_form`` for comparison; the kernel itself uses the additive form,
which is the variance of the terminal log spread.

Two discounting conventions are supported: ``standard`` (no prefactor, the
classical exchange-option result when both assets drift at r) and
``paper_eq9`` (both legs multiplied by e^{-rT}).  The Monte Carlo engine
arbitrates between them; ``standard`` is the default.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

DISCOUNT_MODES = ("standard", "paper_eq9")
EPS_SING = 1e-12
_SQRT2 = math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


class SingularInputError(ValueError):
    """Raised when derivatives are requested on the singular set."""


def norm_cdf(x):
    if isinstance(x, np.ndarray):
        from scipy.special import erfc
        return 0.5 * erfc(-x / _SQRT2)
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_pdf(x):
    return np.exp(-0.5 * np.asarray(x) ** 2) * _INV_SQRT2PI if isinstance(x, np.ndarray) \
        else math.exp(-0.5 * x * x) * _INV_SQRT2PI


@dataclass(frozen=True)
class MargrabeInputs:
    x: tuple[float, float, float]
    s0: tuple[float, float]
    rate: float
    maturity: float
    discount_mode: str = "standard"
    units: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.discount_mode not in DISCOUNT_MODES:
            raise ValueError(f"discount_mode must be one of {DISCOUNT_MODES}")


@dataclass(frozen=True)
class MargrabeDerivs:
    price: float
    grad: tuple[float, float, float]
    hess: tuple[tuple[float, float, float], ...]


def effective_variance(v1p, v2p, rhop, warn: bool = True):
    """v = v1p + v2p - 2 sqrt(v1p v2p) rhop, clamped at zero.

    The integrated correlation enters on its raw scale; for unit maturity it
    is already correlation-like.  A negative pre-clamp value triggers a
    diagnostic warning (attainable when |rhop| exceeds 1 on its raw scale).
    """
    v1p = np.asarray(v1p, dtype=float)
    v2p = np.asarray(v2p, dtype=float)
    if np.any(v1p < 0) or np.any(v2p < 0):
        raise ValueError("integrated variances must be nonnegative")
    raw = v1p + v2p - 2.0 * np.sqrt(v1p * v2p) * np.asarray(rhop, dtype=float)
    if warn and np.any(raw < 0):
        warnings.warn("effective variance clamped at zero", RuntimeWarning,
                      stacklevel=2)
    out = np.maximum(raw, 0.0)
    return float(out) if out.ndim == 0 else out


def _prefactors(inputs: MargrabeInputs):
    disc = math.exp(-inputs.rate * inputs.maturity) \
        if inputs.discount_mode == "paper_eq9" else 1.0
    m1 = disc * inputs.units[0] * inputs.s0[0]
    m2 = disc * inputs.units[1] * inputs.s0[1]
    m3 = math.log((inputs.units[0] * inputs.s0[0]) / (inputs.units[1] * inputs.s0[1]))
    return m1, m2, m3


def margrabe_price(inputs: MargrabeInputs) -> float:
    x1, x2, x3 = inputs.x
    v = effective_variance(x1, x2, x3, warn=False)
    m1, m2, m3 = _prefactors(inputs)
    if v <= EPS_SING:
        return max(m1 - m2, 0.0)
    sv = math.sqrt(v)
    d1 = m3 / sv + 0.5 * sv
    return m1 * norm_cdf(d1) - m2 * norm_cdf(d1 - sv)


def _m4_partials(x1, x2, x3):
    r1, r2 = math.sqrt(x1), math.sqrt(x2)
    g = (1.0 - x3 * r2 / r1,
         1.0 - x3 * r1 / r2,
         -2.0 * r1 * r2)
    h = ((0.5 * x3 * r2 / (x1 * r1), -0.5 * x3 / (r1 * r2), -r2 / r1),
         (-0.5 * x3 / (r1 * r2), 0.5 * x3 * r1 / (x2 * r2), -r1 / r2),
         (-r2 / r1, -r1 / r2, 0.0))
    return g, h


def m4_paper_form(x1, x2, x3):
    """The printed product-form variant x1 x2 - 2 sqrt(x1 x2) x3 and its
    partials; kept only for documentation of the divergence."""
    r1, r2 = math.sqrt(x1), math.sqrt(x2)
    val = x1 * x2 - 2.0 * r1 * r2 * x3
    g = (x2 - x3 * r2 / r1, x1 - x3 * r1 / r2, -2.0 * r1 * r2)
    h = ((0.5 * x3 * r2 / (x1 * r1), 1.0 - 0.5 * x3 / (r1 * r2), -r2 / r1),
         (1.0 - 0.5 * x3 / (r1 * r2), 0.5 * x3 * r1 / (x2 * r2), -r1 / r2),
         (-r2 / r1, -r1 / r2, 0.0))
    return val, g, h


def margrabe_grad_hess(inputs: MargrabeInputs, eps_sing: float = EPS_SING) -> MargrabeDerivs:
    """Analytic gradient and Hessian of the price in x.

    Uses C = M1 N(d1) - M2 N(d2) with M1 f(d1) = M2 f(d2), which collapses
    the gradient to M1 f(d1) dv/dx_j / (2 sqrt(v)).
    """
    x1, x2, x3 = inputs.x
    if x1 <= eps_sing or x2 <= eps_sing:
        raise SingularInputError(
            f"integrated variance too small for derivatives: x1={x1!r}, x2={x2!r}")
    v = x1 + x2 - 2.0 * math.sqrt(x1 * x2) * x3
    if v <= eps_sing:
        raise SingularInputError(f"effective variance {v!r} at or below {eps_sing!r}")
    m1, m2, m3 = _prefactors(inputs)
    sv = math.sqrt(v)
    d1 = m3 / sv + 0.5 * sv
    price = m1 * norm_cdf(d1) - m2 * norm_cdf(d1 - sv)
    gv, hv = _m4_partials(x1, x2, x3)
    w = m1 * norm_pdf(d1)                      # = m2 * pdf(d2)
    dd1_dv = -0.5 * m3 / (v * sv) + 0.25 / sv
    grad = tuple(w * gv[j] / (2.0 * sv) for j in range(3))
    hess = [[0.0] * 3 for _ in range(3)]
    for j in range(3):
        for k in range(j, 3):
            val = w * (-d1 * dd1_dv * gv[k] * gv[j] / (2.0 * sv)
                       + hv[j][k] / (2.0 * sv)
                       - gv[j] * gv[k] / (4.0 * v * sv))
            hess[j][k] = hess[k][j] = val
    return MargrabeDerivs(price=price, grad=grad, hess=tuple(tuple(r) for r in hess))


def fd_check(inputs: MargrabeInputs, h: float = 1e-5) -> float:
    """Max relative deviation of the analytic derivatives from central
    differences of the price.  Unreliable near the singular set (warned).

    Gradient entries use step h*max(1,|x_j|).  The four-point second
    differences take a threefold wider step: at the base step their floating
    point cancellation noise alone reaches the 1e-6 scale, while much wider
    stencils pick up visible truncation; 3 h balances the two at ~1e-7.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.array(inputs.x, dtype=float)
    v = effective_variance(*inputs.x, warn=False)
    if v < 1e-3:
        warnings.warn("finite differences unreliable near zero effective variance",
                      RuntimeWarning, stacklevel=2)
    d = margrabe_grad_hess(inputs)

    def price_at(y):
        return margrabe_price(MargrabeInputs(x=tuple(y), s0=inputs.s0,
                                             rate=inputs.rate, maturity=inputs.maturity,
                                             discount_mode=inputs.discount_mode,
                                             units=inputs.units))

    steps = [h * max(1.0, abs(x[j])) for j in range(3)]
    worst = 0.0
    for j in range(3):
        e = np.zeros(3)
        e[j] = steps[j]
        fd = (price_at(x + e) - price_at(x - e)) / (2.0 * steps[j])
        worst = max(worst, abs(fd - d.grad[j]) / max(1.0, abs(d.grad[j])))
    for j in range(3):
        for k in range(3):
            ej = np.zeros(3); ej[j] = 3.0 * steps[j]
            ek = np.zeros(3); ek[k] = 3.0 * steps[k]
            fd = (price_at(x + ej + ek) - price_at(x + ej - ek)
                  - price_at(x - ej + ek) + price_at(x - ej - ek)) \
                / (36.0 * steps[j] * steps[k])
            worst = max(worst, abs(fd - d.hess[j][k]) / max(1.0, abs(d.hess[j][k])))
    return worst
