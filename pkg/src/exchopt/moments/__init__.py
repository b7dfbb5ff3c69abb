"""Integrated moments of the squared volatilities and the correlation.

Backends:
  closed_form     re-derived explicit formulas (default)
  ode             numeric integration of the closed linear moment system
  paper_verbatim  printed coefficients, for divergence reporting only
"""
from __future__ import annotations

from ..params import MarketState, ModelParams
from . import closed_form, ode, paper_verbatim
from .ode import MomentOdeFailure, solve_moment_odes
from .types import CorrMoments, CrossMoments, MomentSummary, VarMoments

BACKENDS = ("closed_form", "ode", "paper_verbatim")


def _check_backend(backend):
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def corr_moments(params: ModelParams, rho0: float, t: float,
                 backend: str = "closed_form") -> CorrMoments:
    _check_backend(backend)
    if backend == "ode":
        return ode.corr_moments_ode(params, rho0, t)
    if backend == "paper_verbatim":
        return paper_verbatim.corr_moments_verbatim(params, rho0, t)
    return closed_form.corr_moments(params, rho0, t)


def var_moments(params: ModelParams, v0: float, asset: int, t: float,
                backend: str = "closed_form") -> VarMoments:
    _check_backend(backend)
    if asset not in (1, 2):
        raise ValueError("asset index must be 1 or 2")
    if backend == "ode":
        return ode.var_moments_ode(params, v0, asset, t)
    if backend == "paper_verbatim":
        return paper_verbatim.var_moments_verbatim(params, v0, asset, t)
    return closed_form.var_moments(params, v0, asset, t)


def cross_moments(params: ModelParams, state: MarketState, t: float,
                  backend: str = "closed_form") -> CrossMoments:
    _check_backend(backend)
    if backend == "ode":
        return ode.cross_moments_ode(params, state.v0, t)
    if backend == "paper_verbatim":
        return paper_verbatim.cross_moments_verbatim(params, state.v0, t)
    return closed_form.cross_moments(params, state.v0, t)


def moment_summary(params: ModelParams, state: MarketState, t: float | None = None,
                   backend: str = "closed_form") -> MomentSummary:
    """Assemble the expansion point and second central moments at maturity."""
    _check_backend(backend)
    if t is None:
        t = state.maturity
    cm = corr_moments(params, state.rho0, t, backend)
    v1 = var_moments(params, state.v0[0], 1, t, backend)
    v2 = var_moments(params, state.v0[1], 2, t, backend)
    xm = cross_moments(params, state, t, backend)
    return MomentSummary(
        x0=(v1.mv1_plus, v2.mv1_plus, cm.mr1_plus),
        var=(v1.var_plus, v2.var_plus, cm.var_plus),
        cov12=xm.cov_plus,
        backend=backend,
        t=t,
    )


__all__ = [
    "BACKENDS", "CorrMoments", "VarMoments", "CrossMoments", "MomentSummary",
    "MomentOdeFailure", "corr_moments", "var_moments", "cross_moments",
    "moment_summary", "solve_moment_odes", "closed_form", "ode", "paper_verbatim",
]
