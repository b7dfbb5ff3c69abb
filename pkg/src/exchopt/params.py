"""Model and contract parameters.

Two equivalent ways to parametrize the squared-volatility processes are
supported: the volatility-level (alpha, beta) form and the variance form
(c, v_level, xi).  The rate/diffusion identities c = 2*alpha and xi = 2*beta
always hold.  The level identity v_level = beta^2 / (2*alpha) pins v_level
only when constructing from (alpha, beta); the variance form accepts a free
mean-reversion level (the reference experiment uses one), and the
``ou_consistent`` flag records whether the level identity holds.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

_LEVEL_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the volatility pair and the correlation process."""

    c: tuple[float, float]
    v_level: tuple[float, float]
    xi: tuple[float, float]
    rho_v: float
    gamma_bar: float
    gamma_level: float
    alpha_bar: float
    alpha: tuple[float, float] = field(default=None)
    beta: tuple[float, float] = field(default=None)

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", (0.5 * self.c[0], 0.5 * self.c[1]))
        if self.beta is None:
            object.__setattr__(self, "beta", (0.5 * self.xi[0], 0.5 * self.xi[1]))

    @property
    def ou_consistent(self) -> bool:
        """True when v_level equals beta^2/(2 alpha) for both assets."""
        for j in (0, 1):
            implied = self.beta[j] ** 2 / (2.0 * self.alpha[j])
            if abs(self.v_level[j] - implied) > _LEVEL_TOL * max(1.0, abs(implied)):
                return False
        return True

    def implied_v_level(self) -> tuple[float, float]:
        return tuple(self.beta[j] ** 2 / (2.0 * self.alpha[j]) for j in (0, 1))


@dataclass(frozen=True)
class MarketState:
    """Spot state and contract terms of the exchange option."""

    s0: tuple[float, float]
    v0: tuple[float, float]
    rho0: float
    rate: float
    maturity: float
    units: tuple[float, float] = (1.0, 1.0)

    @property
    def sigma0(self) -> tuple[float, float]:
        return (math.sqrt(self.v0[0]), math.sqrt(self.v0[1]))


def from_ou(alpha, beta, rho_v, gamma_bar, gamma_level, alpha_bar) -> ModelParams:
    """Build parameters from the volatility-level form; fills the variance form."""
    alpha = (float(alpha[0]), float(alpha[1]))
    beta = (float(beta[0]), float(beta[1]))
    for j in (0, 1):
        if alpha[j] <= 0 or beta[j] <= 0:
            raise ValueError(f"alpha and beta must be positive (asset {j + 1})")
    c = (2 * alpha[0], 2 * alpha[1])
    v_level = (beta[0] ** 2 / (2 * alpha[0]), beta[1] ** 2 / (2 * alpha[1]))
    xi = (2 * beta[0], 2 * beta[1])
    p = ModelParams(c=c, v_level=v_level, xi=xi, rho_v=float(rho_v),
                    gamma_bar=float(gamma_bar), gamma_level=float(gamma_level),
                    alpha_bar=float(alpha_bar), alpha=alpha, beta=beta)
    _raise_on_error(p)
    return p


def from_variance(c, v_level, xi, rho_v, gamma_bar, gamma_level, alpha_bar) -> ModelParams:
    """Build parameters from the variance form; fills alpha = c/2, beta = xi/2."""
    c = (float(c[0]), float(c[1]))
    v_level = (float(v_level[0]), float(v_level[1]))
    xi = (float(xi[0]), float(xi[1]))
    for j in (0, 1):
        if c[j] <= 0 or v_level[j] <= 0 or xi[j] < 0:
            raise ValueError(f"c and v_level must be positive, xi nonnegative (asset {j + 1})")
    p = ModelParams(c=c, v_level=v_level, xi=xi, rho_v=float(rho_v),
                    gamma_bar=float(gamma_bar), gamma_level=float(gamma_level),
                    alpha_bar=float(alpha_bar))
    _raise_on_error(p)
    return p


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate(params: ModelParams, state: MarketState | None = None) -> ValidationReport:
    """Check every invariant; returns a report instead of raising."""
    v = []
    for j in (0, 1):
        if not params.c[j] > 0:
            v.append(f"c[{j}]: mean-reversion rate must be positive")
        if not params.v_level[j] > 0:
            v.append(f"v_level[{j}]: mean-reversion level must be positive")
        if not params.xi[j] >= 0:
            v.append(f"xi[{j}]: vol-of-variance must be nonnegative")
        if not params.alpha[j] > 0:
            v.append(f"alpha[{j}]: must be positive")
        if not params.beta[j] >= 0:
            v.append(f"beta[{j}]: must be nonnegative")
    if not -1.0 <= params.rho_v <= 1.0:
        v.append("rho_v out of [-1,1]")
    if not params.gamma_bar > 0:
        v.append("gamma_bar: mean-reversion rate must be positive")
    if not -1.0 < params.gamma_level < 1.0:
        v.append("gamma_level out of (-1,1)")
    if not params.alpha_bar >= 0:
        v.append("alpha_bar: correlation vol must be nonnegative")
    if state is not None:
        for j in (0, 1):
            if not state.s0[j] > 0:
                v.append(f"s0[{j}]: spot must be positive")
            if not state.v0[j] >= 0:
                v.append(f"v0[{j}]: initial variance must be nonnegative")
            if not state.units[j] > 0:
                v.append(f"units[{j}]: contract units must be positive")
        if not -1.0 <= state.rho0 <= 1.0:
            v.append("rho0 out of [-1,1]")
        if not state.maturity > 0:
            v.append("maturity must be positive")
        if not math.isfinite(state.rate):
            v.append("rate must be finite")
    return ValidationReport(v)


def _raise_on_error(params: ModelParams):
    rep = validate(params)
    if not rep.ok:
        raise ValueError("; ".join(rep.violations))


# Defaults mirroring the reference experiment: unit mean-reversion levels and
# rates, unit vol-of-variance, rho_v = 0.8, correlation block (0.8, 0.8, 1.0),
# initial squared vols 0.3, initial correlation 0.7, S0 = (100, 100), r = 4%,
# one year to maturity.
def default_params() -> ModelParams:
    return from_variance(c=(1.0, 1.0), v_level=(1.0, 1.0), xi=(1.0, 1.0),
                         rho_v=0.8, gamma_bar=0.8, gamma_level=0.8, alpha_bar=1.0)


def default_state() -> MarketState:
    return MarketState(s0=(100.0, 100.0), v0=(0.3, 0.3), rho0=0.7,
                       rate=0.04, maturity=1.0)


def _as_pair(x, name):
    if isinstance(x, (int, float)):
        return (float(x), float(x))
    if len(x) != 2:
        raise ValueError(f"{name} must be a pair")
    return (float(x[0]), float(x[1]))


def load_config(path_or_dict) -> tuple[ModelParams, MarketState]:
    """Read the JSON parameter file.

    Layout: {"vol": {...}, "corr": {"gamma","level","alpha"}, "market": {...}}.
    The vol block takes either c/v_level/xi or alpha/beta; when both are given
    they must satisfy the conversion identities to 1e-12 relative.
    """
    if isinstance(path_or_dict, dict):
        cfg = path_or_dict
    else:
        with open(path_or_dict) as fh:
            cfg = json.load(fh)
    vol = dict(cfg.get("vol", {}))
    corr = dict(cfg.get("corr", {}))
    market = dict(cfg.get("market", {}))

    gamma_bar = float(corr.get("gamma", 0.8))
    gamma_level = float(corr.get("level", 0.8))
    alpha_bar = float(corr.get("alpha", 1.0))
    rho_v = float(vol.get("rho_v", 0.8))

    has_var = all(k in vol for k in ("c", "v_level", "xi"))
    has_ou = all(k in vol for k in ("alpha", "beta"))
    if has_ou and not has_var:
        params = from_ou(_as_pair(vol["alpha"], "alpha"), _as_pair(vol["beta"], "beta"),
                         rho_v, gamma_bar, gamma_level, alpha_bar)
    elif has_var:
        params = from_variance(_as_pair(vol["c"], "c"), _as_pair(vol["v_level"], "v_level"),
                               _as_pair(vol["xi"], "xi"),
                               rho_v, gamma_bar, gamma_level, alpha_bar)
        if has_ou:
            alpha = _as_pair(vol["alpha"], "alpha")
            beta = _as_pair(vol["beta"], "beta")
            for j in (0, 1):
                for got, want, name in (
                        (alpha[j], 0.5 * params.c[j], "alpha"),
                        (beta[j], 0.5 * params.xi[j], "beta"),
                        (params.v_level[j], beta[j] ** 2 / (2 * alpha[j]), "v_level")):
                    if abs(got - want) > 1e-12 * max(1.0, abs(want)):
                        raise ValueError(
                            f"vol.{name}[{j}] inconsistent with the other "
                            f"parametrization: {got} vs {want}")
    elif vol:
        raise ValueError("vol block needs c/v_level/xi or alpha/beta")
    else:
        params = default_params()

    dflt = default_state()
    state = MarketState(
        s0=_as_pair(market.get("s0", dflt.s0), "s0"),
        v0=_as_pair(market.get("v0", dflt.v0), "v0"),
        rho0=float(market.get("rho0", dflt.rho0)),
        rate=float(market.get("rate", dflt.rate)),
        maturity=float(market.get("maturity", dflt.maturity)),
        units=_as_pair(market.get("units", (1.0, 1.0)), "units"),
    )
    rep = validate(params, state)
    if not rep.ok:
        raise ValueError("invalid config: " + "; ".join(rep.violations))
    return params, state


def config_dict(params: ModelParams, state: MarketState) -> dict:
    """Serialize to the JSON config layout (canonical variance form only;
    alpha/beta are derived on load)."""
    return {
        "vol": {"c": list(params.c), "v_level": list(params.v_level),
                "xi": list(params.xi), "rho_v": params.rho_v},
        "corr": {"gamma": params.gamma_bar, "level": params.gamma_level,
                 "alpha": params.alpha_bar},
        "market": {"s0": list(state.s0), "v0": list(state.v0), "rho0": state.rho0,
                   "rate": state.rate, "maturity": state.maturity,
                   "units": list(state.units)},
    }
