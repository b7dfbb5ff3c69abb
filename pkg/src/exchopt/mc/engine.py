"""Monte Carlo engine: path simulation, pricing and moment estimation.

Two simulation laws are exposed:

* the price law (schemes ``qe`` and ``exact_ou``): positive square-root
  variances, bounded correlation, exact conditional log-price steps.  This
  is the oracle for option prices and for trajectory exports.
* the moment-validation law (``estimate_integrated_moments``): the variance
  noise is modulated by a latent Gaussian factor pair chosen so that every
  first and second moment of (V1+, V2+, rho+) matches the moment engine's
  formula stack exactly, for arbitrary admissible parameters.  It exists for
  cross-validating the moment backends and is documented as such.

Determinism: every output is a pure function of (seed, config, inputs);
thread counts and internal chunking cannot change any bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..params import MarketState, ModelParams, validate
from . import backend, kernels_numpy, rng, schemes

SCHEMES = ("auto", "qe", "exact_ou", "full_euler")
_MAX_GRID = 4_000_000_000  # n_paths * n_steps guard (flat outputs are O(n_paths))


class ResourceLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    n_steps: int = 2000          # per year
    seed: int = 20240
    scheme: str = "auto"
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 1 or self.n_steps < 1:
            raise ValueError("n_paths and n_steps must be at least 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")

    def total_steps(self, horizon: float) -> int:
        return max(1, int(math.ceil(self.n_steps * horizon - 1e-9)))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int
    extra: dict = field(default_factory=dict)


@dataclass
class PathBatch:
    times: np.ndarray
    s: np.ndarray        # (n_paths, 2, n_steps+1)
    sigma: np.ndarray    # (n_paths, 2, n_steps+1)
    rho: np.ndarray      # (n_paths, n_steps+1)
    v_plus: np.ndarray   # (n_paths, 2, n_steps+1), trapezoid running integral
    rho_plus: np.ndarray
    rng_provenance: dict
    clamp_fraction: float
    scheme: str


def _resolve_scheme(params: ModelParams, scheme: str) -> str:
    if scheme == "auto":
        return "exact_ou" if params.ou_consistent else "qe"
    if scheme == "exact_ou" and not params.ou_consistent:
        raise ValueError(
            "scheme 'exact_ou' requires v_level == beta^2/(2 alpha); "
            "use 'qe' (or 'auto') for a free mean-reversion level")
    return scheme


def _check_inputs(params, state, cfg, horizon):
    rep = validate(params, state)
    if not rep.ok:
        raise ValueError("; ".join(rep.violations))
    n_steps = cfg.total_steps(horizon)
    if cfg.n_paths * n_steps > _MAX_GRID:
        raise ResourceLimitError(
            f"n_paths*n_steps = {cfg.n_paths * n_steps} exceeds {_MAX_GRID}")
    blocks = rng.blocks_per_path(n_steps)
    if (cfg.n_paths + 1) * blocks >= 2 ** 63:
        raise ResourceLimitError("random stream window exceeds the counter range")
    return n_steps


def _run_price_kernel(params, state, cfg, horizon):
    n_steps = _check_inputs(params, state, cfg, horizon)
    dt = horizon / n_steps
    scheme = _resolve_scheme(params, cfg.scheme)
    vol_mode = schemes.VOL_MODE_EXACT_OU if scheme == "exact_ou" else schemes.VOL_MODE_QE
    pvec = schemes.pack_price(params, state, dt, vol_mode)
    seed = cfg.seed & (2 ** 64 - 1)
    if scheme == "full_euler":
        ls1, ls2, v1p, v2p, rp, overs, _ = kernels_numpy.run_price_full_euler(
            pvec, seed, cfg.n_paths, n_steps, cfg.antithetic)
    elif backend.HAVE_COMPILED:
        n = cfg.n_paths
        ls1 = np.empty(n); ls2 = np.empty(n)
        v1p = np.empty(n); v2p = np.empty(n); rp = np.empty(n)
        ov = np.empty(n, dtype=np.int64)
        backend._kernels.run_price(pvec, vol_mode, seed, n, n_steps,
                                   cfg.antithetic, backend.resolve_threads(),
                                   ls1, ls2, v1p, v2p, rp, ov)
        overs = int(ov.sum())
    else:
        ls1, ls2, v1p, v2p, rp, overs, _ = kernels_numpy.run_price(
            pvec, vol_mode, seed, cfg.n_paths, n_steps, cfg.antithetic)
    return ls1, ls2, v1p, v2p, rp, overs, n_steps, scheme


def price_mc(params: ModelParams, state: MarketState, t: float | None = None,
             cfg: SimConfig | None = None) -> McEstimate:
    """Discounted expected payoff of the exchange option by simulation."""
    cfg = cfg or SimConfig()
    horizon = state.maturity if t is None else t
    ls1, ls2, v1p, v2p, rp, overs, n_steps, scheme = _run_price_kernel(
        params, state, cfg, horizon)
    c_u, m_u = state.units
    disc = math.exp(-state.rate * horizon)
    pay = disc * np.maximum(c_u * state.s0[0] * np.exp(ls1)
                            - m_u * state.s0[1] * np.exp(ls2), 0.0)
    mean = float(pay.mean())
    se = float(pay.std(ddof=1) / math.sqrt(len(pay)))
    return McEstimate(mean=mean, std_error=se, n=cfg.n_paths, extra={
        "scheme": scheme,
        "n_steps_total": n_steps,
        "seed": cfg.seed,
        "antithetic": cfg.antithetic,
        "clamp_fraction": overs / (cfg.n_paths * n_steps),
        "kernel_backend": "numpy" if scheme == "full_euler" else backend.BACKEND,
    })


def sample_terminal(params: ModelParams, state: MarketState,
                    t: float | None = None, cfg: SimConfig | None = None) -> dict:
    """Per-path terminal log returns and integrated triple of the price law.

    Spot prices do not enter the kernel, so bump-and-revalue estimates with
    common random numbers can reuse one sample across spot bumps.
    """
    cfg = cfg or SimConfig()
    horizon = state.maturity if t is None else t
    ls1, ls2, v1p, v2p, rp, overs, n_steps, scheme = _run_price_kernel(
        params, state, cfg, horizon)
    return {"ls1": ls1, "ls2": ls2, "v1_plus": v1p, "v2_plus": v2p,
            "rho_plus": rp, "scheme": scheme, "n_steps_total": n_steps,
            "clamp_fraction": overs / (cfg.n_paths * n_steps)}


def terminal_spread_stats(params, state, cfg, t=None):
    """Martingale and conditional-variance diagnostics of the price kernel."""
    horizon = state.maturity if t is None else t
    ls1, ls2, v1p, v2p, rp, _, n_steps, scheme = _run_price_kernel(
        params, state, cfg, horizon)
    return {
        "log_ratio_var": float(np.var(ls1 - ls2, ddof=1)),
        "disc_fwd1": float(np.mean(np.exp(ls1 - state.rate * horizon))) * state.s0[0],
        "disc_fwd2": float(np.mean(np.exp(ls2 - state.rate * horizon))) * state.s0[1],
        "n": cfg.n_paths,
        "scheme": scheme,
    }


def estimate_integrated_moments(params: ModelParams, state: MarketState,
                                t: float | None = None,
                                cfg: SimConfig | None = None) -> dict:
    """Sample moments of (V1+, V2+, rho+) with standard errors.

    Simulates the moment-validation law, whose integrated first and second
    moments coincide with the formula stack for all admissible parameters.
    """
    cfg = cfg or SimConfig(n_steps=200)
    horizon = state.maturity if t is None else t
    n_steps = _check_inputs(params, state, cfg, horizon)
    dt = horizon / n_steps
    pvec = schemes.pack_moments(params, state, dt)
    seed = cfg.seed & (2 ** 64 - 1)
    if backend.HAVE_COMPILED:
        n = cfg.n_paths
        v1p = np.empty(n); v2p = np.empty(n); rp = np.empty(n)
        ov = np.empty(n, dtype=np.int64)
        backend._kernels.run_moments(pvec, seed, n, n_steps, cfg.antithetic,
                                     backend.resolve_threads(), v1p, v2p, rp, ov)
        overs = int(ov.sum())
    else:
        v1p, v2p, rp, overs = kernels_numpy.run_moments(
            pvec, seed, cfg.n_paths, n_steps, cfg.antithetic)
    n = cfg.n_paths
    out = {"n": n, "t": horizon, "n_steps_total": n_steps, "seed": cfg.seed,
           "clamp_fraction": overs / (n * n_steps),
           "kernel_backend": backend.BACKEND}
    constant = {}
    for name, arr in (("v1_plus", v1p), ("v2_plus", v2p), ("rho_plus", rp)):
        m = float(arr.mean())
        # a constant sample has exactly zero variance; np.mean rounding
        # otherwise leaves ~1e-32 dust
        constant[name] = arr.max() == arr.min()
        v = 0.0 if constant[name] else float(arr.var(ddof=1))
        out[f"mean_{name}"] = m
        out[f"se_mean_{name}"] = math.sqrt(v / n)
        dev2 = (arr - m) ** 2
        out[f"var_{name}"] = v
        out[f"se_var_{name}"] = 0.0 if constant[name] else \
            float(dev2.std(ddof=1) / math.sqrt(n))
    if constant["v1_plus"] or constant["v2_plus"]:
        out["cov12"] = 0.0
        out["se_cov12"] = 0.0
    else:
        prod = (v1p - v1p.mean()) * (v2p - v2p.mean())
        out["cov12"] = float(prod.sum() / (n - 1))
        out["se_cov12"] = float(prod.std(ddof=1) / math.sqrt(n))
    return out


def simulate(params: ModelParams, state: MarketState, t: float | None = None,
             cfg: SimConfig | None = None) -> PathBatch:
    """Full trajectory bundle (prices, vols, correlation, running integrals).

    Trajectory storage is quadratic in the grid, so the path count is meant
    to stay small; the numpy kernel is used regardless of backend so exports
    are identical on every install.
    """
    cfg = cfg or SimConfig(n_paths=1)
    horizon = state.maturity if t is None else t
    n_steps = _check_inputs(params, state, cfg, horizon)
    if cfg.n_paths * n_steps > 50_000_000:
        raise ResourceLimitError("trajectory storage too large; reduce paths or steps")
    dt = horizon / n_steps
    scheme = _resolve_scheme(params, cfg.scheme)
    if scheme == "full_euler":
        raise ValueError("trajectory export supports schemes 'qe' and 'exact_ou'")
    vol_mode = schemes.VOL_MODE_EXACT_OU if scheme == "exact_ou" else schemes.VOL_MODE_QE
    pvec = schemes.pack_price(params, state, dt, vol_mode)
    seed = cfg.seed & (2 ** 64 - 1)
    ls1, ls2, v1p, v2p, rp, overs, traj = kernels_numpy.run_price(
        pvec, vol_mode, seed, cfg.n_paths, n_steps, cfg.antithetic, store=True)
    times = np.linspace(0.0, horizon, n_steps + 1)
    s = np.stack([state.s0[0] * np.exp(traj["ls1"]),
                  state.s0[1] * np.exp(traj["ls2"])], axis=1)
    sigma = np.stack([np.sqrt(traj["v1"]), np.sqrt(traj["v2"])], axis=1)
    v_plus = np.stack([traj["v1p"], traj["v2p"]], axis=1)
    batch = PathBatch(
        times=times, s=s, sigma=sigma, rho=traj["rho"], v_plus=v_plus,
        rho_plus=traj["rhop"],
        rng_provenance={
            "generator": "philox4x64-10",
            "seed": cfg.seed,
            "blocks_per_path": rng.blocks_per_path(n_steps),
            "draws_per_step": rng.N_COMP,
            "antithetic": cfg.antithetic,
        },
        clamp_fraction=overs / (cfg.n_paths * n_steps),
        scheme=scheme,
    )
    return batch
