from .backend import BACKEND, HAVE_COMPILED, resolve_threads
from .engine import (McEstimate, PathBatch, ResourceLimitError, SimConfig,
                     estimate_integrated_moments, price_mc, sample_terminal,
                     simulate, terminal_spread_stats)
from .schemes import RealizabilityError

__all__ = [
    "BACKEND", "HAVE_COMPILED", "resolve_threads",
    "SimConfig", "McEstimate", "PathBatch", "ResourceLimitError",
    "RealizabilityError", "simulate", "price_mc", "sample_terminal",
    "estimate_integrated_moments", "terminal_spread_stats",
]
