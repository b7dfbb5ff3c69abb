"""Exchange-option pricing under stochastic volatility and correlation."""

__version__ = "0.1.0"

from .margrabe import (MargrabeDerivs, MargrabeInputs, SingularInputError,
                       effective_variance, fd_check, margrabe_grad_hess,
                       margrabe_price)
from .moments import (CorrMoments, CrossMoments, MomentSummary, VarMoments,
                      corr_moments, cross_moments, moment_summary,
                      solve_moment_odes, var_moments)
from .params import (MarketState, ModelParams, default_params, default_state,
                     from_ou, from_variance, load_config, validate)
from .taylor import PriceReport, TaylorBreakdown, delta, price_taylor

__all__ = [
    "__version__",
    "ModelParams", "MarketState", "from_ou", "from_variance", "validate",
    "default_params", "default_state", "load_config",
    "CorrMoments", "VarMoments", "CrossMoments", "MomentSummary",
    "corr_moments", "var_moments", "cross_moments", "moment_summary",
    "solve_moment_odes",
    "MargrabeInputs", "MargrabeDerivs", "SingularInputError",
    "effective_variance", "margrabe_price", "margrabe_grad_hess", "fd_check",
    "TaylorBreakdown", "PriceReport", "price_taylor", "delta",
]
