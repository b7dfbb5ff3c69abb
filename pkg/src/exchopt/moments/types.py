"""Result containers for the integrated-moment computations."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CorrMoments:
    """First/second moments of the correlation and its running integral."""
    t: float
    mr1: float        # E[rho_t]
    mr2: float        # E[rho_t^2]
    mr1_plus: float   # E[rho+_t]
    mr2_plus: float   # E[(rho+_t)^2]

    @property
    def var_plus(self) -> float:
        return self.mr2_plus - self.mr1_plus ** 2


@dataclass(frozen=True)
class VarMoments:
    """Moments of one squared-volatility process and its running integral."""
    t: float
    asset: int
    mv1: float
    mv2: float
    mv1_plus: float
    mv2_plus: float

    @property
    def var_plus(self) -> float:
        return self.mv2_plus - self.mv1_plus ** 2


@dataclass(frozen=True)
class CrossMoments:
    """Product moments across the two squared-volatility processes."""
    t: float
    ms12: float       # E[sigma1_t sigma2_t]
    mv12: float       # E[V1_t V2_t]
    mv12_plus: float  # E[V1+_t V2+_t]
    cov_plus: float   # cov(V1+_t, V2+_t)


@dataclass(frozen=True)
class MomentSummary:
    """The five expansion inputs: means, variances and the cross covariance."""
    x0: tuple[float, float, float]
    var: tuple[float, float, float]
    cov12: float
    backend: str
    t: float
