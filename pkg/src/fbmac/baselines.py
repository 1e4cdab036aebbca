"""Reference regions for the symmetric two-user Gaussian MAC."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParams
from .gaussian import cap
from .terms import RegionBounds

BISECT_ITERS = 60


@dataclass(frozen=True)
class GaussianMacParams:
    P: float
    sigma2: float

    def __post_init__(self):
        if not (self.P >= 0 and self.sigma2 > 0):
            raise InvalidParams("need P >= 0 and sigma2 > 0")

    @property
    def snr(self) -> float:
        return self.P / self.sigma2


def nofb_pentagon(g: GaussianMacParams) -> RegionBounds:
    single, both = cap(g.snr), cap(2 * g.snr)
    return RegionBounds(single, single, both, both, 0.0)


def ozarow_residual(snr: float, rho: float) -> float:
    return (1 + 2 * snr * (1 + rho)) - (1 + snr * (1 - rho * rho)) ** 2


def ozarow_sum_capacity(g: GaussianMacParams) -> tuple[float, float]:
    """Equal-rate perfect-feedback sum capacity.

    The optimal input correlation rho* balances the sum-rate expression
    1 + 2 snr (1 + rho) against the square of the per-user term
    1 + snr (1 - rho**2).  The residual is negative at rho = 0 and positive
    at rho = 1, so bisection converges to the unique root.
    """
    snr = g.snr
    if snr == 0:
        return 0.0, 0.0
    lo, hi = 0.0, 1.0
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if ozarow_residual(snr, mid) < 0:
            lo = mid
        else:
            hi = mid
    rho = 0.5 * (lo + hi)
    return rho, cap(2 * snr * (1 + rho))


def cooperation_sum_bound(g: GaussianMacParams) -> float:
    """Both transmitters acting as one antenna with amplitude 2 sqrt(P)."""
    return cap(4 * g.snr)
