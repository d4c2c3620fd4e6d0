"""Point-form null hypothesis tests.

The point-form null says the experiment mean is exactly zero.  With the
standardized effect z = mean / sd and per-group sample size N, the test
statistic is z * sqrt(N) and significance compares it against a t
quantile.  These are the classical results the distributional test is
measured against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .special import normal_cdf, t_cdf, t_quantile

__all__ = [
    "PointTestReport",
    "point_p_value",
    "point_z_crit",
    "point_test",
    "power_replication_estimate",
]


@dataclass(frozen=True)
class PointTestReport:
    """Outcome of a point-form test of a standardized effect z."""

    t_stat: float
    nu: float
    p_value: float
    z_crit: float
    t_crit: float
    significant: bool
    alpha: float


def _check_n(n: int) -> int:
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise DomainError(f"sample size must be an integer >= 2, got {n!r}")
    return n


def _check_alpha(alpha: float) -> float:
    if not (0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 0.5), got {alpha}")
    return float(alpha)


def point_p_value(z: float, n: int, nu: float, two_sided: bool = False) -> float:
    """Upper-tail probability of the absolute statistic, 1 - T_nu(|z| sqrt(N)).

    The default is the one-tail probability of |z|, which is the quantity
    the significance rule |z| >= z_crit corresponds to.  ``two_sided=True``
    doubles it (capped at 1); that variant is an extension for readers who
    expect the doubled convention, not part of the significance logic.
    """
    _check_n(n)
    p = 1.0 - t_cdf(abs(z) * math.sqrt(n), nu)
    if two_sided:
        p = min(1.0, 2.0 * p)
    return p


def point_z_crit(alpha: float, n: int, nu: float) -> float:
    """Smallest |z| that is significant at level alpha: T_nu^{-1}(1-alpha)/sqrt(N)."""
    _check_alpha(alpha)
    _check_n(n)
    return t_quantile(1.0 - alpha, nu) / math.sqrt(n)


def point_test(z: float, n: int, nu: float, alpha: float = 0.05) -> PointTestReport:
    """Full point-form report for a standardized effect z."""
    z_crit = point_z_crit(alpha, n, nu)
    t_stat = z * math.sqrt(n)
    t_crit = z_crit * math.sqrt(n)
    return PointTestReport(
        t_stat=t_stat,
        nu=float(nu),
        p_value=point_p_value(z, n, nu),
        z_crit=z_crit,
        t_crit=t_crit,
        significant=abs(t_stat) >= t_crit,
        alpha=float(alpha),
    )


def power_replication_estimate(
    t1: float, alpha: float, nu: float, quantile_tail: str = "lower"
) -> float:
    """Power-style estimate of replication probability, as found in the
    replication literature:

        1 - Phi((T_nu^{-1}(alpha) - t1) / sqrt(1 + T_nu^{-1}(alpha)^2 / (2 nu)))

    The lower-tail quantile T_nu^{-1}(alpha) is negative for alpha < 0.5,
    which makes the estimate implausibly high for null results (about 0.95
    at t1 = 0 with alpha = 0.05).  The formula is reproduced verbatim
    anyway, for comparison; ``quantile_tail="upper"`` substitutes
    T_nu^{-1}(1 - alpha), the convention a power calculation would use.
    """
    _check_alpha(alpha)
    if nu < 1.0:
        raise DomainError(f"need nu >= 1, got {nu}")
    if quantile_tail == "lower":
        t_a = t_quantile(alpha, nu)
    elif quantile_tail == "upper":
        t_a = t_quantile(1.0 - alpha, nu)
    else:
        raise DomainError(f"quantile_tail must be 'lower' or 'upper', got {quantile_tail!r}")
    return 1.0 - normal_cdf((t_a - t1) / math.sqrt(1.0 + t_a * t_a / (2.0 * nu)))
