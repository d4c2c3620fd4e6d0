"""The joint significance-and-replication criterion.

A result t1 counts as "real" at levels (alpha, beta) under a variance
ratio q when it is significant, |t1| >= t_crit, and an exact repeat
would come out significant in the same direction with probability at
least beta, |t1| >= t_rep.  Both thresholds depend on q only through
u = qN, and their maximum

    R_q = max(t_rep, t_crit)

is unimodal in u: it blows up as q -> 0 (replication of a significant
result under a near-point null is pure luck) and grows like sqrt(1 + qN)
for large q.  That shape is what the solvers here exploit: a golden
section search finds the minimum, and bisection on each side of it
inverts R to find the q-range [q1, q2] over which a given result meets
both criteria.  The upper endpoint gamma = q2 measures how much
cross-experiment variability a result can tolerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, SolverFailure
from .special import t_cdf, t_quantile

__all__ = [
    "Criteria",
    "JointCriterionResult",
    "QInterval",
    "NoSolution",
    "RuleOfThumb",
    "t_rep",
    "r_crit",
    "r_curve",
    "rule_of_thumb",
    "minimize_r",
    "q_interval",
]

# Search window for u = qN.  Observed variance ratios live around
# q ~ 0.02..0.64, many orders of magnitude inside this bracket.
_U_LO = 1e-6
_U_HI = 1e6

# max(t_rep, t_crit) at its minimum for beta = 0.5, divided by the
# significance quantile: (1 + 1/2) sqrt(3) at u = 2.
THUMB_RATIO = 1.5 * math.sqrt(3.0)


@dataclass(frozen=True)
class Criteria:
    """Significance level alpha and replication level beta, beta > alpha."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 0.5):
            raise DomainError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        if not (self.alpha < self.beta < 1.0):
            raise DomainError(
                f"beta must lie in (alpha, 1), got beta={self.beta} with alpha={self.alpha}"
            )


@dataclass(frozen=True)
class JointCriterionResult:
    t_rep: float
    t_crit: float
    r_q: float
    q: float


@dataclass(frozen=True)
class QInterval:
    """The q-range over which a result meets both criteria.

    ``gamma`` is q2, or the search ceiling when ``q2_censored`` is set
    (the true q2 lies beyond the ceiling).
    """

    q1: float
    q2: float
    gamma: float
    r_min: float
    q_at_min: float
    q2_censored: bool = False


@dataclass(frozen=True)
class NoSolution:
    """|t1| is below the minimum of R_q: no q meets both criteria."""

    r_min: float
    q_at_min: float


class RuleOfThumb(NamedTuple):
    t_bound: float
    p_threshold: float


def _quantiles(criteria: Criteria, nu: float) -> tuple[float, float]:
    # The whole curve is arithmetic in these two constants.
    return t_quantile(1.0 - criteria.alpha, nu), t_quantile(criteria.beta, nu)


def _t_crit_u(a: float, u: float) -> float:
    return a * math.sqrt(1.0 + u)


def _t_rep_u(a: float, b: float, u: float) -> float:
    return (1.0 + 1.0 / u) * (
        a * math.sqrt(1.0 + u) + b * math.sqrt((1.0 + 2.0 * u) / (1.0 + u))
    )


def _r_u(a: float, b: float, u: float) -> float:
    return max(_t_rep_u(a, b, u), _t_crit_u(a, u))


def _check_q_positive(q: float) -> float:
    if not (q > 0.0 and math.isfinite(q)):
        raise DomainError(f"q must be positive and finite (t_rep diverges at q=0), got {q}")
    return float(q)


def t_rep(criteria: Criteria, nu: float, n: int, q: float) -> float:
    """Critical |t1| for the replication criterion p_r >= beta:

        t_rep = (1 + 1/(qN)) (t_crit + T_nu^{-1}(beta) sqrt((1 + 2qN)/(1 + qN)))

    Diverges as q -> 0 and, through t_crit, as qN -> infinity.
    """
    _check_q_positive(q)
    a, b = _quantiles(criteria, nu)
    return _t_rep_u(a, b, q * n)


def r_crit(criteria: Criteria, nu: float, n: int, q: float) -> JointCriterionResult:
    """Both thresholds and their maximum R_q at a single q."""
    _check_q_positive(q)
    a, b = _quantiles(criteria, nu)
    u = q * n
    rep = _t_rep_u(a, b, u)
    crit = _t_crit_u(a, u)
    return JointCriterionResult(t_rep=rep, t_crit=crit, r_q=max(rep, crit), q=q)


def r_curve(criteria: Criteria, nu: float, n: int, q: np.ndarray) -> np.ndarray:
    """Vectorized R_q over an array of positive q values."""
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0.0) or not np.all(np.isfinite(q)):
        raise DomainError("all q values must be positive and finite")
    a, b = _quantiles(criteria, nu)
    u = q * n
    crit = a * np.sqrt(1.0 + u)
    rep = (1.0 + 1.0 / u) * (crit + b * np.sqrt((1.0 + 2.0 * u) / (1.0 + u)))
    return np.maximum(rep, crit)


def rule_of_thumb(alpha: float, nu: float) -> RuleOfThumb:
    """q-free lower bound on the joint criterion at beta = 0.5.

    Whatever q is, R_q >= T_nu^{-1}(1 - alpha) * (3 sqrt(3) / 2), so a
    result whose one-tail p-value exceeds ``p_threshold``, the tail
    probability at that bound, meets the joint criterion for no q at
    all.  Roughly 0.0005 at nu = 10 and 0.00005 at nu = 40 for
    alpha = 0.05: far stricter than significance alone.
    """
    if not (0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 0.5), got {alpha}")
    t_bound = t_quantile(1.0 - alpha, nu) * THUMB_RATIO
    return RuleOfThumb(t_bound=t_bound, p_threshold=1.0 - t_cdf(t_bound, nu))


def minimize_r(criteria: Criteria, nu: float, n: int) -> tuple[float, float]:
    """Locate the minimum of R_q: returns (q_at_min, r_min).

    Golden section search on log(qN) over [1e-6, 1e6]; unimodality makes
    the bracket update safe.  For beta = 0.5 the minimum sits at qN = 2
    with r_min = (3 sqrt(3) / 2) T_nu^{-1}(1 - alpha), which the search
    reproduces rather than special-cases.
    """
    a, b = _quantiles(criteria, nu)
    lo, hi = math.log(_U_LO), math.log(_U_HI)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = _r_u(a, b, math.exp(x1))
    f2 = _r_u(a, b, math.exp(x2))
    while hi - lo > 1e-11:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = _r_u(a, b, math.exp(x1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = _r_u(a, b, math.exp(x2))
    u_min = math.exp(0.5 * (lo + hi))
    return u_min / n, _r_u(a, b, u_min)


def _bisect_log(
    f, log_outer: float, log_inner: float, outer_sign: float
) -> float:
    # Root of f between an outer point (sign outer_sign) and an inner
    # point at the curve minimum (f <= 0 there).  Bisection in log-u.
    lo, hi = log_outer, log_inner
    for _ in range(200):
        if abs(hi - lo) <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        if f(math.exp(mid)) * outer_sign >= 0.0:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def q_interval(
    t1: float,
    criteria: Criteria,
    nu: float,
    n: int,
    q_ceiling: float = 1e3,
) -> QInterval | NoSolution:
    """Invert R_q: the q-range [q1, q2] over which |t1| >= R_q.

    Returns ``NoSolution`` when |t1| < r_min (the result meets the joint
    criterion for no q).  When R at the ceiling is still below |t1| the
    upper endpoint is right-censored at ``q_ceiling`` and flagged, since
    q2 can be genuinely unbounded for large results.
    """
    if not math.isfinite(t1):
        raise DomainError(f"t1 must be finite, got {t1}")
    if not (q_ceiling > 0.0 and math.isfinite(q_ceiling)):
        raise DomainError(f"q_ceiling must be positive and finite, got {q_ceiling}")
    t_abs = abs(t1)
    q_at_min, r_min = minimize_r(criteria, nu, n)
    if t_abs < r_min:
        return NoSolution(r_min=r_min, q_at_min=q_at_min)

    a, b = _quantiles(criteria, nu)

    def excess(u: float) -> float:
        return _r_u(a, b, u) - t_abs

    u_min = q_at_min * n
    tol = 1e-8 * t_abs

    # Left root: R decreases toward the minimum, so walk the bracket out
    # until R clears |t1| (it always does eventually, R ~ 1/u near 0).
    u_left = min(_U_LO, u_min)
    while excess(u_left) < 0.0:
        u_left *= 1e-3
        if u_left < 1e-290:
            raise SolverFailure(f"no left bracket for t1={t1}")
    u1 = _bisect_log(excess, math.log(u_left), math.log(u_min), 1.0)
    if abs(excess(u1)) > tol:
        raise SolverFailure(f"left root tolerance not met for t1={t1}")

    # Right root, censored at the ceiling.
    u_ceiling = q_ceiling * n
    censored = u_ceiling <= u_min or excess(u_ceiling) < 0.0
    if censored:
        q2 = q_ceiling
    else:
        u2 = _bisect_log(excess, math.log(u_ceiling), math.log(u_min), 1.0)
        if abs(excess(u2)) > tol:
            raise SolverFailure(f"right root tolerance not met for t1={t1}")
        q2 = u2 / n

    return QInterval(
        q1=u1 / n,
        q2=q2,
        gamma=q2,
        r_min=r_min,
        q_at_min=q_at_min,
        q2_censored=censored,
    )
