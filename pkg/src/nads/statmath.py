"""Poisson and Gaussian tail functions used by every detection stage.

Poisson sums are accumulated in the log domain with a single final
exponentiation, so rates of several hundred (``n * k * NP_H``) never overflow
a factorial. The regularized upper incomplete gamma function only ever appears
with integer shape, where ``Gamma(m + 1, lam) / m! = P(Y <= m)`` for
``Y ~ Poisson(lam)``; it is evaluated by that finite sum.
"""

from __future__ import annotations

import math

from .errors import DomainError

Probability = float

_LN_TINY = -745.0  # exp() underflows to 0.0 below this


def check_probability(value: float, name: str = "probability") -> float:
    """Return ``value`` as a float, rejecting anything outside ``[0, 1]``."""
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def _check_rate(lam: float) -> float:
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0.0:
        raise DomainError(f"Poisson rate must be positive and finite, got {lam!r}")
    return lam


def log_factorial(q: int) -> float:
    if q < 0:
        raise DomainError(f"factorial of negative integer {q}")
    return math.lgamma(q + 1.0)


def _log_pmf(q: int, lam: float) -> float:
    return q * math.log(lam) - lam - math.lgamma(q + 1.0)


def _logsumexp(logs: list[float]) -> float:
    if not logs:
        return -math.inf
    top = max(logs)
    if top == -math.inf:
        return top
    return top + math.log(math.fsum(math.exp(x - top) for x in logs))


def poisson_pmf(q: int, lam: float) -> Probability:
    """``exp(-lam) * lam**q / q!`` evaluated in log space."""
    lam = _check_rate(lam)
    if q < 0:
        raise DomainError(f"Poisson support starts at 0, got q={q}")
    return math.exp(_log_pmf(int(q), lam))


def _log_window(lo: int, hi: int, lam: float) -> float:
    """log P(lo <= Y <= hi), terms summed outward from the mode.

    Terms far out in either tail are dropped once they fall 40 nats below the
    running maximum; their total is < 1e-17 relative to what is kept.
    """
    lo = max(lo, 0)
    if hi < lo:
        return -math.inf
    mode = min(max(int(lam), lo), hi)
    log_lam = math.log(lam)
    start = _log_pmf(mode, lam)
    logs = [start]
    cur = start
    for q in range(mode + 1, hi + 1):
        cur += log_lam - math.log(q)
        logs.append(cur)
        if cur < start - 40.0 and q > lam:
            break
    cur = start
    for q in range(mode, lo, -1):
        cur -= log_lam - math.log(q)
        logs.append(cur)
        if cur < start - 40.0 and q < lam:
            break
    return _logsumexp(logs)


def poisson_cdf(m: int, lam: float) -> Probability:
    """``P(Y <= m)`` for ``Y ~ Poisson(lam)``; an empty sum (``m < 0``) gives 0."""
    lam = _check_rate(lam)
    m = int(m)
    if m < 0:
        return 0.0
    return min(1.0, math.exp(_log_window(0, m, lam)))


def poisson_sf(m: int, lam: float) -> Probability:
    """``P(Y > m)``, summed directly over the upper tail to keep relative accuracy."""
    lam = _check_rate(lam)
    m = int(m)
    if m < 0:
        return 1.0
    # Upper tail terms decay at least geometrically once q > lam, so a cap of
    # lam + 40 sqrt(lam) + 60 past max(m, lam) captures everything representable.
    stop = int(max(m, lam) + 40.0 * math.sqrt(lam) + 60.0)
    return min(1.0, math.exp(_log_window(m + 1, stop, lam)))


def poisson_window(lo: int, hi: int, lam: float) -> Probability:
    """``P(lo <= Y <= hi)``; equals ``poisson_cdf(hi) - poisson_cdf(lo - 1)``."""
    lam = _check_rate(lam)
    return min(1.0, math.exp(_log_window(int(lo), int(hi), lam)))


def gaussian_q(x: float) -> Probability:
    """Upper tail of the standard normal, ``P(Z > x)``.

    Uses ``erfc`` directly so that small tails keep full relative precision.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("gaussian_q of NaN")
    return 0.5 * math.erfc(x / math.sqrt(2.0))
