"""End-to-end performance of the two-tier scheme and the sensor-count design."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError
from .fusion import MccParameters, mcc_error_probabilities
from .statmath import check_probability


@dataclass(frozen=True)
class SystemPerformance:
    p_d: float
    p_f: float

    @property
    def p_m(self) -> float:
        return 1.0 - self.p_d


def system_performance(p_m_ncc: float, p_f_ncc: float, p_m_mcc: float, p_f_mcc: float,
                       m: float) -> SystemPerformance:
    """Cascade ``m`` independent sensors through the OR-fused noisy channel.

    ``m`` may be fractional when tracing smooth curves; the design search
    only ever passes integers.
    """
    for name, value in (("p_m_ncc", p_m_ncc), ("p_f_ncc", p_f_ncc),
                        ("p_m_mcc", p_m_mcc), ("p_f_mcc", p_f_mcc)):
        check_probability(value, name)
    if not (math.isfinite(m) and m >= 1):
        raise DomainError(f"sensor concentration must be >= 1, got {m!r}")
    all_missed = p_m_ncc**m
    all_quiet = (1.0 - p_f_ncc) ** m
    p_d = (1.0 - all_missed) * (1.0 - p_m_mcc) + all_missed * p_f_mcc
    p_f = (1.0 - all_quiet) * (1.0 - p_m_mcc) + all_quiet * p_f_mcc
    return SystemPerformance(p_d=p_d, p_f=p_f)


def error_floor(p_m_mcc: float, p_f_mcc: float) -> float:
    """Limit of the system miss probability as the sensor count grows."""
    check_probability(p_f_mcc, "p_f_mcc")
    return check_probability(p_m_mcc, "p_m_mcc")


@dataclass(frozen=True)
class DesignConstraints:
    xi: float  # P_D must exceed this
    gamma: float  # P_F must stay below this
    m_max: int = 1000

    def __post_init__(self) -> None:
        check_probability(self.xi, "xi")
        check_probability(self.gamma, "gamma")
        if int(self.m_max) != self.m_max or self.m_max < 1:
            raise DomainError(f"m_max must be a positive integer, got {self.m_max!r}")


@dataclass(frozen=True)
class DesignResult:
    """Outcome of the minimum-concentration search.

    ``m_opt`` is ``None`` when no ``M <= m_max`` meets both constraints;
    ``diagnosis`` then says which constraint rules each side out.
    """

    m_opt: int | None
    at_opt: SystemPerformance | None
    before_opt: SystemPerformance | None
    diagnosis: str
    curve: list[SystemPerformance] = field(default_factory=list, repr=False)

    @property
    def feasible(self) -> bool:
        return self.m_opt is not None


def optimize_concentration(per_sensor: tuple[float, float], mcc: MccParameters,
                           constraints: DesignConstraints) -> DesignResult:
    """Smallest integer ``M`` with ``P_D > xi`` and ``P_F < gamma``.

    Both probabilities are non-decreasing in ``M``, so the feasible set is an
    interval and a linear scan up to ``m_max`` is conclusive.
    """
    p_m_ncc, p_f_ncc = per_sensor
    mcc_err = mcc_error_probabilities(mcc)
    curve: list[SystemPerformance] = []
    first_pd_ok = last_pf_ok = None
    for m in range(1, constraints.m_max + 1):
        perf = system_performance(p_m_ncc, p_f_ncc, mcc_err.p_m, mcc_err.p_f, m)
        curve.append(perf)
        pd_ok = perf.p_d > constraints.xi
        pf_ok = perf.p_f < constraints.gamma
        if pf_ok:
            last_pf_ok = m
        if pd_ok and first_pd_ok is None:
            first_pd_ok = m
        if pd_ok and pf_ok:
            before = curve[m - 2] if m > 1 else None
            return DesignResult(m, perf, before, f"feasible; minimum M = {m}", curve)
        if not pf_ok:
            # P_F never decreases in M, so no larger M can be feasible.
            break

    parts = []
    if last_pf_ok is None:
        parts.append(f"P_F < {constraints.gamma:g} fails already at M = 1")
    elif last_pf_ok == constraints.m_max:
        parts.append(f"P_F < {constraints.gamma:g} holds for all M <= {constraints.m_max}")
    else:
        parts.append(f"P_F < {constraints.gamma:g} holds only for M <= {last_pf_ok}")
    if first_pd_ok is None:
        m_needed = _min_m_for_detection(p_m_ncc, mcc_err.p_m, mcc_err.p_f, constraints.xi)
        if m_needed is None:
            parts.append(f"P_D > {constraints.xi:g} is unreachable at any M "
                         f"(error floor {mcc_err.p_m:.4g})")
        else:
            parts.append(f"P_D > {constraints.xi:g} needs M >= {m_needed}")
    else:
        parts.append(f"P_D > {constraints.xi:g} holds from M = {first_pd_ok}")
    return DesignResult(None, None, None, "infeasible: " + "; ".join(parts), curve)


def _min_m_for_detection(p_m_ncc: float, p_m_mcc: float, p_f_mcc: float,
                         xi: float) -> int | None:
    # P_D = (1 - p_m_mcc) - x (1 - p_m_mcc - p_f_mcc) with x = p_m_ncc**M.
    gap = 1.0 - p_m_mcc - p_f_mcc
    if (1.0 - p_m_mcc) <= xi or gap <= 0 or p_m_ncc >= 1.0:
        return None
    if p_m_ncc <= 0.0:
        return 1
    x_max = ((1.0 - p_m_mcc) - xi) / gap
    m = max(1, math.ceil(math.log(x_max) / math.log(p_m_ncc)))
    while system_performance(p_m_ncc, 0.0, p_m_mcc, p_f_mcc, m).p_d <= xi:
        m += 1
    while m > 1 and system_performance(p_m_ncc, 0.0, p_m_mcc, p_f_mcc, m - 1).p_d > xi:
        m -= 1
    return m
