"""Sensor-level abnormality test on Poisson observations.

A sensor makes ``n`` Poisson observations with mean ``NP_R``; the healthy
value is ``NP_H`` and an abnormality scales it, ``NP_R = k * NP_H``. Two rules
are provided: the generalized likelihood-ratio test and the simplified
window test that accepts the healthy hypothesis when the sample mean stays
within ``tau''`` of ``NP_H``. Only the window test has closed-form
performance.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .statmath import poisson_cdf, poisson_sf, poisson_window

# Grid points closer than this to an integer are snapped before flooring.
_SNAP = 1e-9


class Hypothesis(enum.IntEnum):
    H0 = 0  # healthy
    H1 = 1  # abnormal


def _floor(x: float) -> int:
    r = round(x)
    if abs(x - r) < _SNAP:
        return int(r)
    return math.floor(x)


def acceptance_window(np_h: float, n_obs: int, tau_pp: float) -> tuple[int, int]:
    """Integer bounds ``(lo, hi)`` on the total count ``sum(y)`` that accept H0.

    ``lo = floor(max(n (NP_H - tau''), 0))`` and ``hi = floor(n (NP_H + tau''))``,
    the same boundaries the closed-form tail expressions use.
    """
    lo = _floor(max(n_obs * (np_h - tau_pp), 0.0))
    hi = _floor(n_obs * (np_h + tau_pp))
    return max(lo, 0), hi


@functools.lru_cache(maxsize=4096)
def _solve_grid_index(np_h: float, n_obs: int, eta1: float) -> int:
    lam = n_obs * np_h
    base = _floor(lam)
    j = 0
    while True:
        lo, hi = max(base - j, 0), base + j
        rejection = poisson_cdf(lo - 1, lam) + poisson_sf(hi, lam)
        if rejection <= eta1:
            return j
        j += 1


def solve_tau_pp(np_h: float, n_obs: int, eta1: float) -> float:
    """Smallest window half-width ``tau''`` whose false-alarm mass is within ``eta1``.

    The criterion only changes where ``n (NP_H +- tau'')`` crosses an integer,
    so the search walks the grid ``tau'' = j / n`` and returns the first hit.
    """
    _check_detector_args(np_h, n_obs, eta1)
    return _solve_grid_index(float(np_h), int(n_obs), float(eta1)) / n_obs


def _check_detector_args(np_h: float, n_obs: int, eta1: float) -> None:
    if not (math.isfinite(np_h) and np_h > 0):
        raise DomainError(f"NP_H must be positive, got {np_h!r}")
    if int(n_obs) != n_obs or n_obs < 1:
        raise DomainError(f"observation count must be a positive integer, got {n_obs!r}")
    if not (0.0 < eta1 < 1.0):
        raise DomainError(f"false-alarm budget must lie in (0, 1), got {eta1!r}")


@dataclass(frozen=True)
class DetectorSpec:
    np_h: float
    n_obs: int
    eta1: float
    tau_pp: float | None = None
    tau_glrt: float | None = None

    def __post_init__(self) -> None:
        _check_detector_args(self.np_h, self.n_obs, self.eta1)
        if self.tau_pp is not None and self.tau_pp < 0:
            raise DomainError(f"tau'' must be non-negative, got {self.tau_pp!r}")
        if self.tau_glrt is not None and not self.tau_glrt > 0:
            raise DomainError(f"GLRT threshold must be positive, got {self.tau_glrt!r}")

    @classmethod
    def calibrate(cls, np_h: float, n_obs: int, eta1: float,
                  tau_glrt: float | None = None) -> "DetectorSpec":
        """Build a spec with ``tau''`` solved for the false-alarm budget."""
        return cls(np_h, int(n_obs), eta1, solve_tau_pp(np_h, n_obs, eta1), tau_glrt)

    @property
    def window(self) -> tuple[int, int]:
        if self.tau_pp is None:
            raise DomainError("tau'' has not been solved for this detector")
        return acceptance_window(self.np_h, self.n_obs, self.tau_pp)


@dataclass(frozen=True)
class AbnormalityModel:
    k: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.k) and self.k > 0):
            raise DomainError(f"abnormality scale k must be positive, got {self.k!r}")

    def rate(self, np_h: float) -> float:
        return self.k * np_h


def mle_rate(counts: Sequence[int]) -> float:
    counts = list(counts)
    if not counts:
        raise DomainError("empty observation batch")
    if any(c < 0 for c in counts):
        raise DomainError("observation counts must be non-negative")
    return math.fsum(counts) / len(counts)


def _check_batch(counts: Sequence[int], spec: DetectorSpec) -> None:
    if len(counts) != spec.n_obs:
        raise DomainError(f"batch has {len(counts)} observations, detector expects {spec.n_obs}")


def glrt_statistic(mean: np.ndarray | float, np_h: float) -> np.ndarray | float:
    """``m (ln(m / NP_H) - 1)`` with the ``x ln x -> 0`` limit at ``m = 0``."""
    m = np.asarray(mean, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = np.where(m > 0, m * (np.log(m / np_h) - 1.0), 0.0)
    return stat if stat.ndim else float(stat)


def decide_glrt(counts: Sequence[int], spec: DetectorSpec) -> Hypothesis:
    if spec.tau_glrt is None:
        raise DomainError("GLRT threshold tau is not set")
    _check_batch(counts, spec)
    rhs = math.log(spec.tau_glrt) / spec.n_obs - spec.np_h
    return Hypothesis.H1 if glrt_statistic(mle_rate(counts), spec.np_h) > rhs else Hypothesis.H0


def glrt_alarms(totals: np.ndarray, spec: DetectorSpec) -> np.ndarray:
    """Vectorized GLRT decision on total counts; ``True`` means H1."""
    rhs = math.log(spec.tau_glrt) / spec.n_obs - spec.np_h
    return glrt_statistic(np.asarray(totals) / spec.n_obs, spec.np_h) > rhs


def decide_window(counts: Sequence[int], spec: DetectorSpec) -> Hypothesis:
    _check_batch(counts, spec)
    return Hypothesis(int(window_alarms(np.array([sum(counts)]), spec)[0]))


def window_alarms(totals: np.ndarray, spec: DetectorSpec) -> np.ndarray:
    """Vectorized window decision on total counts; ``True`` means H1."""
    lo, hi = spec.window
    totals = np.asarray(totals)
    return (totals < lo) | (totals > hi)


def ncc_detection_probability(spec: DetectorSpec, model: AbnormalityModel) -> float:
    """Chance the window test alarms when the mean rate is ``k NP_H``.

    Sum of both tails of ``Poisson(n k NP_H)`` outside the acceptance window.
    """
    lo, hi = spec.window
    lam = spec.n_obs * model.rate(spec.np_h)
    return min(1.0, poisson_cdf(lo - 1, lam) + poisson_sf(hi, lam))


def ncc_misdetection_probability(spec: DetectorSpec, model: AbnormalityModel) -> float:
    # Window mass computed directly; same value as 1 - P_D without cancellation.
    lo, hi = spec.window
    return poisson_window(lo, hi, spec.n_obs * model.rate(spec.np_h))


def achieved_false_alarm(spec: DetectorSpec) -> float:
    """Actual false-alarm rate of the discrete window (at most ``eta1``)."""
    return ncc_detection_probability(spec, AbnormalityModel(1.0))
