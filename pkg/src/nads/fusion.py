"""Micro-communication tier: sensor messages over an AWGN channel to the sink.

Each alarming sensor sends amplitude ``G``; the sink observes the sum of all
messages plus Gaussian noise and applies the OR rule with a fixed threshold
at ``G / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .detector import Hypothesis
from .errors import DomainError
from .statmath import check_probability, gaussian_q


@dataclass(frozen=True)
class MccParameters:
    amplitude: float = 1.0  # G
    sigma: float = 0.1  # noise standard deviation
    m_sensors: int = 1  # sensors per sample volume

    def __post_init__(self) -> None:
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise DomainError(f"message amplitude must be positive, got {self.amplitude!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"noise sigma must be positive, got {self.sigma!r}")
        if int(self.m_sensors) != self.m_sensors or self.m_sensors < 1:
            raise DomainError(f"sensor count must be a positive integer, got {self.m_sensors!r}")

    @property
    def threshold(self) -> float:
        return 0.5 * self.amplitude


@dataclass(frozen=True)
class MsmProbabilities:
    """Per-sensor message emission probabilities under each hypothesis."""

    p_emit_given_abnormal: float  # 1 - P_M^NCC
    p_emit_given_healthy: float  # P_F^NCC

    def __post_init__(self) -> None:
        check_probability(self.p_emit_given_abnormal, "p_emit_given_abnormal")
        check_probability(self.p_emit_given_healthy, "p_emit_given_healthy")


class MccErrors(NamedTuple):
    p_m: float
    p_f: float

    @property
    def p_e(self) -> float:
        """Error probability under equal priors."""
        return 0.5 * (self.p_m + self.p_f)


def dgn_decide(u: float, params: MccParameters) -> Hypothesis:
    if not math.isfinite(u):
        raise DomainError(f"received signal must be finite, got {u!r}")
    return Hypothesis.H1 if u >= params.threshold else Hypothesis.H0


def dgn_alarms(u: np.ndarray, params: MccParameters) -> np.ndarray:
    return np.asarray(u) >= params.threshold


def mcc_error_probabilities(params: MccParameters) -> MccErrors:
    """Worst-case (single message) error pair ``Q(G / 2 sigma)`` for both kinds."""
    q = gaussian_q(params.amplitude / (2.0 * params.sigma))
    return MccErrors(q, q)


@dataclass(frozen=True)
class FusionMixture:
    """Law of ``U = G * Binomial(M, p) + Normal(0, sigma^2)``."""

    weights: np.ndarray
    means: np.ndarray
    sigma: float

    def _z(self, u: float) -> np.ndarray:
        return (u - self.means) / self.sigma

    def sf(self, u: float) -> float:
        """``P(U >= u)``."""
        tails = np.array([gaussian_q(z) for z in self._z(u)])
        return float(np.dot(self.weights, tails))

    def cdf(self, u: float) -> float:
        tails = np.array([gaussian_q(-z) for z in self._z(u)])
        return float(np.dot(self.weights, tails))

    def pdf(self, u: float) -> float:
        z = self._z(u)
        dens = np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))
        return float(np.dot(self.weights, dens))

    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.choice(len(self.weights), size=size, p=self.weights)
        return self.means[idx] + self.sigma * rng.standard_normal(size)


def fusion_signal_distribution(msm: MsmProbabilities, params: MccParameters,
                               abnormal: bool) -> FusionMixture:
    p = msm.p_emit_given_abnormal if abnormal else msm.p_emit_given_healthy
    m = params.m_sensors
    counts = np.arange(m + 1)
    weights = np.array([math.comb(m, c) * p**c * (1.0 - p) ** (m - c) for c in counts])
    return FusionMixture(weights=weights, means=params.amplitude * counts.astype(float),
                         sigma=params.sigma)
