"""Monte Carlo simulation of both tiers, used to check the closed forms.

Trials are processed in fixed-size chunks. Chunk ``c`` draws from its own
stream ``SeedSequence(seed, spawn_key=(c,))``, so results depend only on the
configuration and not on the order (or thread) in which chunks run.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .detector import (AbnormalityModel, DetectorSpec, achieved_false_alarm,
                       glrt_alarms, ncc_detection_probability, window_alarms)
from .errors import DomainError
from .fusion import MccParameters, dgn_alarms

CHUNK = 8192


@dataclass(frozen=True)
class TrialConfig:
    trials: int
    seed: int
    detector: DetectorSpec
    mcc: MccParameters = MccParameters()
    abnormal: bool = True
    k: float = 2.0
    rule: Literal["window", "glrt"] = "window"
    sensor_mode: Literal["poisson", "analytic"] = "poisson"
    # Overrides the per-sensor alarm probability in analytic mode.
    sensor_alarm_probability: float | None = None

    def __post_init__(self) -> None:
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials!r}")
        if not (0 <= self.seed < 2**64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.rule not in ("window", "glrt"):
            raise DomainError(f"unknown detector rule {self.rule!r}")
        if self.sensor_mode not in ("poisson", "analytic"):
            raise DomainError(f"unknown sensor mode {self.sensor_mode!r}")
        if self.rule == "glrt" and self.detector.tau_glrt is None:
            raise DomainError("GLRT rule selected but detector has no tau_glrt")
        AbnormalityModel(self.k)

    @property
    def rate(self) -> float:
        """Per-observation Poisson mean under the simulated scenario."""
        return (self.k if self.abnormal else 1.0) * self.detector.np_h


@dataclass(frozen=True)
class EmpiricalRates:
    alarms: int
    trials: int
    abnormal: bool

    @property
    def rate(self) -> float:
        return self.alarms / self.trials

    @property
    def std_err(self) -> float:
        p = self.rate
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def p_d_hat(self) -> float | None:
        return self.rate if self.abnormal else None

    @property
    def p_f_hat(self) -> float | None:
        return None if self.abnormal else self.rate


def _chunks(trials: int) -> list[tuple[int, int]]:
    return [(c, min(CHUNK, trials - c * CHUNK)) for c in range(math.ceil(trials / CHUNK))]


def _stream(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _sensor_alarms(rng: np.random.Generator, config: TrialConfig, shape: tuple[int, ...]) -> np.ndarray:
    counts = rng.poisson(config.rate, size=shape + (config.detector.n_obs,))
    totals = counts.sum(axis=-1)
    if config.rule == "glrt":
        return glrt_alarms(totals, config.detector)
    return window_alarms(totals, config.detector)


def _run(config: TrialConfig, body, workers: int) -> EmpiricalRates:
    jobs = _chunks(config.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda job: body(_stream(config.seed, job[0]), job[1]), jobs))
    else:
        counts = [body(_stream(config.seed, c), size) for c, size in jobs]
    return EmpiricalRates(alarms=int(sum(counts)), trials=config.trials, abnormal=config.abnormal)


def simulate_snm_tier(config: TrialConfig, workers: int = 1) -> EmpiricalRates:
    """Empirical alarm rate of a single sensor."""

    def body(rng: np.random.Generator, size: int) -> int:
        return int(np.count_nonzero(_sensor_alarms(rng, config, (size,))))

    return _run(config, body, workers)


def sensor_alarm_probability(config: TrialConfig) -> float:
    """Closed-form per-sensor alarm probability for the simulated scenario."""
    if config.sensor_alarm_probability is not None:
        return config.sensor_alarm_probability
    if config.abnormal:
        return ncc_detection_probability(config.detector, AbnormalityModel(config.k))
    return achieved_false_alarm(config.detector)


def simulate_end_to_end(config: TrialConfig, workers: int = 1) -> EmpiricalRates:
    """Empirical alarm rate at the sink with ``mcc.m_sensors`` sensors.

    In ``poisson`` mode every sensor draws its own observations; in
    ``analytic`` mode each sensor alarms with its closed-form probability.
    """
    mcc = config.mcc
    m = mcc.m_sensors
    p_sensor = sensor_alarm_probability(config) if config.sensor_mode == "analytic" else None
    if config.sensor_mode == "analytic" and config.rule == "glrt":
        raise DomainError("analytic sensor mode has no closed form for the GLRT rule")

    def body(rng: np.random.Generator, size: int) -> int:
        if p_sensor is None:
            emitting = _sensor_alarms(rng, config, (size, m)).sum(axis=1)
        else:
            emitting = rng.binomial(m, p_sensor, size=size)
        u = mcc.amplitude * emitting + mcc.sigma * rng.standard_normal(size)
        return int(np.count_nonzero(dgn_alarms(u, mcc)))

    return _run(config, body, workers)
