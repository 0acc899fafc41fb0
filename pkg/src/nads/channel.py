"""Nano-communication channel between the virtual transmitter and a sensor.

The transmitter emits a square pulse of concentration ``L_ex`` for ``t_H``
seconds (bit A) or nothing (bit B). Receptor binding follows first-order
kinetics; what is left over from a pulse leaks into the next interval, which
makes the binary channel depend on the previously received bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularChannelError
from .statmath import check_probability

A, B = 0, 1  # row/column index of each molecular bit


@dataclass(frozen=True)
class NccParameters:
    """Physical parameter set of the molecular channel.

    ``temperature``, ``distance`` and ``boltzmann`` are carried as metadata
    only; none of the channel expressions consume them.
    """

    receptors: float  # N, micromol
    pulse_duration: float  # t_H, s
    concentration: float  # L_ex, micromol/(liter s)
    binding_rate: float  # kappa_1
    release_rate: float  # kappa_-1
    threshold: float  # S
    prob_transmit_a: float = 0.5  # P_A
    sample_volume: float = 1000.0  # V, nm^3
    temperature: float = 310.0  # K
    distance: float = 1e-6  # m
    boltzmann: float = 1.380649e-23  # J/K

    def __post_init__(self) -> None:
        for name in ("receptors", "pulse_duration", "binding_rate", "release_rate",
                     "threshold", "sample_volume"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.concentration) and self.concentration >= 0.0):
            raise DomainError(f"concentration must be non-negative, got {self.concentration!r}")
        check_probability(self.prob_transmit_a, "prob_transmit_a")

    @property
    def binding_speed(self) -> float:
        """Relaxation rate ``kappa_-1 + kappa_1 L_ex`` of the bound fraction."""
        return self.release_rate + self.binding_rate * self.concentration

    @property
    def c_infinity(self) -> float:
        """Steady-state bound-receptor concentration under a sustained pulse."""
        return self.binding_rate * self.concentration * self.receptors / self.binding_speed


@dataclass(frozen=True)
class PulseResponse:
    n_a: float
    n_a_prime: float
    c_infinity: float
    n_b: float = 0.0
    n_b_prime: float = 0.0


@dataclass(frozen=True)
class TransitionMatrices:
    """Pair of row-stochastic 2x2 matrices indexed ``[sent, received]``.

    ``given_prev_a`` applies when bit A was received in the previous interval,
    ``given_prev_b`` when bit B was.
    """

    given_prev_a: np.ndarray
    given_prev_b: np.ndarray

    def __post_init__(self) -> None:
        for name in ("given_prev_a", "given_prev_b"):
            mat = np.array(getattr(self, name), dtype=float)
            if mat.shape != (2, 2):
                raise DomainError(f"{name} must be 2x2, got shape {mat.shape}")
            if np.any(mat < 0.0) or np.any(mat > 1.0):
                raise DomainError(f"{name} has entries outside [0, 1]")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    def p(self, sent: int, received: int, prev: int) -> float:
        mat = self.given_prev_a if prev == A else self.given_prev_b
        return float(mat[sent, received])


def bound_concentration(params: NccParameters, t: float) -> float:
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t!r}")
    return params.c_infinity * -math.expm1(-t * params.binding_speed)


def decay_concentration(c_t0: float, params: NccParameters, t: float, t0: float) -> float:
    """Bound concentration at ``t`` after the pulse switched off at ``t0``."""
    if t < t0:
        raise DomainError(f"decay evaluated before switch-off: t={t!r} < t0={t0!r}")
    return c_t0 * math.exp(-params.release_rate * (t - t0))


def pulse_response(params: NccParameters) -> PulseResponse:
    """Molecules received during a pulse and carried into the next interval.

    Both integrals are evaluated in closed form::

        N_A  = C_inf * (t_H - (1 - exp(-t_H r)) / r),   r = kappa_-1 + kappa_1 L_ex
        N'_A = N_A * (1 - exp(-kappa_-1 t_H)) / kappa_-1
    """
    t_h = params.pulse_duration
    rate = params.binding_speed
    c_inf = params.c_infinity
    n_a = c_inf * (t_h + math.expm1(-t_h * rate) / rate)
    n_a = max(n_a, 0.0)
    km1 = params.release_rate
    n_a_prime = n_a * -math.expm1(-km1 * t_h) / km1
    return PulseResponse(n_a=n_a, n_a_prime=n_a_prime, c_infinity=c_inf)


def transition_row(mean_count: float, threshold: float) -> np.ndarray:
    """One clamped row ``[E/S, 1 - E/S]``, re-normalized to sum to 1.

    A row that clamps to all zeros means nothing is ever delivered, so bit B
    is received with certainty.
    """
    if threshold <= 0:
        raise DomainError(f"threshold must be positive, got {threshold!r}")
    ratio = mean_count / threshold
    row = np.clip(np.array([ratio, 1.0 - ratio]), 0.0, 1.0)
    total = row.sum()
    if not total > 0.0:
        return np.array([0.0, 1.0])
    return row / total


def matrices_from_means(e_a_prev_a: float, e_b_prev_a: float,
                        e_a_prev_b: float, e_b_prev_b: float,
                        threshold: float) -> TransitionMatrices:
    """Build both matrices from the conditional mean received counts.

    ``e_x_prev_y`` is the expected count when bit x is sent and bit y was
    received in the previous interval.
    """
    return TransitionMatrices(
        given_prev_a=np.vstack([transition_row(e_a_prev_a, threshold),
                                transition_row(e_b_prev_a, threshold)]),
        given_prev_b=np.vstack([transition_row(e_a_prev_b, threshold),
                                transition_row(e_b_prev_b, threshold)]),
    )


def transition_matrices(params: NccParameters) -> TransitionMatrices:
    resp = pulse_response(params)
    return matrices_from_means(
        e_a_prev_a=resp.n_a + resp.n_a_prime,
        e_b_prev_a=resp.n_b + resp.n_a_prime,
        e_a_prev_b=resp.n_a + resp.n_b_prime,
        e_b_prev_b=resp.n_b_prime,
        threshold=params.threshold,
    )


def _prob_a_given_prev(matrices: TransitionMatrices, p_a: float, prev: int) -> float:
    return (matrices.p(A, A, prev) * p_a + matrices.p(B, A, prev) * (1.0 - p_a))


def steady_state_reception(matrices: TransitionMatrices, p_a: float) -> tuple[float, float]:
    """Stationary probabilities ``(P'_A, P'_B)`` of receiving each bit.

    ``P'_A`` solves ``x = a x + b (1 - x)`` with ``a`` (``b``) the chance of
    receiving A after A (after B) was received, averaged over the source.
    """
    p_a = check_probability(p_a, "p_a")
    a_after_a = _prob_a_given_prev(matrices, p_a, A)
    a_after_b = _prob_a_given_prev(matrices, p_a, B)
    denom = 1.0 - a_after_a + a_after_b
    if denom == 0.0:
        raise SingularChannelError(
            "reception chain is reducible (A always follows A, never follows B)")
    p_prime_a = a_after_b / denom
    p_prime_b = (1.0 - a_after_a) / denom
    return p_prime_a, p_prime_b


def reception_capacity(params: NccParameters, residual: float) -> float:
    """Expected bits per unit time when A is received: ``min(L_ex V / (S - N'), N)``.

    When the residual count alone reaches the threshold the quotient is taken
    as infinite and the receptor count ``N`` is the binding limit.
    """
    headroom = params.threshold - residual
    if headroom <= 0.0:
        return params.receptors
    return min(params.concentration * params.sample_volume / headroom, params.receptors)


def np_h_terms(matrices: TransitionMatrices, p_a: float,
               capacity_after_a: float, capacity_after_b: float) -> tuple[float, float, float, float]:
    """The four (sent, previously received) contributions to the healthy feature.

    Order: (A sent, A before), (A sent, B before), (B sent, A before),
    (B sent, B before). Branches where B is received contribute nothing.
    """
    p_prime_a, p_prime_b = steady_state_reception(matrices, p_a)
    p_b = 1.0 - p_a
    return (
        capacity_after_a * matrices.p(A, A, A) * p_a * p_prime_a,
        capacity_after_b * matrices.p(A, A, B) * p_a * p_prime_b,
        capacity_after_a * matrices.p(B, A, A) * p_b * p_prime_a,
        capacity_after_b * matrices.p(B, A, B) * p_b * p_prime_b,
    )


def healthy_feature_np_h(params: NccParameters,
                         matrices: TransitionMatrices | None = None) -> float:
    """Average number of A bits received per unit time in healthy tissue."""
    if matrices is None:
        matrices = transition_matrices(params)
    resp = pulse_response(params)
    terms = np_h_terms(
        matrices, params.prob_transmit_a,
        capacity_after_a=reception_capacity(params, resp.n_a_prime),
        capacity_after_b=reception_capacity(params, resp.n_b_prime),
    )
    return math.fsum(terms)
