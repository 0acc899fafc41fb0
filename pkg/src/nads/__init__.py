"""Two-tier nano-abnormality detection: molecular channel, Poisson sensor
tests, noisy OR fusion at the sink, and sensor-concentration design."""

from .channel import (NccParameters, PulseResponse, TransitionMatrices, bound_concentration,
                      decay_concentration, healthy_feature_np_h, pulse_response,
                      steady_state_reception, transition_matrices)
from .detector import (AbnormalityModel, DetectorSpec, Hypothesis, decide_glrt, decide_window,
                       mle_rate, ncc_detection_probability, ncc_misdetection_probability,
                       solve_tau_pp)
from .errors import ConfigError, DomainError, NadsError, SingularChannelError
from .fusion import (MccParameters, MsmProbabilities, dgn_decide, fusion_signal_distribution,
                     mcc_error_probabilities)
from .oracle import EmpiricalRates, TrialConfig, simulate_end_to_end, simulate_snm_tier
from .statmath import gaussian_q, poisson_cdf, poisson_pmf
from .system import (DesignConstraints, DesignResult, SystemPerformance, error_floor,
                     optimize_concentration, system_performance)

__version__ = "0.1.0"
