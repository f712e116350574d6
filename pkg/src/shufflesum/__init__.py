"""Differentially private real summation in the shuffle model.

Protocols: one-level blanket randomized response, the recursive
multi-message protocol, the secure-aggregation (IKOS) protocol, and
central/local baselines, together with planners, analytic error bounds,
security checks and a seeded experiment harness.
"""

from .errors import (
    InfeasibleParametersError,
    IngestionError,
    ParameterError,
    ProtocolError,
    ResourceError,
)
from .sampling import RngStream
from .shuffle import ShuffleProtocol, View, canonical_view, execute, identity_protocol
from .single import SingleParams, mse_bound_single, plan_single, single_message_protocol
from .recursive import (
    RecursiveParams,
    mse_bound_recursive,
    optimize_recursive_params,
    plan_recursive_advanced,
    plan_recursive_basic,
    recursive_protocol,
)
from .ikos import (
    IkosParams,
    ikos_protocol,
    messages_improved,
    messages_original,
    messages_prior,
    mse_bound_ikos,
    plan_ikos,
    sigma_from_delta,
)
from .experiment import ExperimentConfig, ExperimentReport, plan_protocol, run_experiment

__version__ = "0.1.0"
