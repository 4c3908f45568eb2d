from priorlab.flows.layers import (
    GAMMA_FLOOR,
    SIGMA_FLOOR,
    Actnorm,
    CouplingLayer,
)
from priorlab.flows.stack import (
    FlowStack,
    flow_forward,
    flow_inverse,
    flow_log_prob,
    flow_sample,
    standard_normal_log_prob,
)

__all__ = [
    "Actnorm",
    "CouplingLayer",
    "FlowStack",
    "GAMMA_FLOOR",
    "SIGMA_FLOOR",
    "flow_forward",
    "flow_inverse",
    "flow_log_prob",
    "flow_sample",
    "standard_normal_log_prob",
]
