"""Co-evolution of population behavior and environmental impact.

Layers: exact stochastic simulation on a network (:mod:`coevo.abm`), the
mean-field node and planar ODEs (:mod:`coevo.meanfield`), phase-plane
analysis (:mod:`coevo.analysis`) and impact-feedback policies
(:mod:`coevo.control`).
"""

__version__ = "0.1.0"

from .errors import (AssumptionError, CoevoError, IntegrationError, InvariantViolation,
                     ParameterError, SimulationOverflow)
from .model import (REFERENCE_PARAMS, Graph, ModelParams, growth_rate, mf_incentives,
                    node_incentives, node_rates, validate_assumptions)

__all__ = [
    "__version__", "AssumptionError", "CoevoError", "IntegrationError", "InvariantViolation",
    "ParameterError", "SimulationOverflow", "REFERENCE_PARAMS", "Graph", "ModelParams",
    "growth_rate", "mf_incentives", "node_incentives", "node_rates", "validate_assumptions",
]
