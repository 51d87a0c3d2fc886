"""Fully distributed termination detection for iterative optimization.

Agents running a synchronous iterative computation decide — using only
neighbor messages — when every agent's local stopping criterion holds, and
then all stop in the same round.  The package provides the basic protocol,
a fault-tolerant variant that survives corrupted messages, a round-based
simulator with message-layer fault injection, a consensus-ADMM driver as a
live criterion source, and a command line around them.
"""

from .admm import (AdmmCriterionSource, AdmmProblem, AdmmSolver,
                   SharedVariable, make_consensus_problem, solve_pooled)
from .basic import (BasicMessage, BasicTermState, init_basic, outbound_basic,
                    step_basic)
from .criteria import Schedule, admm_criterion, first_global_iteration
from .errors import (DisconnectedGraphError, GraphError, MessageError,
                     ScenarioError, ScenarioFormatError,
                     SimulationInvariantError, TermnetError)
from .faults import FaultScript
from .ft import (ClearEvent, FaultReport, FtMessage, FtTermState, StepEvents,
                 detect_faulty_neighbors, init_ft, outbound_ft, step_ft)
from .graph import CommGraph, make_topology
from .sim import (CheckResult, RunReport, Scenario, TraceConfig,
                  assert_propositions, failed_checks, measure_persistence,
                  run, savings_fraction)
from .tightness import TightInstance, find_tight_instance, persistence_bound

__version__ = "0.1.0"

__all__ = [
    "AdmmCriterionSource", "AdmmProblem", "AdmmSolver", "BasicMessage",
    "BasicTermState", "CheckResult", "ClearEvent", "CommGraph",
    "DisconnectedGraphError", "FaultReport", "FaultScript", "FtMessage",
    "FtTermState", "GraphError", "MessageError", "RunReport", "Scenario",
    "ScenarioError", "ScenarioFormatError", "Schedule", "SharedVariable",
    "SimulationInvariantError", "StepEvents", "TermnetError", "TightInstance",
    "TraceConfig", "admm_criterion", "assert_propositions",
    "detect_faulty_neighbors", "failed_checks", "find_tight_instance",
    "first_global_iteration", "init_basic", "init_ft",
    "make_consensus_problem", "make_topology", "measure_persistence",
    "outbound_basic", "outbound_ft", "persistence_bound", "run",
    "savings_fraction", "solve_pooled", "step_basic", "step_ft",
    "__version__",
]
