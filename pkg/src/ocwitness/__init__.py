"""Oblivious communication tasks built from communication-complexity problems.

Classical and quantum values of one-way communication tasks, the oblivious
tasks derived from them, preparation-noncontextual bounds, Bell-scenario
conversions and a linear-programming check for noncontextual models.
"""

from ._enumeration import DEFAULT_BUDGET, BudgetExceeded
from .bell import BellScenario, LocalStrategy, QuantumRealization, bell_quantum_value, local_bound
from .constructions import (
    ConstructionRecord,
    bell_to_oc,
    cc_to_oc,
    dual_cc_to_oc,
    pm_to_oc_protocol,
    relational_cc_to_oc,
)
from .oblivious import (
    OCTask,
    ObliviousEncoding,
    PNCBound,
    extremal_to_cc_strategy,
    oc_quantum_value,
    pnc_upper_bound,
    sampled_oblivious_lower_bound,
    verify_oblivious,
)
from .ontology import OntologyResult, OperationalFragment, pnc_model_exists
from .quantum import DensityMatrix, EAProtocol, PMProtocol, Povm, chi, ea_to_pm, ea_value, pm_value
from .report import AnalysisConfig, ViolationReport, analyze, bell_analysis
from .tasks import (
    ClassicalStrategy,
    FunctionalCCTask,
    InvalidTaskError,
    RelationalCCTask,
    classical_optimum,
    guessing_probability,
    optimum,
    strategy_value,
    validate_task,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BUDGET",
    "AnalysisConfig",
    "BellScenario",
    "BudgetExceeded",
    "ClassicalStrategy",
    "ConstructionRecord",
    "DensityMatrix",
    "EAProtocol",
    "FunctionalCCTask",
    "InvalidTaskError",
    "LocalStrategy",
    "OCTask",
    "ObliviousEncoding",
    "OntologyResult",
    "OperationalFragment",
    "PMProtocol",
    "PNCBound",
    "Povm",
    "QuantumRealization",
    "RelationalCCTask",
    "ViolationReport",
    "analyze",
    "bell_analysis",
    "bell_quantum_value",
    "bell_to_oc",
    "cc_to_oc",
    "chi",
    "classical_optimum",
    "dual_cc_to_oc",
    "ea_to_pm",
    "ea_value",
    "extremal_to_cc_strategy",
    "guessing_probability",
    "local_bound",
    "oc_quantum_value",
    "optimum",
    "pm_to_oc_protocol",
    "pm_value",
    "pnc_model_exists",
    "pnc_upper_bound",
    "relational_cc_to_oc",
    "sampled_oblivious_lower_bound",
    "strategy_value",
    "validate_task",
    "verify_oblivious",
]
