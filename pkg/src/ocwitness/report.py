"""End-to-end analysis of a CC task and quantum protocol as an oblivious-task witness."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from ._enumeration import DEFAULT_BUDGET
from .bell import (
    BellScenario,
    QuantumRealization,
    bell_quantum_value,
    local_bound,
)
from .constructions import bell_to_oc, cc_to_oc, pm_to_oc_protocol, relational_cc_to_oc
from .oblivious import (
    oc_quantum_value,
    pnc_upper_bound,
    sampled_oblivious_lower_bound,
    verify_oblivious,
)
from .quantum import EAProtocol, PMProtocol, ShapeMismatch, chi, ea_to_pm, ea_value, pm_value
from .tasks import CCTask, FunctionalCCTask, guessing_probability, optimum, require_valid

VERSION = "v1"


@dataclass
class AnalysisConfig:
    tol: float = 1e-9
    budget: int = DEFAULT_BUDGET
    samples: int = 1000
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


@dataclass
class ViolationReport:
    p_G: float
    p_C2: float
    p_Cd: float
    p_Qd: float
    chi: float
    d: int
    d_prime: int | None
    p_NC_upper: float
    p_NC_sampled_lower: float
    p_Q_star: float
    p_Q_star_formula: float
    oblivious_deviation: float
    alpha_NC: float
    alpha_Q_star: float
    beta_lower: float | None
    c12: bool | None
    c1: bool | None
    combined: bool
    combined_lhs: float
    violation: bool
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        doc = {"v": VERSION, "kind": "report"}
        for key, value in dataclasses.asdict(self).items():
            if isinstance(value, (np.floating, np.integer, np.bool_)):
                value = value.item()
            doc[key] = value
        return doc


def analyze(
    task: CCTask,
    protocol: PMProtocol | EAProtocol,
    d: int | None = None,
    config: AnalysisConfig | None = None,
) -> ViolationReport:
    """Run every classical, noncontextual and quantum quantity for one task/protocol pair.

    Entanglement-assisted protocols are first converted to prepare-and-measure
    form on dimension ``d' = d * e``; the oblivious construction then uses
    ``d'``.
    """
    config = config or AnalysisConfig()
    require_valid(task)
    d = task.d if d is None else int(d)
    notes: list[str] = []
    d_prime = None
    if isinstance(protocol, EAProtocol):
        protocol.check(task)
        if protocol.d != d:
            raise ShapeMismatch(f"EA protocol sends {protocol.d}-valued messages, analysis uses d={d}")
        pm = ea_to_pm(protocol)
        d_prime = pm.dim
        notes.append(f"entanglement-assisted protocol converted to dimension d'={d_prime}")
        p_qd = ea_value(task, protocol)
    else:
        pm = protocol
        pm.check(task)
        if pm.dim != d:
            raise ShapeMismatch(f"protocol dimension {pm.dim} differs from d={d}")
        p_qd = pm_value(task, pm)
    oc_dim = pm.dim

    p_g = guessing_probability(task)
    p_c2, _ = optimum(task, 2, config.budget)
    p_cd, _ = optimum(task, d, config.budget)
    chi_value = chi(task, pm)

    if isinstance(task, FunctionalCCTask):
        oc = cc_to_oc(task, oc_dim)
    else:
        oc = relational_cc_to_oc(task, oc_dim)
    upper = pnc_upper_bound(oc, config.budget).value
    lower = sampled_oblivious_lower_bound(oc, config.samples, config.seed)
    states, povms = pm_to_oc_protocol(pm)
    p_q_star = oc_quantum_value(oc, states, povms)
    check = verify_oblivious(states, oc.cond_a2, config.tol, target=np.eye(oc_dim) / oc_dim)
    if not check.ok:
        notes.append(f"oblivious check failed (deviation {check.deviation:.3e})")

    alpha_c2 = p_c2 - 0.5
    alpha_q = p_q_star - 0.5
    beta = alpha_q / alpha_c2 if alpha_c2 > 0 else None
    if beta is None:
        notes.append("p_C2 <= 1/2: advantage ratio undefined")
    c12 = c1 = None
    if d_prime is None:
        c12 = bounds.condition_c12(p_cd, d, chi_value, p_c2)
    else:
        c1 = bounds.condition_c1(p_cd, d_prime, chi_value, p_c2)
    lhs = bounds.combined_lhs(p_c2, p_g, d)

    return ViolationReport(
        p_G=p_g,
        p_C2=p_c2,
        p_Cd=p_cd,
        p_Qd=p_qd,
        chi=chi_value,
        d=d,
        d_prime=d_prime,
        p_NC_upper=upper,
        p_NC_sampled_lower=lower,
        p_Q_star=p_q_star,
        p_Q_star_formula=bounds.oc_value_formula(p_qd, oc_dim, chi_value),
        oblivious_deviation=max(check.deviation, check.target_deviation or 0.0),
        alpha_NC=upper - 0.5,
        alpha_Q_star=alpha_q,
        beta_lower=beta,
        c12=c12,
        c1=c1,
        combined=bool(lhs <= 1.0),
        combined_lhs=lhs,
        violation=bool(p_q_star > p_c2),
        notes=notes,
    )


def bell_analysis(
    scenario: BellScenario,
    realization: QuantumRealization,
    config: AnalysisConfig | None = None,
) -> dict:
    """Local bound, quantum value and the derived oblivious task's bounds."""
    config = config or AnalysisConfig()
    b_l, strategy = local_bound(scenario, config.budget)
    b_q = bell_quantum_value(scenario, realization)
    oc, states, povms = bell_to_oc(scenario, realization)
    upper = pnc_upper_bound(oc, config.budget).value
    s_q = oc_quantum_value(oc, states, povms)
    check = verify_oblivious(states, oc.cond_a2, config.tol)
    return {
        "v": VERSION,
        "kind": "bell-report",
        "local_bound": b_l,
        "local_strategy": {"alice": list(strategy.alice), "bob": list(strategy.bob)},
        "quantum_value": b_q,
        "oc_pnc_upper": upper,
        "oc_quantum_value": s_q,
        "oblivious_deviation": check.deviation,
        "oblivious": check.ok,
        "violation": bool(b_q > b_l + config.tol),
    }
