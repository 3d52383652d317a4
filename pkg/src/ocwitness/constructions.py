"""Mechanical constructions of oblivious tasks and their quantum protocols.

- :func:`cc_to_oc`: ``a = (x, a2)``, ``b = y``, goal ``f(x, y) xor a2`` with
  ``p(a2 = 0 | x) = 1/d``.
- :func:`relational_cc_to_oc`: same, with the outcome involution replacing xor.
- :func:`pm_to_oc_protocol`: the CC states plus their orthogonal mixtures.
- :func:`dual_cc_to_oc`: ``a = (y, z)``, ``b = x``, states ``M^y_z / tr M^y_z``.
- :func:`bell_to_oc`: ``a = (x, u)``, ``b = y``, Bob's collapsed states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bell import BellScenario, QuantumRealization, alice_marginals_and_collapses
from .oblivious import OCTask
from .quantum import DensityMatrix, PMProtocol, Povm, orthogonal_mixture
from .tasks import FunctionalCCTask, RelationalCCTask, require_valid, task_fingerprint

KINDS = ("primary", "dual", "relational", "bell")


@dataclass
class ConstructionRecord:
    kind: str
    source_id: str
    d: int | None = None
    notes: list[str] = field(default_factory=list)
    flip: list[int] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown construction kind {self.kind!r}")
        if self.kind == "relational" and self.flip is None:
            raise ValueError("relational construction records need the outcome flip")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "source_id": self.source_id, "d": self.d, "notes": list(self.notes)}
        if self.flip is not None:
            out["flip"] = [int(v) for v in self.flip]
        return out


def flip_weights(d: int) -> np.ndarray:
    if d < 2:
        raise ValueError("d must be >= 2")
    return np.array([1.0 / d, (d - 1.0) / d])


def cc_to_oc(task: FunctionalCCTask, d: int | None = None) -> OCTask:
    """Oblivious task whose noncontextual bound is at most the 2-level classical value."""
    require_valid(task)
    d = task.d if d is None else int(d)
    cond_row = flip_weights(d)
    payoff = np.zeros((task.n_x, 2, task.n_y, 2))
    for a2 in (0, 1):
        goal = task.f ^ a2
        for c in (0, 1):
            payoff[:, a2, :, c] = task.prior * cond_row[a2] * (goal == c)
    record = ConstructionRecord("primary", task_fingerprint(task), d)
    return OCTask(np.tile(cond_row, (task.n_x, 1)), payoff, record)


def relational_cc_to_oc(
    task: RelationalCCTask, d: int | None = None, flip=None
) -> OCTask:
    """Relational analogue of :func:`cc_to_oc`.

    For ``a2 = 0`` Bob must land in ``R(x, y)``; for ``a2 = 1`` in its image
    under the outcome involution ``flip``.
    """
    require_valid(task)
    flip = task.flip if flip is None else np.asarray(flip, dtype=np.int64)
    if flip is None:
        raise ValueError("relational construction needs an outcome involution (flip)")
    if not np.array_equal(flip[flip], np.arange(task.n_z)):
        raise ValueError("flip is not an involution")
    d = task.d if d is None else int(d)
    cond_row = flip_weights(d)
    rel = task.relation
    flipped = np.zeros_like(rel)
    flipped[:, :, flip] = rel
    payoff = np.stack(
        [task.prior[:, :, None] * cond_row[0] * rel, task.prior[:, :, None] * cond_row[1] * flipped],
        axis=1,
    )
    record = ConstructionRecord(
        "relational", task_fingerprint(task), d, flip=[int(v) for v in flip]
    )
    return OCTask(np.tile(cond_row, (task.n_x, 1)), payoff, record)


def pm_to_oc_protocol(protocol: PMProtocol) -> tuple[list[list[DensityMatrix]], list[Povm]]:
    """States ``[rho_x, (I - rho_x)/(d - 1)]`` per ``x``; measurements unchanged."""
    protocol.check()
    if protocol.dim < 2:
        raise ValueError("orthogonal mixtures need dimension >= 2")
    states = [[rho, orthogonal_mixture(rho)] for rho in protocol.states]
    return states, list(protocol.measurements)


def dual_cc_to_oc(
    task: FunctionalCCTask, protocol: PMProtocol, tol: float = 1e-12
) -> tuple[OCTask, list[list[DensityMatrix | None]], list[Povm]]:
    """Dual construction: Alice prepares normalized effects, Bob tests the CC states.

    ``p(z | y) = tr(M^y_z) / d``; effects of zero trace get weight 0 and no
    state. Bob's measurement for ``b = x`` is ``{rho_x, I - rho_x}``.
    """
    require_valid(task)
    protocol.check(task)
    d = protocol.dim
    traces = np.array([[np.trace(e).real for e in m.effects] for m in protocol.measurements])
    cond = traces / d
    cond[cond < tol] = 0.0
    cond /= cond.sum(axis=1, keepdims=True)
    # p(y, x) with b = x: payoff[y, z, x, c] = p(x, y) p(z | y) [c = f(x, y) xor z]
    payoff = np.zeros((task.n_y, 2, task.n_x, 2))
    for z in (0, 1):
        goal = (task.f ^ z).T
        for c in (0, 1):
            payoff[:, z, :, c] = task.prior.T * cond[:, z : z + 1] * (goal == c)
    states: list[list[DensityMatrix | None]] = []
    for y, meas in enumerate(protocol.measurements):
        row = []
        for z in (0, 1):
            if cond[y, z] == 0:
                row.append(None)
            else:
                eff = meas[z]
                row.append(DensityMatrix((eff + eff.conj().T) / (2 * traces[y, z])))
        states.append(row)
    povms = [Povm(np.stack([s.matrix, np.eye(d) - s.matrix])) for s in protocol.states]
    record = ConstructionRecord("dual", task_fingerprint(task), d)
    return OCTask(cond, payoff, record), states, povms


def bell_to_oc(
    scenario: BellScenario, realization: QuantumRealization
) -> tuple[OCTask, list[list[DensityMatrix | None]], list[Povm]]:
    """Oblivious task and protocol from a Bell scenario and a quantum realization.

    ``p(x, u, y) = p(x, y) p_Q(u | x)``; payoff ``c_{x,y}(u, v) p(x, u, y)``;
    Alice sends Bob's collapsed state for ``(x, u)``; Bob keeps his Bell
    measurements. Zero-probability ``(x, u)`` branches carry no state.
    """
    scenario.check()
    realization.check(scenario)
    probs, collapsed = alice_marginals_and_collapses(realization)
    payoff = (
        scenario.coeffs.transpose(0, 2, 1, 3)
        * scenario.prior[:, None, :, None]
        * probs[:, :, None, None]
    )
    record = ConstructionRecord("bell", scenario.fingerprint())
    return OCTask(probs, payoff, record), collapsed, list(realization.bob)
