"""Preparation-noncontextual ontological models for finite fragments.

An ontic state is identified with a deterministic response atom
``lambda: M -> k``. Any outcome-indeterministic response function is a
mixture of atoms, and refining each ontic state by its atom keeps every
preparation-noncontextuality constraint (they are linear in ``mu_P``), so
searching over distributions on atoms loses no generality and the
feasibility LP below is exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from ._enumeration import check_budget

FEASIBLE_TOL = 1e-9
INFEASIBLE_MARGIN = 1e-7


@dataclass(eq=False)
class OperationalFragment:
    """``stats[j][P, k] = p(k | P, M_j)`` for each measurement ``M_j``."""

    stats: list[np.ndarray]
    equivalences: np.ndarray | None = None

    def __post_init__(self):
        self.stats = [np.asarray(s, dtype=float) for s in self.stats]
        if self.equivalences is not None:
            self.equivalences = np.atleast_2d(np.asarray(self.equivalences, dtype=float))
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if not self.stats:
            return ["fragment needs at least one measurement"]
        n_p = self.stats[0].shape[0]
        for j, s in enumerate(self.stats):
            if s.ndim != 2 or s.shape[0] != n_p:
                out.append(f"stats[{j}] must have shape (n_P, k)")
                continue
            if (s < -1e-12).any() or np.abs(s.sum(axis=1) - 1).max() > 1e-9:
                out.append(f"stats[{j}] rows are not distributions")
        if self.equivalences is not None and self.equivalences.shape[1] != n_p:
            out.append("equivalence vectors must have one weight per preparation")
        return out

    @property
    def n_preparations(self) -> int:
        return self.stats[0].shape[0]

    @property
    def outcome_counts(self) -> list[int]:
        return [s.shape[1] for s in self.stats]

    def statistics_matrix(self) -> np.ndarray:
        """Rows indexed by ``(M, k)``, columns by preparation."""
        return np.vstack([s.T for s in self.stats])


@dataclass
class OntologyResult:
    status: str  # "feasible" | "infeasible" | "inconclusive"
    atoms: list[tuple[int, ...]]
    equivalences: np.ndarray
    model: np.ndarray | None = None
    residual: float = float("nan")
    messages: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def response_atoms(fragment: OperationalFragment, budget: int | None = None) -> list[tuple[int, ...]]:
    counts = fragment.outcome_counts
    check_budget("response atoms", int(np.prod(counts)), budget)
    return list(itertools.product(*(range(k) for k in counts)))


def operational_equivalences(fragment: OperationalFragment, tol: float = 1e-9) -> np.ndarray:
    """Basis ``(r, n_P)`` of zero-sum weight vectors with vanishing statistics."""
    s = fragment.statistics_matrix()
    a = np.vstack([s, np.ones((1, fragment.n_preparations))])
    basis = null_space(a, rcond=tol)
    return basis.T


def _response_matrix(fragment: OperationalFragment, atoms) -> np.ndarray:
    rows = []
    for j, k_j in enumerate(fragment.outcome_counts):
        for k in range(k_j):
            rows.append([1.0 if lam[j] == k else 0.0 for lam in atoms])
    return np.array(rows)


def model_statistics(fragment: OperationalFragment, atoms, model: np.ndarray) -> np.ndarray:
    """Statistics ``(M, k) x P`` reproduced by distributions ``model[P, lambda]``."""
    return _response_matrix(fragment, atoms) @ model.T


def pnc_model_exists(
    fragment: OperationalFragment,
    tol: float = FEASIBLE_TOL,
    equivalences: np.ndarray | None = None,
    budget: int | None = None,
) -> OntologyResult:
    """Decide whether a preparation-noncontextual model over atoms exists.

    Solves ``min s`` subject to ``mu_P >= 0``, ``sum_lambda mu_P = 1``,
    ``|R mu_P - p_P| <= s`` and ``sum_P w_P mu_P = 0`` for every equivalence
    ``w``. ``s* <= tol`` means feasible; ``s* > 1e-7`` is infeasible with the
    optimal ``s*`` as a robustness certificate; anything in between is
    reported as inconclusive.
    """
    atoms = response_atoms(fragment, budget)
    if equivalences is None:
        equivalences = (
            fragment.equivalences
            if fragment.equivalences is not None
            else operational_equivalences(fragment)
        )
    equivalences = np.atleast_2d(np.asarray(equivalences, dtype=float)).reshape(-1, fragment.n_preparations)
    n_p, n_l = fragment.n_preparations, len(atoms)
    resp = _response_matrix(fragment, atoms)
    target = fragment.statistics_matrix()
    n_rows = resp.shape[0]
    n_var = n_p * n_l + 1  # mu_P(lambda) then slack s

    def mu(p: int, row: np.ndarray) -> np.ndarray:
        full = np.zeros(n_var)
        full[p * n_l : (p + 1) * n_l] = row
        return full

    a_eq, b_eq = [], []
    for p in range(n_p):
        a_eq.append(mu(p, np.ones(n_l)))
        b_eq.append(1.0)
    for w in equivalences:
        for lam in range(n_l):
            row = np.zeros(n_var)
            row[np.arange(n_p) * n_l + lam] = w
            a_eq.append(row)
            b_eq.append(0.0)
    a_ub, b_ub = [], []
    for p in range(n_p):
        for r in range(n_rows):
            row = mu(p, resp[r])
            row[-1] = -1.0
            a_ub.append(row)
            b_ub.append(target[r, p])
            row = mu(p, -resp[r])
            row[-1] = -1.0
            a_ub.append(row)
            b_ub.append(-target[r, p])
    cost = np.zeros(n_var)
    cost[-1] = 1.0
    res = linprog(
        cost,
        A_ub=np.array(a_ub),
        b_ub=np.array(b_ub),
        A_eq=np.array(a_eq),
        b_eq=np.array(b_eq),
        bounds=[(0, None)] * n_var,
        method="highs",
    )
    if res.status != 0:
        return OntologyResult("inconclusive", atoms, equivalences, messages=[res.message])
    model = np.clip(res.x[:-1].reshape(n_p, n_l), 0.0, None)
    model /= model.sum(axis=1, keepdims=True)
    residual = float(np.abs(model_statistics(fragment, atoms, model) - target).max())
    slack = float(res.x[-1])
    if slack <= tol and residual <= max(tol, 1e-8):
        return OntologyResult("feasible", atoms, equivalences, model, residual)
    if slack > INFEASIBLE_MARGIN:
        return OntologyResult(
            "infeasible", atoms, equivalences, residual=slack,
            messages=[f"minimum statistics deviation {slack:.3e}"],
        )
    return OntologyResult(
        "inconclusive", atoms, equivalences, residual=slack,
        messages=[f"minimum statistics deviation {slack:.3e} within numerical margin"],
    )


def fragment_from_states(states, measurements) -> OperationalFragment:
    """Fragment statistics ``tr(rho_P E^M_k)`` from density matrices and POVMs."""
    stats = []
    for povm in measurements:
        stats.append(
            np.array([[np.einsum("ij,ji->", s.matrix, e).real for e in povm.effects] for s in states])
        )
    return OperationalFragment(stats)
