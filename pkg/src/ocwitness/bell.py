"""Bell scenarios in nonnegative payoff form: local bound and quantum value."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ._enumeration import argmax_first, check_budget, count_maps, map_blocks
from .quantum import (
    DensityMatrix,
    Povm,
    ShapeMismatch,
    ZERO_BRANCH,
    born,
    partial_trace_A,
    unnormalized_collapse,
)

TIE_TOL = 1e-12


@dataclass(eq=False)
class BellScenario:
    """Payoff ``coeffs[x, y, u, v] >= 0`` and setting prior ``prior[x, y]``."""

    coeffs: np.ndarray
    prior: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        self.prior = np.asarray(self.prior, dtype=float)

    @property
    def n_x(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_y(self) -> int:
        return self.coeffs.shape[1]

    @property
    def n_u(self) -> int:
        return self.coeffs.shape[2]

    @property
    def n_v(self) -> int:
        return self.coeffs.shape[3]

    def problems(self) -> list[str]:
        out = []
        if self.coeffs.ndim != 4:
            return ["coeffs must have shape (n_x, n_y, n_u, n_v)"]
        if (self.coeffs < 0).any():
            out.append("coefficients must be nonnegative")
        if self.prior.shape != self.coeffs.shape[:2]:
            out.append("prior shape does not match (n_x, n_y)")
        else:
            if (self.prior < 0).any():
                out.append("prior has negative entries")
            if abs(self.prior.sum() - 1) > 1e-12:
                out.append("prior not normalized")
        return out

    def check(self) -> None:
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def fingerprint(self) -> str:
        h = hashlib.sha256(np.ascontiguousarray(self.coeffs).tobytes())
        h.update(np.ascontiguousarray(self.prior).tobytes())
        return h.hexdigest()[:16]


@dataclass(eq=False)
class QuantumRealization:
    state: DensityMatrix
    dims: tuple[int, int]
    alice: list[Povm]
    bob: list[Povm]

    def check(self, scenario: BellScenario | None = None) -> None:
        d_a, d_b = self.dims
        if self.state.dim != d_a * d_b:
            raise ShapeMismatch("shared state dimension is not d_A * d_B")
        if any(p.dim != d_a for p in self.alice) or any(p.dim != d_b for p in self.bob):
            raise ShapeMismatch("POVM dimensions disagree with (d_A, d_B)")
        if scenario is None:
            return
        if len(self.alice) != scenario.n_x or len(self.bob) != scenario.n_y:
            raise ShapeMismatch("realization settings do not match the scenario")
        if any(p.n_outcomes != scenario.n_u for p in self.alice) or any(
            p.n_outcomes != scenario.n_v for p in self.bob
        ):
            raise ShapeMismatch("realization outcome counts do not match the scenario")


@dataclass
class LocalStrategy:
    alice: tuple[int, ...]
    bob: tuple[int, ...]


def local_bound(scenario: BellScenario, budget: int | None = None) -> tuple[float, LocalStrategy]:
    """Exact local-realist maximum.

    Shared randomness mixes deterministic assignments and the payoff is
    affine in the mixture, so deterministic ``(lambda_A, lambda_B)`` suffice.
    Alice's assignments are enumerated and Bob best-responds per ``y``.
    """
    scenario.check()
    check_budget("local strategies", count_maps(scenario.n_x, scenario.n_u), budget)
    weighted = scenario.coeffs * scenario.prior[:, :, None, None]
    rows = np.arange(scenario.n_x)
    best_value, best_alice = -np.inf, None
    for _, block in map_blocks(scenario.n_x, scenario.n_u, block=4096):
        # scores[k, y, v] = sum_x weighted[x, y, e_k(x), v]
        picked = weighted.transpose(0, 2, 1, 3)[rows[None, :], block]
        scores = picked.sum(axis=1)
        values = scores.max(axis=2).sum(axis=1)
        i = argmax_first(values, TIE_TOL)
        if values[i] > best_value + TIE_TOL:
            best_value, best_alice = float(values[i]), block[i].copy()
    scores = weighted.transpose(0, 2, 1, 3)[rows, best_alice].sum(axis=0)
    bob = tuple(argmax_first(row, TIE_TOL) for row in scores)
    return best_value, LocalStrategy(tuple(int(u) for u in best_alice), bob)


def local_strategy_value(scenario: BellScenario, strategy: LocalStrategy) -> float:
    total = 0.0
    for x in range(scenario.n_x):
        for y in range(scenario.n_y):
            total += scenario.prior[x, y] * scenario.coeffs[x, y, strategy.alice[x], strategy.bob[y]]
    return total


def correlations(realization: QuantumRealization) -> np.ndarray:
    """``P[x, y, u, v] = tr[rho (A^x_u (x) B^y_v)]``."""
    rho = realization.state.matrix
    a = realization.alice
    b = realization.bob
    out = np.zeros((len(a), len(b), a[0].n_outcomes, b[0].n_outcomes))
    for x, ax in enumerate(a):
        for y, by in enumerate(b):
            for u in range(ax.n_outcomes):
                for v in range(by.n_outcomes):
                    out[x, y, u, v] = born(rho, np.kron(ax[u], by[v]))
    return out


def bell_quantum_value(scenario: BellScenario, realization: QuantumRealization) -> float:
    scenario.check()
    realization.check(scenario)
    p = correlations(realization)
    return float((scenario.coeffs * scenario.prior[:, :, None, None] * p).sum())


def alice_marginals_and_collapses(
    realization: QuantumRealization,
) -> tuple[np.ndarray, list[list[DensityMatrix | None]]]:
    """``p_Q(u | x)`` and Bob's conditional states ``rho^B_{u|x}``.

    Branches with probability below ``1e-12`` get weight 0 and state ``None``.
    """
    realization.check()
    d_a, d_b = realization.dims
    rho = realization.state.matrix
    n_u = realization.alice[0].n_outcomes
    probs = np.zeros((len(realization.alice), n_u))
    states: list[list[DensityMatrix | None]] = []
    for x, povm in enumerate(realization.alice):
        row = []
        for u in range(povm.n_outcomes):
            sub = unnormalized_collapse(rho, povm[u], d_a, d_b)
            p = float(np.trace(sub).real)
            if p < ZERO_BRANCH:
                row.append(None)
                continue
            probs[x, u] = p
            row.append(DensityMatrix((sub + sub.conj().T) / (2 * p)))
        states.append(row)
    probs /= probs.sum(axis=1, keepdims=True)
    return probs, states


def bob_reduced_state(realization: QuantumRealization) -> np.ndarray:
    d_a, d_b = realization.dims
    return partial_trace_A(realization.state.matrix, d_a, d_b)
