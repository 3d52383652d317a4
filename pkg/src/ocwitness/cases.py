"""Built-in instances: the 2->1 random access code, CHSH, hidden matching.

Priors left implicit in the literature are taken uniform, including Bob's
prior over matchings.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .bell import BellScenario, QuantumRealization
from .quantum import DensityMatrix, PMProtocol, Povm
from .tasks import FunctionalCCTask, RelationalCCTask

TOY_ANGLE = np.pi / 8

_Z_BASIS = np.eye(2)
_X_BASIS = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


class RacCase(NamedTuple):
    task: FunctionalCCTask
    optimal: PMProtocol
    toy: PMProtocol


class ChshCase(NamedTuple):
    scenario: BellScenario
    realization: QuantumRealization


class HiddenMatchingCase(NamedTuple):
    task: RelationalCCTask
    protocol: PMProtocol
    matchings: list[list[tuple[int, int]]]


def _bloch_state(rx: float, ry: float, rz: float) -> DensityMatrix:
    return DensityMatrix(
        0.5 * np.array([[1 + rz, rx - 1j * ry], [rx + 1j * ry, 1 - rz]])
    )


def rac_task() -> FunctionalCCTask:
    """Inputs ``x = 2 x1 + x2``; ``y = 0`` asks for ``x1``, ``y = 1`` for ``x2``."""
    f = np.array([[(x >> 1) & 1, x & 1] for x in range(4)])
    return FunctionalCCTask(f, np.full((4, 2), 1 / 8), d=2, name="rac-2to1")


def make_rac() -> RacCase:
    task = rac_task()
    measurements = [Povm.projective(_Z_BASIS), Povm.projective(_X_BASIS)]
    s = 1 / np.sqrt(2)
    optimal = [
        _bloch_state(s * (-1) ** (x & 1), 0.0, s * (-1) ** ((x >> 1) & 1)) for x in range(4)
    ]
    c, sn = np.cos(TOY_ANGLE), np.sin(TOY_ANGLE)
    toy = [
        DensityMatrix.pure([c, sn]),  # x1 x2 = 00
        DensityMatrix.pure([c, -sn]),  # 01
        DensityMatrix.pure([0, 1]),  # 10
        DensityMatrix.pure([0, 1]),  # 11
    ]
    return RacCase(task, PMProtocol(optimal, measurements), PMProtocol(toy, list(measurements)))


def make_chsh() -> ChshCase:
    """Success-form CHSH: payoff 1 iff ``u xor v = x y``; Tsirelson realization."""
    coeffs = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for u in range(2):
                for v in range(2):
                    coeffs[x, y, u, v] = float((u ^ v) == (x & y))
    scenario = BellScenario(coeffs, np.full((2, 2), 0.25))
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    state = DensityMatrix.pure(phi)

    def rotated(theta: float) -> Povm:
        return Povm.projective(
            np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        )

    alice = [rotated(0.0), rotated(np.pi / 4)]
    bob = [rotated(np.pi / 8), rotated(-np.pi / 8)]
    return ChshCase(scenario, QuantumRealization(state, (2, 2), alice, bob))


def xor_matchings(n: int) -> list[list[tuple[int, int]]]:
    """Perfect matchings ``{(i, i xor k)}`` for ``k = 1..n-1``.

    For ``n = 4`` this is the full set of three matchings; for larger ``n``
    it is a canonical one-factorization of the complete graph.
    """
    return [sorted({(min(i, i ^ k), max(i, i ^ k)) for i in range(n)}) for k in range(1, n)]


def make_hidden_matching(n: int = 4) -> HiddenMatchingCase:
    """Hidden matching on ``n`` nodes with outcome index ``2 * edge + t``.

    Alice sends ``n^{-1/2} sum_i (-1)^{x_i} |i>``; for matching ``y`` Bob
    measures the projectors onto ``(|i> + (-1)^t |j>)/sqrt(2)`` per edge.
    """
    if n not in (2, 4, 8):
        raise ValueError("hidden matching is supported for n in {2, 4, 8}")
    matchings = xor_matchings(n)
    n_x, n_y, n_z = 2**n, len(matchings), n
    bits = [[(x >> (n - 1 - i)) & 1 for i in range(n)] for x in range(n_x)]
    relation = np.zeros((n_x, n_y, n_z), dtype=bool)
    labels = []
    for y, edges in enumerate(matchings):
        labels.append([(i, j, t) for (i, j) in edges for t in (0, 1)])
        for x in range(n_x):
            for e, (i, j) in enumerate(edges):
                relation[x, y, 2 * e + (bits[x][i] ^ bits[x][j])] = True
    flip = np.arange(n_z) ^ 1
    task = RelationalCCTask(
        relation,
        np.full((n_x, n_y), 1 / (n_x * n_y)),
        d=n,
        outcome_labels=labels,
        flip=flip,
        name=f"hidden-matching-{n}",
    )
    states = [DensityMatrix.pure([(-1) ** b for b in bits[x]]) for x in range(n_x)]
    measurements = []
    for edges in matchings:
        basis = np.zeros((n, n_z))
        for e, (i, j) in enumerate(edges):
            for t in (0, 1):
                basis[i, 2 * e + t] = 1 / np.sqrt(2)
                basis[j, 2 * e + t] = (-1) ** t / np.sqrt(2)
        measurements.append(Povm.projective(basis))
    return HiddenMatchingCase(task, PMProtocol(states, measurements), matchings)
