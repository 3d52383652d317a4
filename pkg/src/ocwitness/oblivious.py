"""Oblivious-communication tasks with the oblivious variable fixed to ``a1``.

Alice receives ``a = (a1, a2)`` with ``a2 ~ p(a2 | a1)``, Bob receives ``b``
and answers ``c``. The figure of merit is ``sum W[a1, a2, b, c] p(c | a, b)``
where the payoff tensor ``W`` already carries the input prior.

Upper bound on the preparation-noncontextual value
--------------------------------------------------
Writing ``W = p(a2 | a1) * V``, any oblivious encoding with message ``m``
splits into per-message weights ``q_m(a1, .)`` that are distributions over
``a2`` for every ``a1``, so

    value <= max_q  sum_b max_c sum_{a1, a2} V[a1, a2, b, c] q(a1, a2).

The objective is convex in ``q`` and the feasible set is a product of
simplices, so the maximum sits at a deterministic choice ``a2 = e(a1)``.
:func:`pnc_upper_bound` enumerates those ``n_a2 ** n_a1`` vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ._enumeration import (
    argmax_first,
    check_budget,
    count_maps,
    map_blocks,
)
from .quantum import Povm, ShapeMismatch, born
from .tasks import (
    CCTask,
    ClassicalStrategy,
    FunctionalCCTask,
    RelationalCCTask,
    task_fingerprint,
)

TIE_TOL = 1e-12
OBLIVIOUS_TOL = 1e-9


class ProvenanceError(ValueError):
    pass


@dataclass(eq=False)
class OCTask:
    cond_a2: np.ndarray
    payoff: np.ndarray
    provenance: object | None = None

    def __post_init__(self):
        self.cond_a2 = np.asarray(self.cond_a2, dtype=float)
        self.payoff = np.asarray(self.payoff, dtype=float)
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.payoff.ndim != 4:
            return ["payoff must have shape (n_a1, n_a2, n_b, n_c)"]
        if self.cond_a2.shape != self.payoff.shape[:2]:
            out.append("cond_a2 shape does not match payoff (n_a1, n_a2)")
        elif (self.cond_a2 < 0).any() or np.abs(self.cond_a2.sum(axis=1) - 1).max() > 1e-12:
            out.append("cond_a2 rows are not distributions")
        if (self.payoff < 0).any():
            out.append("payoff has negative entries")
        return out

    @property
    def n_a1(self) -> int:
        return self.payoff.shape[0]

    @property
    def n_a2(self) -> int:
        return self.payoff.shape[1]

    @property
    def n_b(self) -> int:
        return self.payoff.shape[2]

    @property
    def n_c(self) -> int:
        return self.payoff.shape[3]

    def reduced_payoff(self) -> np.ndarray:
        """``V = W / p(a2 | a1)``, zero where ``p(a2 | a1) = 0``."""
        cond = self.cond_a2[:, :, None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(cond > 0, self.payoff / np.where(cond > 0, cond, 1.0), 0.0)
        return v


@dataclass
class ObliviousEncoding:
    """Stochastic encoding ``table[a1, a2, m] = p_E(m | a1, a2)``."""

    table: np.ndarray

    @property
    def n_messages(self) -> int:
        return self.table.shape[2]

    def message_marginals(self, cond_a2: np.ndarray) -> np.ndarray:
        """``p_E(m | a1)`` for every ``a1``; rows agree for oblivious encodings."""
        return np.einsum("ab,abm->am", cond_a2, self.table)

    def oblivious_deviation(self, cond_a2: np.ndarray) -> float:
        marg = self.message_marginals(cond_a2)
        return float(np.abs(marg - marg[0]).max())


@dataclass
class PNCBound:
    value: float
    encoding: tuple[int, ...]
    decoding: np.ndarray


def enumerate_extremal_encodings(
    n_a1: int, n_a2: int, budget: int | None = None
) -> Iterator[tuple[int, ...]]:
    """All deterministic maps ``a1 -> a2`` in lexicographic order."""
    check_budget("extremal encodings", count_maps(n_a1, n_a2), budget)
    return itertools.product(range(n_a2), repeat=n_a1)


def optimal_oc_decoding(task: OCTask, encoding: Sequence[int]) -> tuple[float, np.ndarray]:
    """Best single-message decoding for an extremal encoding.

    Returns the bound contribution ``sum_b max_c sum_a1 V[a1, e(a1), b, c]``
    and the decoding ``b -> c`` (ties to the lowest ``c``).
    """
    enc = np.asarray(encoding, dtype=np.int64)
    if enc.shape != (task.n_a1,):
        raise ShapeMismatch(f"encoding must have length n_a1={task.n_a1}")
    v = task.reduced_payoff()
    scores = v[np.arange(task.n_a1), enc].sum(axis=0)
    decoding = np.array([argmax_first(row, TIE_TOL) for row in scores], dtype=np.int64)
    value = float(scores[np.arange(task.n_b), decoding].sum())
    return value, decoding


def pnc_upper_bound(task: OCTask, budget: int | None = None) -> PNCBound:
    """Maximum of :func:`optimal_oc_decoding` over every extremal encoding.

    Raises
    ------
    BudgetExceeded
        If ``n_a2 ** n_a1`` exceeds ``budget``.
    """
    check_budget("extremal encodings", count_maps(task.n_a1, task.n_a2), budget)
    v = task.reduced_payoff()
    rows = np.arange(task.n_a1)
    best_value, best_enc = -np.inf, None
    for _, block in map_blocks(task.n_a1, task.n_a2, block=4096):
        scores = v[rows[None, :], block].sum(axis=1)
        values = scores.max(axis=2).sum(axis=1)
        i = argmax_first(values, TIE_TOL)
        if values[i] > best_value + TIE_TOL:
            best_value, best_enc = float(values[i]), tuple(int(e) for e in block[i])
    value, decoding = optimal_oc_decoding(task, best_enc)
    return PNCBound(value, best_enc, decoding)


def _random_coupling(p: np.ndarray, q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Exact coupling of ``p`` and ``q``: a random mixture of north-west-corner couplings."""
    def corner(order_p, order_q):
        j = np.zeros((len(p), len(q)))
        rp, rq = p[order_p].copy(), q[order_q].copy()
        i = k = 0
        while i < len(rp) and k < len(rq):
            t = min(rp[i], rq[k])
            j[order_p[i], order_q[k]] += t
            rp[i] -= t
            rq[k] -= t
            if rp[i] <= rq[k]:
                i += 1
            else:
                k += 1
        return j

    n = 3
    w = rng.dirichlet(np.ones(n))
    return sum(
        wi * corner(rng.permutation(len(p)), rng.permutation(len(q))) for wi in w
    )


def random_oblivious_encoding(
    cond_a2: np.ndarray, n_messages: int, rng: np.random.Generator
) -> ObliviousEncoding:
    """Random encoding satisfying the oblivious constraint by construction.

    A message distribution ``p_E(m)`` is drawn, then for every ``a1`` a random
    coupling ``J(a2, m)`` between ``p(a2 | a1)`` and ``p_E(m)``; the encoding is
    ``J(a2, m) / p(a2 | a1)`` (uniform where ``p(a2 | a1) = 0``).
    """
    n_a1, n_a2 = cond_a2.shape
    pm = rng.dirichlet(np.ones(n_messages))
    table = np.empty((n_a1, n_a2, n_messages))
    for a1 in range(n_a1):
        joint = _random_coupling(cond_a2[a1], pm, rng)
        for a2 in range(n_a2):
            c = cond_a2[a1, a2]
            table[a1, a2] = joint[a2] / c if c > 0 else np.full(n_messages, 1 / n_messages)
    table /= table.sum(axis=2, keepdims=True)
    return ObliviousEncoding(table)


def oblivious_encoding_value(task: OCTask, encoding: ObliviousEncoding) -> float:
    """Success of a stochastic encoding followed by Bob's per-message best response."""
    scores = np.einsum("ajbc,ajm->mbc", task.payoff, encoding.table)
    return float(scores.max(axis=2).sum())


def sampled_oblivious_lower_bound(
    task: OCTask, samples: int, seed: int, n_messages: int | None = None
) -> float:
    """Best value over ``samples`` random valid oblivious encodings."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    n_messages = n_messages or max(2, task.n_a2)
    best = -np.inf
    for _ in range(samples):
        enc = random_oblivious_encoding(task.cond_a2, n_messages, rng)
        best = max(best, oblivious_encoding_value(task, enc))
    return float(best)


def _check_oc_protocol(task: OCTask, states, povms: Sequence[Povm]) -> None:
    if len(states) != task.n_a1 or any(len(row) != task.n_a2 for row in states):
        raise ShapeMismatch("states table must be indexed [a1][a2]")
    if len(povms) != task.n_b:
        raise ShapeMismatch(f"need {task.n_b} measurements, got {len(povms)}")
    for b, povm in enumerate(povms):
        if povm.n_outcomes != task.n_c:
            raise ShapeMismatch(f"measurement {b} has {povm.n_outcomes} outcomes, need {task.n_c}")


def oc_quantum_value(task: OCTask, states, povms: Sequence[Povm]) -> float:
    """``sum W[a1, a2, b, c] tr(rho_{a1,a2} N^b_c)``.

    ``states[a1][a2]`` may be ``None`` only where the payoff carries no weight.
    """
    _check_oc_protocol(task, states, povms)
    total = 0.0
    for a1 in range(task.n_a1):
        for a2 in range(task.n_a2):
            w = task.payoff[a1, a2]
            rho = states[a1][a2]
            if rho is None:
                if w.any():
                    raise ShapeMismatch(f"missing state for weighted input ({a1}, {a2})")
                continue
            for b in range(task.n_b):
                for c in range(task.n_c):
                    if w[b, c]:
                        total += w[b, c] * born(rho.matrix, povms[b][c])
    return total


@dataclass
class ObliviousnessCheck:
    ok: bool
    deviation: float
    target_deviation: float | None = None


def verify_oblivious(
    states,
    cond_a2: np.ndarray,
    tol: float = OBLIVIOUS_TOL,
    target: np.ndarray | None = None,
) -> ObliviousnessCheck:
    """Check that ``sum_a2 p(a2 | a1) rho_{a1, a2}`` does not depend on ``a1``.

    Deviation is the largest pairwise operator-norm distance between these
    averages. If ``target`` is given the averages must also match it.
    """
    cond_a2 = np.asarray(cond_a2, dtype=float)
    averages = []
    for a1, row in enumerate(states):
        acc = None
        for a2, rho in enumerate(row):
            w = cond_a2[a1, a2]
            if rho is None or w == 0:
                continue
            term = w * rho.matrix
            acc = term if acc is None else acc + term
        averages.append(acc)
    deviation = 0.0
    for i in range(len(averages)):
        for j in range(i + 1, len(averages)):
            deviation = max(deviation, float(np.linalg.norm(averages[i] - averages[j], 2)))
    target_dev = None
    ok = deviation <= tol
    if target is not None:
        target_dev = max(float(np.linalg.norm(a - target, 2)) for a in averages)
        ok = ok and target_dev <= tol
    return ObliviousnessCheck(ok, deviation, target_dev)


def extremal_to_cc_strategy(
    cc_task: CCTask,
    oc_task: OCTask,
    encoding: Sequence[int],
    decoding: Sequence[int],
) -> ClassicalStrategy:
    """Two-level classical strategy reproducing an extremal oblivious value.

    For the primary construction Alice sends ``m' = e(x)`` and Bob answers
    ``c*(y)`` flipped by ``m'`` (``z = c*(y) xor m'``; for relational tasks the
    outcome involution is applied when ``m' = 1``). For the dual construction
    the roles swap: Alice sends ``m' = c*(x)`` and Bob answers ``e(y) xor m'``.
    """
    rec = oc_task.provenance
    if rec is None or getattr(rec, "source_id", None) != task_fingerprint(cc_task):
        raise ProvenanceError("OC task was not constructed from this CC task")
    enc = np.asarray(encoding, dtype=np.int64)
    dec = np.asarray(decoding, dtype=np.int64)
    kind = rec.kind
    if kind == "primary":
        if not isinstance(cc_task, FunctionalCCTask):
            raise ProvenanceError("primary construction needs a functional task")
        decoding_table = np.stack([dec, dec ^ 1], axis=1)
        return ClassicalStrategy(enc.copy(), decoding_table, 2)
    if kind == "relational":
        if not isinstance(cc_task, RelationalCCTask):
            raise ProvenanceError("relational construction needs a relational task")
        flip = np.asarray(rec.flip, dtype=np.int64)
        decoding_table = np.stack([dec, flip[dec]], axis=1)
        return ClassicalStrategy(enc.copy(), decoding_table, 2)
    if kind == "dual":
        decoding_table = np.stack([enc, enc ^ 1], axis=1)
        return ClassicalStrategy(dec.copy(), decoding_table, 2)
    raise ProvenanceError(f"no classical mapping for construction kind {kind!r}")
