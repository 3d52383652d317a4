"""One-way communication-complexity tasks and their exact classical values.

A task pairs a prior ``p(x, y)`` with a success criterion. Functional tasks
ask Bob for the bit ``f(x, y)``; relational tasks accept any outcome in a
set ``R(x, y)``. Internally both reduce to a boolean success mask of shape
``(n_x, n_y, n_z)``, so every classical and quantum evaluator is shared.

Classical optima are computed by exhaustive enumeration of deterministic
encodings ``e: x -> m``. For a fixed encoding the best decoding is the
per-``(y, m)`` argmax, so deterministic encodings paired with their best
decoding already attain the optimum over stochastic strategies: the
success probability is affine in each stochastic table separately.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._enumeration import (
    DEFAULT_BUDGET,
    argmax_first,
    check_budget,
    count_maps,
    map_blocks,
)

PRIOR_TOL = 1e-12
TIE_TOL = 1e-12


@dataclass(eq=False)
class FunctionalCCTask:
    """Binary-valued goal ``f(x, y)`` with joint prior and message dimension ``d``."""

    f: np.ndarray
    prior: np.ndarray
    d: int = 2
    name: str = ""

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=np.int64)
        self.prior = np.asarray(self.prior, dtype=float)
        self.d = int(self.d)

    @property
    def n_x(self) -> int:
        return self.f.shape[0]

    @property
    def n_y(self) -> int:
        return self.f.shape[1]

    @property
    def n_z(self) -> int:
        return 2

    def success_mask(self) -> np.ndarray:
        z = np.arange(2)
        return self.f[:, :, None] == z[None, None, :]


@dataclass(eq=False)
class RelationalCCTask:
    """Relational task: Bob succeeds iff his outcome lies in ``R(x, y)``.

    ``relation`` is a boolean array of shape ``(n_x, n_y, n_z)``. Outcome
    indices are local to Bob's input, so ``outcome_labels`` (if given) is a
    nested list ``[y][z]`` of printable labels. ``flip`` is an optional
    involution on outcome indices used when building the oblivious task.
    """

    relation: np.ndarray
    prior: np.ndarray
    d: int = 2
    outcome_labels: list | None = None
    flip: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        self.relation = np.asarray(self.relation, dtype=bool)
        self.prior = np.asarray(self.prior, dtype=float)
        self.d = int(self.d)
        if self.flip is not None:
            self.flip = np.asarray(self.flip, dtype=np.int64)

    @property
    def n_x(self) -> int:
        return self.relation.shape[0]

    @property
    def n_y(self) -> int:
        return self.relation.shape[1]

    @property
    def n_z(self) -> int:
        return self.relation.shape[2]

    def success_mask(self) -> np.ndarray:
        return self.relation


CCTask = Union[FunctionalCCTask, RelationalCCTask]


@dataclass
class ClassicalStrategy:
    """Encoding ``x -> m`` and decoding ``(y, m) -> z``.

    Deterministic tables are integer arrays of shape ``(n_x,)`` and
    ``(n_y, levels)``. Stochastic tables are float arrays ``p_E[x, m]`` and
    ``p_D[y, m, z]``.
    """

    encoding: np.ndarray
    decoding: np.ndarray
    levels: int

    def __post_init__(self):
        self.encoding = np.asarray(self.encoding)
        self.decoding = np.asarray(self.decoding)

    @property
    def deterministic(self) -> bool:
        return self.encoding.ndim == 1

    def stochastic_tables(self, n_z: int) -> tuple[np.ndarray, np.ndarray]:
        if not self.deterministic:
            return self.encoding.astype(float), self.decoding.astype(float)
        enc = np.eye(self.levels)[self.encoding]
        dec = np.eye(n_z)[self.decoding]
        return enc, dec


@dataclass
class ValidationResult:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


class InvalidTaskError(ValueError):
    def __init__(self, result: ValidationResult):
        self.result = result
        super().__init__("; ".join(result.problems))


def _check_prior(prior: np.ndarray, shape: tuple[int, int], problems: list[str]):
    if prior.shape != shape:
        problems.append(f"prior shape {prior.shape} does not match {shape}")
        return
    neg = np.argwhere(prior < 0)
    for x, y in neg[:5]:
        problems.append(f"negative prior entry at ({x}, {y})")
    total = float(prior.sum())
    if abs(total - 1.0) > PRIOR_TOL:
        problems.append(f"prior not normalized (sums to {total!r})")


def validate_task(task: CCTask) -> ValidationResult:
    """Collect every violated task invariant; never raises."""
    problems: list[str] = []
    if task.d < 2:
        problems.append(f"message dimension d={task.d} must be >= 2")
    if isinstance(task, FunctionalCCTask):
        if task.f.ndim != 2:
            problems.append("f must be a 2-d table")
            return ValidationResult(problems)
        bad = np.argwhere((task.f != 0) & (task.f != 1))
        for x, y in bad[:5]:
            problems.append(f"f({x}, {y}) = {task.f[x, y]} not in {{0, 1}}")
    else:
        if task.relation.ndim != 3:
            problems.append("relation must have shape (n_x, n_y, n_z)")
            return ValidationResult(problems)
        empty = np.argwhere(~task.relation.any(axis=2))
        for x, y in empty[:5]:
            problems.append(f"empty relation cell R({x}, {y})")
        if task.flip is not None:
            flip = task.flip
            if (
                flip.shape != (task.n_z,)
                or flip.min(initial=0) < 0
                or flip.max(initial=0) >= task.n_z
                or not np.array_equal(flip[flip], np.arange(task.n_z))
            ):
                problems.append("flip is not an involution on outcome indices")
    _check_prior(task.prior, (task.n_x, task.n_y), problems)
    return ValidationResult(problems)


def require_valid(task: CCTask) -> None:
    result = validate_task(task)
    if not result.ok:
        raise InvalidTaskError(result)


def task_fingerprint(task: CCTask) -> str:
    """Stable content hash used to tie constructed tasks back to their source."""
    h = hashlib.sha256()
    h.update(type(task).__name__.encode())
    h.update(np.ascontiguousarray(task.success_mask()).tobytes())
    h.update(np.ascontiguousarray(task.prior).tobytes())
    h.update(str(task.d).encode())
    return h.hexdigest()[:16]


def gain_table(task: CCTask) -> np.ndarray:
    """``G[x, y, z] = p(x, y) * [z succeeds on (x, y)]``."""
    return task.prior[:, :, None] * task.success_mask()


def guessing_probability(task: CCTask) -> float:
    """Best success with no message: ``sum_y max_z sum_x p(x, y) [z ok]``."""
    require_valid(task)
    per_outcome = gain_table(task).sum(axis=0)
    return float(per_outcome.max(axis=1).sum())


def _optimum(task: CCTask, levels: int, budget: int | None):
    require_valid(task)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    check_budget(
        "classical encodings", count_maps(task.n_x, levels), budget or DEFAULT_BUDGET
    )
    gain = gain_table(task)
    best_value, best_enc = -np.inf, None
    for _, block in map_blocks(task.n_x, levels):
        onehot = block[:, :, None] == np.arange(levels)[None, None, :]
        scores = np.einsum("kxm,xyz->kmyz", onehot.astype(float), gain)
        values = scores.max(axis=3).sum(axis=(1, 2))
        i = argmax_first(values, TIE_TOL)
        if values[i] > best_value + TIE_TOL:
            best_value, best_enc = float(values[i]), block[i].copy()
    encoding = best_enc
    decoding = np.zeros((task.n_y, levels), dtype=np.int64)
    for m in range(levels):
        scores = gain[encoding == m].sum(axis=0)
        for y in range(task.n_y):
            decoding[y, m] = argmax_first(scores[y], TIE_TOL)
    return best_value, ClassicalStrategy(encoding, decoding, levels)


def classical_optimum(
    task: FunctionalCCTask, levels: int, budget: int | None = None
) -> tuple[float, ClassicalStrategy]:
    """Exact optimal success with a ``levels``-valued classical message.

    Ties between encodings and between outcomes go to the lowest index.

    Raises
    ------
    BudgetExceeded
        If ``levels ** n_x`` exceeds ``budget``.
    """
    if not isinstance(task, FunctionalCCTask):
        raise TypeError("use relational_classical_optimum for relational tasks")
    return _optimum(task, levels, budget)


def relational_classical_optimum(
    task: RelationalCCTask, levels: int, budget: int | None = None
) -> tuple[float, ClassicalStrategy]:
    """Relational counterpart of :func:`classical_optimum`."""
    if not isinstance(task, RelationalCCTask):
        raise TypeError("expected a RelationalCCTask")
    return _optimum(task, levels, budget)


def optimum(task: CCTask, levels: int, budget: int | None = None):
    return _optimum(task, levels, budget)


def strategy_value(task: CCTask, strategy: ClassicalStrategy) -> float:
    """Replay a (possibly stochastic) strategy term by term."""
    mask = task.success_mask()
    if strategy.deterministic:
        total = 0.0
        for x in range(task.n_x):
            m = int(strategy.encoding[x])
            for y in range(task.n_y):
                if mask[x, y, int(strategy.decoding[y, m])]:
                    total += task.prior[x, y]
        return total
    enc, dec = strategy.stochastic_tables(task.n_z)
    return float(np.einsum("xy,xm,ymz,xyz->", task.prior, enc, dec, mask))
