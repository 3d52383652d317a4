"""Budgeted enumeration of deterministic maps ``{0..n-1} -> {0..k-1}``."""

from __future__ import annotations

from typing import Iterator

import numpy as np

DEFAULT_BUDGET = 10**8
_BLOCK = 1 << 14


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive enumeration would exceed the configured budget."""

    def __init__(self, what: str, required: int, budget: int):
        self.what = what
        self.required = required
        self.budget = budget
        super().__init__(
            f"{what}: enumeration needs {required} points, budget is {budget}"
        )


def count_maps(n_inputs: int, n_values: int) -> int:
    return int(n_values) ** int(n_inputs)


def check_budget(what: str, required: int, budget: int | None) -> None:
    budget = DEFAULT_BUDGET if budget is None else budget
    if required > budget:
        raise BudgetExceeded(what, required, budget)


def map_blocks(
    n_inputs: int, n_values: int, *, block: int = _BLOCK
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(start, digits)`` blocks covering every map in lexicographic order.

    ``digits`` has shape ``(k, n_inputs)``; row ``r`` is the map with index
    ``start + r``, input 0 being the most significant digit.
    """
    total = count_maps(n_inputs, n_values)
    weights = n_values ** np.arange(n_inputs - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total), dtype=np.int64)
        digits = (idx[:, None] // weights[None, :]) % n_values
        yield start, digits


def argmax_first(values: np.ndarray, tol: float) -> int:
    """Index of the first entry within ``tol`` of the maximum."""
    top = values.max()
    return int(np.flatnonzero(values >= top - tol)[0])
