import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_functional_task, random_relational_task
from ocwitness._enumeration import BudgetExceeded
from ocwitness.cases import make_hidden_matching, rac_task
from ocwitness.tasks import (
    ClassicalStrategy,
    FunctionalCCTask,
    InvalidTaskError,
    RelationalCCTask,
    classical_optimum,
    guessing_probability,
    optimum,
    relational_classical_optimum,
    strategy_value,
    validate_task,
)

HM4_P_C2 = 0.75  # 36 of 48 (x, y) pairs, from the 2^16-encoding oracle below


def brute_force(task, levels):
    """Plain-loop oracle: every encoding, best decoding per (y, m)."""
    mask = task.success_mask()
    best = -1.0
    for enc in itertools.product(range(levels), repeat=task.n_x):
        total = 0.0
        for y in range(task.n_y):
            for m in range(levels):
                xs = [x for x in range(task.n_x) if enc[x] == m]
                total += max(sum(task.prior[x, y] * mask[x, y, z] for x in xs) for z in range(task.n_z))
        best = max(best, total)
    return best


def test_rac_task_validates():
    assert validate_task(rac_task()).ok


def test_unnormalized_prior_rejected():
    task = FunctionalCCTask(np.zeros((2, 2), dtype=int), np.full((2, 2), 0.225))
    result = validate_task(task)
    assert not result.ok
    assert any("prior not normalized" in p for p in result.problems)
    with pytest.raises(InvalidTaskError):
        guessing_probability(task)


def test_empty_relation_cell_rejected():
    rel = np.ones((2, 2, 2), dtype=bool)
    rel[0, 0] = False
    result = validate_task(RelationalCCTask(rel, np.full((2, 2), 0.25)))
    assert any("empty relation cell R(0, 0)" in p for p in result.problems)


def test_bad_flip_and_d_rejected():
    rel = np.ones((1, 1, 3), dtype=bool)
    result = validate_task(RelationalCCTask(rel, np.ones((1, 1)), d=1, flip=np.array([1, 2, 0])))
    assert any("involution" in p for p in result.problems)
    assert any("d=1" in p for p in result.problems)


def test_guessing_probability_examples():
    assert guessing_probability(rac_task()) == 0.5
    const = FunctionalCCTask(np.zeros((3, 2), dtype=int), np.full((3, 2), 1 / 6))
    assert guessing_probability(const) == 1.0
    assert guessing_probability(make_hidden_matching(4).task) == pytest.approx(0.5, abs=1e-12)


def test_rac_classical_values():
    task = rac_task()
    value, strategy = classical_optimum(task, 2)
    assert value == 0.75
    assert strategy_value(task, strategy) == 0.75
    assert classical_optimum(task, 4)[0] == 1.0
    assert classical_optimum(task, 1)[0] == guessing_probability(task)


def test_hidden_matching_fixture():
    task = make_hidden_matching(4).task
    value, strategy = relational_classical_optimum(task, 2)
    assert value == pytest.approx(HM4_P_C2, abs=1e-12)
    assert strategy_value(task, strategy) == pytest.approx(value, abs=1e-12)


def test_hidden_matching_fixture_independent_oracle():
    task = make_hidden_matching(4).task
    assert brute_force(task, 2) == pytest.approx(HM4_P_C2, abs=1e-12)


def test_relation_full_is_trivial():
    task = RelationalCCTask(np.ones((3, 2, 4), dtype=bool), np.full((3, 2), 1 / 6))
    assert relational_classical_optimum(task, 2)[0] == pytest.approx(1.0)
    assert guessing_probability(task) == pytest.approx(1.0)


def test_type_dispatch():
    with pytest.raises(TypeError):
        classical_optimum(make_hidden_matching(2).task, 2)
    with pytest.raises(TypeError):
        relational_classical_optimum(rac_task(), 2)


def test_budget_is_an_error():
    with pytest.raises(BudgetExceeded):
        classical_optimum(rac_task(), 2, budget=15)
    assert classical_optimum(rac_task(), 2, budget=16)[0] == 0.75


def test_ties_go_to_lowest_index():
    task = FunctionalCCTask(np.zeros((2, 1), dtype=int), np.full((2, 1), 0.5))
    _, strategy = classical_optimum(task, 2)
    assert strategy.encoding.tolist() == [0, 0]
    assert strategy.decoding.tolist() == [[0, 0]]


@given(st.integers(0, 2**32 - 1))
def test_optimum_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    task = random_functional_task(rng)
    for levels in (1, 2, 3):
        assert optimum(task, levels)[0] == pytest.approx(brute_force(task, levels), abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_value_chain_and_monotonicity(seed, relational):
    rng = np.random.default_rng(seed)
    task = random_relational_task(rng) if relational else random_functional_task(rng)
    values = [optimum(task, k)[0] for k in range(1, 5)]
    assert values[0] == guessing_probability(task)
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] <= 1 + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_replay_equals_optimum(seed):
    rng = np.random.default_rng(seed)
    task = random_functional_task(rng)
    value, strategy = optimum(task, 2)
    assert abs(strategy_value(task, strategy) - value) <= 1e-12


@given(st.integers(0, 2**32 - 1))
def test_stochastic_strategies_never_beat_deterministic(seed):
    rng = np.random.default_rng(seed)
    task = random_functional_task(rng)
    levels = 2
    enc = rng.dirichlet(np.ones(levels), size=task.n_x)
    dec = rng.dirichlet(np.ones(task.n_z), size=(task.n_y, levels))
    stochastic = ClassicalStrategy(enc, dec, levels)
    assert strategy_value(task, stochastic) <= optimum(task, levels)[0] + 1e-12
