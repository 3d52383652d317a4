import numpy as np
import pytest
from hypothesis import given, strategies as st

from ocwitness.cases import make_rac
from ocwitness.ontology import (
    OperationalFragment,
    fragment_from_states,
    model_statistics,
    operational_equivalences,
    pnc_model_exists,
    response_atoms,
)
from ocwitness.quantum import random_density_matrix, random_povm

# Minimum statistics deviation of the 4-state RAC fragment under its one equivalence.
RAC_INFEASIBLE_SLACK = (np.sqrt(2) - 1) / 4


def toy_fragment():
    rac = make_rac()
    return fragment_from_states(rac.toy.states[:3], rac.toy.measurements)


def test_response_atom_counts():
    two = OperationalFragment([np.full((1, 2), 0.5)] * 2)
    assert len(response_atoms(two)) == 4
    assert len(response_atoms(OperationalFragment([np.full((1, 3), 1 / 3)]))) == 3
    assert len(response_atoms(OperationalFragment([np.full((1, 2), 0.5)] * 3))) == 8


def test_equivalence_bases():
    assert operational_equivalences(toy_fragment()).shape == (0, 3)
    dup = OperationalFragment([np.array([[0.2, 0.8], [0.2, 0.8], [0.9, 0.1]])])
    basis = operational_equivalences(dup)
    assert basis.shape == (1, 3)
    w = basis[0] / basis[0][0]
    np.testing.assert_allclose(w, [1, -1, 0], atol=1e-12)
    rac = make_rac()
    full = fragment_from_states(rac.optimal.states, rac.optimal.measurements)
    basis = operational_equivalences(full)
    assert basis.shape == (1, 4)
    np.testing.assert_allclose(basis[0] / basis[0][0], [1, -1, -1, 1], atol=1e-12)


def test_toy_fragment_has_model():
    frag = toy_fragment()
    result = pnc_model_exists(frag)
    assert result.feasible
    replay = model_statistics(frag, result.atoms, result.model)
    assert np.abs(replay - frag.statistics_matrix()).max() <= 1e-8


def test_rac_fragment_is_infeasible():
    rac = make_rac()
    frag = fragment_from_states(rac.optimal.states, rac.optimal.measurements)
    result = pnc_model_exists(frag)
    assert result.status == "infeasible"
    assert result.residual == pytest.approx(RAC_INFEASIBLE_SLACK, abs=1e-7)


def test_contradictory_declared_equivalence():
    frag = OperationalFragment([np.array([[1.0, 0.0], [0.0, 1.0]])], equivalences=np.array([[1.0, -1.0]]))
    assert pnc_model_exists(frag).status == "infeasible"


def random_fragment(rng):
    n_p = int(rng.integers(2, 6))
    dim = int(rng.integers(2, 4))
    states = [random_density_matrix(dim, rng, rank=1) for _ in range(n_p)]
    if rng.random() < 0.5:
        states.append(states[0])
    meas = [random_povm(dim, int(rng.integers(2, 4)), rng) for _ in range(int(rng.integers(1, 3)))]
    return fragment_from_states(states, meas)


@given(st.integers(0, 2**32 - 1))
def test_models_replay_and_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    frag = random_fragment(rng)
    result = pnc_model_exists(frag)
    if result.model is not None and result.feasible:
        replay = model_statistics(frag, result.atoms, result.model)
        assert np.abs(replay - frag.statistics_matrix()).max() <= 1e-8
    perm = rng.permutation(frag.n_preparations)
    permuted = OperationalFragment([s[perm] for s in frag.stats])
    assert pnc_model_exists(permuted).status == result.status


@given(st.integers(0, 2**32 - 1))
def test_no_equivalences_always_feasible(seed):
    rng = np.random.default_rng(seed)
    frag = random_fragment(rng)
    result = pnc_model_exists(frag, equivalences=np.zeros((0, frag.n_preparations)))
    assert result.feasible
