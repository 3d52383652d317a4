import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_functional_task, random_pm_protocol, random_relational_task
from ocwitness import jsonio
from ocwitness.cases import make_chsh, make_hidden_matching, make_rac
from ocwitness.constructions import cc_to_oc, pm_to_oc_protocol
from ocwitness.ontology import fragment_from_states
from ocwitness.quantum import EAProtocol, random_density_matrix, random_povm
from ocwitness.tasks import FunctionalCCTask


def reload(doc):
    return json.loads(jsonio.dumps(doc))


def test_complex_entries_are_pairs():
    m = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
    enc = jsonio.encode_matrix(m)
    assert enc[0][1] == [0.0, 0.5]
    np.testing.assert_array_equal(jsonio.decode_matrix(enc), m)


def test_task_round_trip():
    for task in (make_rac().task, make_hidden_matching(4).task):
        doc = reload(jsonio.task_to_json(task))
        assert doc["v"] == "v1"
        assert jsonio.check_schema(doc) == "task"
        back = jsonio.task_from_json(doc)
        np.testing.assert_array_equal(back.success_mask(), task.success_mask())
        np.testing.assert_array_equal(back.prior, task.prior)
        assert back.d == task.d


def test_malformed_prior_pointer():
    doc = jsonio.task_to_json(make_rac().task)
    doc["prior"][0][0] = 0.5
    with pytest.raises(jsonio.SchemaError) as err:
        jsonio.task_from_json(doc)
    assert err.value.pointer == "/prior"


def test_schema_error_pointer_for_bad_type():
    doc = jsonio.task_to_json(make_rac().task)
    doc["prior"][1] = "oops"
    with pytest.raises(jsonio.SchemaError) as err:
        jsonio.task_from_json(doc)
    assert err.value.pointer.startswith("/prior")


def test_protocol_round_trips():
    rac = make_rac()
    doc = reload(jsonio.pm_protocol_to_json(rac.optimal))
    assert jsonio.infer_kind(doc) == "pm-protocol"
    back = jsonio.pm_protocol_from_json(doc)
    for a, b in zip(back.states, rac.optimal.states):
        np.testing.assert_allclose(a.matrix, b.matrix, atol=0)

    chsh = make_chsh()
    doc = reload(jsonio.realization_to_json(chsh.realization))
    assert jsonio.infer_kind(doc) == "realization"
    jsonio.realization_from_json(doc)
    doc = reload(jsonio.bell_to_json(chsh.scenario))
    assert jsonio.infer_kind(doc) == "bell"
    back = jsonio.bell_from_json(doc)
    np.testing.assert_array_equal(back.coeffs, chsh.scenario.coeffs)


def test_ea_round_trip(rng):
    proto = EAProtocol(
        random_density_matrix(4, rng),
        (2, 2),
        [random_povm(2, 2, rng) for _ in range(3)],
        [[random_povm(2, 2, rng) for _ in range(2)] for _ in range(2)],
    )
    doc = reload(jsonio.ea_protocol_to_json(proto))
    assert jsonio.infer_kind(doc) == "ea-protocol"
    back = jsonio.ea_protocol_from_json(doc)
    np.testing.assert_allclose(back.shared.matrix, proto.shared.matrix, atol=0)


def test_octask_and_oc_protocol_round_trip():
    rac = make_rac()
    oc = cc_to_oc(rac.task, 2)
    doc = reload(jsonio.octask_to_json(oc))
    assert jsonio.check_schema(doc) == "octask"
    back = jsonio.octask_from_json(doc)
    np.testing.assert_array_equal(back.payoff, oc.payoff)
    assert back.provenance.source_id == oc.provenance.source_id
    states, povms = pm_to_oc_protocol(rac.optimal)
    s_back, p_back = jsonio.oc_protocol_from_json(reload(jsonio.oc_protocol_to_json(states, povms)))
    assert len(s_back) == 4 and len(p_back) == 2


def test_fragment_round_trip():
    rac = make_rac()
    frag = fragment_from_states(rac.optimal.states, rac.optimal.measurements)
    back = jsonio.fragment_from_json(reload(jsonio.fragment_to_json(frag)))
    np.testing.assert_array_equal(back.statistics_matrix(), frag.statistics_matrix())


def test_unknown_kind_rejected():
    with pytest.raises(jsonio.SchemaError):
        jsonio.check_schema({"v": "v1", "kind": "mystery"})
    with pytest.raises(jsonio.SchemaError):
        jsonio.infer_kind({"v": "v1"})


def test_wrong_version_rejected():
    doc = jsonio.task_to_json(make_rac().task)
    doc["v"] = "v0"
    with pytest.raises(jsonio.SchemaError) as err:
        jsonio.task_from_json(doc)
    assert err.value.pointer == "/v"


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_random_round_trips(seed, relational):
    rng = np.random.default_rng(seed)
    task = random_relational_task(rng) if relational else random_functional_task(rng)
    doc = reload(jsonio.task_to_json(task))
    jsonio.check_schema(doc)
    back = jsonio.task_from_json(doc)
    np.testing.assert_array_equal(back.success_mask(), task.success_mask())
    np.testing.assert_array_equal(back.prior, task.prior)
    if isinstance(task, FunctionalCCTask):
        proto = random_pm_protocol(rng, task.d, task.n_x, task.n_y)
        pdoc = reload(jsonio.pm_protocol_to_json(proto))
        jsonio.check_schema(pdoc)
        jsonio.pm_protocol_from_json(pdoc)


def test_documented_schemas_are_current():
    from pathlib import Path

    docs = Path(__file__).resolve().parents[1] / "docs" / "schemas"
    for kind, schema in jsonio.SCHEMAS.items():
        assert json.loads((docs / f"{kind}.schema.json").read_text()) == schema
