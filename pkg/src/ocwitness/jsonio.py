"""JSON documents for tasks, protocols, oblivious tasks, Bell data and fragments.

Every document carries ``"v": "v1"`` and a ``"kind"`` discriminator (inferred
from the keys when absent). Complex entries are ``[re, im]`` pairs (plain
numbers are accepted as real), matrices are row-major lists of rows.
Structural problems are reported with JSON-pointer paths.
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema
import numpy as np

from .bell import BellScenario, QuantumRealization
from .constructions import ConstructionRecord
from .oblivious import OCTask
from .ontology import OperationalFragment
from .quantum import DensityMatrix, EAProtocol, PMProtocol, Povm
from .tasks import FunctionalCCTask, RelationalCCTask, validate_task

VERSION = "v1"


class SchemaError(ValueError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


_num = {"type": "number"}
_complex = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}]}
_matrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _complex}}
_matrix_or_null = {"oneOf": [_matrix, {"type": "null"}]}
_povm = {"type": "array", "minItems": 1, "items": _matrix}
_table2 = {"type": "array", "items": {"type": "array", "items": _num}}
_pos = {"type": "integer", "minimum": 1}
_header = {"v": {"const": VERSION}, "kind": {"type": "string"}}

SCHEMAS: dict[str, dict] = {
    "task": {
        "type": "object",
        "required": ["v", "nx", "ny", "prior", "d"],
        "properties": {
            **_header,
            "name": {"type": "string"},
            "nx": _pos,
            "ny": _pos,
            "nz": _pos,
            "d": {"type": "integer"},
            "prior": _table2,
            "f": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
            "relation": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
            },
            "flip": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "outcome_labels": {"type": "array"},
        },
        "oneOf": [{"required": ["f"]}, {"required": ["relation", "nz"]}],
    },
    "pm-protocol": {
        "type": "object",
        "required": ["v", "dim", "states", "measurements"],
        "properties": {
            **_header,
            "dim": _pos,
            "states": {"type": "array", "minItems": 1, "items": _matrix},
            "measurements": {"type": "array", "minItems": 1, "items": _povm},
        },
    },
    "ea-protocol": {
        "type": "object",
        "required": ["v", "dims", "state", "alice_povms", "bob_povms"],
        "properties": {
            **_header,
            "dims": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
            "state": _matrix,
            "alice_povms": {"type": "array", "minItems": 1, "items": _povm},
            "bob_povms": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _povm}},
        },
    },
    "octask": {
        "type": "object",
        "required": ["v", "n_a1", "n_a2", "n_b", "n_c", "cond_a2", "payoff"],
        "properties": {
            **_header,
            "n_a1": _pos,
            "n_a2": _pos,
            "n_b": _pos,
            "n_c": _pos,
            "cond_a2": _table2,
            "payoff": {"type": "array"},
            "provenance": {"type": ["object", "null"]},
        },
    },
    "oc-protocol": {
        "type": "object",
        "required": ["v", "states", "povms"],
        "properties": {
            **_header,
            "states": {"type": "array", "items": {"type": "array", "items": _matrix_or_null}},
            "povms": {"type": "array", "items": _povm},
        },
    },
    "bell": {
        "type": "object",
        "required": ["v", "coeffs", "prior"],
        "properties": {**_header, "coeffs": {"type": "array"}, "prior": _table2},
    },
    "realization": {
        "type": "object",
        "required": ["v", "dims", "state", "alice_povms", "bob_povms"],
        "properties": {
            **_header,
            "dims": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
            "state": _matrix,
            "alice_povms": {"type": "array", "minItems": 1, "items": _povm},
            "bob_povms": {"type": "array", "minItems": 1, "items": _povm},
        },
    },
    "fragment": {
        "type": "object",
        "required": ["v", "measurements", "stats"],
        "properties": {
            **_header,
            "measurements": {"type": "array", "minItems": 1, "items": _pos},
            "stats": {"type": "array", "minItems": 1, "items": _table2},
            "equivalences": _table2,
        },
    },
    "bundle": {
        "type": "object",
        "required": ["v", "parts"],
        "properties": {**_header, "name": {"type": "string"}, "parts": {"type": "object"}},
    },
    "report": {
        "type": "object",
        "required": ["v", "kind", "p_G", "p_C2", "p_Qd", "chi", "d", "p_NC_upper", "p_Q_star", "violation"],
        "properties": {**_header, "violation": {"type": "boolean"}},
    },
}


def infer_kind(doc: dict) -> str:
    if not isinstance(doc, dict):
        raise SchemaError("/", "document must be a JSON object")
    if "kind" in doc:
        return doc["kind"]
    keys = set(doc)
    if "parts" in keys:
        return "bundle"
    if "payoff" in keys:
        return "octask"
    if "coeffs" in keys:
        return "bell"
    if "stats" in keys:
        return "fragment"
    if "f" in keys or "relation" in keys:
        return "task"
    if "povms" in keys:
        return "oc-protocol"
    if "bob_povms" in keys:
        # EA protocols index Bob's POVMs by (y, m), one level deeper than Alice's
        deeper = _depth(doc["bob_povms"]) > _depth(doc.get("alice_povms"))
        return "ea-protocol" if deeper else "realization"
    if "states" in keys:
        return "pm-protocol"
    raise SchemaError("/", "cannot infer document kind")


def _depth(value) -> int:
    depth = 0
    while isinstance(value, list) and value:
        depth += 1
        value = value[0]
    return depth


def check_schema(doc: dict, kind: str | None = None) -> str:
    kind = kind or infer_kind(doc)
    if kind not in SCHEMAS:
        raise SchemaError("/kind", f"unknown document kind {kind!r}")
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise SchemaError(pointer, err.message)
    return kind


# -- primitive encoders -------------------------------------------------------

def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_matrix(rows, pointer: str = "") -> np.ndarray:
    try:
        return np.array(
            [[complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in row] for row in rows],
            dtype=complex,
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise SchemaError(pointer, f"bad matrix: {exc}") from None


def _density(rows, pointer: str) -> DensityMatrix:
    try:
        return DensityMatrix(decode_matrix(rows, pointer))
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(pointer, str(exc)) from None


def _povm(effects, pointer: str) -> Povm:
    try:
        return Povm(np.stack([decode_matrix(e, f"{pointer}/{k}") for k, e in enumerate(effects)]))
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(pointer, str(exc)) from None


def _array(value, pointer: str, dtype=float) -> np.ndarray:
    try:
        return np.array(value, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise SchemaError(pointer, f"not a rectangular numeric array: {exc}") from None


def _floats(a) -> Any:
    return np.asarray(a, dtype=float).tolist()


# -- tasks --------------------------------------------------------------------

def task_to_json(task) -> dict:
    doc = {"v": VERSION, "kind": "task", "name": task.name, "nx": task.n_x, "ny": task.n_y, "d": task.d}
    doc["prior"] = _floats(task.prior)
    if isinstance(task, FunctionalCCTask):
        doc["f"] = task.f.astype(int).tolist()
    else:
        doc["nz"] = task.n_z
        doc["relation"] = [
            [np.flatnonzero(task.relation[x, y]).tolist() for y in range(task.n_y)]
            for x in range(task.n_x)
        ]
        if task.flip is not None:
            doc["flip"] = task.flip.astype(int).tolist()
        if task.outcome_labels is not None:
            doc["outcome_labels"] = [[list(lab) if isinstance(lab, tuple) else lab for lab in row] for row in task.outcome_labels]
    return doc


def _pointer_for(problem: str) -> str:
    if "prior" in problem:
        return "/prior"
    if "relation" in problem:
        return "/relation"
    if problem.startswith("f("):
        return "/f"
    if "flip" in problem:
        return "/flip"
    if "dimension" in problem:
        return "/d"
    return "/"


def task_from_json(doc: dict, validate: bool = True):
    check_schema(doc, "task")
    nx, ny = doc["nx"], doc["ny"]
    prior = _array(doc["prior"], "/prior")
    if prior.shape != (nx, ny):
        raise SchemaError("/prior", f"expected shape ({nx}, {ny}), got {prior.shape}")
    if "f" in doc:
        f = _array(doc["f"], "/f", dtype=np.int64)
        if f.shape != (nx, ny):
            raise SchemaError("/f", f"expected shape ({nx}, {ny}), got {f.shape}")
        task = FunctionalCCTask(f, prior, doc["d"], name=doc.get("name", ""))
    else:
        nz = doc["nz"]
        rel = np.zeros((nx, ny, nz), dtype=bool)
        cells = doc["relation"]
        if len(cells) != nx or any(len(row) != ny for row in cells):
            raise SchemaError("/relation", f"expected {nx} x {ny} cells")
        for x, row in enumerate(cells):
            for y, allowed in enumerate(row):
                for z in allowed:
                    if z >= nz:
                        raise SchemaError(f"/relation/{x}/{y}", f"outcome {z} >= nz={nz}")
                    rel[x, y, z] = True
        labels = doc.get("outcome_labels")
        if labels is not None:
            labels = [[tuple(lab) if isinstance(lab, list) else lab for lab in row] for row in labels]
        task = RelationalCCTask(rel, prior, doc["d"], labels, doc.get("flip"), name=doc.get("name", ""))
    if validate:
        result = validate_task(task)
        if not result.ok:
            raise SchemaError(_pointer_for(result.problems[0]), "; ".join(result.problems))
    return task


# -- quantum protocols -----------------------------------------------------------

def pm_protocol_to_json(protocol: PMProtocol) -> dict:
    return {
        "v": VERSION,
        "kind": "pm-protocol",
        "dim": protocol.dim,
        "states": [encode_matrix(s.matrix) for s in protocol.states],
        "measurements": [[encode_matrix(e) for e in m.effects] for m in protocol.measurements],
    }


def pm_protocol_from_json(doc: dict) -> PMProtocol:
    check_schema(doc, "pm-protocol")
    states = [_density(s, f"/states/{x}") for x, s in enumerate(doc["states"])]
    meas = [_povm(m, f"/measurements/{y}") for y, m in enumerate(doc["measurements"])]
    for x, s in enumerate(states):
        if s.dim != doc["dim"]:
            raise SchemaError(f"/states/{x}", f"dimension {s.dim} != dim={doc['dim']}")
    for y, m in enumerate(meas):
        if m.dim != doc["dim"]:
            raise SchemaError(f"/measurements/{y}", f"dimension {m.dim} != dim={doc['dim']}")
    return PMProtocol(states, meas)


def ea_protocol_to_json(protocol: EAProtocol) -> dict:
    return {
        "v": VERSION,
        "kind": "ea-protocol",
        "dims": list(protocol.dims),
        "state": encode_matrix(protocol.shared.matrix),
        "alice_povms": [[encode_matrix(e) for e in p.effects] for p in protocol.alice],
        "bob_povms": [[[encode_matrix(e) for e in p.effects] for p in row] for row in protocol.bob],
    }


def ea_protocol_from_json(doc: dict) -> EAProtocol:
    check_schema(doc, "ea-protocol")
    shared = _density(doc["state"], "/state")
    alice = [_povm(p, f"/alice_povms/{x}") for x, p in enumerate(doc["alice_povms"])]
    bob = [
        [_povm(p, f"/bob_povms/{y}/{m}") for m, p in enumerate(row)]
        for y, row in enumerate(doc["bob_povms"])
    ]
    protocol = EAProtocol(shared, tuple(doc["dims"]), alice, bob)
    try:
        protocol.check()
    except ValueError as exc:
        raise SchemaError("/", str(exc)) from None
    return protocol


def protocol_from_json(doc: dict):
    kind = infer_kind(doc)
    if kind == "ea-protocol":
        return ea_protocol_from_json(doc)
    if kind == "pm-protocol":
        return pm_protocol_from_json(doc)
    raise SchemaError("/kind", f"expected a protocol document, got {kind!r}")


# -- oblivious tasks ---------------------------------------------------------------

def octask_to_json(task: OCTask) -> dict:
    prov = task.provenance
    return {
        "v": VERSION,
        "kind": "octask",
        "n_a1": task.n_a1,
        "n_a2": task.n_a2,
        "n_b": task.n_b,
        "n_c": task.n_c,
        "cond_a2": _floats(task.cond_a2),
        "payoff": _floats(task.payoff),
        "provenance": prov.to_dict() if prov is not None else None,
    }


def octask_from_json(doc: dict) -> OCTask:
    check_schema(doc, "octask")
    shape = (doc["n_a1"], doc["n_a2"], doc["n_b"], doc["n_c"])
    payoff = _array(doc["payoff"], "/payoff")
    if payoff.shape != shape:
        raise SchemaError("/payoff", f"expected shape {shape}, got {payoff.shape}")
    cond = _array(doc["cond_a2"], "/cond_a2")
    if cond.shape != shape[:2]:
        raise SchemaError("/cond_a2", f"expected shape {shape[:2]}, got {cond.shape}")
    prov = doc.get("provenance")
    record = None
    if prov:
        try:
            record = ConstructionRecord(
                prov["kind"], prov["source_id"], prov.get("d"), list(prov.get("notes", [])), prov.get("flip")
            )
        except (KeyError, ValueError) as exc:
            raise SchemaError("/provenance", str(exc)) from None
    try:
        return OCTask(cond, payoff, record)
    except ValueError as exc:
        pointer = "/cond_a2" if "cond_a2" in str(exc) else "/payoff"
        raise SchemaError(pointer, str(exc)) from None


def oc_protocol_to_json(states, povms) -> dict:
    return {
        "v": VERSION,
        "kind": "oc-protocol",
        "states": [[None if s is None else encode_matrix(s.matrix) for s in row] for row in states],
        "povms": [[encode_matrix(e) for e in p.effects] for p in povms],
    }


def oc_protocol_from_json(doc: dict):
    check_schema(doc, "oc-protocol")
    states = [
        [None if s is None else _density(s, f"/states/{a1}/{a2}") for a2, s in enumerate(row)]
        for a1, row in enumerate(doc["states"])
    ]
    povms = [_povm(p, f"/povms/{b}") for b, p in enumerate(doc["povms"])]
    return states, povms


# -- Bell ----------------------------------------------------------------------

def bell_to_json(scenario: BellScenario) -> dict:
    return {"v": VERSION, "kind": "bell", "coeffs": _floats(scenario.coeffs), "prior": _floats(scenario.prior)}


def bell_from_json(doc: dict) -> BellScenario:
    check_schema(doc, "bell")
    coeffs = _array(doc["coeffs"], "/coeffs")
    if coeffs.ndim != 4:
        raise SchemaError("/coeffs", "coefficients must be indexed [x][y][u][v]")
    scenario = BellScenario(coeffs, _array(doc["prior"], "/prior"))
    problems = scenario.problems()
    if problems:
        raise SchemaError("/prior" if "prior" in problems[0] else "/coeffs", "; ".join(problems))
    return scenario


def realization_to_json(real: QuantumRealization) -> dict:
    return {
        "v": VERSION,
        "kind": "realization",
        "dims": list(real.dims),
        "state": encode_matrix(real.state.matrix),
        "alice_povms": [[encode_matrix(e) for e in p.effects] for p in real.alice],
        "bob_povms": [[encode_matrix(e) for e in p.effects] for p in real.bob],
    }


def realization_from_json(doc: dict) -> QuantumRealization:
    check_schema(doc, "realization")
    real = QuantumRealization(
        _density(doc["state"], "/state"),
        tuple(doc["dims"]),
        [_povm(p, f"/alice_povms/{x}") for x, p in enumerate(doc["alice_povms"])],
        [_povm(p, f"/bob_povms/{y}") for y, p in enumerate(doc["bob_povms"])],
    )
    try:
        real.check()
    except ValueError as exc:
        raise SchemaError("/dims", str(exc)) from None
    return real


# -- fragments -------------------------------------------------------------------

def fragment_to_json(fragment: OperationalFragment) -> dict:
    doc = {
        "v": VERSION,
        "kind": "fragment",
        "measurements": fragment.outcome_counts,
        "stats": [_floats(s) for s in fragment.stats],
    }
    if fragment.equivalences is not None:
        doc["equivalences"] = _floats(fragment.equivalences)
    return doc


def fragment_from_json(doc: dict) -> OperationalFragment:
    check_schema(doc, "fragment")
    stats = [_array(s, f"/stats/{j}") for j, s in enumerate(doc["stats"])]
    if len(stats) != len(doc["measurements"]):
        raise SchemaError("/stats", "one statistics table per measurement is required")
    for j, (s, k) in enumerate(zip(stats, doc["measurements"])):
        if s.ndim != 2 or s.shape[1] != k:
            raise SchemaError(f"/stats/{j}", f"expected rows of {k} outcome probabilities")
    try:
        return OperationalFragment(stats, doc.get("equivalences"))
    except ValueError as exc:
        raise SchemaError("/stats", str(exc)) from None


# -- bundles ---------------------------------------------------------------------

def bundle(name: str, **parts: dict) -> dict:
    return {"v": VERSION, "kind": "bundle", "name": name, "parts": parts}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"
