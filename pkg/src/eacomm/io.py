"""JSON (and CSV) serialization of strategies, behaviors and functionals.

Complex matrices are stored as nested lists of ``[re, im]`` pairs.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .linalg import DensityState, KrausChannel, Povm
from .protocol import (
    AdaptiveEAClassicalStrategy,
    Behavior,
    NonAdaptiveEAClassicalStrategy,
    ProductMeasurement,
    QuantumMessageStrategy,
    QubitPrepareMeasure,
    SequentialMeasurement,
    Strategy,
)
from .tasks import LinearFunctional

STRATEGY_SCHEMA_ID = "eacomm/strategy/v1"
BEHAVIOR_SCHEMA_ID = "eacomm/behavior/v1"
FUNCTIONAL_SCHEMA_ID = "eacomm/functional/v1"


class SchemaError(ValueError):
    """Input that does not follow the documented file format."""


_matrix = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1,
                     "items": {"type": "array", "minItems": 2, "maxItems": 2,
                               "items": {"type": "number"}}}}
_povm = {"type": "array", "minItems": 1, "items": _matrix}
_state = {"type": "object", "required": ["matrix", "dims"],
          "properties": {"matrix": _matrix,
                         "dims": {"type": "array", "items": {"type": "integer", "minimum": 1}}}}
_vec3 = {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}
_measurement = {"type": "object", "required": ["type"], "properties": {
    "type": {"enum": ["povm", "product", "sequential"]},
    "elements": _povm, "on_message": _povm, "on_local": _povm,
    "wiring": {"type": "array"}, "first": _povm,
    "second": {"type": "array", "items": _povm}, "message_first": {"type": "boolean"}}}

STRATEGY_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind"],
    "properties": {"schema": {"const": STRATEGY_SCHEMA_ID}, "name": {"type": "string"}},
    "oneOf": [
        {"properties": {"kind": {"const": "adaptive-ea-classical"},
                        "shared_state": _state,
                        "alice": {"type": "array", "minItems": 1, "items": _povm},
                        "bob": {"type": "array", "minItems": 1,
                                "items": {"type": "array", "minItems": 1, "items": _povm}},
                        "n_outputs": {"type": "integer", "minimum": 0}},
         "required": ["shared_state", "alice", "bob"]},
        {"properties": {"kind": {"const": "nonadaptive-ea-classical"},
                        "shared_state": _state,
                        "alice": {"type": "array", "minItems": 1, "items": _povm},
                        "bob_base": {"type": "array", "minItems": 1, "items": _povm},
                        "postprocess": {"type": "array"},
                        "n_outputs": {"type": "integer", "minimum": 0}},
         "required": ["shared_state", "alice", "bob_base", "postprocess"]},
        {"properties": {"kind": {"const": "quantum-message"},
                        "shared_state": _state,
                        "alice_channels": {"type": "array", "minItems": 1, "items": _povm},
                        "bob": {"type": "array", "minItems": 1, "items": _measurement},
                        "measurement_class": {"type": "string"}},
         "required": ["shared_state", "alice_channels", "bob", "measurement_class"]},
        {"properties": {"kind": {"const": "qubit-prepare-measure"},
                        "states": {"type": "array", "minItems": 1, "items": _vec3},
                        "povms": {"type": "array", "minItems": 1, "items": {
                            "type": "array", "minItems": 1, "items": {
                                "type": "object", "required": ["weight", "vector"],
                                "properties": {"weight": {"type": "number"}, "vector": _vec3}}}}},
         "required": ["states", "povms"]},
    ],
}

FUNCTIONAL_SCHEMA = {
    "type": "object",
    "required": ["schema", "coeffs"],
    "properties": {"schema": {"const": FUNCTIONAL_SCHEMA_ID},
                   "coeffs": {"type": "array"},
                   "offset": {"type": "number"},
                   "outcomes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                   "name": {"type": "string"}},
}


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def matrix_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim != 3 or a.shape[-1] != 2:
        raise SchemaError(f"matrix must be a rows x cols x [re, im] array, got shape {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


def _povm_json(p: Povm) -> list:
    return [matrix_to_json(e) for e in p.elements]


def _povm_from(data) -> Povm:
    return Povm(tuple(matrix_from_json(e) for e in data))


def _state_json(s: DensityState) -> dict:
    return {"matrix": matrix_to_json(s.matrix), "dims": list(s.dims)}


def _state_from(data) -> DensityState:
    return DensityState(matrix_from_json(data["matrix"]), tuple(data["dims"]))


def _measurement_json(meas) -> dict:
    if isinstance(meas, ProductMeasurement):
        return {"type": "product", "on_message": _povm_json(meas.on_message),
                "on_local": _povm_json(meas.on_local), "wiring": np.asarray(meas.wiring).tolist()}
    if isinstance(meas, SequentialMeasurement):
        return {"type": "sequential", "first": _povm_json(meas.first),
                "second": [_povm_json(p) for p in meas.second], "message_first": meas.message_first}
    return {"type": "povm", "elements": _povm_json(meas)}


def _measurement_from(data):
    kind = data["type"]
    try:
        if kind == "product":
            return ProductMeasurement(_povm_from(data["on_message"]), _povm_from(data["on_local"]),
                                      np.asarray(data["wiring"], dtype=float))
        if kind == "sequential":
            return SequentialMeasurement(_povm_from(data["first"]),
                                         tuple(_povm_from(p) for p in data["second"]),
                                         bool(data.get("message_first", True)))
        return _povm_from(data["elements"])
    except KeyError as exc:
        raise SchemaError(f"{kind} measurement is missing field {exc}") from None


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------

def strategy_to_json(s: Strategy, name: str = "") -> dict:
    out: dict[str, Any] = {"schema": STRATEGY_SCHEMA_ID}
    if name:
        out["name"] = name
    if isinstance(s, AdaptiveEAClassicalStrategy):
        out.update(kind="adaptive-ea-classical", shared_state=_state_json(s.shared_state),
                   alice=[_povm_json(p) for p in s.alice],
                   bob=[[_povm_json(p) for p in row] for row in s.bob], n_outputs=s.n_outputs)
    elif isinstance(s, NonAdaptiveEAClassicalStrategy):
        out.update(kind="nonadaptive-ea-classical", shared_state=_state_json(s.shared_state),
                   alice=[_povm_json(p) for p in s.alice],
                   bob_base=[_povm_json(p) for p in s.bob_base],
                   postprocess=np.asarray(s.postprocess).tolist(), n_outputs=s.n_outputs)
    elif isinstance(s, QuantumMessageStrategy):
        out.update(kind="quantum-message", shared_state=_state_json(s.shared_state),
                   alice_channels=[[matrix_to_json(k) for k in ch.kraus_ops] for ch in s.alice_channels],
                   bob=[_measurement_json(m) for m in s.bob], measurement_class=s.measurement_class)
    elif isinstance(s, QubitPrepareMeasure):
        out.update(kind="qubit-prepare-measure", states=np.asarray(s.states).tolist(),
                   povms=[[{"weight": w, "vector": np.asarray(v).tolist()} for w, v in povm]
                          for povm in s.povms])
    else:
        raise TypeError(f"cannot serialize {type(s).__name__}")
    return out


def strategy_from_json(data: dict) -> Strategy:
    """Rebuild a strategy; raises :class:`SchemaError` or ``InvariantError``."""
    try:
        jsonschema.validate(data, STRATEGY_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"strategy file does not match {STRATEGY_SCHEMA_ID}: {exc.message}") from None
    kind = data["kind"]
    if kind == "adaptive-ea-classical":
        return AdaptiveEAClassicalStrategy(
            _state_from(data["shared_state"]), tuple(_povm_from(p) for p in data["alice"]),
            tuple(tuple(_povm_from(p) for p in row) for row in data["bob"]), data.get("n_outputs", 0))
    if kind == "nonadaptive-ea-classical":
        return NonAdaptiveEAClassicalStrategy(
            _state_from(data["shared_state"]), tuple(_povm_from(p) for p in data["alice"]),
            tuple(_povm_from(p) for p in data["bob_base"]),
            np.asarray(data["postprocess"], dtype=int), data.get("n_outputs", 0))
    if kind == "quantum-message":
        chans = tuple(KrausChannel(tuple(matrix_from_json(k) for k in ch)) for ch in data["alice_channels"])
        return QuantumMessageStrategy(_state_from(data["shared_state"]), chans,
                                      tuple(_measurement_from(m) for m in data["bob"]),
                                      data["measurement_class"])
    povms = tuple(tuple((e["weight"], np.asarray(e["vector"], dtype=float)) for e in povm)
                  for povm in data["povms"])
    return QubitPrepareMeasure(np.asarray(data["states"], dtype=float), povms)


def _read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def save_strategy(s: Strategy, path: str | Path, name: str = "") -> Path:
    path = Path(path)
    path.write_text(json.dumps(strategy_to_json(s, name), indent=1))
    return path


def load_strategy(path: str | Path) -> Strategy:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top-level JSON value must be an object")
    return strategy_from_json(data)


# ---------------------------------------------------------------------------
# behaviors and functionals
# ---------------------------------------------------------------------------

def behavior_to_json(p: Behavior) -> dict:
    return {"schema": BEHAVIOR_SCHEMA_ID, "dims": list(p.dims), "p": p.p.tolist()}


def behavior_from_json(data: dict) -> Behavior:
    if data.get("schema") != BEHAVIOR_SCHEMA_ID or "p" not in data:
        raise SchemaError(f"not a {BEHAVIOR_SCHEMA_ID} document")
    return Behavior(np.asarray(data["p"], dtype=float))


def write_behavior_csv(p: Behavior, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "b", "p"])
        for x, y, b, v in p.rows():
            w.writerow([x, y, b, repr(v)])
    return path


def read_behavior_csv(path: str | Path) -> Behavior:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    dims = [1 + max(int(r[k]) for r in rows) for k in ("x", "y", "b")]
    p = np.zeros(dims)
    for r in rows:
        p[int(r["x"]), int(r["y"]), int(r["b"])] = float(r["p"])
    return Behavior(p)


def functional_to_json(f: LinearFunctional) -> dict:
    return {"schema": FUNCTIONAL_SCHEMA_ID, "name": f.name, "coeffs": f.coeffs.tolist(),
            "offset": f.offset, "outcomes": list(f.outcomes)}


def functional_from_json(data: dict) -> LinearFunctional:
    try:
        jsonschema.validate(data, FUNCTIONAL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"functional does not match {FUNCTIONAL_SCHEMA_ID}: {exc.message}") from None
    return LinearFunctional(np.asarray(data["coeffs"], dtype=float), float(data.get("offset", 0.0)),
                            tuple(data.get("outcomes", ())), data.get("name", ""))


def dump_json(obj: Any, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=1, default=_json_default))
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
