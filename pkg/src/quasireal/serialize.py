"""JSON scenario files.

Complex numbers are ``[re, im]`` pairs (bare reals are accepted on input),
matrices are row-major nested lists and the probe is a list of row vectors.
Every decoding error carries a JSON pointer to the offending field.
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema
import numpy as np

from .hilbert import HERMITIAN_TOL, hermitian_deviation, make_state, observable
from .measurement import COMPLETENESS_TOL, MeasurementModel, ProbeBasis, check_completeness
from .scenarios import Scenario, _eigenbasis_probe

__all__ = [
    "ScenarioError",
    "SCENARIO_SCHEMA",
    "encode_complex",
    "encode_matrix",
    "decode_matrix",
    "scenario_to_dict",
    "scenario_from_dict",
    "load_scenario",
    "dump_scenario",
]

_COMPLEX = {
    "anyOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _COMPLEX}}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["dim", "psi", "A", "B", "measurement"],
    "properties": {
        "name": {"type": "string"},
        "dim": {"type": "integer", "minimum": 1},
        "psi": {"type": "array", "minItems": 1, "items": _COMPLEX},
        "A": _MATRIX,
        "B": _MATRIX,
        "measurement": {
            "type": "object",
            "required": ["kraus"],
            "properties": {
                "kraus": {"type": "array", "minItems": 1, "items": _MATRIX},
                "labels": {"type": "array", "items": {"type": "string"}},
                "readouts": {"type": "array", "items": {"type": ["number", "null"]}},
            },
        },
        "probe": _MATRIX,
        "parameters": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}


class ScenarioError(ValueError):
    """Invalid scenario input.

    ``exit_code`` is 2 for malformed input and 3 for a measurement model that
    violates completeness.
    """

    def __init__(self, pointer: str, message: str, exit_code: int = 2):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.message = message
        self.exit_code = exit_code


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def encode_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(mat) -> list:
    return [[encode_complex(x) for x in row] for row in np.asarray(mat)]


def _decode_complex(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    return complex(x[0], x[1])


def decode_vector(data) -> np.ndarray:
    return np.array([_decode_complex(x) for x in data], dtype=complex)


def decode_matrix(data, pointer: str = "", dim: int | None = None) -> np.ndarray:
    rows = len(data)
    if any(len(row) != rows for row in data):
        raise ScenarioError(pointer, f"matrix must be square, got {rows} rows of lengths {[len(r) for r in data]}")
    if dim is not None and rows != dim:
        raise ScenarioError(pointer, f"expected a {dim}x{dim} matrix, got {rows}x{rows}")
    return np.array([[_decode_complex(x) for x in row] for row in data], dtype=complex)


def scenario_to_dict(scenario: Scenario) -> dict:
    m = scenario.model
    return {
        "name": scenario.name,
        "dim": scenario.dim,
        "psi": [encode_complex(z) for z in scenario.psi.amplitudes],
        "A": encode_matrix(scenario.A.matrix),
        "B": encode_matrix(scenario.B.matrix),
        "measurement": {
            "kraus": [encode_matrix(k) for k in m.kraus],
            "labels": list(m.labels),
            "readouts": list(m.readouts),
        },
        "probe": [[encode_complex(z) for z in row] for row in scenario.probe.vectors],
        "parameters": dict(scenario.parameters),
    }


def _observable(data, pointer: str, dim: int):
    mat = decode_matrix(data, pointer, dim)
    dev = hermitian_deviation(mat)
    if dev > HERMITIAN_TOL:
        raise ScenarioError(pointer, f"observable is not Hermitian: max |X - X^dagger| = {dev:.3e}")
    return observable(mat)


def scenario_from_dict(doc: Any, completeness_tol: float = COMPLETENESS_TOL) -> Scenario:
    """Validate and build a :class:`Scenario`.

    Without a ``probe`` entry the eigenbasis of ``B`` is used.
    """
    validator = jsonschema.Draft7Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ScenarioError(_pointer(err.absolute_path), err.message)
    dim = doc["dim"]
    if len(doc["psi"]) != dim:
        raise ScenarioError("/psi", f"expected {dim} amplitudes, got {len(doc['psi'])}")
    try:
        psi = make_state(decode_vector(doc["psi"]))
    except ValueError as exc:
        raise ScenarioError("/psi", str(exc)) from None
    A = _observable(doc["A"], "/A", dim)
    B = _observable(doc["B"], "/B", dim)

    meas = doc["measurement"]
    kraus = [decode_matrix(k, f"/measurement/kraus/{i}", dim) for i, k in enumerate(meas["kraus"])]
    n = len(kraus)
    labels = meas.get("labels")
    if labels is None:
        labels = [str(i) for i in range(n)]
    elif len(labels) != n:
        raise ScenarioError("/measurement/labels", f"expected {n} labels, got {len(labels)}")
    readouts = meas.get("readouts")
    if readouts is None:
        readouts = [None] * n
    elif len(readouts) != n:
        raise ScenarioError("/measurement/readouts", f"expected {n} readouts, got {len(readouts)}")
    model = MeasurementModel.from_kraus(kraus, labels, readouts)
    residual = check_completeness(model)
    if residual > completeness_tol:
        raise ScenarioError(
            "/measurement/kraus",
            f"measurement is incomplete: max |sum M^dagger M - I| = {residual:.17g}",
            exit_code=3,
        )

    if "probe" in doc:
        rows = doc["probe"]
        if len(rows) != dim or any(len(r) != dim for r in rows):
            raise ScenarioError("/probe", f"probe must list {dim} vectors of length {dim}")
        try:
            probe = ProbeBasis.from_vectors([decode_vector(r) for r in rows])
        except ValueError as exc:
            raise ScenarioError("/probe", str(exc)) from None
    else:
        probe = _eigenbasis_probe(B)

    params = {k: float(v) for k, v in doc.get("parameters", {}).items()}
    return Scenario(doc.get("name", "scenario"), psi, A, B, model, probe, params)


def load_scenario(path, completeness_tol: float = COMPLETENESS_TOL) -> Scenario:
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ScenarioError("", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except _ConstantError as exc:
        pos = text.find(exc.args[0])
        line = text.count("\n", 0, pos) + 1
        raise ScenarioError("", f"non-standard constant {exc.args[0]} at line {line}") from None
    return scenario_from_dict(doc, completeness_tol)


class _ConstantError(ValueError):
    pass


def _reject_constant(name):
    raise _ConstantError(name)


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2)
