"""JSON inputs (schema-checked, errors carry JSON-pointer paths) and CSV output."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import jsonschema
import numpy as np

from .errors import SchemaError
from .inverse import ModelOperator
from .measure import Measure
from .pencil import FiveDiagMatrix, JacobiMatrix, Pencil

_NUMBERS = {"type": "array", "items": {"type": "number"}}
_TAIL = {"enum": ["constant", "none"]}

PENCIL_SCHEMA = {
    "type": "object",
    "required": ["a", "b", "alpha5", "beta5", "gamma5", "alpha", "beta"],
    "properties": {"a": _NUMBERS, "b": {**_NUMBERS, "minItems": 1},
                   "alpha5": {**_NUMBERS, "minItems": 1}, "beta5": _NUMBERS,
                   "gamma5": _NUMBERS, "alpha": {"type": "number"},
                   "beta": {"type": "number"}, "tail": _TAIL},
}

MEASURE_SCHEMA = {
    "oneOf": [
        {"type": "object", "required": ["type", "points"],
         "properties": {"type": {"const": "atoms"},
                        "points": {"type": "array", "minItems": 1,
                                   "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                             "items": {"type": "number"}}}}},
        {"type": "object", "required": ["type", "center"],
         "properties": {"type": {"const": "chebyshev_u"}, "center": {"type": "number"},
                        "scale": {"type": "number", "exclusiveMinimum": 0}}},
        {"type": "object", "required": ["type", "a", "b", "order"],
         "properties": {"type": {"const": "jacobi"}, "a": _NUMBERS,
                        "b": {**_NUMBERS, "minItems": 1},
                        "order": {"type": "integer", "minimum": 1}, "tail": _TAIL}},
    ]
}

XI_SCHEMA = {
    "type": "object", "required": ["columns"],
    "properties": {"columns": {"type": "array", "minItems": 1, "items": _NUMBERS}},
}

SPECIAL_SCHEMA = {
    "type": "object", "required": ["J3", "measure", "a", "b", "d"],
    "properties": {
        "J3": {"type": "object", "required": ["a", "b"],
               "properties": {"a": _NUMBERS, "b": _NUMBERS, "tail": _TAIL}},
        "measure": MEASURE_SCHEMA,
        "a": {"type": "number"}, "b": {"type": "number"}, "d": {"type": "number"},
        "c_support": {"type": "number"}, "N": {"type": "integer", "minimum": 1},
    },
}


def check(doc, schema, what: str):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise SchemaError(f"{what}: {err.message}", pointer=pointer)
    return doc


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc.msg}", pointer="", line=exc.lineno) from exc


def pencil_from_dict(doc: dict) -> Pencil:
    check(doc, PENCIL_SCHEMA, "pencil")
    tail = doc.get("tail", "constant")
    return Pencil(JacobiMatrix(doc["a"], doc["b"], tail),
                  FiveDiagMatrix(doc["alpha5"], doc["beta5"], doc["gamma5"], tail),
                  doc["alpha"], doc["beta"])


def pencil_to_dict(theta: Pencil) -> dict:
    return {"a": list(theta.J3.a), "b": list(theta.J3.b),
            "alpha5": list(theta.J5.alpha5), "beta5": list(theta.J5.beta5),
            "gamma5": list(theta.J5.gamma5), "alpha": theta.alpha, "beta": theta.beta,
            "tail": theta.J3.tail}


def measure_from_dict(doc: dict) -> Measure:
    check(doc, MEASURE_SCHEMA, "measure")
    kind = doc["type"]
    if kind == "atoms":
        return Measure.atoms(doc["points"])
    if kind == "chebyshev_u":
        return Measure.chebyshev_u(doc["center"], doc.get("scale", 1.0))
    J = JacobiMatrix(doc["a"], doc["b"], doc.get("tail", "constant"))
    return Measure.jacobi_generated(J, doc["order"])


def xi_from_dict(doc: dict, measure: Measure) -> ModelOperator:
    check(doc, XI_SCHEMA, "xi")
    return ModelOperator.from_columns(doc["columns"], measure)


def special_from_dict(doc: dict):
    """(J3, measure, a, b, d, N, c_support) from a special-pencil document."""
    check(doc, SPECIAL_SCHEMA, "special")
    J = doc["J3"]
    J3 = JacobiMatrix(J["a"], J["b"], J.get("tail", "constant"))
    return (J3, measure_from_dict(doc["measure"]), doc["a"], doc["b"], doc["d"],
            doc.get("N", 16), doc.get("c_support"))


def parse_poly(text: str) -> np.ndarray:
    """Comma-separated coefficients, low degree first; complex entries allowed ("1+2j")."""
    try:
        vals = [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise SchemaError(f"bad polynomial {text!r}", pointer="") from exc
    if not vals:
        raise SchemaError("empty polynomial", pointer="")
    arr = np.array(vals)
    return arr.real if not np.any(arr.imag) else arr


def format_number(x) -> str:
    """Shortest round-trip form (at most 17 significant digits), locale-independent."""
    return repr(float(x))


def table_csv(table, header=None) -> str:
    rows = [list(r) for r in table]
    width = len(rows[0]) if rows else len(header or [])
    if any(len(r) != width for r in rows):
        raise ValueError("table is not rectangular")
    header = header or [f"v{j}" for j in range(width)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else format_number(v) for v in r])
    return buf.getvalue()


def emit_plotdata(table, path=None, header=None) -> str:
    """Write ``table`` as CSV to ``path`` (or just return the text when path is None)."""
    text = table_csv(table, header)
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    return np.array([[float(v) for v in r] for r in rows[1:]])
