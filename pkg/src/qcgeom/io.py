"""JSON files for packets, models, bounds and reports.

Every file carries ``schema_version``; unknown fields are rejected.
Floats are written with Python's shortest round-trip repr, so a
load/dump cycle reproduces the binary values exactly. Non-finite
numbers in reports are written as the strings "inf", "-inf", "nan".
"""

import json
import math

import numpy as np
from jsonschema import Draft202012Validator

from .algebra import QuaternionicTriple, standard_triple
from .errors import QCError
from .lie import LieQCModel
from .myers import MyersBounds
from .torsion import TorsionPacket

SCHEMA_VERSION = 1


class SchemaValidationError(QCError):
    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"


_num = {"type": "number"}
_matrix = {"type": "array", "items": {"type": "array", "items": _num}}
_triple_of_matrices = {"type": "array", "minItems": 3, "maxItems": 3, "items": _matrix}
_triple_field = {"oneOf": [{"const": "standard"}, _triple_of_matrices]}
_header = {"schema_version": {"const": SCHEMA_VERSION}}

PACKET_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "h", "tau", "TSigma", "To"],
    "properties": {
        **_header,
        "kind": {"const": "packet"},
        "h": {"type": "integer", "minimum": 4, "multipleOf": 4},
        "tau": _num,
        "TSigma": _triple_of_matrices,
        "To": _triple_of_matrices,
        "vertical_integrable": {"type": "boolean"},
        "dtau": {"type": "array", "minItems": 3, "maxItems": 3, "items": _num},
        "vertical_torsion_H": {"type": "array", "minItems": 3, "maxItems": 3, "items": _matrix},
        "triple": _triple_field,
    },
}

MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "h", "c"],
    "properties": {
        **_header,
        "kind": {"const": "model"},
        "name": {"type": "string"},
        "h": {"type": "integer", "minimum": 4, "multipleOf": 4},
        "c": {"type": "array", "items": {
            "type": "object",
            "additionalProperties": False,
            "required": ["i", "j", "k", "value"],
            "properties": {"i": {"type": "integer", "minimum": 1},
                           "j": {"type": "integer", "minimum": 1},
                           "k": {"type": "integer", "minimum": 1},
                           "value": _num}}},
        "triple": _triple_field,
    },
}

BOUNDS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "h", "ua", "ub", "uc"],
    "properties": {
        **_header,
        "kind": {"const": "bounds"},
        "h": {"type": "integer", "minimum": 4, "multipleOf": 4},
        "ua": {"type": "number", "minimum": 0},
        "ub": _num,
        "uc": _num,
        "rho0": _num,
    },
}


def _pointer(path):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def check_schema(doc, schema):
    errors = sorted(Draft202012Validator(schema).iter_errors(doc),
                    key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        e = errors[0]
        raise SchemaValidationError(e.message, _pointer(e.absolute_path))


def _array(doc, key, shape):
    try:
        a = np.array(doc[key], dtype=float)
    except ValueError as exc:  # ragged nesting
        raise SchemaValidationError(f"ragged array ({exc})", "/" + key) from None
    if a.shape != shape:
        raise SchemaValidationError(f"expected shape {shape}, got {a.shape}", "/" + key)
    return a


def _triple(doc, h):
    t = doc.get("triple", "standard")
    if t == "standard":
        return standard_triple(h // 4)
    return QuaternionicTriple(_array(doc, "triple", (3, h, h)))


def _finite(doc, key, a):
    if not np.all(np.isfinite(a)):
        raise SchemaValidationError("non-finite entry", "/" + key)


def _read(source):
    if isinstance(source, dict):
        return source
    try:
        with open(source) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaValidationError(f"invalid JSON: {exc}") from None


# --- packets ----------------------------------------------------------------

def packet_from_dict(doc):
    check_schema(doc, PACKET_SCHEMA)
    h = doc["h"]
    TS = _array(doc, "TSigma", (3, h, h))
    To = _array(doc, "To", (3, h, h))
    kw = {}
    if "dtau" in doc:
        kw["dtau"] = np.array(doc["dtau"], dtype=float)
    if "vertical_torsion_H" in doc:
        kw["vertical_torsion_H"] = _array(doc, "vertical_torsion_H", (3, 3, h))
    for k, a in (("TSigma", TS), ("To", To)):
        _finite(doc, k, a)
    return TorsionPacket(_triple(doc, h), TS, To, float(doc["tau"]),
                         bool(doc.get("vertical_integrable", True)), **kw)


def _is_standard(t):
    return np.array_equal(t.J, standard_triple(t.h // 4).J)


def packet_to_dict(p):
    d = {"schema_version": SCHEMA_VERSION, "kind": "packet", "h": p.h, "tau": float(p.tau),
         "TSigma": p.TSigma.tolist(), "To": p.To.tolist(),
         "vertical_integrable": bool(p.vertical_integrable), "dtau": p.dtau.tolist()}
    if np.any(p.vertical_torsion_H):
        d["vertical_torsion_H"] = p.vertical_torsion_H.tolist()
    d["triple"] = "standard" if _is_standard(p.triple) else p.triple.J.tolist()
    return d


def load_packet(source):
    return packet_from_dict(_read(source))


# --- models -----------------------------------------------------------------

def model_from_dict(doc):
    check_schema(doc, MODEL_SCHEMA)
    h = doc["h"]
    n = h + 3
    c = np.zeros((n, n, n))
    seen = {}
    for idx, e in enumerate(doc["c"]):
        i, j, k = e["i"], e["j"], e["k"]
        where = f"/c/{idx}"
        if max(i, j, k) > n:
            raise SchemaValidationError(f"index exceeds dimension {n}", where)
        v = float(e["value"])
        if not math.isfinite(v):
            raise SchemaValidationError("non-finite value", where + "/value")
        if i == j:
            if v != 0:
                raise SchemaValidationError("[F_i, F_i] must vanish", where)
            continue
        key = (min(i, j), max(i, j), k)
        val = v if i < j else -v
        if key in seen and seen[key] != val:
            raise SchemaValidationError("entry contradicts antisymmetry of an earlier entry", where)
        seen[key] = val
    for (i, j, k), v in seen.items():
        c[k - 1, i - 1, j - 1] = v
        c[k - 1, j - 1, i - 1] = -v
    return LieQCModel(c, _triple(doc, h), doc.get("name", ""))


def model_to_dict(m):
    n = m.n
    entries = [{"i": i + 1, "j": j + 1, "k": k + 1, "value": float(m.c[k, i, j])}
               for i in range(n) for j in range(i + 1, n) for k in range(n) if m.c[k, i, j] != 0]
    return {"schema_version": SCHEMA_VERSION, "kind": "model", "name": m.name, "h": m.h,
            "c": entries, "triple": "standard" if _is_standard(m.triple) else m.triple.J.tolist()}


def load_model(source):
    return model_from_dict(_read(source))


# --- bounds -----------------------------------------------------------------

def bounds_from_dict(doc):
    check_schema(doc, BOUNDS_SCHEMA)
    b = MyersBounds(doc["h"], float(doc["ua"]), float(doc["ub"]), float(doc["uc"]))
    return b, (float(doc["rho0"]) if "rho0" in doc else None)


def load_bounds(source):
    return bounds_from_dict(_read(source))


# --- reports ----------------------------------------------------------------

def jsonable(x):
    """Convert numpy values and non-finite floats into plain JSON data."""
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): jsonable(v)
                for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def dumps(doc):
    return json.dumps(jsonable(doc), indent=2, sort_keys=False, allow_nan=False)


def make_report(command, results, tol, passed, first_failure=None):
    from . import __version__
    return {"schema_version": SCHEMA_VERSION, "kind": "report", "command": command,
            "version": __version__, "tolerances": tol.to_dict(), "passed": bool(passed),
            "first_failure": first_failure, "results": results}
