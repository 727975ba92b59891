"""JSON documents for operators, functions, C-elements, factorizations and reports.

Complex numbers are ``[re, im]`` pairs. Floats are written by ``json`` with
``repr``, the shortest string that parses back to the same double, so a
write/read cycle is bit-exact. Subsets are 1-based sorted lists. Arrays are
flattened row-major: cell axes first (dimension 1 most significant), then the
integration-cell axes of the subset, then row, then column.
"""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .algebra import MixedOperator
from .errors import MalformedInput
from .factorization import Factorization
from .spectral import SpectrumReport
from .staircase import StaircaseFunction, as_subset, cell_shape, function_shape, kernel_shape
from .tracedet import CElement

SCHEMA_VERSION = "1.0"

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_clist = {"type": "array", "items": _complex}
_alpha = {"type": "array", "items": {"type": "integer", "minimum": 1}}
_dims = {k: {"type": "integer", "minimum": 1} for k in ("N", "M", "p")}
_header = {"schema_version": {"const": SCHEMA_VERSION}, "kind": {"type": "string"}, **_dims}
_term = {"type": "object", "required": ["alpha", "data"], "additionalProperties": False,
         "properties": {"alpha": _alpha, "data": _clist}}
_component = {"type": "object", "required": ["alpha", "values"], "additionalProperties": False,
              "properties": {"alpha": _alpha, "values": _clist}}


def _doc(kind, required, props):
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["schema_version", "kind", "N", "M", "p", *required],
        "properties": {**_header, "kind": {"const": kind}, **props},
    }


SCHEMAS = {
    "operator": _doc("operator", ["terms"], {"terms": {"type": "array", "items": _term}}),
    "function": _doc("function", ["values"], {"values": _clist}),
    "celement": _doc("celement", ["components"], {"components": {"type": "array", "items": _component}}),
    "factorization": _doc("factorization", ["factors", "inverse_factors", "dets", "residue"], {
        "factors": {"type": "array", "items": _term},
        "inverse_factors": {"type": "array", "items": _term},
        "dets": {"type": "array", "items": _component},
        "residue": {"type": "number", "minimum": 0},
    }),
    "spectrum_report": _doc("spectrum_report", ["grid", "thresholds", "records", "flagged"], {
        "grid": _clist,
        "thresholds": {"type": "array", "items": {"type": "number"}},
        "records": {"type": "array", "items": {"type": "array", "items": {
            "type": "object", "required": ["alpha"],
            "properties": {
                "alpha": _alpha,
                "min_abs_pi": {"type": "number", "minimum": 0},
                "argmin_cell": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "status": {"const": "undefined_earlier_factor_singular"},
                "at": {"type": "object", "required": ["alpha", "cell"]},
            },
            "oneOf": [{"required": ["min_abs_pi", "argmin_cell"]}, {"required": ["status", "at"]}],
        }}},
        "flagged": {"type": "array", "items": {
            "type": "object", "required": ["alpha", "cell", "lambda"],
            "properties": {"alpha": _alpha,
                           "cell": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                           "lambda": _complex}}},
    }),
    "oracle": _doc("oracle", ["D", "matrix", "det", "eigenvalues", "residuals"], {
        "D": {"type": "integer", "minimum": 1},
        "matrix": _clist,
        "det": _complex,
        "eigenvalues": _clist,
        "residuals": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
    }),
}


# -- primitives ---------------------------------------------------------------

def enc(a) -> list:
    a = np.asarray(a, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in a]


def enc1(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def dec(pairs, shape) -> np.ndarray:
    n = int(np.prod(shape, dtype=np.int64))
    if len(pairs) != n:
        raise MalformedInput(f"expected {n} values, got {len(pairs)}")
    arr = np.asarray(pairs, dtype=np.float64).reshape(n, 2) if n else np.zeros((0, 2))
    if not np.all(np.isfinite(arr)):
        raise MalformedInput("non-finite value in data")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)


def alpha_out(alpha) -> list:
    return [int(d) for d in alpha]


def alpha_in(lst, N):
    if list(lst) != sorted(set(lst)):
        raise MalformedInput(f"alpha {lst} must be sorted without repeats")
    return as_subset(lst, N)


def validate(doc: dict, kind: str | None = None) -> None:
    if not isinstance(doc, dict):
        raise MalformedInput("document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise MalformedInput(f"unsupported schema_version {doc.get('schema_version')!r}")
    actual = doc.get("kind")
    if kind is not None and actual != kind:
        raise MalformedInput(f"expected kind {kind!r}, got {actual!r}")
    if actual not in SCHEMAS:
        raise MalformedInput(f"unknown document kind {actual!r}")
    try:
        jsonschema.validate(doc, SCHEMAS[actual])
    except jsonschema.ValidationError as exc:
        raise MalformedInput(f"schema violation at {list(exc.absolute_path)}: {exc.message}") from None


def _head(kind, N, M, p) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "N": int(N), "M": int(M), "p": int(p)}


def _terms_out(N, M, p, items) -> list:
    return [{"alpha": alpha_out(a), "data": enc(K)} for a, K in items]


def _terms_in(doc, terms) -> dict:
    N, M, p = doc["N"], doc["M"], doc["p"]
    out = {}
    for t in terms:
        a = alpha_in(t["alpha"], N)
        if a in out:
            raise MalformedInput(f"duplicate alpha {list(a)}")
        out[a] = dec(t["data"], kernel_shape(N, M, p, a))
    return out


def _components_out(c: CElement) -> list:
    return [{"alpha": alpha_out(a), "values": enc(v)} for a, v in c.components.items()]


def _components_in(doc, comps) -> dict:
    N, p = doc["N"], doc["p"]
    out = {}
    for c in comps:
        a = alpha_in(c["alpha"], N)
        if a in out:
            raise MalformedInput(f"duplicate alpha {list(a)}")
        out[a] = dec(c["values"], cell_shape(N, p, a))
    return out


# -- documents ----------------------------------------------------------------

def operator_to_doc(A: MixedOperator) -> dict:
    return {**_head("operator", *A.dims()), "terms": _terms_out(*A.dims(), A.terms.items())}


def operator_from_doc(doc: dict) -> MixedOperator:
    validate(doc, "operator")
    return MixedOperator(doc["N"], doc["M"], doc["p"], _terms_in(doc, doc["terms"]))


def function_to_doc(u: StaircaseFunction) -> dict:
    return {**_head("function", u.N, u.M, u.p), "values": enc(u.values)}


def function_from_doc(doc: dict) -> StaircaseFunction:
    validate(doc, "function")
    N, M, p = doc["N"], doc["M"], doc["p"]
    return StaircaseFunction(N, M, p, dec(doc["values"], function_shape(N, M, p)))


def celement_to_doc(c: CElement) -> dict:
    return {**_head("celement", *c.dims()), "components": _components_out(c)}


def celement_from_doc(doc: dict) -> CElement:
    validate(doc, "celement")
    return CElement(doc["N"], doc["M"], doc["p"], _components_in(doc, doc["components"]))


def factorization_to_doc(fac: Factorization, N: int, M: int, p: int) -> dict:
    """Factors are stored by their kernels: the multiplication blocks for the
    empty subset, and the kernel of the single integral term otherwise."""
    def kern(alpha, G):
        return G.term(alpha)
    return {
        **_head("factorization", N, M, p),
        "factors": _terms_out(N, M, p, [(a, kern(a, G)) for a, G in fac.factors]),
        "inverse_factors": _terms_out(N, M, p, [(a, kern(a, G)) for a, G in fac.inverse_factors]),
        "dets": [{"alpha": alpha_out(a), "values": enc(v)} for a, v in fac.dets.items()],
        "residue": float(fac.residue),
    }


def spectrum_to_doc(rep: SpectrumReport, N: int, M: int, p: int) -> dict:
    records = []
    for recs in rep.records:
        row = []
        for a, r in recs.items():
            if r.defined:
                row.append({"alpha": alpha_out(a), "min_abs_pi": r.min_abs_pi,
                            "argmin_cell": list(r.argmin_cell)})
            else:
                b, cell = r.undefined_at
                row.append({"alpha": alpha_out(a), "status": "undefined_earlier_factor_singular",
                            "at": {"alpha": alpha_out(b), "cell": [int(c) for c in cell]}})
        records.append(row)
    return {
        **_head("spectrum_report", N, M, p),
        "grid": [enc1(z) for z in rep.grid],
        "thresholds": [float(t) for t in rep.thresholds],
        "records": records,
        "flagged": [{"alpha": alpha_out(a), "cell": list(c), "lambda": enc1(lam)}
                    for a, c, lam in rep.flagged],
    }


def dumps(doc: dict) -> str:
    validate(doc)
    return json.dumps(doc, allow_nan=False)


def write(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc) + "\n")


def read(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _reject_constant(name):
    raise MalformedInput(f"non-finite constant {name} in input")


LOADERS = {
    "operator": operator_from_doc,
    "function": function_from_doc,
    "celement": celement_from_doc,
}
