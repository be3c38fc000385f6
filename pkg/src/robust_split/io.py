"""Problem files: strict JSON schema, loading and dumping."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .errors import PreconditionError, SchemaError
from .geometry.sets import from_json as set_from_json
from .residual import Problem, Tolerances
from .uncertainty import UncertaintySet

FORMAT_VERSION = "1"

_num = {"type": "number"}
_vec = {"type": "array", "items": _num, "minItems": 1}
_mat = {"type": "array", "items": _vec, "minItems": 1}
_dim = {"type": "integer", "minimum": 1}


def _variant(kind, props, required):
    return {
        "type": "object",
        "properties": {"type": {"const": kind}, **props},
        "required": ["type", *required],
        "additionalProperties": False,
    }


SET_SCHEMA = {
    "oneOf": [
        _variant("nonneg_orthant", {"dim": _dim}, ["dim"]),
        _variant("nonpos_orthant", {"dim": _dim}, ["dim"]),
        _variant("whole", {"dim": _dim}, ["dim"]),
        _variant("box", {"lo": _vec, "hi": _vec}, ["lo", "hi"]),
        _variant("ball", {"center": _vec, "radius": {"type": "number", "minimum": 0}}, ["center", "radius"]),
        _variant("halfspaces", {"G": _mat, "h": _vec}, ["G", "h"]),
        _variant("fingen_cone", {"generators": {"type": "array", "items": _vec}, "dim": _dim}, ["generators"]),
        _variant("singleton", {"point": _vec}, ["point"]),
    ]
}

PROBLEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "name": {"type": "string"},
        "n": _dim,
        "m": _dim,
        "C": SET_SCHEMA,
        "Q": SET_SCHEMA,
        "U": {
            "type": "object",
            "properties": {"vertices": {"type": "array", "items": _mat, "minItems": 1}},
            "required": ["vertices"],
            "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {
                "tol_feas": {"type": "number", "exclusiveMinimum": 0},
                "tol_proj": {"type": "number", "exclusiveMinimum": 0},
                "tol_eig": {"type": "number", "exclusiveMinimum": 0},
                "tol_active": {"type": "number", "exclusiveMinimum": 0},
                "tol_dual": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
    },
    "required": ["version", "n", "m", "C", "Q", "U"],
    "additionalProperties": False,
}


def _where(path) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)


def _best_error(err):
    """For a failed set variant, report the error of the branch named by its "type"."""
    if err.validator != "oneOf" or not isinstance(err.instance, dict):
        return err
    kinds = [b["properties"]["type"]["const"] for b in err.validator_value]
    kind = err.instance.get("type")
    if kind not in kinds:
        err.message = f"unknown set type {kind!r}; expected one of {', '.join(kinds)}"
        return err
    idx = kinds.index(kind)
    branch = [e for e in err.context if e.schema_path and e.schema_path[0] == idx]
    return branch[0] if branch else err


def problem_from_dict(obj) -> Problem:
    """Validate a decoded problem document and build the :class:`Problem`."""
    try:
        jsonschema.validate(obj, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        e = _best_error(exc)
        raise SchemaError(f"{_where(e.absolute_path)}: {e.message}") from None
    try:
        C = set_from_json(obj["C"])
        Q = set_from_json(obj["Q"])
        U = UncertaintySet(obj["U"]["vertices"])
    except (ValueError, KeyError) as exc:
        raise SchemaError(str(exc)) from None
    n, m = obj["n"], obj["m"]
    if (U.m, U.n) != (m, n):
        raise SchemaError(f"$.U.vertices: matrices are {U.m}x{U.n}, expected {m}x{n}")
    if C.dim != n:
        raise SchemaError(f"$.C: set lives in R^{C.dim}, expected R^{n}")
    if Q.dim != m:
        raise SchemaError(f"$.Q: set lives in R^{Q.dim}, expected R^{m}")
    tol = Tolerances(**obj.get("tolerances", {}))
    try:
        return Problem(C, Q, U, tol, obj.get("name", ""))
    except PreconditionError as exc:
        raise SchemaError(str(exc)) from None


def load_problem(path) -> Problem:
    """Read and validate a UTF-8 JSON problem file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return problem_from_dict(obj)


def problem_to_dict(P: Problem) -> dict:
    out = {
        "version": FORMAT_VERSION,
        "n": P.n,
        "m": P.m,
        "C": P.C.to_json(),
        "Q": P.Q.to_json(),
        "U": P.U.to_json(),
        "tolerances": P.tol.to_json(),
    }
    if P.name:
        out["name"] = P.name
    return out


def dump_problem(P: Problem, path=None, indent: int = 2) -> str:
    """Serialise a problem; writes to ``path`` when given and returns the text."""
    text = json.dumps(problem_to_dict(P), indent=indent)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def same_problem(P1: Problem, P2: Problem) -> bool:
    """Structural equality of two problems (sets, vertices, tolerances)."""
    return (problem_to_dict(P1) == problem_to_dict(P2)
            and np.array_equal(P1.U.vertices, P2.U.vertices))
