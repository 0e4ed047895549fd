"""JSON encoding of realizations and factorization results.

Matrices are row-major nested lists of ``[re, im]`` pairs. An empty block is
written as ``[]`` (or a list of empty rows) and takes its conformable shape
from ``m`` and the state dimensions on reading.
"""
import json
import math
from pathlib import Path

import numpy as np

from .errors import ShapeMismatch, ValidationError
from .realization import TwoSidedRealization

__all__ = [
    "ParseError",
    "encode_matrix",
    "decode_matrix",
    "realization_to_dict",
    "realization_from_dict",
    "load_realization",
    "save_realization",
    "to_jsonable",
    "dump_json",
    "read_json",
    "outer_factor_to_dict",
    "unitary_factor_to_dict",
    "bi_inner_to_dict",
    "bi_inner_from_dict",
    "coupling_to_dict",
]


class ParseError(ValidationError):
    """Malformed JSON or a document that does not match the schema."""


def encode_matrix(M):
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise ValueError("2-D array required")
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def decode_matrix(obj, name="matrix"):
    """Inverse of :func:`encode_matrix`; returns a complex128 array.

    ``[]`` decodes to a 0 x 0 array and ``[[], []]`` to 2 x 0.
    """
    if not isinstance(obj, list) or any(not isinstance(row, list) for row in obj):
        raise ParseError(f"{name}: expected a list of rows")
    if not obj:
        return np.zeros((0, 0), dtype=np.complex128)
    widths = {len(row) for row in obj}
    if len(widths) != 1:
        raise ParseError(f"{name}: rows have different lengths {sorted(widths)}")
    cols = widths.pop()
    out = np.zeros((len(obj), cols), dtype=np.complex128)
    for i, row in enumerate(obj):
        for j, pair in enumerate(row):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
            ):
                raise ParseError(f"{name}[{i}][{j}]: expected a [re, im] pair of numbers")
            out[i, j] = complex(pair[0], pair[1])
    if not np.all(np.isfinite(out)):
        raise ParseError(f"{name}: non-finite entry")
    return out


def _part(doc, key, names):
    part = doc.get(key, {})
    if not isinstance(part, dict):
        raise ParseError(f"{key}: expected an object")
    unknown = set(part) - set(names)
    if unknown:
        raise ParseError(f"{key}: unknown keys {sorted(unknown)}")
    return [decode_matrix(part.get(n, []), f"{key}.{n}") for n in names]


def _fit(M, rows, cols, name):
    # empty encodings lose one dimension; restore it from the context
    if M.size == 0:
        if M.shape[0] not in (0, rows) or M.shape[1] not in (0, cols):
            raise ShapeMismatch(f"{name} has shape {M.shape}, expected {(rows, cols)}")
        return np.zeros((rows, cols), dtype=np.complex128)
    return M


def realization_from_dict(doc):
    """Build a :class:`TwoSidedRealization` from the JSON schema
    ``{"m", "R0", "plus": {"A", "B", "C"}, "minus": {"alpha", "beta", "gamma"}}``."""
    if not isinstance(doc, dict):
        raise ParseError("top level: expected an object")
    if "m" not in doc or "R0" not in doc:
        raise ParseError("top level: keys 'm' and 'R0' are required")
    m = doc["m"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise ParseError("m: expected a nonnegative integer")
    R0 = _fit(decode_matrix(doc["R0"], "R0"), m, m, "R0")
    A, B, C = _part(doc, "plus", ("A", "B", "C"))
    al, be, ga = _part(doc, "minus", ("alpha", "beta", "gamma"))
    n, k = A.shape[0], al.shape[0]
    if A.shape[0] != A.shape[1] or al.shape[0] != al.shape[1]:
        raise ShapeMismatch("state matrices must be square")
    r = TwoSidedRealization(
        R0,
        A, _fit(B, n, m, "plus.B"), _fit(C, m, n, "plus.C"),
        al, _fit(be, k, m, "minus.beta"), _fit(ga, m, k, "minus.gamma"),
    )
    r.check_shapes()
    return r


def realization_to_dict(r):
    return {
        "m": int(r.m),
        "R0": encode_matrix(r.R0),
        "plus": {"A": encode_matrix(r.A), "B": encode_matrix(r.B), "C": encode_matrix(r.C)},
        "minus": {
            "alpha": encode_matrix(r.alpha),
            "beta": encode_matrix(r.beta),
            "gamma": encode_matrix(r.gamma),
        },
    }


def read_json(path):
    """Parse a JSON file; syntax errors become :class:`ParseError` with the
    line and column of the failure."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_realization(path):
    return realization_from_dict(read_json(path))


def to_jsonable(obj):
    """Recursively convert numpy scalars and arrays; non-finite floats
    become ``None`` so the output is strict JSON."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode_matrix(obj) if obj.ndim == 2 else to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dump_json(obj, path=None, indent=None):
    text = json.dumps(to_jsonable(obj), indent=indent, allow_nan=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def save_realization(r, path):
    dump_json(realization_to_dict(r), path)


def outer_factor_to_dict(psi):
    return {
        "D": psi.D, "Cout": psi.Cout, "AtildeStar": psi.AtildeStar, "B0": psi.B0,
        "A0": psi.A0, "C0": psi.C0, "Q": psi.dare.Q if psi.dare is not None else None,
        "realization": realization_to_dict(psi.psi),
        "residuals": dict(psi.residuals),
    }


def unitary_factor_to_dict(xi):
    return {
        "Xi0": xi.Xi0, "alpha": xi.alpha, "beta1": xi.beta1, "gamma": xi.gamma,
        "A0": xi.A0, "B1": xi.B1, "C1": xi.C1,
        "realization": realization_to_dict(xi.realization),
        "reduction": xi.reduction,
        "residuals": dict(xi.residuals),
    }


def bi_inner_to_dict(F, residuals=None):
    return {"A": F.A, "B": F.B, "C": F.C, "D": F.D, "residuals": residuals or {}}


def bi_inner_from_dict(doc, name="factor"):
    from .factorization import BiInnerRealization

    if not isinstance(doc, dict):
        raise ParseError(f"{name}: expected an object")
    A, B, C, D = (decode_matrix(doc.get(k, []), f"{name}.{k}") for k in "ABCD")
    n, m = A.shape[0], D.shape[0]
    return BiInnerRealization(A, _fit(B, n, m, f"{name}.B"), _fit(C, m, n, f"{name}.C"), D)


def coupling_to_dict(dss, residuals=None):
    return {
        "X": dss.X, "P0": dss.P0, "P1": dss.P1, "X_raw": dss.X_raw, "X_stein": dss.X_stein,
        "shape": list(dss.X.shape), "route": dss.coupling_route,
        "residuals": residuals if residuals is not None else dict(dss.residuals),
    }
