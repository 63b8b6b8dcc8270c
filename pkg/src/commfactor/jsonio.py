"""JSON encodings of matrices, paths, determinant values and factorizations.

Matrix::

    {"dim": n, "entries": [[re, im], ...]}          row-major, n*n entries

Path::

    {"dim": m, "grid": [t_0, ..., t_N], "samples": [Matrix, ...]}

Factorization::

    {"pairs": [{"x": Matrix|Path, "y": Matrix|Path}, ...],
     "residual": Matrix|Path|null,
     "certificate": {"recon_err": r, "max_factor_dist_to_1": m, "count": k},
     "strategy": tag}

Floats are written with ``repr`` precision, which round-trips doubles
exactly. Readers also accept ``entries`` as nested rows of ``[re, im]``
pairs or of plain reals.
"""

from __future__ import annotations

import json

import numpy as np

from .blocklu import StdFactors
from .dhsdet import DhsValue
from .factorization import Certificate, CommutatorFactorization
from .pathfun import MatrixPath
from .su2fact import CommutatorPair


class FormatError(ValueError):
    """Malformed JSON document."""


# -- matrices and paths ----------------------------------------------------------


def matrix_to_json(x):
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise FormatError("expected a square matrix")
    return {"dim": x.shape[0], "entries": [[float(z.real), float(z.imag)] for z in x.ravel()]}


def _entry(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise FormatError("complex entries are [re, im] pairs")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def matrix_from_json(doc):
    try:
        n = int(doc["dim"])
        entries = doc["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"matrix needs 'dim' and 'entries': {exc}") from exc
    if n < 1:
        raise FormatError("dimension must be positive")
    if not isinstance(entries, list):
        raise FormatError("'entries' must be a list")
    # nested rows: n rows for n > 1, or a single row of pairs for n == 1
    nested = (n > 1 and len(entries) == n) or (
        n == 1 and len(entries) == 1 and isinstance(entries[0], list) and entries[0] and isinstance(entries[0][0], list)
    )
    try:
        flat = [v for row in entries for v in row] if nested else entries
    except TypeError as exc:
        raise FormatError("rows must be lists") from exc
    if len(flat) != n * n:
        raise FormatError(f"expected {n * n} entries, got {len(flat)}")
    vals = np.array([_entry(v) for v in flat], dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise FormatError("entries must be finite")
    return vals.reshape(n, n)


def path_to_json(p):
    return {
        "dim": p.dim,
        "grid": [float(t) for t in p.grid],
        "samples": [matrix_to_json(s) for s in p.samples],
    }


def path_from_json(doc):
    try:
        grid = np.array(doc["grid"], dtype=float)
        samples = np.array([matrix_from_json(s) for s in doc["samples"]])
        dim = int(doc["dim"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"path needs 'dim', 'grid' and 'samples': {exc}") from exc
    if samples.ndim != 3 or samples.shape[1] != dim:
        raise FormatError("sample dimension does not match 'dim'")
    try:
        return MatrixPath(grid, samples)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def value_to_json(v):
    """Matrix or path."""
    return path_to_json(v) if isinstance(v, MatrixPath) else matrix_to_json(v)


def value_from_json(doc):
    if not isinstance(doc, dict):
        raise FormatError("expected a JSON object")
    return path_from_json(doc) if "grid" in doc else matrix_from_json(doc)


# -- results --------------------------------------------------------------------


def dhs_to_json(v: DhsValue):
    return {
        "raw": [v.raw.real, v.raw.imag],
        "lattice": v.lattice_step,
        "residue": [v.residue.real, v.residue.imag],
        "is_zero": bool(v.is_zero),
        "tol": v.tol,
    }


def factorization_to_json(f: CommutatorFactorization, extra=None):
    doc = {
        "pairs": [{"x": value_to_json(p.x), "y": value_to_json(p.y)} for p in f.pairs],
        "residual": None if f.residual is None else value_to_json(f.residual),
        "certificate": f.certificate.as_dict(),
        "strategy": f.strategy,
    }
    if extra:
        doc.update(extra)
    return doc


def factorization_from_json(doc):
    """Pairs, residual and the recorded certificate (not recomputed)."""
    try:
        pairs = [CommutatorPair(value_from_json(p["x"]), value_from_json(p["y"])) for p in doc["pairs"]]
        cert = doc["certificate"]
        certificate = Certificate(
            recon_err=float(cert["recon_err"]),
            count=int(cert["count"]),
            max_factor_dist_to_1=float(cert["max_factor_dist_to_1"]),
            strategy=str(doc.get("strategy", "")),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed factorization: {exc}") from exc
    residual = doc.get("residual")
    residual = None if residual is None else value_from_json(residual)
    dims = {p.dim for p in pairs}
    if residual is not None:
        dims.add(residual.dim if isinstance(residual, MatrixPath) else residual.shape[0])
    if len(dims) > 1:
        raise FormatError("pairs have mismatched dimensions")
    dim = dims.pop() if dims else 0
    return CommutatorFactorization(tuple(pairs), certificate, residual, None, dim)


def std_to_json(f: StdFactors):
    return {
        "s": matrix_to_json(f.s),
        "t": matrix_to_json(f.t),
        "d": matrix_to_json(f.d),
        "blocks": [int(r) for r in f.decomposition.ranks],
    }


def dumps(doc):
    return json.dumps(doc, allow_nan=False)


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
