"""JSON scheme files.

Layout::

    {
      "label": "chuang3", "n": 3, "m": 1,
      "states": {"000": {"amplitudes": [[re, im], ...]},
                 "001": {"matrix": [[[re, im], ...], ...]}, ...},
      "povms": [{"e0": [[[re, im], ...], ...]}, ...]
    }

``e1`` is never stored; it is rebuilt as ``I - e0`` on load.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ._tolerances import LOAD_TOL
from .core import BinaryPovm, DensityMatrix, PureState, QuantumError
from .schemes import QracScheme, bitstrings

__all__ = ["SchemeFileError", "SchemeFormatError", "SchemeInvariantError", "load_scheme", "save_scheme", "scheme_to_dict", "scheme_from_dict"]


class SchemeFileError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.key_path = path


class SchemeFormatError(SchemeFileError):
    """Malformed document: missing keys, wrong shapes, non-numeric entries."""


class SchemeInvariantError(SchemeFileError):
    """Well-formed document whose matrices are not valid states or POVMs."""


def _encode_vector(v) -> list:
    # + 0.0 turns -0.0 into 0.0
    return [[float(z.real) + 0.0, float(z.imag) + 0.0] for z in np.asarray(v).reshape(-1)]


def _encode_matrix(a) -> list:
    return [_encode_vector(row) for row in np.asarray(a)]


def _decode(obj, path: str, ndim: int) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemeFormatError(path, f"not a numeric array ({exc})") from None
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise SchemeFormatError(path, f"expected {'[re, im] pairs' if ndim == 1 else 'rows of [re, im] pairs'}")
    if not np.all(np.isfinite(arr)):
        raise SchemeFormatError(path, "non-finite entry")
    out = np.empty(arr.shape[:-1], dtype=complex)
    out.real, out.imag = arr[..., 0], arr[..., 1]
    return out


def scheme_to_dict(scheme: QracScheme) -> dict:
    return {
        "label": scheme.label,
        "n": scheme.n,
        "m": scheme.m,
        "states": {x: {"matrix": _encode_matrix(rho.matrix)} for x, rho in scheme.states.items()},
        "povms": [{"e0": _encode_matrix(p.e0)} for p in scheme.povms],
    }


def _require(doc: dict, key: str, kind, path: str):
    if key not in doc:
        raise SchemeFormatError(f"{path}{key}", "missing")
    val = doc[key]
    if not isinstance(val, kind) or isinstance(val, bool):
        raise SchemeFormatError(f"{path}{key}", f"expected {getattr(kind, '__name__', kind)}")
    return val


def scheme_from_dict(doc) -> QracScheme:
    if not isinstance(doc, dict):
        raise SchemeFormatError("$", "top level must be an object")
    n = _require(doc, "n", int, "")
    m = _require(doc, "m", int, "")
    label = doc.get("label", "")
    if n < 1 or m < 1:
        raise SchemeFormatError("n" if n < 1 else "m", "must be >= 1")
    dim = 2**m
    raw_states = _require(doc, "states", dict, "")
    missing = set(bitstrings(n)) - set(raw_states)
    extra = set(raw_states) - set(bitstrings(n))
    if missing or extra:
        bad = sorted(missing or extra)[0]
        raise SchemeFormatError(f"states/{bad}", "missing" if missing else "not an n-bit string")

    states = {}
    for x in bitstrings(n):
        entry = raw_states[x]
        where = f"states/{x}"
        if not isinstance(entry, dict) or len({"amplitudes", "matrix"} & set(entry)) != 1:
            raise SchemeFormatError(where, "needs exactly one of 'amplitudes' or 'matrix'")
        if "amplitudes" in entry:
            amps = _decode(entry["amplitudes"], f"{where}/amplitudes", 1)
            if amps.size != dim:
                raise SchemeFormatError(f"{where}/amplitudes", f"length {amps.size}, expected {dim}")
            try:
                states[x] = PureState(amps, tol=LOAD_TOL).density()
            except QuantumError as exc:
                raise SchemeInvariantError(f"{where}/amplitudes", str(exc)) from None
        else:
            mat = _decode(entry["matrix"], f"{where}/matrix", 2)
            if mat.shape != (dim, dim):
                raise SchemeFormatError(f"{where}/matrix", f"shape {mat.shape}, expected {(dim, dim)}")
            try:
                states[x] = DensityMatrix(mat, tol=LOAD_TOL)
            except QuantumError as exc:
                raise SchemeInvariantError(f"{where}/matrix", str(exc)) from None

    raw_povms = _require(doc, "povms", list, "")
    if len(raw_povms) != n:
        raise SchemeFormatError("povms", f"{len(raw_povms)} entries, expected {n}")
    povms = []
    for i, entry in enumerate(raw_povms):
        where = f"povms/{i}/e0"
        if not isinstance(entry, dict) or "e0" not in entry:
            raise SchemeFormatError(where, "missing")
        e0 = _decode(entry["e0"], where, 2)
        if e0.shape != (dim, dim):
            raise SchemeFormatError(where, f"shape {e0.shape}, expected {(dim, dim)}")
        try:
            povms.append(BinaryPovm(e0, tol=LOAD_TOL))
        except QuantumError as exc:
            raise SchemeInvariantError(where, str(exc)) from None
    return QracScheme(n, m, states, tuple(povms), label=str(label))


def save_scheme(scheme: QracScheme, path) -> None:
    Path(path).write_text(json.dumps(scheme_to_dict(scheme), indent=1) + "\n")


def load_scheme(path) -> QracScheme:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemeFormatError("$", f"invalid JSON ({exc})") from None
    return scheme_from_dict(doc)
