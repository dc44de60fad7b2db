"""JSON file formats for states, ensembles, unitaries, vectors and reports.

Complex numbers are ``[re, im]`` pairs. Floats are written with Python's
shortest round-trip repr, so parse -> serialize -> parse is exact.
"""
from __future__ import annotations

import hashlib
import json
import math
from typing import Any

import numpy as np

from .errors import ParseError, ValidationError
from .separable import Ensemble, EnsemblePurification
from .tensor_core import DensityMatrix, LocalUnitary, PartitionSpec, PureState

FORMAT_VERSION = "1"
STATE_KINDS = ("pure", "density", "ensemble")


# -- low-level decoding ----------------------------------------------------------

def _fail(path: str, msg: str):
    raise ParseError(f"{path}: {msg}")


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} is not allowed")


def loads(text: str | bytes) -> Any:
    """json.loads that rejects NaN/Infinity and reports line/column on syntax errors."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _get(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if key not in obj:
        _fail(f"{path}.{key}" if path else key, "missing field")
    return obj[key]


def _real(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        _fail(path, f"expected a number, got {type(x).__name__}")
    if not math.isfinite(x):
        _fail(path, "non-finite number")
    return float(x)


def _complex(x, path: str) -> complex:
    if not isinstance(x, list) or len(x) != 2:
        _fail(path, "expected a [re, im] pair")
    return complex(_real(x[0], path + "[0]"), _real(x[1], path + "[1]"))


def decode_vector(arr, path: str, length: int | None = None) -> np.ndarray:
    if not isinstance(arr, list):
        _fail(path, "expected a list of [re, im] pairs")
    if length is not None and len(arr) != length:
        _fail(path, f"expected {length} entries, got {len(arr)}")
    return np.array([_complex(z, f"{path}[{i}]") for i, z in enumerate(arr)], dtype=complex)


def decode_matrix(rows, path: str, n: int | None = None) -> np.ndarray:
    if not isinstance(rows, list):
        _fail(path, "expected a list of rows")
    if n is not None and len(rows) != n:
        _fail(path, f"expected {n} rows, got {len(rows)}")
    m = len(rows)
    out = [decode_vector(r, f"{path}[{i}]", m) for i, r in enumerate(rows)]
    return np.array(out, dtype=complex).reshape(m, m)


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).ravel()]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.asarray(m, dtype=complex)]


def _decode_parties(obj) -> PartitionSpec:
    parties = _get(obj, "parties", "")
    if not isinstance(parties, list) or not parties:
        _fail("parties", "expected a nonempty list")
    out = []
    for i, p in enumerate(parties):
        label = _get(p, "label", f"parties[{i}]")
        dim = _get(p, "dim", f"parties[{i}]")
        if not isinstance(label, str):
            _fail(f"parties[{i}].label", "expected a string")
        if isinstance(dim, bool) or not isinstance(dim, int):
            _fail(f"parties[{i}].dim", "expected an integer")
        out.append((label, dim))
    return PartitionSpec(tuple(out))


def _check_version(obj):
    v = _get(obj, "format_version", "")
    if v != FORMAT_VERSION:
        _fail("format_version", f"unsupported version {v!r}, expected {FORMAT_VERSION!r}")


def encode_parties(spec: PartitionSpec) -> list:
    return [{"label": lab, "dim": d} for lab, d in spec.parties]


# -- states ---------------------------------------------------------------------------

def _decode_terms(terms, spec: PartitionSpec) -> Ensemble:
    if not isinstance(terms, list) or not terms:
        _fail("payload.terms", "expected a nonempty list")
    parsed = []
    for i, t in enumerate(terms):
        path = f"payload.terms[{i}]"
        p = _real(_get(t, "p", path), path + ".p")
        vecs = _get(t, "vectors", path)
        row = [p]
        for lab, d in spec.parties:
            row.append(decode_vector(_get(vecs, lab, path + ".vectors"), f"{path}.vectors.{lab}", d))
        parsed.append(row)
    return Ensemble.from_terms(spec, parsed)


def _encode_terms(e: Ensemble) -> list:
    a, b = e.spec.labels
    return [{"p": float(p), "vectors": {a: encode_vector(e.vectors[0][k]), b: encode_vector(e.vectors[1][k])}}
            for k, p in enumerate(e.probs)]


def state_from_obj(obj):
    """Decode a StateFile object into PureState, DensityMatrix, Ensemble or EnsemblePurification."""
    _check_version(obj)
    spec = _decode_parties(obj)
    kind = _get(obj, "kind", "")
    payload = _get(obj, "payload", "")
    n = spec.total_dim
    if kind == "pure":
        amps = decode_vector(_get(payload, "amplitudes", "payload"), "payload.amplitudes", n)
        psi = PureState(spec, amps)
        meta = obj.get("metadata") or {}
        if "ensemble" in meta:
            return _purification_from_meta(psi, meta)
        return psi
    if kind == "density":
        return DensityMatrix(spec, decode_matrix(_get(payload, "matrix", "payload"), "payload.matrix", n))
    if kind == "ensemble":
        if len(spec) != 2:
            _fail("parties", "an ensemble file needs exactly two parties")
        return _decode_terms(_get(payload, "terms", "payload"), spec)
    _fail("kind", f"unknown kind {kind!r}; expected one of {list(STATE_KINDS)}")


def _purification_from_meta(psi: PureState, meta: dict) -> EnsemblePurification:
    ens_meta = meta["ensemble"]
    aux = _get(meta, "aux", "metadata")
    if aux not in psi.spec:
        _fail("metadata.aux", f"label {aux!r} is not a party of the state")
    labels = [lab for lab in psi.spec.labels if lab != aux]
    if len(labels) != 2:
        _fail("metadata.aux", "ensemble purification must have three parties")
    ens = _decode_terms(_get(ens_meta, "terms", "metadata.ensemble"), psi.spec.sub(labels))
    if ens.L != psi.spec.dim(aux):
        raise ValidationError("metadata ensemble length does not match the auxiliary dimension")
    from .separable import purify_ensemble

    rebuilt = purify_ensemble(ens, aux)
    if rebuilt.spec != psi.spec or np.linalg.norm(rebuilt.state.amplitudes - psi.amplitudes) > 1e-10:
        raise ValidationError("state amplitudes do not match the ensemble recorded in its metadata")
    return EnsemblePurification(psi, ens, aux)


def state_to_obj(state) -> dict:
    if isinstance(state, EnsemblePurification):
        obj = state_to_obj(state.state)
        obj["metadata"] = {"aux": state.aux, "ensemble": {"terms": _encode_terms(state.ensemble)}}
        return obj
    if isinstance(state, PureState):
        kind, payload = "pure", {"amplitudes": encode_vector(state.amplitudes)}
    elif isinstance(state, DensityMatrix):
        kind, payload = "density", {"matrix": encode_matrix(state.matrix)}
    elif isinstance(state, Ensemble):
        kind, payload = "ensemble", {"terms": _encode_terms(state)}
    else:
        raise TypeError(f"cannot serialize {type(state).__name__}")
    return {"format_version": FORMAT_VERSION, "kind": kind, "parties": encode_parties(state.spec),
            "payload": payload}


# -- unitaries and vectors -------------------------------------------------------------

def unitary_from_obj(obj, spec: PartitionSpec | None = None) -> LocalUnitary:
    """Decode a local-unitary file. Parties missing from ``factors`` get the identity."""
    _check_version(obj)
    kind = _get(obj, "kind", "")
    if kind != "local_unitary":
        _fail("kind", f"expected 'local_unitary', got {kind!r}")
    file_spec = _decode_parties(obj)
    factors = _get(obj, "factors", "")
    if not isinstance(factors, dict):
        _fail("factors", "expected an object mapping labels to matrices")
    mats = {}
    for lab, rows in factors.items():
        if lab not in file_spec:
            _fail(f"factors.{lab}", "label not declared in parties")
        mats[lab] = decode_matrix(rows, f"factors.{lab}", file_spec.dim(lab))
    phase = _real(obj.get("global_phase", 0.0), "global_phase")
    u = LocalUnitary.from_factors(file_spec, mats, phase)
    if spec is not None and spec != file_spec:
        raise ValidationError(f"unitary parties {file_spec.parties} do not match state parties {spec.parties}")
    return u


def unitary_to_obj(u: LocalUnitary) -> dict:
    return {"format_version": FORMAT_VERSION, "kind": "local_unitary", "parties": encode_parties(u.spec),
            "factors": {lab: encode_matrix(f) for lab, f in zip(u.spec.labels, u.factors)},
            "global_phase": float(u.global_phase)}


def vector_from_obj(obj) -> np.ndarray:
    _check_version(obj)
    if _get(obj, "kind", "") != "vector":
        _fail("kind", "expected 'vector'")
    return decode_vector(_get(obj, "vector", ""), "vector")


def vector_to_obj(v) -> dict:
    return {"format_version": FORMAT_VERSION, "kind": "vector", "vector": encode_vector(v)}


# -- text helpers -----------------------------------------------------------------------

def _clean(x):
    """Make a report JSON-safe: numpy scalars to Python, inf to the string 'inf'."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def read_state_bytes(data: bytes):
    return state_from_obj(loads(data))


def parse_state(text: str | bytes):
    return state_from_obj(loads(text))


def serialize_state(state) -> str:
    return dumps(state_to_obj(state))
