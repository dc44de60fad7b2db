"""Multipartite state containers and the dense linear-algebra substrate.

Flat indices are row-major over the declaration order of the parties: for
parties (A:dA, B:dB, C:dC) the basis ket |a b c> sits at ``(a*dB + b)*dC + c``.
Every operator assembly in the package relies on this convention.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import ValidationError

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
UNITARY_TOL = 1e-10
RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class PartitionSpec:
    """Ordered party labels with their local dimensions."""

    parties: tuple[tuple[str, int], ...]

    def __post_init__(self):
        parties = tuple((str(label), int(dim)) for label, dim in self.parties)
        object.__setattr__(self, "parties", parties)
        if not parties:
            raise ValidationError("a partition needs at least one party")
        labels = [p[0] for p in parties]
        if any(not lab for lab in labels):
            raise ValidationError("party labels must be nonempty")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate party labels in {labels}")
        for label, dim in parties:
            if dim < 1:
                raise ValidationError(f"party {label!r} has dimension {dim} < 1")

    @classmethod
    def of(cls, *dims: int, labels: Sequence[str] | None = None) -> "PartitionSpec":
        """``PartitionSpec.of(2, 2, 2)`` gives parties A, B, C of dimension 2."""
        if labels is None:
            labels = string.ascii_uppercase[: len(dims)]
        return cls(tuple(zip(labels, dims)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p[0] for p in self.parties)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p[1] for p in self.parties)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.parties)

    def __contains__(self, label):
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown party label {label!r}; known: {list(self.labels)}") from None

    def dim(self, label: str) -> int:
        return self.parties[self.index(label)][1]

    def split(self, label: str) -> tuple[int, int, int]:
        """(left, d, right) block sizes around ``label`` for the row-major layout."""
        k = self.index(label)
        dims = self.dims
        return int(np.prod(dims[:k])), dims[k], int(np.prod(dims[k + 1:]))

    def sub(self, labels: Iterable[str]) -> "PartitionSpec":
        """Sub-partition over ``labels``, kept in declaration order."""
        keep = set(labels)
        for lab in keep:
            self.index(lab)
        return PartitionSpec(tuple(p for p in self.parties if p[0] in keep))

    def with_party(self, label: str, dim: int) -> "PartitionSpec":
        return PartitionSpec(self.parties + ((label, dim),))

    def fresh_label(self, preferred: str = "C") -> str:
        if preferred not in self.labels:
            return preferred
        for cand in string.ascii_uppercase:
            if cand not in self.labels:
                return cand
        k = 0
        while f"X{k}" in self.labels:
            k += 1
        return f"X{k}"

    def mask_key(self, labels: Iterable[str]) -> str:
        """Canonical display key for a set of parties, e.g. ``AB`` or ``A(BC)``.

        Multi-character labels (merged parties among them) are parenthesized.
        """
        chosen = [lab for lab in self.labels if lab in set(labels)]
        return "".join(lab if len(lab) == 1 else f"({lab})" for lab in chosen)


# -- Hermitian parameterization --------------------------------------------

@lru_cache(maxsize=None)
def _hermitian_basis(n: int) -> np.ndarray:
    elems = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        elems.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[i, j] = sym[j, i] = s
            anti = np.zeros((n, n), dtype=complex)
            anti[i, j] = 1j * s
            anti[j, i] = -1j * s
            elems.append(sym)
            elems.append(anti)
    out = np.array(elems).reshape(n * n, n, n)
    out.setflags(write=False)
    return out


def hermitian_basis(n: int) -> np.ndarray:
    """Real-orthonormal basis of the n x n Hermitian matrices, shape (n*n, n, n).

    Order: diagonal units E_ii, then for each i<j (lexicographic) the pair
    (E_ij+E_ji)/sqrt2, i(E_ij-E_ji)/sqrt2.
    """
    return _hermitian_basis(int(n))


def hermitian_to_coords(h: np.ndarray) -> np.ndarray:
    basis = hermitian_basis(h.shape[0])
    return np.real(np.einsum("aij,ij->a", basis.conj(), h))


def coords_to_hermitian(coords: np.ndarray, n: int) -> np.ndarray:
    return np.tensordot(np.asarray(coords, dtype=float), hermitian_basis(n), axes=1)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return m.shape[0] == m.shape[1] and float(np.max(np.abs(m - m.conj().T), initial=0.0)) <= tol


def eigh_desc(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition, eigenvalues descending.

    Each eigenvector is phase-fixed so that its first component of magnitude
    above 1e-12 is real and positive.
    """
    w, v = np.linalg.eigh(m)
    w = w[::-1]
    v = v[:, ::-1].copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            c = col[nz[0]]
            v[:, k] = col * (abs(c) / c)
    return w, v


def expi_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(i t h) for Hermitian h, via the eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)) @ v.conj().T


# -- state containers -------------------------------------------------------

def _readonly(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    spec: PartitionSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _readonly(np.ravel(self.amplitudes))
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (self.spec.total_dim,):
            raise ValidationError(
                f"amplitude vector has length {amps.size}, partition needs {self.spec.total_dim}")
        if not np.all(np.isfinite(amps)):
            raise ValidationError("amplitudes contain NaN or Inf")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized: norm = {norm!r}")

    @classmethod
    def normalized(cls, spec, amplitudes):
        a = np.asarray(amplitudes, dtype=complex).ravel()
        return cls(spec, a / np.linalg.norm(a))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.spec.dims)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.spec, self.projector())


@dataclass(frozen=True)
class DensityMatrix:
    spec: PartitionSpec
    matrix: np.ndarray

    def __post_init__(self):
        m = _readonly(self.matrix)
        object.__setattr__(self, "matrix", m)
        n = self.spec.total_dim
        if m.shape != (n, n):
            raise ValidationError(f"density matrix has shape {m.shape}, partition needs ({n}, {n})")
        if not np.all(np.isfinite(m)):
            raise ValidationError("density matrix contains NaN or Inf")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > HERMITIAN_TOL:
            raise ValidationError(f"density matrix is not Hermitian (max |M - M^dag| = {herm:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        lam = np.linalg.eigvalsh(m)[0]
        if lam < -PSD_TOL:
            raise ValidationError(f"density matrix is not PSD (smallest eigenvalue {lam:.3g})")

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)[::-1]


@dataclass(frozen=True)
class LocalUnitary:
    """A tensor product of per-party unitaries times ``exp(i*global_phase)``."""

    spec: PartitionSpec
    factors: tuple[np.ndarray, ...]
    global_phase: float = 0.0

    def __post_init__(self):
        factors = tuple(_readonly(f) for f in self.factors)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "global_phase", float(self.global_phase))
        if len(factors) != len(self.spec):
            raise ValidationError(f"{len(factors)} factors for {len(self.spec)} parties")
        for (label, dim), u in zip(self.spec.parties, factors):
            if u.shape != (dim, dim):
                raise ValidationError(f"factor for {label!r} has shape {u.shape}, expected ({dim}, {dim})")
            err = float(np.max(np.abs(u.conj().T @ u - np.eye(dim))))
            if err > UNITARY_TOL:
                raise ValidationError(f"factor for {label!r} is not unitary (max |u^dag u - 1| = {err:.3g})")

    @classmethod
    def from_factors(cls, spec: PartitionSpec, factors: Mapping[str, np.ndarray] | None = None,
                     global_phase: float = 0.0) -> "LocalUnitary":
        """Build from a label -> matrix mapping; missing parties get the identity."""
        factors = dict(factors or {})
        for label in factors:
            spec.index(label)
        mats = tuple(np.asarray(factors.get(lab, np.eye(d)), dtype=complex) for lab, d in spec.parties)
        return cls(spec, mats, global_phase)

    @classmethod
    def identity(cls, spec: PartitionSpec) -> "LocalUnitary":
        return cls.from_factors(spec)

    def factor(self, label: str) -> np.ndarray:
        return self.factors[self.spec.index(label)]

    def operator(self) -> np.ndarray:
        out = np.array([[np.exp(1j * self.global_phase)]])
        for u in self.factors:
            out = np.kron(out, u)
        return out

    def compose(self, other: "LocalUnitary") -> "LocalUnitary":
        """``self @ other`` factor by factor."""
        _check_same_spec(self.spec, other.spec)
        return LocalUnitary(self.spec, tuple(a @ b for a, b in zip(self.factors, other.factors)),
                            self.global_phase + other.global_phase)


def _check_same_spec(a: PartitionSpec, b: PartitionSpec):
    if a != b:
        raise ValidationError(f"partition mismatch: {a.parties} vs {b.parties}")


# -- operations -------------------------------------------------------------

def kron_embed(spec: PartitionSpec, party: str, m: np.ndarray) -> np.ndarray:
    """The operator acting as ``m`` on ``party`` and as the identity elsewhere."""
    left, d, right = spec.split(party)
    m = np.asarray(m)
    if m.shape != (d, d):
        raise ValidationError(f"operator shape {m.shape} does not match dim({party}) = {d}")
    return np.kron(np.kron(np.eye(left), m), np.eye(right))


def apply_party(spec: PartitionSpec, party: str, m: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """``kron_embed(spec, party, m) @ vec`` without forming the big operator."""
    left, d, right = spec.split(party)
    out = _kernels.mode_columns(np.asarray(m, dtype=complex)[None], np.asarray(vec).reshape(left, d, right))
    return out.reshape(-1)


def _as_projector(state) -> tuple[PartitionSpec, np.ndarray]:
    if isinstance(state, PureState):
        return state.spec, state.projector()
    if isinstance(state, DensityMatrix):
        return state.spec, state.matrix
    raise TypeError(f"expected PureState or DensityMatrix, got {type(state).__name__}")


def partial_trace(state: PureState | DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Reduced state on ``keep`` (kept parties stay in declaration order)."""
    keep = set(keep)
    if not keep:
        raise ValidationError("partial_trace needs a nonempty set of parties to keep")
    spec = state.spec
    sub = spec.sub(keep)
    n = len(spec)
    kept_axes = [i for i, lab in enumerate(spec.labels) if lab in keep]
    traced_axes = [i for i in range(n) if i not in kept_axes]
    dk = sub.total_dim
    if isinstance(state, PureState):
        t = state.tensor().transpose(kept_axes + traced_axes).reshape(dk, -1)
        rho = t @ t.conj().T
    else:
        t = state.matrix.reshape(spec.dims + spec.dims)
        perm = kept_axes + traced_axes + [n + i for i in kept_axes] + [n + i for i in traced_axes]
        dt = spec.total_dim // dk
        t = t.transpose(perm).reshape(dk, dt, dk, dt)
        rho = np.einsum("itjt->ij", t)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(sub, rho)


def minimal_purification(rho: DensityMatrix, aux_label: str | None = None) -> PureState:
    """sum_i sqrt(p_i) |i> (x) |i>_aux over the eigenvectors kept by the rank cutoff."""
    w, v = eigh_desc(rho.matrix)
    keep = w > RANK_CUTOFF * max(w[0], 0.0)
    w, v = w[keep], v[:, keep]
    r = int(w.size)
    label = aux_label or rho.spec.fresh_label("C")
    spec = rho.spec.with_party(label, r)
    amps = (v * np.sqrt(w)).reshape(-1)  # row s, column i -> flat s*r + i
    amps = amps / np.linalg.norm(amps)
    return PureState(spec, amps)


def apply_local(u: LocalUnitary, psi: PureState) -> PureState:
    _check_same_spec(u.spec, psi.spec)
    vec = np.array(psi.amplitudes)
    for label, f in zip(u.spec.labels, u.factors):
        vec = apply_party(u.spec, label, f, vec)
    vec = vec * np.exp(1j * u.global_phase)
    return PureState(psi.spec, vec / np.linalg.norm(vec))


def conjugate(u: LocalUnitary, rho: DensityMatrix) -> DensityMatrix:
    _check_same_spec(u.spec, rho.spec)
    op = u.operator()
    m = op @ rho.matrix @ op.conj().T
    return DensityMatrix(rho.spec, 0.5 * (m + m.conj().T))


def reorder(state: PureState | DensityMatrix, labels: Sequence[str]):
    """Permute the parties of a state into the given label order."""
    spec = state.spec
    perm = [spec.index(lab) for lab in labels]
    if sorted(perm) != list(range(len(spec))):
        raise ValidationError(f"{list(labels)} is not a permutation of {list(spec.labels)}")
    new = PartitionSpec(tuple(spec.parties[i] for i in perm))
    if isinstance(state, PureState):
        return PureState(new, state.tensor().transpose(perm).reshape(-1))
    n = len(spec)
    t = state.matrix.reshape(spec.dims + spec.dims).transpose(perm + [n + i for i in perm])
    return DensityMatrix(new, t.reshape(new.total_dim, new.total_dim))


def merge_parties(state: PureState | DensityMatrix, groups: Sequence[Sequence[str]]):
    """Coarse-grain: each group of labels becomes one party (dims multiply).

    The merged label is the concatenation of member labels.
    """
    order = [lab for g in groups for lab in g]
    if sorted(order) != sorted(state.spec.labels):
        raise ValidationError(f"grouping {groups} must cover each party exactly once")
    st = reorder(state, order)
    merged = []
    for g in groups:
        sep = "" if all(len(lab) == 1 for lab in g) else "+"
        merged.append((sep.join(g), int(np.prod([state.spec.dim(lab) for lab in g]))))
    spec = PartitionSpec(tuple(merged))
    if isinstance(st, PureState):
        return PureState(spec, st.amplitudes)
    return DensityMatrix(spec, st.matrix)
