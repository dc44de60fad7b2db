"""Lie algebras of local-unitary stabilizer groups as real nullspaces.

A generator is a tuple of Hermitian matrices (one per party) plus, for pure
states, a phase rate ``theta``. Real coordinates follow :func:`hermitian_basis`
party by party in declaration order, with ``theta`` last. Parties outside
the active mask are structural zero blocks.

Pure states solve ``(sum_k H_k - theta) |psi> = 0``; density matrices solve
``[sum_k H_k, rho] = 0``. The complex conditions are realified as real rows
stacked above imaginary rows and the nullspace is read off an SVD with the
cutoff ``tol * max(sigma_max, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import ValidationError
from .tensor_core import (
    DensityMatrix,
    LocalUnitary,
    PartitionSpec,
    PureState,
    coords_to_hermitian,
    expi_hermitian,
    hermitian_basis,
    hermitian_to_coords,
)

PURE = "pure"
MIXED = "mixed"
DEFAULT_TOL = 1e-9
SUPPORT_TOL = 1e-10


def param_offsets(spec: PartitionSpec) -> list[int]:
    offs = [0]
    for d in spec.dims:
        offs.append(offs[-1] + d * d)
    return offs


def n_params(spec: PartitionSpec, kind: str) -> int:
    return param_offsets(spec)[-1] + (1 if kind == PURE else 0)


@dataclass(frozen=True)
class LocalGenerator:
    spec: PartitionSpec
    hs: tuple[np.ndarray, ...]
    theta: float = 0.0

    def support(self, threshold: float = SUPPORT_TOL) -> tuple[str, ...]:
        return tuple(lab for lab, h in zip(self.spec.labels, self.hs)
                     if np.max(np.abs(h), initial=0.0) > threshold)

    def h(self, label: str) -> np.ndarray:
        return self.hs[self.spec.index(label)]

    def exponentiate(self, t: float = 1.0) -> LocalUnitary:
        """Factors exp(i t h_k); the matching phase of a pure stabilizer is exp(i t theta)."""
        return LocalUnitary(self.spec, tuple(expi_hermitian(h, t) for h in self.hs))


def encode(gen: LocalGenerator, kind: str) -> np.ndarray:
    parts = [hermitian_to_coords(h) for h in gen.hs]
    if kind == PURE:
        parts.append(np.array([gen.theta]))
    return np.concatenate(parts)


def decode(spec: PartitionSpec, kind: str, vec: np.ndarray) -> LocalGenerator:
    offs = param_offsets(spec)
    hs = tuple(coords_to_hermitian(vec[offs[k]:offs[k + 1]], d) for k, d in enumerate(spec.dims))
    theta = float(vec[-1]) if kind == PURE else 0.0
    return LocalGenerator(spec, hs, theta)


@dataclass(frozen=True, eq=False)
class RankDecision:
    rank: int
    gap: float
    singular_values: np.ndarray


def rank_decision(s: np.ndarray, tol: float, floor: float = 1.0) -> RankDecision:
    """Rank from descending singular values, cut at tol * max(s[0], floor).

    The floor keeps round-off from being counted as rank when the whole
    matrix is numerically zero (e.g. commutators with a maximally mixed state).
    """
    smax = float(s[0]) if s.size else 0.0
    cut = tol * max(smax, floor)
    rank = int(np.sum(s > cut))
    if rank == 0:
        gap = float("inf")
    else:
        nxt = float(s[rank]) if rank < s.size else 0.0
        gap = float("inf") if nxt == 0.0 else float(s[rank - 1]) / nxt
    return RankDecision(rank, gap, s)


def realify(a: np.ndarray) -> np.ndarray:
    return np.vstack([a.real, a.imag])


@dataclass(frozen=True, eq=False)
class StabilizerAlgebra:
    """Orthonormal basis (rows of ``basis``) of a stabilizer Lie algebra."""

    spec: PartitionSpec
    active: tuple[str, ...]
    kind: str
    basis: np.ndarray
    tol: float
    residual: float
    gap: float
    singular_values: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def nparams(self) -> int:
        return n_params(self.spec, self.kind)

    def generators(self) -> list[LocalGenerator]:
        return [decode(self.spec, self.kind, v) for v in self.basis]

    def element(self, coeffs: np.ndarray) -> LocalGenerator:
        return decode(self.spec, self.kind, np.asarray(coeffs) @ self.basis)

    def membership_residual(self, vec: np.ndarray) -> float:
        """Distance from ``vec`` to the span of the basis."""
        vec = np.asarray(vec, dtype=float)
        return float(np.linalg.norm(vec - self.basis.T @ (self.basis @ vec)))

    def party_block(self, label: str) -> np.ndarray:
        offs = param_offsets(self.spec)
        k = self.spec.index(label)
        return self.basis[:, offs[k]:offs[k + 1]]


# -- system assembly --------------------------------------------------------

def _party_columns_pure(psi: PureState, label: str) -> np.ndarray:
    left, d, right = psi.spec.split(label)
    cols = _kernels.mode_columns(hermitian_basis(d), psi.amplitudes.reshape(left, d, right))
    return cols.reshape(d * d, -1).T


def _party_columns_mixed(rho: DensityMatrix, label: str) -> np.ndarray:
    left, d, right = rho.spec.split(label)
    rho6 = rho.matrix.reshape(left, d, right, left, d, right)
    cols = _kernels.commutator_columns(hermitian_basis(d), rho6)
    return cols.reshape(d * d, -1).T


def _check_active(spec: PartitionSpec, active) -> tuple[str, ...]:
    active = set(spec.labels if active is None else active)
    if not active:
        raise ValidationError("active party mask is empty")
    for lab in active:
        spec.index(lab)
    return tuple(lab for lab in spec.labels if lab in active)


def system_matrix(state: PureState | DensityMatrix, active: Iterable[str] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Realified system over the active coordinates, plus the index map into the full layout."""
    spec = state.spec
    active = _check_active(spec, active)
    offs = param_offsets(spec)
    blocks, index = [], []
    for k, lab in enumerate(spec.labels):
        if lab not in active:
            continue
        if isinstance(state, PureState):
            blocks.append(_party_columns_pure(state, lab))
        else:
            blocks.append(_party_columns_mixed(state, lab))
        index.extend(range(offs[k], offs[k + 1]))
    if isinstance(state, PureState):
        blocks.append(-state.amplitudes.reshape(-1, 1))
        index.append(offs[-1])
    return realify(np.hstack(blocks)), np.array(index)


def _solve(state, active, tol, kind) -> StabilizerAlgebra:
    spec = state.spec
    active = _check_active(spec, active)
    a, index = system_matrix(state, active)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    dec = rank_decision(s, tol)
    null = vh[dec.rank:]
    basis = np.zeros((null.shape[0], n_params(spec, kind)))
    basis[:, index] = null
    residual = float(np.max(np.linalg.norm(a @ null.T, axis=0), initial=0.0))
    return StabilizerAlgebra(spec, active, kind, basis, tol, residual, dec.gap, s)


def pure_stabilizer_algebra(psi: PureState, active: Iterable[str] | None = None,
                            tol: float = DEFAULT_TOL) -> StabilizerAlgebra:
    """Generators (H_k, theta) with (sum_k H_k - theta)|psi> = 0, H_k = 0 off the mask."""
    return _solve(psi, active, tol, PURE)


def mixed_stabilizer_algebra(rho: DensityMatrix, active: Iterable[str] | None = None,
                             tol: float = DEFAULT_TOL) -> StabilizerAlgebra:
    """Generators H_k with [sum_k H_k, rho] = 0, H_k = 0 off the mask."""
    return _solve(rho, active, tol, MIXED)


def stabilizer_algebra(state, active=None, tol=DEFAULT_TOL) -> StabilizerAlgebra:
    if isinstance(state, PureState):
        return pure_stabilizer_algebra(state, active, tol)
    return mixed_stabilizer_algebra(state, active, tol)


# -- subspace arithmetic ----------------------------------------------------

def _orth_rows(stack: np.ndarray, tol: float) -> tuple[np.ndarray, RankDecision]:
    if stack.shape[0] == 0:
        return stack, RankDecision(0, float("inf"), np.zeros(0))
    _, s, vh = np.linalg.svd(stack, full_matrices=False)
    dec = rank_decision(s, tol)
    return vh[:dec.rank], dec


def subspace_span(algebras: Sequence[StabilizerAlgebra]) -> StabilizerAlgebra:
    """Orthonormal basis of the sum of the spans (the algebra of the group product)."""
    if not algebras:
        raise ValidationError("subspace_span needs at least one algebra")
    first = algebras[0]
    for alg in algebras[1:]:
        if alg.spec != first.spec or alg.kind != first.kind:
            raise ValidationError("subspace_span inputs must share partition and kind")
    tol = max(a.tol for a in algebras)
    basis, dec = _orth_rows(np.vstack([a.basis for a in algebras]), tol)
    active = set().union(*(a.active for a in algebras))
    active = tuple(lab for lab in first.spec.labels if lab in active)
    residual = max(a.residual for a in algebras)
    return StabilizerAlgebra(first.spec, active, first.kind, basis, tol, residual, dec.gap, dec.singular_values)


def intersection_dim(a: StabilizerAlgebra, b: StabilizerAlgebra) -> int:
    """dim U + dim V - rank [U; V]."""
    return a.dim + b.dim - subspace_span([a, b]).dim


@dataclass(frozen=True, eq=False)
class ProjectedSubspace:
    """A real subspace of one party's Hermitian matrices, in hermitian_basis coordinates."""

    party: str
    n: int
    basis: np.ndarray
    gap: float

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def matrices(self) -> list[np.ndarray]:
        return [coords_to_hermitian(c, self.n) for c in self.basis]

    def membership_residual(self, h: np.ndarray) -> float:
        c = hermitian_to_coords(h)
        return float(np.linalg.norm(c - self.basis.T @ (self.basis @ c)))


def project_party(alg: StabilizerAlgebra, party: str) -> ProjectedSubspace:
    """Span of the ``party`` components of the algebra (zero for inactive parties)."""
    n = alg.spec.dim(party)
    block = alg.party_block(party)
    basis, dec = _orth_rows(block, alg.tol)
    return ProjectedSubspace(party, n, basis, dec.gap)


def projected_dim(alg: StabilizerAlgebra, labels: Iterable[str]) -> int:
    """Dimension of the image of the algebra under the projection onto ``labels`` (theta dropped)."""
    offs = param_offsets(alg.spec)
    cols = []
    for lab in labels:
        k = alg.spec.index(lab)
        cols.extend(range(offs[k], offs[k + 1]))
    basis, _ = _orth_rows(alg.basis[:, cols], alg.tol)
    return basis.shape[0]


def commutator_hermitian(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """-i[x, y], the Hermitian form of the bracket of exp(ix) and exp(iy) generators."""
    return -1j * (x @ y - y @ x)


def centralizer_in_projection(alg: StabilizerAlgebra, party: str) -> ProjectedSubspace:
    """Elements of pi_party(alg) commuting with all of pi_party(alg)."""
    proj = project_party(alg, party)
    if proj.dim == 0:
        return proj
    mats = proj.matrices()
    # column i: the brackets [p_i, p_j] over all j, stacked
    cols = []
    for x in mats:
        cols.append(np.concatenate([(x @ y - y @ x).ravel() for y in mats]))
    a = realify(np.array(cols).T)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    dec = rank_decision(s, alg.tol)
    coeffs = vh[dec.rank:]
    basis, _ = _orth_rows(coeffs @ proj.basis, alg.tol)
    return ProjectedSubspace(party, proj.n, basis, dec.gap)


def bracket_vector(spec: PartitionSpec, kind: str, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Coordinates of the componentwise bracket -i[h_k, h'_k] with theta = 0."""
    g1, g2 = decode(spec, kind, v1), decode(spec, kind, v2)
    hs = tuple(commutator_hermitian(a, b) for a, b in zip(g1.hs, g2.hs))
    return encode(LocalGenerator(spec, hs, 0.0), kind)


def closure_residual(alg: StabilizerAlgebra, n_pairs: int = 20, rng=None) -> float:
    """Largest distance from the algebra of brackets of random element pairs."""
    if alg.dim == 0:
        return 0.0
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(n_pairs):
        c1, c2 = rng.standard_normal((2, alg.dim))
        b = bracket_vector(alg.spec, alg.kind, c1 @ alg.basis, c2 @ alg.basis)
        worst = max(worst, alg.membership_residual(b))
    return worst


def stabilization_residual(gen: LocalGenerator, state: PureState | DensityMatrix, t: float = 1.0) -> float:
    """How far the exponentiated generator is from stabilizing the state."""
    from .tensor_core import apply_local, conjugate

    u = gen.exponentiate(t)
    if isinstance(state, PureState):
        out = apply_local(u, state).amplitudes
        return float(np.linalg.norm(out - np.exp(1j * t * gen.theta) * state.amplitudes))
    return float(np.max(np.abs(conjugate(u, state).matrix - state.matrix)))


def exponentiation_check(alg: StabilizerAlgebra, state, n: int = 5, ts: Sequence[float] = (0.1, 1.0),
                         rng=None) -> float:
    """Max stabilization residual over ``n`` random unit-norm algebra elements and times ``ts``."""
    if alg.dim == 0:
        return 0.0
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(n):
        c = rng.standard_normal(alg.dim)
        gen = alg.element(c / np.linalg.norm(c))
        for t in ts:
            worst = max(worst, stabilization_residual(gen, state, t))
    return worst
