"""Separable states given as explicit ensembles of product states.

An ensemble ``{p_l, |l>_A, |l>_B}`` is purified with an orthonormal auxiliary
basis ``|l>_C``; controlled unitaries on (target, C) rotate every line of the
target party onto a fixed vector, and two-party stabilizers of the
purification split into an AC part times a BC part.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discrete import DiscreteCandidate
from .errors import MetadataMissingError, NotAStabilizerError, ValidationError
from .tensor_core import (
    DensityMatrix,
    LocalUnitary,
    PartitionSpec,
    PureState,
    UNITARY_TOL,
    kron_embed,
)

PROB_TOL = 1e-12
UNIT_TOL = 1e-10
EIGVEC_TOL = 1e-8
PHASE_SUM_TOL = 1e-7
CLUSTER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted product lines on two parties."""

    spec: PartitionSpec
    probs: np.ndarray
    vectors: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        if len(self.spec) != 2:
            raise ValidationError(f"an ensemble lives on two parties, got {len(self.spec)}")
        probs = np.array(self.probs, dtype=float).ravel()
        vecs = tuple(np.array(v, dtype=complex) for v in self.vectors)
        for arr in (probs, *vecs):
            arr.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "vectors", vecs)
        L = probs.size
        if L == 0:
            raise ValidationError("ensemble has no terms")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0):
            raise ValidationError("ensemble weights must be finite and strictly positive")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"ensemble weights sum to {probs.sum()!r}, expected 1")
        for (label, dim), v in zip(self.spec.parties, vecs):
            if v.shape != (L, dim):
                raise ValidationError(f"vectors for {label!r} have shape {v.shape}, expected ({L}, {dim})")
            norms = np.linalg.norm(v, axis=1)
            if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
                raise ValidationError(f"vectors for {label!r} are not unit vectors")
        dA, dB = self.spec.dims
        if L > (dA * dB) ** 2:
            raise ValidationError(f"{L} terms exceed the Caratheodory bound {(dA * dB) ** 2}")

    @classmethod
    def from_terms(cls, spec: PartitionSpec, terms) -> "Ensemble":
        """``terms`` is an iterable of ``(p, vec_first_party, vec_second_party)``."""
        terms = list(terms)
        probs = [t[0] for t in terms]
        va = np.array([np.asarray(t[1], dtype=complex) for t in terms])
        vb = np.array([np.asarray(t[2], dtype=complex) for t in terms])
        return cls(spec, probs, (va, vb))

    @property
    def L(self) -> int:
        return int(self.probs.size)

    def line(self, ell: int, label: str) -> np.ndarray:
        return self.vectors[self.spec.index(label)][ell]

    def density(self) -> DensityMatrix:
        va, vb = self.vectors
        prods = np.einsum("la,lb->lab", va, vb).reshape(self.L, -1)
        rho = np.einsum("l,li,lj->ij", self.probs, prods, prods.conj())
        return DensityMatrix(self.spec, 0.5 * (rho + rho.conj().T))

    def merged(self, tol: float = 1e-12) -> "Ensemble":
        """Merge lines that coincide up to phase on both parties (weights add)."""
        keep, probs = [], []
        va, vb = self.vectors
        for ell in range(self.L):
            for k, j in enumerate(keep):
                if (abs(np.vdot(va[j], va[ell])) > 1 - tol and abs(np.vdot(vb[j], vb[ell])) > 1 - tol):
                    probs[k] += self.probs[ell]
                    break
            else:
                keep.append(ell)
                probs.append(self.probs[ell])
        return Ensemble(self.spec, probs, (va[keep], vb[keep]))


@dataclass(frozen=True, eq=False)
class EnsemblePurification:
    """sum_l sqrt(p_l) |l>_A |l>_B |l>_C together with the lines that built it."""

    state: PureState
    ensemble: Ensemble
    aux: str

    @property
    def spec(self) -> PartitionSpec:
        return self.state.spec


def purify_ensemble(e: Ensemble, aux_label: str | None = None) -> EnsemblePurification:
    """Purify with an L-dimensional auxiliary party. Lines are not merged."""
    aux = aux_label or e.spec.fresh_label("C")
    spec = e.spec.with_party(aux, e.L)
    va, vb = e.vectors
    amps = np.einsum("l,la,lb,lc->abc", np.sqrt(e.probs), va, vb, np.eye(e.L)).reshape(-1)
    return EnsemblePurification(PureState(spec, amps / np.linalg.norm(amps)), e, aux)


@dataclass(frozen=True, eq=False)
class ControlledUnitary:
    """sum_l u_l (on target) (x) |l><l| (on control), identity on the rest."""

    spec: PartitionSpec
    control: str
    target: str
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = tuple(np.array(b, dtype=complex) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if self.control == self.target:
            raise ValidationError("control and target must differ")
        dt, dc = self.spec.dim(self.target), self.spec.dim(self.control)
        if len(blocks) != dc:
            raise ValidationError(f"{len(blocks)} blocks for a control of dimension {dc}")
        for ell, b in enumerate(blocks):
            if b.shape != (dt, dt):
                raise ValidationError(f"block {ell} has shape {b.shape}, expected ({dt}, {dt})")
            err = float(np.max(np.abs(b.conj().T @ b - np.eye(dt))))
            if err > UNITARY_TOL:
                raise ValidationError(f"block {ell} is not unitary (error {err:.3g})")

    def operator(self) -> np.ndarray:
        dc = self.spec.dim(self.control)
        out = np.zeros((self.spec.total_dim,) * 2, dtype=complex)
        for ell, b in enumerate(self.blocks):
            proj = np.zeros((dc, dc))
            proj[ell, ell] = 1.0
            out += kron_embed(self.spec, self.target, b) @ kron_embed(self.spec, self.control, proj)
        return out

    def apply(self, psi: PureState) -> PureState:
        if psi.spec != self.spec:
            raise ValidationError("controlled unitary and state live on different partitions")
        t = psi.tensor()
        it, ic = self.spec.index(self.target), self.spec.index(self.control)
        t = np.moveaxis(t, (it, ic), (0, 1))
        out = np.einsum("lij,jl...->il...", np.array(self.blocks), t)
        out = np.moveaxis(out, (0, 1), (it, ic))
        return PureState(self.spec, out.reshape(-1))

    def inverse(self) -> "ControlledUnitary":
        return ControlledUnitary(self.spec, self.control, self.target, tuple(b.conj().T for b in self.blocks))


def householder_to(x: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """A unitary sending unit vector x exactly to unit vector chi.

    Phase-adjusted Householder reflection; a pure phase when x is parallel to chi.
    """
    overlap = np.vdot(chi, x)
    phi = float(np.angle(overlap)) if abs(overlap) > 0 else 0.0
    v = x - np.exp(1j * phi) * chi
    n = np.eye(x.size, dtype=complex)
    if np.linalg.norm(v) < 1e-14:
        return np.exp(-1j * phi) * n
    h = n - 2.0 * np.outer(v, v.conj()) / np.vdot(v, v).real
    return np.exp(-1j * phi) * h


def _resolve(e_or_p) -> EnsemblePurification:
    if isinstance(e_or_p, EnsemblePurification):
        return e_or_p
    if isinstance(e_or_p, Ensemble):
        return purify_ensemble(e_or_p)
    raise TypeError(f"expected Ensemble or EnsemblePurification, got {type(e_or_p).__name__}")


def _basis_vec(d, k=0):
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


def build_disentangler(e, target: str, chi: np.ndarray | None = None) -> ControlledUnitary:
    """Controlled unitary on (target, aux) mapping every target line onto ``chi`` (default |0>)."""
    purif = _resolve(e)
    ens = purif.ensemble
    d = ens.spec.dim(target)
    chi = _basis_vec(d) if chi is None else np.asarray(chi, dtype=complex).ravel()
    if chi.shape != (d,):
        raise ValidationError(f"chi has length {chi.size}, target {target!r} has dimension {d}")
    if abs(np.linalg.norm(chi) - 1.0) > UNIT_TOL:
        raise ValidationError("chi is not normalized")
    blocks = tuple(householder_to(ens.line(ell, target), chi) for ell in range(ens.L))
    return ControlledUnitary(purif.spec, purif.aux, target, blocks)


def factor_out(psi: PureState, label: str, chi: np.ndarray) -> tuple[np.ndarray, float]:
    """Project ``label`` onto chi; return the rest and ||psi - chi (x) rest||."""
    spec = psi.spec
    k = spec.index(label)
    t = np.moveaxis(psi.tensor(), k, 0)
    rest = np.tensordot(chi.conj(), t, axes=(0, 0))
    rebuilt = np.moveaxis(np.multiply.outer(chi, rest), 0, k).reshape(-1)
    return rest.reshape(-1), float(np.linalg.norm(psi.amplitudes - rebuilt))


@dataclass(frozen=True, eq=False)
class Factorization:
    """Certificate that a state equals chi_target (x) rest."""

    state: PureState
    target: str
    chi: np.ndarray
    rest: np.ndarray
    residual: float


def disentangle(e, target: str, chi: np.ndarray | None = None) -> tuple[ControlledUnitary, Factorization]:
    purif = _resolve(e)
    cu = build_disentangler(purif, target, chi)
    out = cu.apply(purif.state)
    chi = _basis_vec(purif.spec.dim(target)) if chi is None else np.asarray(chi, dtype=complex).ravel()
    rest, res = factor_out(out, target, chi)
    return cu, Factorization(out, target, chi, rest, res)


@dataclass(frozen=True, eq=False)
class FullSeparation:
    u_bc: ControlledUnitary
    u_ac: ControlledUnitary
    factors: dict
    state: PureState
    residual: float


def full_separation(e, chi_a: np.ndarray | None = None, chi_b: np.ndarray | None = None) -> FullSeparation:
    """U_AC U_BC |psi> = chi_A (x) chi_B (x) sum_l sqrt(p_l)|l>_C."""
    purif = _resolve(e)
    a, b = purif.ensemble.spec.labels
    spec = purif.spec
    chi_a = _basis_vec(spec.dim(a)) if chi_a is None else np.asarray(chi_a, dtype=complex).ravel()
    chi_b = _basis_vec(spec.dim(b)) if chi_b is None else np.asarray(chi_b, dtype=complex).ravel()
    u_bc = build_disentangler(purif, b, chi_b)
    u_ac = build_disentangler(purif, a, chi_a)
    out = u_ac.apply(u_bc.apply(purif.state))
    phi_c = np.sqrt(purif.ensemble.probs).astype(complex)
    expected = np.einsum("a,b,c->abc", chi_a, chi_b, phi_c).reshape(-1)
    residual = float(np.linalg.norm(out.amplitudes - expected))
    return FullSeparation(u_bc, u_ac, {a: chi_a, b: chi_b, purif.aux: phi_c}, out, residual)


# -- two-party stabilizer decomposition ----------------------------------------

def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True, eq=False)
class TwoPartyDecomposition:
    s_ac: LocalUnitary
    s_bc: LocalUnitary
    theta: float
    alphas: np.ndarray
    betas: np.ndarray
    clusters: tuple[int, ...]
    cluster_phases: tuple[tuple[float, float], ...]
    residual_ac: float
    residual_bc: float
    product_residual: float
    notes: tuple[str, ...] = field(default_factory=tuple)


def _line_phases(u: np.ndarray, lines: np.ndarray, label: str) -> np.ndarray:
    phases = []
    for ell, v in enumerate(lines):
        w = u @ v
        ph = float(np.angle(np.vdot(v, w)))
        if np.linalg.norm(w - np.exp(1j * ph) * v) > EIGVEC_TOL:
            raise NotAStabilizerError(
                f"line {ell} of party {label!r} is not an eigenvector of the stabilizer factor")
        phases.append(ph)
    return np.array(phases)


def decompose_two_party_stabilizer(purif: EnsemblePurification, s: DiscreteCandidate,
                                   theta: float | None = None) -> TwoPartyDecomposition:
    """Split a verified u_A (x) u_B stabilizer of an ensemble purification into s_AC * s_BC.

    The candidate may live on the ensemble's two parties or on the full
    purification (its auxiliary factor must then be the identity).
    """
    if not isinstance(purif, EnsemblePurification):
        raise MetadataMissingError("decomposition needs an ensemble purification with line metadata")
    ens, spec, aux = purif.ensemble, purif.spec, purif.aux
    a, b = ens.spec.labels
    u = s.u
    if u.spec == spec:
        if np.max(np.abs(u.factor(aux) - np.eye(spec.dim(aux)))) > UNITARY_TOL:
            raise NotAStabilizerError("candidate acts on the auxiliary party; not a two-party stabilizer")
    elif u.spec != ens.spec:
        raise ValidationError("candidate does not act on the ensemble's parties")
    if not s.verified:
        raise NotAStabilizerError("candidate is not a verified stabilizer")
    if theta is None:
        theta = s.phase
    if theta is None:
        raise ValidationError("a pure-state phase is required (verify the candidate on the purification)")

    u_a = np.exp(1j * u.global_phase) * u.factor(a)
    u_b = u.factor(b)
    alphas = _line_phases(u_a, ens.vectors[0], a)
    betas = _line_phases(u_b, ens.vectors[1], b)
    mismatch = np.abs(_wrap(alphas + betas - theta))
    if np.max(mismatch) > PHASE_SUM_TOL:
        raise NotAStabilizerError(
            f"eigenphases violate alpha + beta = theta by {np.max(mismatch):.3g}")

    reps: list[tuple[float, float]] = []
    clusters = []
    for al, be in zip(alphas, betas):
        for i, (ai, bi) in enumerate(reps):
            if abs(_wrap(al - ai)) < CLUSTER_TOL and abs(_wrap(be - bi)) < CLUSTER_TOL:
                clusters.append(i)
                break
        else:
            clusters.append(len(reps))
            reps.append((float(al), float(be)))
    c_a = np.diag([np.exp(-1j * reps[i][0]) for i in clusters])
    c_b = np.diag([np.exp(-1j * reps[i][1]) for i in clusters])
    eye_a, eye_b = np.eye(spec.dim(a)), np.eye(spec.dim(b))
    # phase split theta' = theta, theta'' = 0
    s_ac = LocalUnitary(spec, (u_a, eye_b, c_a), theta)
    s_bc = LocalUnitary(spec, (eye_a, u_b, c_b), 0.0)

    psi = purif.state.amplitudes
    res_ac = float(np.linalg.norm(s_ac.operator() @ psi - np.exp(1j * theta) * psi))
    res_bc = float(np.linalg.norm(s_bc.operator() @ psi - psi))
    s_ab = LocalUnitary(spec, (u_a, u_b, np.eye(spec.dim(aux))))
    prod_res = float(np.max(np.abs(s_ac.operator() @ s_bc.operator() - s_ab.operator())))
    notes = ("complement blocks of u_A and u_B (off the span of the lines) are carried over unchanged",)
    return TwoPartyDecomposition(s_ac, s_bc, float(theta), alphas, betas, tuple(clusters), tuple(reps),
                                 res_ac, res_bc, prod_res, notes)
