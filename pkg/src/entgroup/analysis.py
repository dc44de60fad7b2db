"""Entanglement-group data from stabilizer algebras.

Quotient dimensions, abelian heuristics, discrete-candidate witnesses, lifting
of density-matrix stabilizers to purifications, purification equivalence and
the structural checks on three-party pure states.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .discrete import DiscreteCandidate, verify_candidate
from .errors import MetadataMissingError, NotAStabilizerError, ScopeError, ValidationError
from .separable import EnsemblePurification
from .stabilizer import (
    DEFAULT_TOL,
    PURE,
    StabilizerAlgebra,
    _orth_rows,
    bracket_vector,
    exponentiation_check,
    param_offsets,
    project_party,
    stabilizer_algebra,
    subspace_span,
)
from .tensor_core import (
    DensityMatrix,
    LocalUnitary,
    PartitionSpec,
    PureState,
    merge_parties,
    minimal_purification,
    partial_trace,
    reorder,
)

GAP_WARN = 1e3
ABELIAN_TOL = 1e-8
OVERLAP_TOL = 1e-8
LIFT_TOL = 1e-8
PURIF_MATCH_TOL = 1e-8
EQUIV_TOL = 1e-7
CHECK_TOL = 1e-8

MAX_PURE_PARTIES = 4
MAX_MIXED_PARTIES = 3


# -- report types --------------------------------------------------------------

@dataclass(frozen=True)
class Quotient:
    name: str
    numerator: str
    denominators: tuple[str, ...]
    dim: int
    numerator_dim: int
    denominator_dim: int
    abelian: bool
    bracket_residual: float
    gap: float
    hint: str


@dataclass
class EntanglementReport:
    spec: PartitionSpec
    kind: str
    tol: float
    stabilizer_dims: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    exp_residuals: dict = field(default_factory=dict)
    quotients: dict = field(default_factory=dict)
    candidates: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    algebras: dict = field(default_factory=dict, repr=False)

    def e(self, name: str) -> int:
        return self.quotients[name].dim

    @property
    def min_gap(self) -> float:
        gaps = [g for g in self.gaps.values()]
        gaps += [q.gap for q in self.quotients.values()]
        return min(gaps) if gaps else float("inf")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parties": [{"label": lab, "dim": d} for lab, d in self.spec.parties],
            "tolerance": self.tol,
            "stabilizer_dims": dict(self.stabilizer_dims),
            "spectral_gaps": {k: _num(v) for k, v in self.gaps.items()},
            "nullspace_residuals": dict(self.residuals),
            "exponentiation_residuals": dict(self.exp_residuals),
            "entanglement_dims": {k: q.dim for k, q in self.quotients.items()},
            "quotients": {
                k: {
                    "numerator": q.numerator,
                    "denominators": list(q.denominators),
                    "dim": q.dim,
                    "numerator_dim": q.numerator_dim,
                    "denominator_dim": q.denominator_dim,
                    "abelian": q.abelian,
                    "bracket_residual": q.bracket_residual,
                    "span_gap": _num(q.gap),
                    "hint": q.hint,
                }
                for k, q in self.quotients.items()
            },
            "candidates": [candidate_dict(c) for c in self.candidates],
            "warnings": list(self.warnings),
        }


def _num(x: float):
    return "inf" if x == float("inf") else float(x)


def candidate_dict(c: DiscreteCandidate) -> dict:
    return {
        "name": c.name,
        "verified": bool(c.verified),
        "phase": c.phase,
        "residual": c.residual,
    }


def group_hint(dim: int, abelian: bool) -> str:
    if dim == 0:
        return "trivial identity component"
    if abelian:
        return f"abelian, dim {dim} (u(1)^{dim}-like)"
    if dim == 3:
        return "nonabelian, dim 3 (su(2)-like)"
    if dim == 8:
        return "nonabelian, dim 8 (su(3)-like)"
    return f"nonabelian, dim {dim}"


# -- quotient machinery -------------------------------------------------------

def _complement(num: StabilizerAlgebra, den: StabilizerAlgebra | None) -> np.ndarray:
    """Orthonormal rows of num orthogonal to the span of den (inside num)."""
    b = num.basis
    if den is None or den.dim == 0 or b.shape[0] == 0:
        return b
    proj = b - (b @ den.basis.T) @ den.basis
    rows, _ = _orth_rows(proj, num.tol)
    return rows


def quotient(name: str, num: StabilizerAlgebra, dens: Sequence[StabilizerAlgebra],
             num_key: str, den_keys: Sequence[str]) -> Quotient:
    den = subspace_span(list(dens)) if dens else None
    den_dim = den.dim if den is not None else 0
    comp = _complement(num, den)
    worst = 0.0
    for v1, v2 in itertools.combinations(comp, 2):
        br = bracket_vector(num.spec, num.kind, v1, v2)
        # reduce modulo the denominator before measuring the complement part
        if den is not None and den.dim:
            br = br - den.basis.T @ (den.basis @ br)
        worst = max(worst, float(np.linalg.norm(comp @ br)))
    abelian = worst < ABELIAN_TOL
    dim = num.dim - den_dim
    gap = den.gap if den is not None else float("inf")
    return Quotient(name, num_key, tuple(den_keys), dim, num.dim, den_dim, abelian, worst, gap,
                    group_hint(max(dim, 0), abelian))


def _subsets(labels: Sequence[str], min_size: int = 1):
    for r in range(min_size, len(labels) + 1):
        yield from itertools.combinations(labels, r)


def _bipartitions(labels: Sequence[str]):
    """Unordered two-block splits; the block holding the first label comes first."""
    n = len(labels)
    seen = set()
    for r in range(1, n):
        for left in itertools.combinations(labels, r):
            right = tuple(lab for lab in labels if lab not in left)
            key = frozenset((left, right))
            if key in seen:
                continue
            seen.add(key)
            yield left, right


def _block_name(block: Sequence[str]) -> str:
    inner = "".join(block) if all(len(x) == 1 for x in block) else "+".join(block)
    return inner if len(block) == 1 else f"({inner})"


def coarse_key(left: Sequence[str], right: Sequence[str]) -> str:
    return _block_name(left) + _block_name(right)


def _fill(report: EntanglementReport, state, tol: float, exp_checks: bool, rng_seed: int = 0):
    spec = state.spec
    labels = spec.labels
    algs = {}
    for sub in _subsets(labels):
        key = spec.mask_key(sub)
        alg = stabilizer_algebra(state, sub, tol)
        algs[sub] = alg
        report.algebras[key] = alg
        report.stabilizer_dims[key] = alg.dim
        report.gaps[key] = alg.gap
        report.residuals[key] = alg.residual
        if exp_checks:
            report.exp_residuals[key] = exponentiation_check(alg, state, rng=rng_seed)
        if alg.gap < GAP_WARN:
            report.warnings.append(f"rank decision for s_{key} has spectral gap {alg.gap:.3g} < {GAP_WARN:g}")
    prefix = "e_" if report.kind == PURE else "et_"
    for sub in _subsets(labels, 2):
        faces = [tuple(x for x in sub if x != y) for y in sub]
        q = quotient(prefix + spec.mask_key(sub), algs[sub], [algs[f] for f in faces],
                     spec.mask_key(sub), [spec.mask_key(f) for f in faces])
        report.quotients[q.name] = q
        if q.gap < GAP_WARN and q.denominator_dim:
            report.warnings.append(f"span rank for {q.name} has gap {q.gap:.3g} < {GAP_WARN:g}")
    return algs


def _coarse(report: EntanglementReport, state, tol: float, exp_checks: bool):
    labels = state.spec.labels
    if len(labels) < 3:
        return
    prefix = "e_" if report.kind == PURE else "et_"
    for left, right in _bipartitions(labels):
        merged = merge_parties(state, [left, right])
        ml, mr = merged.spec.labels
        name = prefix + coarse_key(left, right)
        algs = {}
        for sub in ((ml,), (mr,), (ml, mr)):
            alg = stabilizer_algebra(merged, sub, tol)
            algs[sub] = alg
            key = name[len(prefix):] + ":" + merged.spec.mask_key(sub)
            report.gaps[key] = alg.gap
            report.residuals[key] = alg.residual
            report.stabilizer_dims[key] = alg.dim
            report.algebras[key] = alg
            if exp_checks:
                report.exp_residuals[key] = exponentiation_check(alg, merged, rng=0)
        q = quotient(name, algs[(ml, mr)], [algs[(ml,)], algs[(mr,)]],
                     merged.spec.mask_key((ml, mr)), [ml, mr])
        report.quotients[name] = q


def analyze_pure(psi: PureState, tol: float = DEFAULT_TOL, candidates: Iterable[LocalUnitary] = (),
                 exp_checks: bool = True) -> EntanglementReport:
    """Stabilizer dims of every party subset and every quotient dimension of a pure state."""
    if not isinstance(psi, PureState):
        raise ValidationError("analyze_pure expects a PureState")
    if len(psi.spec) > MAX_PURE_PARTIES:
        raise ScopeError(f"pure-state analysis handles at most {MAX_PURE_PARTIES} parties, got {len(psi.spec)}")
    report = EntanglementReport(psi.spec, "pure", tol)
    _fill(report, psi, tol, exp_checks)
    _coarse(report, psi, tol, exp_checks)
    for u in candidates:
        report.candidates.append(verify_candidate(psi, u))
    return report


def analyze_mixed(rho: DensityMatrix, tol: float = DEFAULT_TOL, candidates: Iterable[LocalUnitary] = (),
                  exp_checks: bool = True) -> EntanglementReport:
    """Same as analyze_pure but with commutation conditions on rho; quotients are named et_*."""
    if not isinstance(rho, DensityMatrix):
        raise ValidationError("analyze_mixed expects a DensityMatrix")
    if len(rho.spec) > MAX_MIXED_PARTIES:
        raise ScopeError(f"mixed-state analysis handles at most {MAX_MIXED_PARTIES} parties, got {len(rho.spec)}")
    report = EntanglementReport(rho.spec, "mixed", tol)
    _fill(report, rho, tol, exp_checks)
    _coarse(report, rho, tol, exp_checks)
    for u in candidates:
        report.candidates.append(verify_candidate(rho, u))
    return report


def analyze(state, tol: float = DEFAULT_TOL, **kw) -> EntanglementReport:
    if isinstance(state, PureState):
        return analyze_pure(state, tol, **kw)
    return analyze_mixed(state, tol, **kw)


# -- discrete witnesses ---------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    nontrivial: bool
    permutation: tuple[int, ...] | None
    reason: str

    @property
    def verdict(self) -> str:
        return "Nontrivial" if self.nontrivial else "Inconclusive"


def _overlap(u: np.ndarray, v: np.ndarray, w: np.ndarray) -> float:
    return float(abs(np.vdot(w, u @ v)))


def quotient_witness(purif: EnsemblePurification, candidate: DiscreteCandidate) -> Witness:
    """Induced permutation of ensemble lines; a nontrivial one certifies a nontrivial quotient class."""
    if not isinstance(purif, EnsemblePurification):
        raise MetadataMissingError("quotient_witness needs an ensemble purification carrying its lines")
    if not candidate.verified:
        raise NotAStabilizerError("candidate is not a verified stabilizer")
    ens = purif.ensemble
    a, b = ens.spec.labels
    u = candidate.u
    if a not in u.spec or b not in u.spec:
        raise ValidationError("candidate must act on the ensemble's parties")
    u_a, u_b = u.factor(a), u.factor(b)
    va, vb = ens.vectors
    L = ens.L
    perm = []
    used = set()
    for ell in range(L):
        matches = [m for m in range(L)
                   if _overlap(u_a, va[ell], va[m]) > 1 - OVERLAP_TOL
                   and _overlap(u_b, vb[ell], vb[m]) > 1 - OVERLAP_TOL]
        if not matches:
            return Witness(False, None, f"line {ell} is not mapped onto a line by the candidate")
        pick = ell if ell in matches and ell not in used else next((m for m in matches if m not in used), None)
        if pick is None:
            return Witness(False, None, "induced line map is not a bijection")
        used.add(pick)
        perm.append(pick)
    perm = tuple(perm)
    if perm == tuple(range(L)):
        return Witness(False, perm, "candidate fixes every line up to phase")
    return Witness(True, perm, "candidate permutes ensemble lines; not a product of line-fixing stabilizers")


# -- lifting and purification equivalence ----------------------------------------

def _aux_labels(big: PartitionSpec, small: PartitionSpec) -> list[str]:
    for lab, d in small.parties:
        if lab not in big or big.dim(lab) != d:
            raise ValidationError(f"party {lab!r} (dim {d}) is not shared with {big.parties}")
    return [lab for lab in big.labels if lab not in small]


def _as_matrix(psi: PureState, system: Sequence[str]) -> np.ndarray:
    aux = [lab for lab in psi.spec.labels if lab not in system]
    st = reorder(psi, list(system) + aux)
    dsys = int(np.prod([psi.spec.dim(lab) for lab in system]))
    return st.amplitudes.reshape(dsys, -1)


@dataclass(frozen=True, eq=False)
class LiftedStabilizer:
    u: LocalUnitary
    aux: str
    residual: float


def _procrustes(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unitary X minimizing ||a X - b||_F."""
    uu, _, vh = np.linalg.svd(a.conj().T @ b)
    return uu @ vh


def lift_stabilizer(rho: DensityMatrix, s: LocalUnitary, psi: PureState) -> LiftedStabilizer:
    """Extend a stabilizer of rho to one of its purification psi by an auxiliary unitary."""
    cand = verify_candidate(rho, s)
    if not cand.verified:
        raise NotAStabilizerError(f"s does not stabilize rho (residual {cand.residual:.3g})")
    aux = _aux_labels(psi.spec, rho.spec)
    if len(aux) != 1:
        raise ValidationError(f"purification must have exactly one auxiliary party, found {aux}")
    red = partial_trace(psi, rho.spec.labels)
    dist = float(np.max(np.abs(reorder(red, rho.spec.labels).matrix - rho.matrix)))
    if dist > PURIF_MATCH_TOL:
        raise ValidationError(f"psi is not a purification of rho (max deviation {dist:.3g})")
    m = _as_matrix(psi, rho.spec.labels)
    sm = s.operator() @ m
    x = _procrustes(sm, m)
    u_c = x.T
    factors = {lab: s.factor(lab) for lab in rho.spec.labels}
    factors[aux[0]] = u_c
    lifted = LocalUnitary.from_factors(psi.spec, factors, s.global_phase)
    out = lifted.operator() @ psi.amplitudes
    residual = float(np.linalg.norm(out - psi.amplitudes))
    if residual > LIFT_TOL:
        raise NotAStabilizerError(f"lift failed, residual {residual:.3g}")
    return LiftedStabilizer(lifted, aux[0], residual)


@dataclass(frozen=True, eq=False)
class PurificationEquivalence:
    w: np.ndarray
    residual: float
    reduced_distance: float
    aux_dims: tuple[int, int]
    ok: bool


def purification_equivalence(psi: PureState, psi2: PureState,
                             shared: Sequence[str] | None = None) -> PurificationEquivalence:
    """Auxiliary unitary W (on the zero-padded auxiliary space) with (1 x W)psi = psi2."""
    if shared is None:
        shared = [lab for lab in psi.spec.labels if lab in psi2.spec]
    shared = list(shared)
    for lab in shared:
        if psi.spec.dim(lab) != psi2.spec.dim(lab):
            raise ValidationError(f"party {lab!r} has different dimensions in the two states")
    r1 = partial_trace(psi, shared)
    r2 = partial_trace(psi2, shared)
    dist = float(np.max(np.abs(reorder(r1, shared).matrix - reorder(r2, shared).matrix)))
    if dist > PURIF_MATCH_TOL:
        raise ValidationError(f"reduced states differ on {shared} (max deviation {dist:.3g})")
    m1, m2 = _as_matrix(psi, shared), _as_matrix(psi2, shared)
    d1, d2 = m1.shape[1], m2.shape[1]
    d = max(d1, d2)
    m1 = np.hstack([m1, np.zeros((m1.shape[0], d - d1))])
    m2 = np.hstack([m2, np.zeros((m2.shape[0], d - d2))])
    x = _procrustes(m1, m2)
    residual = float(np.linalg.norm(m1 @ x - m2))
    return PurificationEquivalence(x.T, residual, dist, (d1, d2), residual < EQUIV_TOL)


# -- structural checks ------------------------------------------------------------

@dataclass
class CheckRecord:
    name: str
    passed: bool
    detail: dict


@dataclass
class TheoremReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_kind(self, prefix: str) -> list:
        return [c for c in self.checks if c.name.startswith(prefix)]

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, **c.detail} for c in self.checks]}


def _proj_rows(alg: StabilizerAlgebra, label: str) -> np.ndarray:
    return project_party(alg, label).basis


def _span_dim(rows: np.ndarray, tol: float) -> int:
    return _orth_rows(rows, tol)[0].shape[0]


def _party_cols(spec: PartitionSpec, label: str) -> slice:
    offs = param_offsets(spec)
    k = spec.index(label)
    return slice(offs[k], offs[k + 1])


def theorem_checks(state, tol: float = DEFAULT_TOL) -> TheoremReport:
    """Isomorphism, cross-commutation and exclusion checks on a three-party pure state.

    A two-party density matrix is purified first.
    """
    if isinstance(state, DensityMatrix):
        if len(state.spec) != 2:
            raise ScopeError("density-matrix input must have two parties (it is purified to three)")
        state = minimal_purification(state)
    if not isinstance(state, PureState) or len(state.spec) != 3:
        raise ScopeError("theorem checks run on three-party pure states")
    spec = state.spec
    labels = spec.labels
    algs = {sub: stabilizer_algebra(state, sub, tol) for sub in _subsets(labels)}
    full = algs[labels]

    def alg(*labs):
        return algs[tuple(lab for lab in labels if lab in labs)]

    checks = []
    # isomorphism: G = s_XYZ, N = s_XZ + s_YZ, dim G_X/N_X = dim G_Y/N_Y
    for x, y in itertools.combinations(labels, 2):
        z = next(lab for lab in labels if lab not in (x, y))
        n = subspace_span([alg(x, z), alg(y, z)])
        dx = project_party(full, x).dim - project_party(n, x).dim
        dy = project_party(full, y).dim - project_party(n, y).dim
        checks.append(CheckRecord(f"isomorphism:{x}{y}", dx == dy, {"dim_x": dx, "dim_y": dy}))

    # cross commutation: [s_XY, s_XZ] is supported on X and lies in s_X
    for x in labels:
        y, z = (lab for lab in labels if lab != x)
        a1, a2, ax = alg(x, y), alg(x, z), alg(x)
        worst_support, worst_member = 0.0, 0.0
        for v1 in a1.basis:
            for v2 in a2.basis:
                br = bracket_vector(spec, PURE, v1, v2)
                off = np.concatenate([br[_party_cols(spec, y)], br[_party_cols(spec, z)]])
                worst_support = max(worst_support, float(np.linalg.norm(off)))
                worst_member = max(worst_member, ax.membership_residual(br))
        ok = worst_support < CHECK_TOL and worst_member < CHECK_TOL
        checks.append(CheckRecord(f"commutation:{x}", ok,
                                  {"support_residual": worst_support, "membership_residual": worst_member}))

    # exclusion: g in s_XYZ with h_X(g) in pi_X(s_XY) lies in s_XY + s_YZ
    for x, y in itertools.permutations(labels, 2):
        z = next(lab for lab in labels if lab not in (x, y))
        px = _proj_rows(alg(x, y), x)
        bx = full.basis[:, _party_cols(spec, x)]
        cond = bx - (bx @ px.T) @ px if px.shape[0] else bx
        # coefficient vectors c with c @ cond = 0
        _, s, vh = np.linalg.svd(cond.T, full_matrices=True)
        cut = tol * max(float(s[0]) if s.size else 0.0, 1.0)
        rank = int(np.sum(s > cut))
        w_rows = vh[rank:] @ full.basis
        target = subspace_span([alg(x, y), alg(y, z)])
        worst = max((target.membership_residual(r) for r in w_rows), default=0.0)
        checks.append(CheckRecord(f"exclusion:{x}{y}", worst < CHECK_TOL,
                                  {"w_dim": int(w_rows.shape[0]), "membership_residual": worst}))
    return TheoremReport(checks)
