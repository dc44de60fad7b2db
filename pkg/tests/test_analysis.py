import itertools

import numpy as np
import pytest

import oracles as O
from entgroup import (
    DensityMatrix,
    Ensemble,
    LocalUnitary,
    MetadataMissingError,
    NotAStabilizerError,
    PartitionSpec,
    PureState,
    ScopeError,
    ValidationError,
    analyze_mixed,
    analyze_pure,
    bell,
    ghz,
    lift_stabilizer,
    minimal_purification,
    partial_trace,
    purification_equivalence,
    purify_ensemble,
    quotient_witness,
    random_ensemble,
    random_state,
    theorem_checks,
    verify_candidate,
    werner,
    werner_min_purification,
)
from entgroup.analysis import coarse_key
from entgroup.catalog import KET, haar_unitary, random_density
from entgroup.discrete import PAULI
from entgroup.stabilizer import mixed_stabilizer_algebra, projected_dim, pure_stabilizer_algebra
from entgroup.tensor_core import apply_local

S2 = 2 ** -0.5


def bell_0():
    return PureState(PartitionSpec.of(2, 2, 2), np.kron(bell().amplitudes, KET["0"]))


def test_product_state_all_zero():
    v = np.zeros(8)
    v[0] = 1
    rep = analyze_pure(PureState(PartitionSpec.of(2, 2, 2), v))
    assert all(q.dim == 0 for q in rep.quotients.values())


def test_bell_times_zero():
    rep = analyze_pure(bell_0())
    assert (rep.e("e_AB"), rep.e("e_AC"), rep.e("e_BC"), rep.e("e_ABC")) == (3, 0, 0, 0)
    q = rep.quotients["e_AB"]
    assert not q.abelian and "su(2)" in q.hint


def test_quotients_match_oracle():
    for psi in [ghz(0.6, 0.8), bell_0(), random_state(PartitionSpec.of(2, 2, 2), 3)]:
        rep = analyze_pure(psi, exp_checks=False)
        for sub in [(0, 1), (0, 2), (1, 2), (0, 1, 2)]:
            key = "e_" + "".join(psi.spec.labels[k] for k in sub)
            assert rep.e(key) == O.quotient_dim(psi.amplitudes, psi.spec.dims, list(sub))


def test_mixed_examples():
    assert analyze_mixed(werner(0.2)).e("et_AB") == 3
    assert analyze_mixed(DensityMatrix(PartitionSpec.of(2, 2), np.eye(4) / 4)).e("et_AB") == 0
    assert analyze_mixed(partial_trace(ghz(0.6, 0.8), ["A", "B"])).e("et_AB") == 0
    assert analyze_mixed(partial_trace(ghz(S2, S2), ["A", "B"])).e("et_AB") == 0


def test_mixed_two_party_invariant():
    rep = analyze_mixed(random_density(PartitionSpec.of(2, 3), 0, rank=2))
    d = rep.stabilizer_dims
    assert rep.e("et_AB") == d["AB"] - d["A"] - d["B"]


def test_ghz_report_details():
    rep = analyze_pure(ghz(0.6, 0.8))
    assert rep.quotients["e_AB"].abelian
    assert set(rep.quotients) == {"e_AB", "e_AC", "e_BC", "e_ABC", "e_A(BC)", "e_B(AC)", "e_C(AB)"}
    assert max(rep.exp_residuals.values()) < 1e-10
    assert rep.warnings == []
    d = rep.to_dict()
    assert d["entanglement_dims"]["e_A(BC)"] == 1


def test_one_and_four_party_pure():
    rep = analyze_pure(PureState(PartitionSpec.of(1), np.array([1.0])))
    assert rep.stabilizer_dims == {"A": 1}
    rep = analyze_pure(random_state(PartitionSpec.of(2, 2, 2, 2), 0), exp_checks=False)
    assert "e_ABCD" in rep.quotients and "e_(AB)(CD)" in rep.quotients and "e_A(BCD)" in rep.quotients
    assert len([k for k in rep.quotients if "(" in k]) == 7


def test_scope_guards():
    with pytest.raises(ScopeError):
        analyze_pure(random_state(PartitionSpec.of(2, 2, 2, 2, 2), 0))
    with pytest.raises(ScopeError):
        analyze_mixed(random_density(PartitionSpec.of(2, 2, 2, 2), 0))
    with pytest.raises(ScopeError):
        theorem_checks(random_state(PartitionSpec.of(2, 2), 0))


def test_coarse_key():
    assert coarse_key(("A",), ("B", "C")) == "A(BC)"
    assert coarse_key(("A", "B"), ("C", "D")) == "(AB)(CD)"


@pytest.mark.parametrize("seed", range(4))
def test_three_party_mixed_direct_equals_purification_route(seed):
    rho = random_density(PartitionSpec.of(2, 2, 2), seed, rank=2 + seed % 3)
    psi = minimal_purification(rho, "D")
    for r in (1, 2, 3):
        for mask in itertools.combinations("ABC", r):
            direct = mixed_stabilizer_algebra(rho, mask).dim
            lifted = projected_dim(pure_stabilizer_algebra(psi, list(mask) + ["D"]), mask)
            assert direct == lifted


def _pauli(spec, word):
    return LocalUnitary(spec, tuple(PAULI[c] for c in word))


def test_witness_cases():
    ens = Ensemble.from_terms(PartitionSpec.of(2, 2), [(0.5, KET["0"], KET["0"]), (0.5, KET["1"], KET["1"])])
    p = purify_ensemble(ens)
    rho = ens.density()
    assert quotient_witness(p, verify_candidate(rho, _pauli(ens.spec, "XX"))).verdict == "Nontrivial"
    ident = quotient_witness(p, verify_candidate(rho, LocalUnitary.identity(ens.spec)))
    assert not ident.nontrivial and ident.permutation == (0, 1)
    diag = LocalUnitary(ens.spec, (np.diag([1, np.exp(0.4j)]), np.diag([1, np.exp(-0.4j)])))
    assert not quotient_witness(p, verify_candidate(rho, diag)).nontrivial
    with pytest.raises(MetadataMissingError):
        quotient_witness(p.state, verify_candidate(rho, diag))
    with pytest.raises(NotAStabilizerError):
        quotient_witness(p, verify_candidate(rho, _pauli(ens.spec, "XI")))


def test_lift_identity():
    rho = random_density(PartitionSpec.of(2, 2), 1, rank=3)
    psi = minimal_purification(rho)
    lift = lift_stabilizer(rho, LocalUnitary.identity(rho.spec), psi)
    c = lift.u.factor("C")
    assert np.allclose(c, c[0, 0] * np.eye(3), atol=1e-10)


def test_lift_xx_on_ghz_marginal():
    rho = partial_trace(ghz(S2, S2), ["A", "B"])
    psi = minimal_purification(rho)
    lift = lift_stabilizer(rho, _pauli(rho.spec, "XX"), psi)
    assert lift.residual < 1e-9
    c = lift.u.factor("C")
    assert abs(np.trace(c)) < 1e-9  # swaps the two purifying vectors
    assert np.linalg.norm(lift.u.operator() @ psi.amplitudes - psi.amplitudes) < 1e-9


@pytest.mark.parametrize("seed", range(3))
def test_lift_werner_u_ubar(seed):
    rho = werner(0.2)
    u = haar_unitary(2, seed)
    s = LocalUnitary(rho.spec, (u, u.conj()))
    lift = lift_stabilizer(rho, s, werner_min_purification(0.2))
    assert lift.residual < 1e-8


def test_lift_errors():
    rho = werner(0.2)
    psi = werner_min_purification(0.2)
    with pytest.raises(NotAStabilizerError):
        lift_stabilizer(rho, LocalUnitary(rho.spec, (haar_unitary(2, 0), np.eye(2))), psi)
    with pytest.raises(ValidationError):
        lift_stabilizer(rho, LocalUnitary.identity(rho.spec), werner_min_purification(0.5))


def test_equivalence_constructed():
    psi = random_state(PartitionSpec.of(2, 2, 3), 0)
    u = haar_unitary(3, 1)
    psi2 = apply_local(LocalUnitary.from_factors(psi.spec, {"C": u}), psi)
    eq = purification_equivalence(psi, psi2, ["A", "B"])
    assert eq.ok and np.allclose(eq.w, u, atol=1e-8)


@pytest.mark.parametrize("seed", range(4))
def test_equivalence_between_ensembles(seed):
    e1 = random_ensemble(PartitionSpec.of(2, 2), 3, seed)
    # same rho: permute lines and split one line into two halves
    va, vb = e1.vectors
    order = [2, 0, 1]
    probs = list(e1.probs[order])
    probs = probs[:2] + [probs[2] / 2, probs[2] / 2]
    a = np.vstack([va[order], va[order][2:]])
    b = np.vstack([vb[order], vb[order][2:] * np.exp(0.3j)])
    e2 = Ensemble(e1.spec, probs, (a, b))
    assert np.allclose(e1.density().matrix, e2.density().matrix)
    eq = purification_equivalence(purify_ensemble(e1).state, purify_ensemble(e2).state, ["A", "B"])
    assert eq.ok and eq.aux_dims == (3, 4)


def test_equivalence_mismatch():
    with pytest.raises(ValidationError):
        purification_equivalence(werner_min_purification(0.2), werner_min_purification(0.3), ["A", "B"])


def test_theorem_checks_bell_on_bc():
    psi = PureState(PartitionSpec.of(2, 2, 2), np.kron(KET["0"], bell().amplitudes))
    rep = theorem_checks(psi)
    assert rep.passed
    iso = {c.name: c.detail for c in rep.by_kind("isomorphism")}
    assert iso["isomorphism:BC"] == {"dim_x": 3, "dim_y": 3}


def test_theorem_checks_on_density_input():
    rep = theorem_checks(werner(0.4))
    assert rep.passed
    assert len(rep.checks) == 12
