import numpy as np
import pytest

from entgroup import (
    ControlledUnitary,
    Ensemble,
    LocalUnitary,
    MetadataMissingError,
    NotAStabilizerError,
    PartitionSpec,
    ValidationError,
    build_disentangler,
    decompose_two_party_stabilizer,
    disentangle,
    full_separation,
    partial_trace,
    purify_ensemble,
    random_ensemble,
    random_symmetric_ensemble,
    verify_candidate,
    werner,
    werner_ensemble,
)
from entgroup.catalog import KET, haar_unitary, haar_vector
from entgroup.separable import factor_out, householder_to

Q2 = PartitionSpec.of(2, 2)


def test_ensemble_validation():
    with pytest.raises(ValidationError):
        Ensemble.from_terms(Q2, [(0.5, KET["0"], KET["0"])])
    with pytest.raises(ValidationError):
        Ensemble.from_terms(Q2, [(1.0, 2 * KET["0"], KET["0"])])
    with pytest.raises(ValidationError):
        Ensemble.from_terms(Q2, [(1.0, KET["0"], KET["0"]), (0.0, KET["1"], KET["1"])])
    with pytest.raises(ValidationError):
        Ensemble.from_terms(PartitionSpec.of(2, 2, 2), [(1.0, KET["0"], KET["0"])])


def test_ensemble_density_and_merge():
    e = Ensemble.from_terms(Q2, [(0.25, KET["0"], KET["1"]), (0.25, KET["0"], KET["1"]), (0.5, KET["1"], KET["1"])])
    m = e.merged()
    assert m.L == 2 and np.allclose(m.probs, [0.5, 0.5])
    assert np.allclose(m.density().matrix, e.density().matrix)


@pytest.mark.parametrize("seed", range(6))
def test_purification_reduces_to_ensemble(seed):
    e = random_ensemble(PartitionSpec.of(2, 3), seed % 4 + 1, seed)
    p = purify_ensemble(e)
    assert p.spec.dims == (2, 3, e.L)
    assert np.allclose(partial_trace(p.state, ["A", "B"]).matrix, e.density().matrix, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_householder_sends_x_to_chi(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 3
    x, chi = haar_vector(d, rng), haar_vector(d, rng)
    h = householder_to(x, chi)
    assert np.allclose(h.conj().T @ h, np.eye(d), atol=1e-12)
    assert np.allclose(h @ x, chi, atol=1e-12)
    assert np.allclose(householder_to(chi * 1j, chi) @ (chi * 1j), chi)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("target", ["A", "B"])
def test_disentangler_factorizes_random_ensembles(seed, target):
    e = random_ensemble(PartitionSpec.of(3, 2), seed % 5 + 1, seed)
    cu, fact = disentangle(e, target)
    assert fact.residual < 1e-12
    chi = haar_vector(e.spec.dim(target), seed)
    _, fact2 = disentangle(e, target, chi)
    assert fact2.residual < 1e-12


def test_controlled_unitary_apply_matches_operator():
    e = random_ensemble(PartitionSpec.of(2, 2), 3, 0)
    p = purify_ensemble(e)
    cu = build_disentangler(p, "B")
    assert np.allclose(cu.operator() @ p.state.amplitudes, cu.apply(p.state).amplitudes)
    assert np.allclose(cu.inverse().apply(cu.apply(p.state)).amplitudes, p.state.amplitudes)


def test_controlled_unitary_validation():
    spec = PartitionSpec.of(2, 2, 3)
    with pytest.raises(ValidationError):
        ControlledUnitary(spec, "C", "B", (np.eye(2),) * 2)
    with pytest.raises(ValidationError):
        ControlledUnitary(spec, "C", "B", (np.eye(2), np.eye(2), 2 * np.eye(2)))


def test_full_separation():
    e = werner_ensemble(0.2)
    sep = full_separation(e)
    assert sep.residual < 1e-12


def test_factor_out_detects_entanglement():
    from entgroup import bell

    rest, res = factor_out(bell(), "A", KET["0"])
    assert res > 0.5


def _case(seed):
    sym = random_symmetric_ensemble(seed)
    p = purify_ensemble(sym.ensemble)
    u = LocalUnitary(p.spec, (sym.u_a, sym.u_b, np.eye(sym.ensemble.L)))
    return sym, p, verify_candidate(p.state, u)


@pytest.mark.parametrize("seed", range(10))
def test_decomposition_structure(seed):
    sym, p, cand = _case(seed)
    assert cand.verified
    dec = decompose_two_party_stabilizer(p, cand)
    assert dec.residual_ac < 1e-10 and dec.residual_bc < 1e-10 and dec.product_residual < 1e-10
    # s_AC acts trivially on B, s_BC trivially on A, both diagonal on C
    assert np.allclose(dec.s_ac.factor("B"), np.eye(p.spec.dim("B")))
    assert np.allclose(dec.s_bc.factor("A"), np.eye(p.spec.dim("A")))
    for s in (dec.s_ac, dec.s_bc):
        c = s.factor("C")
        assert np.allclose(c, np.diag(np.diag(c)))


def test_decomposition_accepts_two_party_candidate():
    sym, p, cand = _case(3)
    u2 = LocalUnitary(sym.ensemble.spec, (sym.u_a, sym.u_b))
    c2 = verify_candidate(sym.ensemble.density(), u2)
    dec = decompose_two_party_stabilizer(p, c2, theta=cand.phase)
    assert dec.product_residual < 1e-10


def test_decomposition_errors():
    sym, p, cand = _case(0)
    with pytest.raises(MetadataMissingError):
        decompose_two_party_stabilizer(p.state, cand)
    bad = verify_candidate(p.state, LocalUnitary(p.spec, (haar_unitary(p.spec.dim("A"), 1),
                                                           np.eye(p.spec.dim("B")), np.eye(p.spec.dim("C")))))
    with pytest.raises(NotAStabilizerError):
        decompose_two_party_stabilizer(p, bad)
    with_aux = LocalUnitary(p.spec, (np.eye(p.spec.dim("A")), np.eye(p.spec.dim("B")),
                                     haar_unitary(p.spec.dim("C"), 2)))
    with pytest.raises(NotAStabilizerError):
        decompose_two_party_stabilizer(p, verify_candidate(p.state, with_aux))


def test_werner_ensemble_density():
    for p in [0.0, 0.1, 1 / 3]:
        assert np.max(np.abs(werner_ensemble(p).density().matrix - werner(p).matrix)) < 1e-12
