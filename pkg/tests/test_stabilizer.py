"""Solver checks. Frozen integers below were derived with the pivoted-QR oracle."""
import numpy as np
import pytest

import oracles as O
from entgroup import PartitionSpec, PureState, bell, ghz, partial_trace, random_state, werner
from entgroup.catalog import random_density
from entgroup.stabilizer import (
    PURE,
    bracket_vector,
    centralizer_in_projection,
    closure_residual,
    decode,
    encode,
    exponentiation_check,
    intersection_dim,
    mixed_stabilizer_algebra,
    project_party,
    projected_dim,
    pure_stabilizer_algebra,
    rank_decision,
    stabilizer_algebra,
    subspace_span,
)

S2 = 2 ** -0.5

# (state builder, mask, frozen dim)
FROZEN = [
    ("zero00", ("A", "B"), 4),
    ("zero00", ("A",), 2),
    ("ghz_generic", ("A", "B", "C"), 5),
    ("ghz_generic", ("A", "B"), 3),
    ("ghz_generic", ("A",), 1),
    ("bell", ("A", "B"), 5),
    ("bell", ("A",), 1),
    ("rho_ghz_std", ("A", "B"), 4),
    ("werner0", ("A", "B"), 8),
    ("werner0", ("A",), 4),
    ("werner02", ("A", "B"), 5),
    ("werner02", ("A",), 1),
]


def build(name):
    if name == "zero00":
        v = np.zeros(4)
        v[0] = 1
        return PureState(PartitionSpec.of(2, 2), v)
    if name == "ghz_generic":
        return ghz(3 / 5, 4 / 5)
    if name == "bell":
        return bell()
    if name == "rho_ghz_std":
        return partial_trace(ghz(S2, S2), ["A", "B"])
    if name == "werner0":
        return werner(0.0)
    if name == "werner02":
        return werner(0.2)
    raise KeyError(name)


@pytest.mark.parametrize("name,mask,dim", FROZEN)
def test_frozen_dims(name, mask, dim):
    state = build(name)
    alg = stabilizer_algebra(state, mask)
    assert alg.dim == dim
    assert alg.residual < 1e-12
    # the oracle still agrees with the frozen value
    mixed = not isinstance(state, PureState)
    arr = state.matrix if mixed else state.amplitudes
    idx = {state.spec.index(lab) for lab in mask}
    assert O.stab_dim(arr, state.spec.dims, idx, mixed) == dim


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (2, 2, 2), (2, 3, 2)])
def test_random_pure_matches_oracle(seed, dims):
    psi = random_state(PartitionSpec.of(*dims), seed)
    n = len(dims)
    for mask in [(0,), tuple(range(n)), (0, n - 1)]:
        labels = [psi.spec.labels[k] for k in mask]
        assert pure_stabilizer_algebra(psi, labels).dim == O.stab_dim(psi.amplitudes, dims, set(mask))


@pytest.mark.parametrize("seed", range(6))
def test_random_mixed_matches_oracle(seed):
    dims = (2, 3) if seed % 2 else (2, 2)
    rho = random_density(PartitionSpec.of(*dims), seed, rank=seed % 3 + 1)
    for mask in [(0,), (1,), (0, 1)]:
        labels = [rho.spec.labels[k] for k in mask]
        assert mixed_stabilizer_algebra(rho, labels).dim == O.stab_dim(rho.matrix, dims, set(mask), True)


def test_basis_orthonormal_and_inactive_zero():
    alg = pure_stabilizer_algebra(ghz(0.6, 0.8), ["A", "B"])
    assert np.allclose(alg.basis @ alg.basis.T, np.eye(alg.dim), atol=1e-12)
    assert np.all(alg.party_block("C") == 0)


def test_rank_decision_floor():
    s = np.array([1e-17, 1e-18])
    assert rank_decision(s, 1e-9).rank == 0
    s = np.array([5.0, 1.0, 1e-14])
    dec = rank_decision(s, 1e-9)
    assert dec.rank == 2 and dec.gap == pytest.approx(1e14)
    assert rank_decision(np.array([2.0, 1.0]), 1e-9).gap == float("inf")


def test_encode_decode_round_trip():
    psi = random_state(PartitionSpec.of(2, 3), 1)
    alg = pure_stabilizer_algebra(psi)
    for v in alg.basis:
        assert np.allclose(encode(decode(psi.spec, PURE, v), PURE), v)


@pytest.mark.parametrize("state", [ghz(0.6, 0.8), bell(), werner(0.3), partial_trace(ghz(S2, S2), ["A", "B"])],
                         ids=["ghz", "bell", "werner", "rho_ghz"])
def test_closure_and_exponentiation(state):
    for mask in [None, (state.spec.labels[0],)]:
        alg = stabilizer_algebra(state, mask)
        assert closure_residual(alg, rng=0) < 1e-10
        assert exponentiation_check(alg, state, rng=1) < 1e-10


def test_bracket_of_bell_algebra_is_su2():
    alg = pure_stabilizer_algebra(bell())
    brs = [bracket_vector(alg.spec, PURE, a, b) for a in alg.basis for b in alg.basis]
    # brackets span exactly the three-dimensional traceless part
    assert O.qr_rank(np.array(brs).T) == 3


def test_span_and_intersection():
    psi = ghz(0.6, 0.8)
    ab = pure_stabilizer_algebra(psi, ["A", "B"])
    ac = pure_stabilizer_algebra(psi, ["A", "C"])
    a = pure_stabilizer_algebra(psi, ["A"])
    span = subspace_span([ab, ac])
    assert span.active == ("A", "B", "C")
    assert intersection_dim(ab, ac) == a.dim
    assert intersection_dim(ab, a) == a.dim


def test_projections_and_centralizer():
    alg = pure_stabilizer_algebra(bell())
    proj = project_party(alg, "A")
    assert proj.dim == 4
    assert centralizer_in_projection(alg, "A").dim == 1  # only the identity commutes with u(2)
    assert projected_dim(alg, ["A", "B"]) == 5
    assert proj.membership_residual(np.array([[0, 1], [1, 0]])) < 1e-12
