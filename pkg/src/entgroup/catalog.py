"""Named states, ensembles and unitaries, plus seeded random fixtures.

Randomness always goes through ``numpy.random.default_rng(seed)`` (PCG64).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ParameterRangeError, ValidationError
from .separable import ControlledUnitary, Ensemble
from .tensor_core import DensityMatrix, PartitionSpec, PureState

S2 = 1.0 / np.sqrt(2.0)

KET = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([S2, S2], dtype=complex),
    "-": np.array([S2, -S2], dtype=complex),
    "x": np.array([S2, 1j * S2], dtype=complex),   # |times>
    "o": np.array([S2, -1j * S2], dtype=complex),  # |circ>
}

QUBITS2 = PartitionSpec.of(2, 2)
QUBITS3 = PartitionSpec.of(2, 2, 2)


def ket(label: str) -> np.ndarray:
    """Tensor product of single-qubit kets, e.g. ``ket("0+x")``."""
    out = np.ones(1, dtype=complex)
    for c in label:
        out = np.kron(out, KET[c])
    return out


def ghz(a: complex, b: complex) -> PureState:
    """a|000> + b|111>."""
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise ValidationError(f"|a|^2 + |b|^2 = {abs(a) ** 2 + abs(b) ** 2!r}, expected 1")
    amps = np.zeros(8, dtype=complex)
    amps[0], amps[7] = a, b
    return PureState(QUBITS3, amps / np.linalg.norm(amps))


def bell() -> PureState:
    """(|00> + |11>)/sqrt(2)."""
    return PureState(QUBITS2, (ket("00") + ket("11")) * S2)


def _check_p(p: float):
    if not (0.0 <= p <= 1.0) or not np.isfinite(p):
        raise ParameterRangeError(f"Werner parameter p = {p!r} outside [0, 1]")


def werner(p: float) -> DensityMatrix:
    """p |Bell><Bell| + (1 - p)/4 * 1."""
    _check_p(p)
    phi = bell().projector()
    return DensityMatrix(QUBITS2, p * phi + (1.0 - p) / 4.0 * np.eye(4))


# the ten product lines of the separable presentation; aux labels 0..9
WERNER_LINES = ("00", "11", "--", "++", "ox", "xo", "00", "01", "10", "11")


def _werner_weights(p: float) -> np.ndarray:
    return np.array([p / 2.0] * 6 + [(1.0 - 3.0 * p) / 4.0] * 4)


def werner_ensemble(p: float) -> Ensemble:
    """Six correlated product projectors with weight p/2 plus the identity with weight (1-3p)/4.

    Only defined for p <= 1/3. Terms of zero weight (p = 0 or p = 1/3) are dropped.
    """
    _check_p(p)
    if p > 1.0 / 3.0:
        raise ParameterRangeError(f"Werner state with p = {p!r} > 1/3 has no separable ensemble")
    weights = _werner_weights(p)
    terms = [(w, KET[lab[0]], KET[lab[1]]) for w, lab in zip(weights, WERNER_LINES) if w > 0]
    return Ensemble.from_terms(QUBITS2, terms)


def werner_purification(p: float) -> PureState:
    """The ten-dimensional-auxiliary purification, written term by term."""
    _check_p(p)
    if p > 1.0 / 3.0:
        raise ParameterRangeError(f"p = {p!r} > 1/3: this purification does not exist")
    amps = np.zeros((4, 10), dtype=complex)
    for ell, (w, lab) in enumerate(zip(_werner_weights(p), WERNER_LINES)):
        amps[:, ell] += np.sqrt(w) * ket(lab)
    return PureState(PartitionSpec.of(2, 2, 10), amps.reshape(-1))


def werner_min_purification(p: float) -> PureState:
    """Rank-4 purification, valid for every p in [0, 1]."""
    _check_p(p)
    amps = np.zeros((4, 4), dtype=complex)
    amps[:, 0] = np.sqrt((1 - p) / 4) * S2 * (ket("00") - ket("11"))
    amps[:, 1] = np.sqrt((1 - p) / 4) * ket("01")
    amps[:, 2] = np.sqrt((1 - p) / 4) * ket("10")
    amps[:, 3] = np.sqrt((1 + 3 * p) / 8) * (ket("00") + ket("11"))
    return PureState(PartitionSpec.of(2, 2, 4), amps.reshape(-1))


def werner_disentangler() -> ControlledUnitary:
    """The block-diagonal U_BC for the ten-line purification, transcribed block by block."""
    def ketbra(a, b):
        return np.outer(KET[a], KET[b].conj())

    flip = ketbra("0", "1") + ketbra("1", "0")
    eye = np.eye(2, dtype=complex)
    blocks = [
        eye,                                   # 0
        flip,                                  # 1
        ketbra("0", "-") + ketbra("1", "+"),   # 2
        ketbra("0", "+") + ketbra("1", "-"),   # 3
        ketbra("0", "x") + ketbra("1", "o"),   # 4
        ketbra("0", "o") + ketbra("1", "x"),   # 5
        eye,                                   # 6
        flip,                                  # 7
        eye,                                   # 8
        flip,                                  # 9
    ]
    return ControlledUnitary(PartitionSpec.of(2, 2, 10), control="C", target="B", blocks=tuple(blocks))


# -- random fixtures ---------------------------------------------------------

def haar_unitary(d: int, rng) -> np.ndarray:
    """Haar unitary: QR of a complex Ginibre matrix with the R diagonal made positive."""
    rng = np.random.default_rng(rng)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_vector(d: int, rng) -> np.ndarray:
    rng = np.random.default_rng(rng)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_state(spec: PartitionSpec, seed) -> PureState:
    rng = np.random.default_rng(seed)
    return PureState(spec, haar_vector(spec.total_dim, rng))


def random_ensemble(spec: PartitionSpec, L: int, seed) -> Ensemble:
    """Dirichlet(1,...,1) weights and independent Haar lines on each party."""
    if L < 1:
        raise ValidationError("an ensemble needs L >= 1")
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(L))
    probs = probs / probs.sum()
    da, db = spec.dims
    va = np.array([haar_vector(da, rng) for _ in range(L)])
    vb = np.array([haar_vector(db, rng) for _ in range(L)])
    return Ensemble(spec, probs, (va, vb))


def random_density(spec: PartitionSpec, seed, rank: int | None = None) -> DensityMatrix:
    """Reduced state of a Haar-random purification with ``rank`` auxiliary dimensions."""
    rng = np.random.default_rng(seed)
    n = spec.total_dim
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return DensityMatrix(spec, 0.5 * (rho + rho.conj().T))


def random_local_unitary(spec: PartitionSpec, seed):
    from .tensor_core import LocalUnitary

    rng = np.random.default_rng(seed)
    return LocalUnitary(spec, tuple(haar_unitary(d, rng) for d in spec.dims))


@dataclass(frozen=True, eq=False)
class SymmetricEnsemble:
    """An ensemble whose lines are eigenvectors of u_A, u_B with alpha_l + beta_l = theta."""

    ensemble: Ensemble
    u_a: np.ndarray
    u_b: np.ndarray
    theta: float


def _split_blocks(d: int, s: int, rng) -> list[int]:
    sizes = [1] * s
    for _ in range(d - s):
        k = int(rng.integers(0, s + 1))  # index s means the complement
        if k < s:
            sizes[k] += 1
    return sizes


def _distinct_phases(n: int, rng, sep: float = 0.1) -> np.ndarray:
    while True:
        ph = rng.uniform(0, 2 * np.pi, n)
        diffs = np.abs((ph[:, None] - ph[None, :] + np.pi) % (2 * np.pi) - np.pi)
        if n < 2 or np.min(diffs[np.triu_indices(n, 1)]) > sep:
            return ph


def random_symmetric_ensemble(seed, dims=None, L=None) -> SymmetricEnsemble:
    """Random separable ensemble together with a two-party symmetry of its purification.

    u_A, u_B are built with eigenspaces E_i (A) and F_i (B) carrying phases a_i,
    b_i = theta - a_i; every line lives in a matching pair (E_i, F_i).
    """
    rng = np.random.default_rng(seed)
    if dims is None:
        dims = tuple(int(x) for x in rng.choice([2, 3], size=2))
    if L is None:
        L = int(rng.integers(2, 7))
    da, db = dims
    s = int(rng.integers(1, min(da, db) + 1))
    theta = float(rng.uniform(0, 2 * np.pi))
    a = _distinct_phases(s, rng)
    b = theta - a

    def build(d, cluster_phases):
        sizes = _split_blocks(d, s, rng)
        v = haar_unitary(d, rng)
        rest = d - sum(sizes)
        others = _distinct_phases(s + rest, rng)[s:] if rest else np.zeros(0)
        phases, cols, start = [], [], 0
        for i, m in enumerate(sizes):
            phases.extend([cluster_phases[i]] * m)
            cols.append(v[:, start:start + m])
            start += m
        phases.extend(others)
        u = (v * np.exp(1j * np.array(phases))) @ v.conj().T
        return u, cols

    u_a, cols_a = build(da, a)
    u_b, cols_b = build(db, b)
    assign = [ell % s for ell in range(L)]
    rng.shuffle(assign)
    va, vb = [], []
    for i in assign:
        va.append(cols_a[i] @ haar_vector(cols_a[i].shape[1], rng))
        vb.append(cols_b[i] @ haar_vector(cols_b[i].shape[1], rng))
    probs = rng.dirichlet(np.ones(L))
    ens = Ensemble(PartitionSpec.of(da, db), probs / probs.sum(), (np.array(va), np.array(vb)))
    return SymmetricEnsemble(ens, u_a, u_b, theta)


# -- registry used by the CLI ------------------------------------------------

@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    parameters: dict
    output: Any
    provenance: str


def catalog_entry(name: str, form: str = "auto", **params) -> CatalogEntry:
    """Construct a named object. ``form`` picks between representations where several exist."""
    name = name.lower()
    if name == "ghz":
        a, b = complex(params.get("a", S2)), complex(params.get("b", S2))
        return CatalogEntry("ghz", {"a": a, "b": b}, ghz(a, b), "generalized GHZ state a|000> + b|111>")
    if name == "bell":
        return CatalogEntry("bell", {}, bell(), "Bell state (|00> + |11>)/sqrt2")
    if name == "werner":
        p = float(params["p"])
        _check_p(p)
        if form == "auto":
            form = "ensemble" if p <= 1.0 / 3.0 else "density"
        builders = {
            "density": werner,
            "ensemble": werner_ensemble,
            "purification": werner_purification,
            "min-purification": werner_min_purification,
        }
        if form not in builders:
            raise ValidationError(f"unknown Werner form {form!r}; choose from {sorted(builders)}")
        return CatalogEntry("werner", {"p": p, "form": form}, builders[form](p),
                            "Werner state p|Bell><Bell| + (1-p)/4")
    if name == "random":
        dims = tuple(params.get("dims", (2, 2, 2)))
        seed = int(params.get("seed", 0))
        spec = PartitionSpec.of(*dims)
        if form in ("auto", "pure"):
            out = random_state(spec, seed)
        elif form == "density":
            out = random_density(spec, seed)
        elif form == "ensemble":
            out = random_ensemble(spec, int(params.get("L", 4)), seed)
        else:
            raise ValidationError(f"unknown random form {form!r}")
        return CatalogEntry("random", {"dims": list(dims), "seed": seed, "form": form}, out,
                            "seeded random fixture (PCG64)")
    raise ValidationError(f"unknown catalog entry {name!r}")
