"""Discrete stabilizer candidates: verification and Pauli enumeration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ScopeError, ValidationError
from .tensor_core import DensityMatrix, LocalUnitary, PureState, apply_party, conjugate

VERIFY_TOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class DiscreteCandidate:
    u: LocalUnitary
    verified: bool
    phase: float | None
    residual: float
    name: str | None = None

    @property
    def phase_factor(self) -> complex | None:
        return None if self.phase is None else complex(np.exp(1j * self.phase))


def fit_phase(psi: PureState, image: np.ndarray) -> float:
    """Angle of image/psi at the largest-magnitude amplitude of psi."""
    j = int(np.argmax(np.abs(psi.amplitudes)))
    return float(np.angle(image[j] / psi.amplitudes[j]))


def verify_candidate(state: PureState | DensityMatrix, u: LocalUnitary,
                     tol: float = VERIFY_TOL, name: str | None = None) -> DiscreteCandidate:
    if u.spec != state.spec:
        raise ValidationError(f"unitary acts on {u.spec.parties}, state lives on {state.spec.parties}")
    if isinstance(state, PureState):
        image = state.amplitudes
        for label, f in zip(u.spec.labels, u.factors):
            image = apply_party(u.spec, label, f, image)
        image = np.exp(1j * u.global_phase) * image
        phase = fit_phase(state, image)
        residual = float(np.linalg.norm(image - np.exp(1j * phase) * state.amplitudes))
    else:
        phase = None
        residual = float(np.max(np.abs(conjugate(u, state).matrix - state.matrix)))
    return DiscreteCandidate(u, residual < tol, phase, residual, name)


def pauli_strings(n: int):
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n)]


def pauli_unitary(spec, word: str) -> LocalUnitary:
    return LocalUnitary(spec, tuple(PAULI[c] for c in word))


def pauli_search(state: PureState | DensityMatrix, max_parties: int = 3) -> list[DiscreteCandidate]:
    """All Pauli strings stabilizing the state (phase fitted), in I<X<Y<Z lexicographic order."""
    spec = state.spec
    if len(spec) > max_parties or max_parties > 3:
        raise ScopeError(f"pauli_search handles at most 3 parties, got {len(spec)}")
    if any(d != 2 for d in spec.dims):
        raise ValidationError(f"pauli_search needs qubit parties, got dims {spec.dims}")
    found = []
    for word in pauli_strings(len(spec)):
        cand = verify_candidate(state, pauli_unitary(spec, word), name=word)
        if cand.verified:
            found.append(cand)
    return found
