"""Independent reference implementations used to derive and freeze expected values.

Nothing here imports the package's solvers. Operators are built with explicit
Kronecker products, nullspaces come from column-pivoted QR, and partial traces
are plain index sums.
"""
import itertools

import numpy as np
import scipy.linalg as sla


def herm_units(n):
    """Real basis of n x n Hermitian matrices (no orthonormality assumed)."""
    out = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            if i == j:
                e[i, i] = 1
            elif i < j:
                e[i, j] = e[j, i] = 1
            else:
                e[i, j], e[j, i] = 1j, -1j
            out.append(e)
    return out


def embed(dims, k, m):
    out = np.eye(1)
    for j, d in enumerate(dims):
        out = np.kron(out, m if j == k else np.eye(d))
    return out


def qr_rank(a, tol=1e-9):
    if a.size == 0:
        return 0
    _, r, _ = sla.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0:
        return 0
    return int(np.sum(diag > tol * max(diag[0], 1.0)))


def qr_null(a, tol=1e-9):
    """Orthonormal nullspace basis (columns) of a real matrix via pivoted QR of its transpose."""
    ncols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(ncols)
    q, r, _ = sla.qr(a.T, mode="full", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * max(diag[0] if diag.size else 0.0, 1.0)))
    return q[:, rank:]


def _realify(cols):
    a = np.array(cols).T
    return np.vstack([a.real, a.imag])


def pure_null(psi, dims, active):
    """Nullspace basis (columns) in coordinates (all parties' unit coefficients, theta)."""
    cols = []
    for k, d in enumerate(dims):
        for e in herm_units(d):
            cols.append(embed(dims, k, e) @ psi if k in active else np.zeros_like(psi))
    cols.append(-psi)
    basis = qr_null(_realify(cols))
    # inactive coordinates have zero columns, drop those free directions
    mask = np.ones(basis.shape[0], dtype=bool)
    off = 0
    for k, d in enumerate(dims):
        if k not in active:
            mask[off:off + d * d] = False
        off += d * d
    return _restrict(basis, mask)


def mixed_null(rho, dims, active):
    cols = []
    for k, d in enumerate(dims):
        for e in herm_units(d):
            if k in active:
                h = embed(dims, k, e)
                cols.append((h @ rho - rho @ h).ravel())
            else:
                cols.append(np.zeros(rho.size, dtype=complex))
    basis = qr_null(_realify(cols))
    mask = np.ones(basis.shape[0], dtype=bool)
    off = 0
    for k, d in enumerate(dims):
        if k not in active:
            mask[off:off + d * d] = False
        off += d * d
    return _restrict(basis, mask)


def _restrict(basis, mask):
    """Nullspace vectors with zero entries off ``mask`` (inactive parties contribute nothing)."""
    full = basis.shape[0]
    sel = np.eye(full)[~mask]
    if sel.shape[0] == 0:
        return basis
    # solve for combinations of basis columns vanishing on the masked-out coordinates
    coeffs = qr_null(sel @ basis)
    out = basis @ coeffs
    if out.shape[1] == 0:
        return out
    q, r, _ = sla.qr(out, mode="economic", pivoting=True)
    return q[:, :qr_rank(out)]


def stab_dim(state, dims, active, mixed=False):
    return (mixed_null if mixed else pure_null)(state, dims, active).shape[1]


def span_dim(*bases):
    return qr_rank(np.hstack(bases))


def quotient_dim(state, dims, subset, mixed=False):
    f = mixed_null if mixed else pure_null
    num = f(state, dims, set(subset))
    faces = [f(state, dims, set(subset) - {x}) for x in subset]
    return num.shape[1] - span_dim(*faces)


def projected_dim(state, dims, active, keep, mixed=False):
    """Rank of the rows of the nullspace basis belonging to parties ``keep``."""
    basis = (mixed_null if mixed else pure_null)(state, dims, active)
    rows = []
    off = 0
    for k, d in enumerate(dims):
        if k in keep:
            rows.extend(range(off, off + d * d))
        off += d * d
    return qr_rank(basis[rows])


def partial_trace(rho, dims, keep):
    """Index-summation partial trace keeping parties ``keep`` (in order)."""
    n = len(dims)
    t = rho.reshape(tuple(dims) * 2)
    traced = [k for k in range(n) if k not in keep]
    kd = [dims[k] for k in keep]
    out = np.zeros((int(np.prod(kd)),) * 2, dtype=complex)
    for row in itertools.product(*[range(d) for d in kd]):
        for col in itertools.product(*[range(d) for d in kd]):
            s = 0j
            for tr in itertools.product(*[range(dims[k]) for k in traced]):
                ir, ic = [0] * n, [0] * n
                for k, v in zip(keep, row):
                    ir[k] = v
                for k, v in zip(keep, col):
                    ic[k] = v
                for k, v in zip(traced, tr):
                    ir[k] = ic[k] = v
                s += t[tuple(ir) + tuple(ic)]
            r = int(np.ravel_multi_index(row, kd))
            c = int(np.ravel_multi_index(col, kd))
            out[r, c] = s
    return out


PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
}


def pauli_oracle(state, n, mixed=False, tol=1e-9):
    """Exhaustive check of all 4**n Pauli strings; returns {word: phase or None}."""
    found = {}
    for word in itertools.product("IXYZ", repeat=n):
        op = np.eye(1)
        for c in word:
            op = np.kron(op, PAULI[c])
        if mixed:
            if np.max(np.abs(op @ state @ op.conj().T - state)) < tol:
                found["".join(word)] = None
        else:
            ov = np.vdot(state, op @ state)
            if abs(abs(ov) - 1) < tol:
                found["".join(word)] = float(np.angle(ov))
    return found
