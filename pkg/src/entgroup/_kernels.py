"""Hot kernels for local-operator application and commutator assembly.

Every kernel exists twice: a loop version compiled with numba and a
vectorized numpy version. The numba path is used when numba imports and the
environment variable ``ENTGROUP_DISABLE_NUMBA`` is unset (or ``0``); set it
to ``1`` to force the numpy path. Both paths must agree to rounding error,
which the test suite checks.

Array conventions: a state is viewed as ``psi3`` with shape ``(L, d, R)``
where ``d`` is the dimension of the party being acted on and ``L``/``R`` are
the products of the dimensions before/after it (row-major flat order). A
density matrix is viewed as ``rho6`` with shape ``(L, d, R, L, d, R)``.
"""
import os

import numpy as np

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


def _flag_disabled():
    return os.environ.get("ENTGROUP_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = _HAVE_NUMBA and not _flag_disabled()


# -- numpy reference path ---------------------------------------------------

def mode_columns_numpy(ops, psi3):
    """Apply each ``ops[a]`` to the middle mode of ``psi3``; shape (m, L, d, R)."""
    return np.einsum("aij,ljr->alir", ops, psi3)


def commutator_columns_numpy(ops, rho6):
    """``[embed(ops[a]), rho]`` for every ``a``; shape (m, L, d, R, L, d, R)."""
    left = np.einsum("aij,ljrmks->alirmks", ops, rho6)
    right = np.einsum("lirmjs,ajk->alirmks", rho6, ops)
    return left - right


# -- numba path -------------------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True)
    def mode_columns_numba(ops, psi3):
        m, d, _ = ops.shape
        L, _, R = psi3.shape
        out = np.zeros((m, L, d, R), dtype=np.complex128)
        for a in range(m):
            for i in range(d):
                for j in range(d):
                    c = ops[a, i, j]
                    if c == 0:
                        continue
                    for l in range(L):
                        for r in range(R):
                            out[a, l, i, r] += c * psi3[l, j, r]
        return out

    @njit(cache=True)
    def commutator_columns_numba(ops, rho6):
        m, d, _ = ops.shape
        L = rho6.shape[0]
        R = rho6.shape[2]
        out = np.zeros((m, L, d, R, L, d, R), dtype=np.complex128)
        for a in range(m):
            for i in range(d):
                for j in range(d):
                    c = ops[a, i, j]
                    if c == 0:
                        continue
                    # left action: out[l,i,r,.,.,.] += c * rho[l,j,r,.,.,.]
                    for l in range(L):
                        for r in range(R):
                            for l2 in range(L):
                                for k in range(d):
                                    for r2 in range(R):
                                        out[a, l, i, r, l2, k, r2] += c * rho6[l, j, r, l2, k, r2]
                    # right action: out[.,.,.,l2,j,r2] -= rho[.,.,.,l2,i,r2] * c
                    for l in range(L):
                        for k in range(d):
                            for r in range(R):
                                for l2 in range(L):
                                    for r2 in range(R):
                                        out[a, l, k, r, l2, j, r2] -= rho6[l, k, r, l2, i, r2] * c
        return out

else:  # pragma: no cover
    mode_columns_numba = None
    commutator_columns_numba = None


def mode_columns(ops, psi3):
    ops = np.ascontiguousarray(ops, dtype=np.complex128)
    psi3 = np.ascontiguousarray(psi3, dtype=np.complex128)
    if USE_NUMBA:
        return mode_columns_numba(ops, psi3)
    return mode_columns_numpy(ops, psi3)


def commutator_columns(ops, rho6):
    ops = np.ascontiguousarray(ops, dtype=np.complex128)
    rho6 = np.ascontiguousarray(rho6, dtype=np.complex128)
    if USE_NUMBA:
        return commutator_columns_numba(ops, rho6)
    return commutator_columns_numpy(ops, rho6)
