"""Dense complex-matrix substrate.

Operators are plain ``numpy.ndarray`` objects of dtype ``complex128``.  A
tensor-factored operator carries a separate list of subsystem dimensions
(``dims``); the left factor of a Kronecker product is always the first
subsystem.
"""

from __future__ import annotations

import os
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionCapError, SubsystemIndexError

DEFAULT_DIM_CAP = 2**14
HERMITIAN_TOL = 1e-10
PHASE_TOL = 1e-8


def dim_cap() -> int:
    """Ambient-dimension cap, overridable via ``CORRSIM_DIM_CAP``."""
    raw = os.environ.get("CORRSIM_DIM_CAP")
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ContractError(f"CORRSIM_DIM_CAP must be an integer, got {raw!r}")
    if cap < 1:
        raise ContractError("CORRSIM_DIM_CAP must be positive")
    return cap


def check_cap(dim: int, cap: int | None = None) -> None:
    cap = dim_cap() if cap is None else cap
    if dim > cap:
        raise DimensionCapError(f"ambient dimension {dim} exceeds cap {cap}")


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ContractError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError("matrix has non-finite entries")
    return a


def check_dims(dims: Sequence[int], dim: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ContractError(f"invalid subsystem dimensions {dims}")
    if int(np.prod(dims)) != dim:
        raise ContractError(f"dims {dims} do not multiply to {dim}")
    return dims


def tensor(a, b, cap: int | None = None) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    a, b = as_matrix(a), as_matrix(b)
    check_cap(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), cap)
    return np.kron(a, b)


def tensor_all(ops: Iterable, cap: int | None = None) -> np.ndarray:
    return reduce(lambda x, y: tensor(x, y, cap), ops)


def tensor_power(a, n: int, cap: int | None = None) -> np.ndarray:
    if n < 1:
        raise ContractError("tensor power needs n >= 1")
    return tensor_all([a] * n, cap)


def _normalize_keep(keep: Iterable[int], nsys: int) -> list[int]:
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < nsys:
            raise SubsystemIndexError(f"subsystem index {k} out of range for {nsys} subsystems")
    return keep


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    The kept factors appear in ascending index order.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ContractError("partial trace needs a square matrix")
    dims = check_dims(dims, m.shape[0])
    nsys = len(dims)
    keep = _normalize_keep(keep, nsys)
    drop = [i for i in range(nsys) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    dd = int(np.prod([dims[i] for i in drop])) if drop else 1
    t = m.reshape(dims + dims)
    order = keep + drop
    t = t.transpose(order + [nsys + i for i in order]).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def permute_subsystems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor ``k`` is old factor ``perm[k]``.

    Works on square operators and on state vectors.
    """
    a = np.asarray(m, dtype=complex)
    dims = tuple(int(d) for d in dims)
    perm = list(perm)
    if sorted(perm) != list(range(len(dims))):
        raise SubsystemIndexError(f"{perm} is not a permutation of {len(dims)} subsystems")
    nsys = len(dims)
    if a.ndim == 1:
        return a.reshape(dims).transpose(perm).reshape(-1)
    t = a.reshape(dims + dims).transpose(perm + [nsys + p for p in perm])
    d = a.shape[0]
    return t.reshape(d, d)


def hermitian_eigensystem(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors (columns) of a Hermitian matrix.

    The input is symmetrized as ``(m + m†)/2`` first.  Each eigenvector is
    rephased so that its first entry with modulus above ``1e-8`` is real and
    positive, which makes the basis reproducible.

    Raises:
        ContractError: if ``max|m - m†|`` exceeds ``tol``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ContractError("eigensystem needs a square matrix")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise ContractError(f"matrix is not Hermitian (max deviation {dev:.3g})")
    h = 0.5 * (m + m.conj().T)
    evals, evecs = np.linalg.eigh(h)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    for j in range(evecs.shape[1]):
        col = evecs[:, j]
        idx = np.flatnonzero(np.abs(col) > PHASE_TOL)
        if idx.size:
            ph = col[idx[0]] / abs(col[idx[0]])
            evecs[:, j] = col / ph
    return evals, evecs


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T)) <= tol)


def min_eigenvalue(m) -> float:
    m = as_matrix(m)
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def trace_norm(m) -> float:
    """Sum of singular values; Hermitian input takes the eigenvalue path."""
    m = as_matrix(m)
    if m.shape[0] == m.shape[1] and is_hermitian(m):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def operator_in_interval(x, lo, hi, tol: float = 1e-9) -> bool:
    """True iff ``lo <= x <= hi`` in the positive-semidefinite order, up to ``tol``."""
    x, lo, hi = as_matrix(x), as_matrix(lo), as_matrix(hi)
    if not (x.shape == lo.shape == hi.shape) or x.shape[0] != x.shape[1]:
        raise ContractError("interval check needs square matrices of equal size")
    return min_eigenvalue(x - lo) >= -tol and min_eigenvalue(hi - x) >= -tol


def sqrtm_psd(m) -> np.ndarray:
    """Square root of a positive-semidefinite matrix via its eigensystem."""
    evals, evecs = hermitian_eigensystem(m)
    root = np.sqrt(np.clip(evals, 0.0, None))
    return (evecs * root) @ evecs.conj().T


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = np.asarray(u)
    return u.shape[0] == u.shape[1] and bool(
        np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol
    )


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)
