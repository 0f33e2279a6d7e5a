"""Quantum states, purifications, Schmidt forms and entropy functionals.

All entropies are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linalg as la
from .errors import ContractError, InvariantError, SubsystemIndexError

STATE_TOL = 1e-10
EIG_ZERO = 1e-12
CLAMP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator with subsystem dims.

    Construction validates the invariants.  Eigenvalues in ``[-1e-10, 0)`` are
    clamped to zero and the trace renormalized; anything more negative is an
    :class:`InvariantError`.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = la.as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise InvariantError("density matrix must be square")
        dims = la.check_dims(self.dims, m.shape[0])
        if not la.is_hermitian(m, STATE_TOL):
            raise InvariantError("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > STATE_TOL:
            raise InvariantError(f"density matrix trace is {tr!r}, not 1")
        evals, evecs = np.linalg.eigh(m)
        if evals[0] < -CLAMP_TOL:
            raise InvariantError(f"density matrix has eigenvalue {evals[0]:.3g} < 0")
        if evals[0] < 0:
            evals = np.clip(evals, 0.0, None)
            evals = evals / evals.sum()
            m = (evecs * evals) @ evecs.conj().T
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Spectrum, descending, with values below 1e-12 set to zero."""
        evals = np.linalg.eigvalsh(self.matrix)[::-1]
        evals = np.where(evals < EIG_ZERO, 0.0, evals)
        return evals

    def marginal(self, keep: Iterable[int]) -> "DensityMatrix":
        keep = sorted(set(keep))
        m = la.partial_trace(self.matrix, self.dims, keep)
        return DensityMatrix(m / np.trace(m).real, tuple(self.dims[k] for k in keep))

    def permute(self, perm: Sequence[int]) -> "DensityMatrix":
        return DensityMatrix(
            la.permute_subsystems(self.matrix, self.dims, perm),
            tuple(self.dims[p] for p in perm),
        )

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(la.tensor(self.matrix, other.matrix), self.dims + other.dims)

    def power(self, n: int) -> "DensityMatrix":
        return DensityMatrix(la.tensor_power(self.matrix, n), self.dims * n)

    def grouped(self, groups: Sequence[Sequence[int]]) -> "DensityMatrix":
        """Reorder and merge subsystems into one factor per group."""
        order = [i for g in groups for i in g]
        if sorted(order) != list(range(len(self.dims))):
            raise SubsystemIndexError(f"groups {groups} do not partition {len(self.dims)} subsystems")
        m = la.permute_subsystems(self.matrix, self.dims, order)
        gd = tuple(int(np.prod([self.dims[i] for i in g])) for g in groups)
        return DensityMatrix(m, gd)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(np.trace(self.matrix @ self.matrix).real - 1.0) < tol


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector on a tensor-factored space."""

    vector: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        dims = la.check_dims(self.dims, v.size)
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > STATE_TOL:
            raise InvariantError(f"pure state has norm {nrm!r}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, vector, dims) -> "PureState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(v / np.linalg.norm(v), tuple(dims))

    def density(self) -> DensityMatrix:
        return DensityMatrix(la.proj(self.vector), self.dims)


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """``|ψ⟩ = Σ_i √λ_i |l_i⟩|r_i⟩`` with ``λ`` descending.

    ``left_basis[:, i]`` and ``right_basis[:, i]`` are the Schmidt vectors.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    dims: tuple[int, int] = field(default=(0, 0))

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > 1e-10))

    def vector(self) -> np.ndarray:
        amps = np.sqrt(self.coefficients)
        return np.einsum("i,ai,bi->ab", amps, self.left_basis, self.right_basis).reshape(-1)


# -- entropy functionals ------------------------------------------------------


def _spectrum(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.eigenvalues()
    m = la.as_matrix(rho)
    evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return np.where(evals < EIG_ZERO, 0.0, evals)


def shannon_entropy(p) -> float:
    """``-Σ p log2 p`` with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    p = p[p > EIG_ZERO]
    return float(-np.sum(p * np.log2(p)))


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1.0 - p])


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; accepts a :class:`DensityMatrix` or a raw Hermitian array."""
    return max(shannon_entropy(_spectrum(rho)), 0.0)


def _as_state(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, PureState):
        return rho.density()
    raise ContractError(f"expected a DensityMatrix or PureState, got {type(rho).__name__}")


def _check_groups(groups: Sequence[Sequence[int]], nsys: int, cover: bool) -> list[list[int]]:
    out = [sorted(int(i) for i in g) for g in groups]
    flat = [i for g in out for i in g]
    if any(not g for g in out):
        raise SubsystemIndexError("every group must be nonempty")
    if any(not 0 <= i < nsys for i in flat) or len(set(flat)) != len(flat):
        raise SubsystemIndexError(f"groups {groups} invalid for {nsys} subsystems")
    if cover and len(flat) != nsys:
        raise SubsystemIndexError(f"groups {groups} must cover all {nsys} subsystems")
    return out


def default_cut(dims: Sequence[int]) -> tuple[list[int], list[int]]:
    if len(dims) != 2:
        raise SubsystemIndexError("a cut must be given for states with more than two subsystems")
    return [0], [1]


def subsystem_entropy(rho, keep: Iterable[int]) -> float:
    rho = _as_state(rho)
    keep = sorted(set(keep))
    if len(keep) == len(rho.dims):
        return von_neumann_entropy(rho)
    return von_neumann_entropy(la.partial_trace(rho.matrix, rho.dims, keep))


def mutual_information(rho, cut=None) -> float:
    """``S(A) + S(B) - S(AB)`` across ``cut = (A indices, B indices)``.

    The two groups need not cover every subsystem; anything outside both is
    traced out first.  Results in ``[-1e-9, 0)`` are clamped to zero.
    """
    rho = _as_state(rho)
    if cut is None:
        cut = default_cut(rho.dims)
    if len(cut) != 2:
        raise SubsystemIndexError("a cut is a pair of subsystem groups")
    a, b = _check_groups(cut, len(rho.dims), False)
    value = subsystem_entropy(rho, a) + subsystem_entropy(rho, b) - subsystem_entropy(rho, a + b)
    if -1e-9 <= value < 0:
        value = 0.0
    return value


def conditional_mutual_information(rho, parts) -> float:
    """``I(A:C|B) = S(AB) + S(BC) - S(ABC) - S(B)``; not clamped."""
    rho = _as_state(rho)
    if len(parts) != 3:
        raise SubsystemIndexError("conditional mutual information needs three groups (A, B, C)")
    a, b, c = _check_groups(parts, len(rho.dims), True)
    return (
        subsystem_entropy(rho, a + b)
        + subsystem_entropy(rho, b + c)
        - subsystem_entropy(rho, a + b + c)
        - subsystem_entropy(rho, b)
    )


def schmidt(psi: PureState, cut=None) -> SchmidtForm:
    """Schmidt decomposition of a pure state across ``cut``."""
    a, b = _check_groups(cut if cut is not None else default_cut(psi.dims), len(psi.dims), True)
    order = a + b
    v = la.permute_subsystems(psi.vector, psi.dims, order)
    da = int(np.prod([psi.dims[i] for i in a]))
    db = int(np.prod([psi.dims[i] for i in b]))
    u, s, vh = np.linalg.svd(v.reshape(da, db), full_matrices=False)
    lam = s**2
    return SchmidtForm(lam / lam.sum(), u, vh.T, (da, db))


def entanglement_entropy(psi: PureState, cut=None) -> float:
    return shannon_entropy(schmidt(psi, cut).coefficients)


def purify(rho) -> PureState:
    """Canonical purification ``Σ √λ_i |i⟩_Z ⊗ |v_i⟩`` with the reference first.

    ``Z`` has the full dimension of ``rho``; unused basis states carry zero
    amplitude.
    """
    rho = _as_state(rho)
    evals, evecs = la.hermitian_eigensystem(rho.matrix)
    amps = np.sqrt(np.clip(evals, 0.0, None))
    vec = (evecs * amps).T.reshape(-1)
    return PureState.normalized(vec, (rho.dim,) + rho.dims)


LOG2E = math.log2(math.e)


def eta(x: float) -> float:
    """``-x log2 x`` up to ``1/e``, constant ``(1/e) log2 e`` beyond."""
    if x < 0:
        raise ContractError(f"eta is defined for x >= 0, got {x}")
    if x == 0:
        return 0.0
    if x >= 1 / math.e:
        return LOG2E / math.e
    return -x * math.log2(x)


def fannes_bound(eps: float, log_dim: float) -> float:
    return eps * log_dim + eta(eps)


# -- named fixtures and random states -------------------------------------------


def bell_vector(sign: int = 1) -> np.ndarray:
    return np.array([1, 0, 0, sign], dtype=complex) / math.sqrt(2)


def bell() -> PureState:
    """``|Φ+⟩ = (|00⟩ + |11⟩)/√2``."""
    return PureState(bell_vector(), (2, 2))


def bell_dephased() -> DensityMatrix:
    """``½(|00⟩⟨00| + |11⟩⟨11|)``: the classically correlated qubit pair."""
    return DensityMatrix(np.diag([0.5, 0, 0, 0.5]).astype(complex), (2, 2))


def ghz3() -> PureState:
    v = np.zeros(8, dtype=complex)
    v[0] = v[7] = 1 / math.sqrt(2)
    return PureState(v, (2, 2, 2))


def werner(p: float) -> DensityMatrix:
    """``p |Φ+⟩⟨Φ+| + (1 - p) 1/4``."""
    if not 0 <= p <= 1:
        raise ContractError(f"Werner weight must lie in [0, 1], got {p}")
    return DensityMatrix(p * la.proj(bell_vector()) + (1 - p) * np.eye(4) / 4, (2, 2))


def two_qubit_pure(weight: float) -> PureState:
    """``√w|00⟩ + √(1-w)|11⟩``."""
    v = np.zeros(4, dtype=complex)
    v[0], v[3] = math.sqrt(weight), math.sqrt(1 - weight)
    return PureState(v, (2, 2))


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    d = int(np.prod(dims))
    return DensityMatrix(np.eye(d, dtype=complex) / d, tuple(dims))


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based stream for sample ``index`` under master ``seed``.

    Streams depend only on ``(seed, index)``, so serial and parallel scans
    draw identical samples.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def _ginibre_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.standard_normal(d) + 1j * rng.standard_normal(d)


def random_state(kind: str, dims: Sequence[int], seed: int = 0, index: int = 0,
                 ancilla_dim: int | None = None):
    """Seeded random state.

    ``kind`` is one of ``"haar_pure"`` (returns :class:`PureState`),
    ``"induced_mixed"`` (partial trace of a Haar pure state over an ancilla,
    default ancilla dimension = system dimension) or ``"diagonal"``
    (flat-Dirichlet spectrum in the computational basis).
    """
    dims = tuple(int(d) for d in dims)
    d = int(np.prod(dims))
    la.check_cap(d)
    rng = rng_for(seed, index)
    if kind == "haar_pure":
        return PureState.normalized(_ginibre_vector(rng, d), dims)
    if kind == "induced_mixed":
        k = d if ancilla_dim is None else int(ancilla_dim)
        if k < 1:
            raise ContractError("ancilla dimension must be positive")
        g = _ginibre_vector(rng, d * k).reshape(d, k)
        m = g @ g.conj().T
        return DensityMatrix(m / np.trace(m).real, dims)
    if kind == "diagonal":
        p = rng.dirichlet(np.ones(d))
        return DensityMatrix(np.diag(p).astype(complex), dims)
    raise ContractError(f"unknown random state kind {kind!r}")
