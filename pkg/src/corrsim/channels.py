"""Randomizing channels and the noise they inject.

A channel acts on a bipartite space ``A ⊗ B`` of dimensions ``dims = (dA, dB)``.
States with finer subsystem structure are accepted as long as their total
dimension is ``dA * dB`` and the ``A`` factors come first.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg as la
from .errors import (
    ConsistencyError,
    ContractError,
    InvariantError,
    PreconditionError,
)
from .states import (
    DensityMatrix,
    PureState,
    eta,
    mutual_information,
    purify,
    shannon_entropy,
    von_neumann_entropy,
)

CERTIFYING_DIMS = {(2, 2), (2, 3), (3, 2)}


class Locality(enum.Enum):
    A_LUR = "A_LUR"
    B_LUR = "B_LUR"
    LUR = "LUR"
    COLUR = "COLUR"
    GENERAL_UNITARY = "GENERAL_UNITARY"


def factor_product(u, da: int, db: int, tol: float = 1e-9):
    """Split ``u`` into ``(uA, uB)`` with ``u = uA ⊗ uB``, or return ``None``.

    Uses the operator-Schmidt (realignment) decomposition.
    """
    u = la.as_matrix(u)
    r = u.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    left, s, right = np.linalg.svd(r, full_matrices=False)
    if s.size > 1 and s[1] > tol * max(s[0], 1.0):
        return None
    ua = (left[:, 0] * math.sqrt(s[0])).reshape(da, da)
    ub = (right[0, :] * math.sqrt(s[0])).reshape(db, db)
    # fix the scalar freedom so that uA is unitary
    scale = math.sqrt(abs(np.trace(ua.conj().T @ ua).real) / da)
    ua, ub = ua / scale, ub * scale
    if np.max(np.abs(np.kron(ua, ub) - u)) > 1e-8:
        return None
    return ua, ub


def _is_scalar_identity(m, tol: float = 1e-9) -> bool:
    d = m.shape[0]
    c = np.trace(m) / d
    return abs(abs(c) - 1) < tol and np.max(np.abs(m - c * np.eye(d))) < tol


@dataclass(frozen=True, eq=False)
class MixedUnitaryChannel:
    """``τ ↦ Σ p_i U_i τ U_i†`` with a locality tag over the cut ``dims``.

    ``local_parts[i] = (uA, uB)`` holds the factors when the ensemble is
    local (``None`` marks an identity factor).
    """

    probs: np.ndarray
    unitaries: tuple | None
    dims: tuple[int, int]
    locality: Locality = Locality.GENERAL_UNITARY
    n_label: int = 1
    local_parts: tuple | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        da, db = (int(x) for x in self.dims)
        d = da * db
        locality = Locality(self.locality)
        parts = self.local_parts
        us = None if self.unitaries is None else tuple(la.as_matrix(u) for u in self.unitaries)
        if us is None and parts is None:
            raise InvariantError("give the unitaries or their local factors")
        count = len(us) if us is not None else len(parts)
        if count != p.size or p.size == 0:
            raise InvariantError("ensemble needs one probability per unitary")
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
            raise InvariantError(f"probabilities must be nonnegative and sum to 1 (sum {p.sum()!r})")
        if us is not None:
            for u in us:
                if u.shape != (d, d) or not la.is_unitary(u):
                    raise InvariantError("ensemble element is not a unitary on A ⊗ B")
            if parts is None and locality is not Locality.GENERAL_UNITARY:
                parts = []
                for u in us:
                    f = factor_product(u, da, db)
                    if f is None:
                        raise InvariantError(f"unitary does not factor as required by {locality.value}")
                    parts.append(f)
        if parts is not None:
            parts = tuple(tuple(pair) for pair in parts)
            self._check_locality(locality, parts, us, da, db)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "unitaries", us)
        object.__setattr__(self, "dims", (da, db))
        object.__setattr__(self, "locality", locality)
        object.__setattr__(self, "local_parts", parts)

    @property
    def operators(self) -> tuple:
        """Full unitaries on ``A ⊗ B``, built from local factors on first use."""
        if self.unitaries is None:
            da, db = self.dims
            full = tuple(
                np.kron(np.eye(da) if ua is None else ua, np.eye(db) if ub is None else ub)
                for ua, ub in self.local_parts
            )
            object.__setattr__(self, "unitaries", full)
        return self.unitaries

    @staticmethod
    def _check_locality(locality, parts, us, da, db):
        for i, (ua, ub) in enumerate(parts):
            a = np.eye(da) if ua is None else ua
            b = np.eye(db) if ub is None else ub
            if a.shape != (da, da) or b.shape != (db, db):
                raise InvariantError("local factor has the wrong dimension")
            if us is None:
                if not (la.is_unitary(a) and la.is_unitary(b)):
                    raise InvariantError("local factor is not unitary")
            elif np.max(np.abs(np.kron(a, b) - us[i])) > 1e-9:
                raise InvariantError("local factors do not reproduce the unitary")
            if locality is Locality.A_LUR and not _is_scalar_identity(b):
                raise InvariantError("A_LUR ensemble acts nontrivially on B")
            if locality is Locality.B_LUR and not _is_scalar_identity(a):
                raise InvariantError("B_LUR ensemble acts nontrivially on A")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_local(cls, probs, pairs, dims, locality=Locality.COLUR, n_label: int = 1):
        """Build from ``(uA, uB)`` pairs; ``None`` stands for an identity factor."""
        da, db = dims
        parts = [(None if ua is None else la.as_matrix(ua), None if ub is None else la.as_matrix(ub))
                 for ua, ub in pairs]
        return cls(np.asarray(probs, dtype=float), None, (da, db), Locality(locality), n_label, tuple(parts))

    @classmethod
    def a_lur(cls, probs, unitaries_a, dims, n_label: int = 1):
        return cls.from_local(probs, [(u, None) for u in unitaries_a], dims, Locality.A_LUR, n_label)

    @classmethod
    def b_lur(cls, probs, unitaries_b, dims, n_label: int = 1):
        return cls.from_local(probs, [(None, u) for u in unitaries_b], dims, Locality.B_LUR, n_label)

    @classmethod
    def lur(cls, a_stage: "MixedUnitaryChannel", b_stage: "MixedUnitaryChannel"):
        """Independent noise on both sides: the product ensemble of two stages."""
        if a_stage.locality is not Locality.A_LUR or b_stage.locality is not Locality.B_LUR:
            raise ContractError("LUR is an A_LUR stage combined with a B_LUR stage")
        if a_stage.dims != b_stage.dims:
            raise ContractError("stages act on different cuts")
        probs, pairs = [], []
        for pa, (ua, _) in zip(a_stage.probs, a_stage.local_parts):
            for pb, (_, ub) in zip(b_stage.probs, b_stage.local_parts):
                probs.append(pa * pb)
                pairs.append((ua, ub))
        return cls.from_local(probs, pairs, a_stage.dims, Locality.LUR, a_stage.n_label)

    # -- behaviour ------------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.probs)

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    unital = True

    def _side_ops(self, side: int) -> np.ndarray:
        d = self.dims[side]
        return np.array([np.eye(d, dtype=complex) if pair[side] is None else pair[side]
                         for pair in self.local_parts])

    def kraus(self) -> list[np.ndarray]:
        return [math.sqrt(p) * u for p, u in zip(self.probs, self.operators)]

    def _apply_matrix(self, m: np.ndarray) -> np.ndarray:
        da, db = self.dims
        if self.locality is Locality.A_LUR:
            # Σ p U ⊗ conj(U) acting on the (row, column) A indices
            ops = self._side_ops(0)
            sup = np.einsum("i,ixa,iyc->xyac", self.probs, ops, ops.conj()).reshape(da * da, da * da)
            t = m.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
            out = (sup @ t).reshape(da, da, db, db).transpose(0, 2, 1, 3)
            return out.reshape(da * db, da * db)
        out = np.zeros_like(m)
        for p, u in zip(self.probs, self.operators):
            out += p * (u @ m @ u.conj().T)
        return out

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        _check_dim(self, rho)
        return DensityMatrix(_retrace(self._apply_matrix(rho.matrix)), rho.dims)

    def gram(self, rho: DensityMatrix) -> np.ndarray:
        """``W_ij = √(p_i p_j) tr(U_j† U_i ρ)``: the environment's output state."""
        _check_dim(self, rho)
        sq = np.sqrt(self.probs)
        da, db = self.dims
        if self.locality in (Locality.A_LUR, Locality.B_LUR):
            side = 0 if self.locality is Locality.A_LUR else 1
            marg = la.partial_trace(rho.matrix, (da, db), [side])
            ops = self._side_ops(side)
        else:
            marg = rho.matrix
            ops = np.array(self.operators)
        ops_rho = ops @ marg
        w = np.einsum("jab,iab->ij", ops.conj(), ops_rho)
        return sq[:, None] * w * sq[None, :]

    def relabeled(self, perm: Sequence[int]) -> "MixedUnitaryChannel":
        perm = list(perm)
        parts = None if self.local_parts is None else tuple(self.local_parts[i] for i in perm)
        return MixedUnitaryChannel(
            self.probs[perm], None if self.unitaries is None else tuple(self.unitaries[i] for i in perm), self.dims,
            self.locality, self.n_label, parts,
        )


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """General cptp map ``τ ↦ Σ K_i τ K_i†``; ``unital`` is derived."""

    kraus: tuple
    dims: tuple[int, int]

    def __post_init__(self):
        ks = tuple(la.as_matrix(k) for k in self.kraus)
        da, db = (int(x) for x in self.dims)
        d = da * db
        if not ks or any(k.shape != (d, d) for k in ks):
            raise InvariantError("Kraus operators must be square on A ⊗ B")
        s = sum(k.conj().T @ k for k in ks)
        if np.max(np.abs(s - np.eye(d))) > 1e-9:
            raise InvariantError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ks)
        object.__setattr__(self, "dims", (da, db))

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def unital(self) -> bool:
        s = sum(k @ k.conj().T for k in self.kraus)
        return bool(np.max(np.abs(s - np.eye(self.dim))) <= 1e-9)

    @classmethod
    def local(cls, kraus_a, kraus_b, dims):
        """Product channel ``T_A ⊗ T_B`` from local Kraus lists."""
        return cls(tuple(np.kron(ka, kb) for ka in kraus_a for kb in kraus_b), tuple(dims))

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        _check_dim(self, rho)
        out = sum(k @ rho.matrix @ k.conj().T for k in self.kraus)
        return DensityMatrix(_retrace(out), rho.dims)

    def gram(self, rho: DensityMatrix) -> np.ndarray:
        _check_dim(self, rho)
        ks = np.array(self.kraus)
        return np.einsum("jab,iab->ij", ks.conj(), ks @ rho.matrix)


def _check_dim(channel, rho: DensityMatrix) -> None:
    if not isinstance(rho, DensityMatrix):
        raise ContractError("channels act on DensityMatrix values")
    if rho.dim != channel.dim:
        raise ContractError(f"channel acts on dimension {channel.dim}, state has {rho.dim}")


def _retrace(m: np.ndarray) -> np.ndarray:
    return m / np.trace(m).real


def apply(channel, rho: DensityMatrix) -> DensityMatrix:
    return channel.apply(rho)


def compose(first, second) -> KrausChannel:
    """``second ∘ first`` as a Kraus channel."""
    if first.dims != second.dims:
        raise ContractError("cannot compose channels on different cuts")
    return KrausChannel(tuple(b @ a for a in _kraus_of(first) for b in _kraus_of(second)), first.dims)


def _kraus_of(channel) -> list[np.ndarray]:
    return list(channel.kraus()) if isinstance(channel, MixedUnitaryChannel) else list(channel.kraus)


# -- noise measures -------------------------------------------------------------


def entropy_exchange(channel, rho: DensityMatrix) -> float:
    """Entropy the environment acquires, from the Kraus Gram matrix."""
    w = channel.gram(rho)
    return von_neumann_entropy(0.5 * (w + w.conj().T))


def entropy_exchange_purified(channel, rho: DensityMatrix) -> float:
    """Entropy exchange from an explicit purification ``(id_Z ⊗ T)|ψ⟩⟨ψ|``.

    Builds the ``d_Z d × d_Z d`` output; meant as a cross-check at small size.
    """
    _check_dim(channel, rho)
    psi = purify(rho)
    dz = psi.dims[0]
    v = psi.vector.reshape(dz, rho.dim)
    out = np.zeros((dz * rho.dim, dz * rho.dim), dtype=complex)
    for k in _kraus_of(channel):
        phi = (v @ k.T).reshape(-1)
        out += np.outer(phi, phi.conj())
    return von_neumann_entropy(out)


@dataclass(frozen=True)
class NoiseCost:
    """``(log N, H(p), S_e)`` in bits."""

    log_n: float
    shannon: float
    entropy_exchange: float

    def __post_init__(self):
        if not (self.log_n >= self.shannon - 1e-9 >= self.entropy_exchange - 2e-9):
            raise ConsistencyError(
                f"noise-cost chain violated: log N={self.log_n}, H(p)={self.shannon}, S_e={self.entropy_exchange}"
            )

    def __add__(self, other: "NoiseCost") -> "NoiseCost":
        return NoiseCost(self.log_n + other.log_n, self.shannon + other.shannon,
                         self.entropy_exchange + other.entropy_exchange)

    def as_dict(self) -> dict:
        return {"log_n": self.log_n, "shannon": self.shannon, "entropy_exchange": self.entropy_exchange}


def noise_costs(channel: MixedUnitaryChannel, rho: DensityMatrix) -> NoiseCost:
    if not isinstance(channel, MixedUnitaryChannel):
        raise PreconditionError("log N is only defined for mixed-unitary ensembles")
    return NoiseCost(math.log2(channel.size), shannon_entropy(channel.probs), entropy_exchange(channel, rho))


def decorrelation_lower_bound(mutual_info: float, n: int, eps: float, log_d: float) -> float:
    """Least entropy exchange of any local randomizing map achieving ``eps`` on n copies.

    ``n (I - 3 eps log d) - eta(3 eps)``.
    """
    return n * (mutual_info - 3 * eps * log_d) - eta(3 * eps)


# -- decorrelation and separability -----------------------------------------------


def product_of_marginals(rho: DensityMatrix, dims) -> np.ndarray:
    da, db = dims
    ra = la.partial_trace(rho.matrix, (da, db), [0])
    rb = la.partial_trace(rho.matrix, (da, db), [1])
    return np.kron(ra, rb)


def epsilon_decorrelates(channel, rho: DensityMatrix, reference=None):
    """Trace distance of ``T(ρ)`` to a product state.

    Without ``reference`` the product of the output's own marginals is used.

    Returns:
        ``(achieved_eps, product_used)``.
    """
    out = channel.apply(rho)
    if reference is None:
        ref = DensityMatrix(product_of_marginals(out, channel.dims), rho.dims)
    elif isinstance(reference, DensityMatrix):
        ref = reference
    else:
        ref = DensityMatrix(la.as_matrix(reference), rho.dims)
    if ref.dim != out.dim:
        raise ContractError("reference has the wrong dimension")
    return la.trace_norm(out.matrix - ref.matrix), ref


def partial_transpose(m, dims, side: int = 1) -> np.ndarray:
    da, db = dims
    t = la.as_matrix(m).reshape(da, db, da, db)
    t = t.transpose(0, 3, 2, 1) if side == 1 else t.transpose(2, 1, 0, 3)
    return t.reshape(da * db, da * db)


@dataclass(frozen=True)
class SeparabilityResult:
    """PPT test outcome; ``certified`` is True only where PPT implies separable."""

    is_ppt: bool
    ppt_min_eig: float
    certified: bool

    @property
    def label(self) -> str:
        if not self.is_ppt:
            return "entangled"
        return "separable" if self.certified else "ppt-necessary-only"

    @property
    def separable(self) -> bool:
        return self.is_ppt and self.certified


def ppt_test(rho, dims, tol: float = 1e-9) -> SeparabilityResult:
    m = rho.matrix if isinstance(rho, DensityMatrix) else la.as_matrix(rho)
    dims = tuple(int(x) for x in dims)
    lo = la.min_eigenvalue(partial_transpose(m, dims))
    return SeparabilityResult(lo >= -tol, lo, dims in CERTIFYING_DIMS)


def epsilon_disentangles(channel, rho: DensityMatrix) -> SeparabilityResult:
    """Partial transpose over B of the channel output."""
    return ppt_test(channel.apply(rho), channel.dims)


def identity_channel(dims) -> MixedUnitaryChannel:
    da, db = dims
    return MixedUnitaryChannel.from_local([1.0], [(None, None)], (da, db), Locality.COLUR)


def z_twirl(dims=(2, 2)) -> MixedUnitaryChannel:
    """Alice applies ``1`` or ``σ_z`` with equal probability."""
    return MixedUnitaryChannel.a_lur([0.5, 0.5], [np.eye(2), la.SIGMA_Z], dims)


def x_twirl(dims=(2, 2)) -> MixedUnitaryChannel:
    """Alice applies ``1`` or ``σ_x`` with equal probability."""
    return MixedUnitaryChannel.a_lur([0.5, 0.5], [np.eye(2), la.SIGMA_X], dims)


def pauli_twirl(dims=(2, 2)) -> MixedUnitaryChannel:
    """Uniform mixture of the four Paulis on A: completely depolarizes a qubit."""
    return MixedUnitaryChannel.a_lur([0.25] * 4, list(la.PAULIS), dims)


def dephasing_unitaries(basis) -> list[np.ndarray]:
    """Phase family ``U_k = Σ_j e^{2πijk/D} |b_j⟩⟨b_j|`` for k = 1..D, identity off-span."""
    basis = np.asarray(basis, dtype=complex)
    d, rank = basis.shape
    off = np.eye(d) - basis @ basis.conj().T
    us = []
    for k in range(1, rank + 1):
        phases = np.exp(2j * np.pi * np.arange(rank) * k / rank)
        us.append((basis * phases) @ basis.conj().T + off)
    return us


# -- LOPC monotonicity ------------------------------------------------------------


def local_instrument_check(rho: DensityMatrix, instrument, dims=None):
    """Mutual information before and averaged after a local instrument on A.

    ``instrument`` is a list of completely positive maps, each a list of
    Kraus operators on A, whose sum is trace preserving.

    Returns:
        ``(lhs, rhs)`` with ``lhs = I(A:B)_ρ`` and ``rhs = Σ p_i I(A:B)_{ρ_i}``.
    """
    if dims is None:
        if len(rho.dims) != 2:
            raise ContractError("pass dims=(dA, dB) for states with more than two factors")
        dims = rho.dims
    da, db = dims
    if da * db != rho.dim:
        raise ContractError("dims do not match the state")
    total = np.zeros((da, da), dtype=complex)
    for cp_map in instrument:
        for k in cp_map:
            k = la.as_matrix(k)
            if k.shape != (da, da):
                raise ContractError("instrument Kraus operators must act on A")
            total += k.conj().T @ k
    if np.max(np.abs(total - np.eye(da))) > 1e-9:
        raise ContractError("instrument is not trace preserving")
    flat = rho if rho.dims == (da, db) else DensityMatrix(rho.matrix, (da, db))
    lhs = mutual_information(flat)
    rhs = 0.0
    eye_b = np.eye(db)
    for cp_map in instrument:
        out = sum(np.kron(k, eye_b) @ flat.matrix @ np.kron(k, eye_b).conj().T for k in cp_map)
        p = np.trace(out).real
        if p < 1e-14:
            continue
        rhs += p * mutual_information(DensityMatrix(out / p, (da, db)))
    if lhs < rhs - 1e-9:
        raise ConsistencyError(f"local instrument increased mutual information: {lhs} < {rhs}")
    return lhs, rhs


def random_instrument(da: int, outcomes: int, kraus_per_outcome: int, rng: np.random.Generator):
    """Random instrument from a Haar isometry ``A → A ⊗ E`` split into outcome blocks."""
    from .typicality import haar_unitary

    m = outcomes * kraus_per_outcome
    v = haar_unitary(da * m, rng)[:, :da]
    ks = [v[j * da:(j + 1) * da, :] for j in range(m)]
    return [ks[i * kraus_per_outcome:(i + 1) * kraus_per_outcome] for i in range(outcomes)]


# -- entanglement erasure ------------------------------------------------------------


def ab_copies(rho: DensityMatrix, n: int) -> DensityMatrix:
    """``ρ^{⊗n}`` of a bipartite ``ρ`` reordered as ``A_1..A_n B_1..B_n``."""
    if len(rho.dims) != 2:
        raise ContractError("expected a bipartite state")
    la.check_cap(rho.dim**n)
    big = rho.power(n)
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return big.permute(order)


def entanglement_erasure_bounds(channel, rho: DensityMatrix, k: int = 1):
    """Per-copy entropic gap ``(S(σ) - k S(ρ)) / k`` of a disentangling map.

    ``σ = T(ρ^{⊗k})`` must be certified separable by the PPT test.  Also checks
    ``S_e(T, ρ^{⊗k}) ≥ S(σ) - k S(ρ)``.

    Returns:
        ``(lower_hint, upper_hint)``, both equal to the gap.
    """
    src = ab_copies(rho, k) if k > 1 else rho
    sigma = channel.apply(src)
    sep = ppt_test(sigma, channel.dims)
    if not sep.separable:
        raise PreconditionError(f"channel output is not certified separable ({sep.label})")
    s_sigma = von_neumann_entropy(sigma)
    s_rho = von_neumann_entropy(rho)
    s_e = entropy_exchange(channel, src)
    if s_e < s_sigma - k * s_rho - 1e-8:
        raise ConsistencyError(f"entropy exchange {s_e} below entropy gain {s_sigma - k * s_rho}")
    gap = (s_sigma - k * s_rho) / k
    return gap, gap
