"""Typical subspaces, gentle measurement, unitary ensembles and operator Chernoff trials."""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg as la
from .errors import ContractError, PreconditionError
from .states import DensityMatrix, rng_for, shannon_entropy

# -- typical subspaces --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TypicalProjector:
    """Projector onto the eps-typical subspace of ``ρ^{⊗n}``.

    ``isometry`` has the typical eigenstrings as columns; the dense
    ``projector = isometry @ isometry†`` is formed on first access.
    """

    isometry: np.ndarray
    n: int
    eps: float
    eigenvalues: np.ndarray
    basis: np.ndarray
    typical_indices: list
    degenerate: bool = False
    near_boundary: bool = False

    @functools.cached_property
    def projector(self) -> np.ndarray:
        return self.isometry @ self.isometry.conj().T

    @property
    def rank(self) -> int:
        return self.isometry.shape[1]


def _neg_log2(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(p > 1e-12, -np.log2(np.where(p > 1e-12, p, 1.0)), np.inf)


def _spectrum_and_basis(rho):
    m = rho.matrix if isinstance(rho, DensityMatrix) else la.as_matrix(rho)
    evals, evecs = la.hermitian_eigensystem(m)
    evals = np.where(evals < 1e-12, 0.0, evals)
    return evals / evals.sum(), evecs


def typical_projector(rho, n: int, eps: float) -> TypicalProjector:
    """Span of eigenstrings ``|I⟩`` with ``|-log2 p_I - n S(ρ)| < eps n`` (strict).

    Built in the deterministic eigenbasis of ``rho``.
    """
    if n < 1 or eps <= 0:
        raise ContractError("typicality needs n >= 1 and eps > 0")
    lam, vecs = _spectrum_and_basis(rho)
    d = lam.size
    la.check_cap(d**n)
    s = shannon_entropy(lam)
    surprisal = _neg_log2(lam)
    idx = np.array(list(itertools.product(range(d), repeat=n)), dtype=int).reshape(-1, n)
    with np.errstate(invalid="ignore"):
        dev = np.abs(surprisal[idx].sum(axis=1) - n * s)
    keep = dev < eps * n
    near = bool(np.any(np.abs(dev[np.isfinite(dev)] - eps * n) < 1e-9))
    chosen = idx[keep]
    cols = np.ones((1, chosen.shape[0]), dtype=complex)
    for k in range(n):
        cols = np.einsum("ai,bi->abi", cols, vecs[:, chosen[:, k]]).reshape(d ** (k + 1), chosen.shape[0])
    gaps = np.abs(lam[:, None] - lam[None, :])[np.triu_indices(d, 1)]
    return TypicalProjector(
        isometry=cols,
        n=n,
        eps=eps,
        eigenvalues=lam,
        basis=vecs,
        typical_indices=[tuple(int(i) for i in row) for row in chosen],
        degenerate=bool(np.any(gaps < 1e-10)),
        near_boundary=near,
    )


@dataclass(frozen=True)
class TypicalityReport:
    mass: float
    dim: int
    sandwich_ok: bool
    dim_upper_ok: bool
    dim_lower_ok: bool | None
    converged: bool
    near_boundary: bool = False
    notes: list = field(default_factory=list)


def _dim_checks(dim: int, mass: float, n: int, s: float, eps: float):
    upper = math.log2(dim) <= n * (s + eps) + 1e-9 if dim > 0 else True
    converged = mass >= 1 - eps
    lower = None
    if converged:
        lower = dim >= (1 - eps) * 2 ** (n * (s - eps)) - 1e-9
    return upper, lower, converged


def typicality_report(tp: TypicalProjector, rho, n: int, eps: float) -> TypicalityReport:
    """Probability mass, dimension and the operator sandwich of a typical projector.

    The sandwich is ``2^{-n(S+eps)} Π ≤ Π ρ^{⊗n} Π ≤ 2^{-n(S-eps)} Π``.
    """
    if tp.n != n or tp.eps != eps:
        raise ContractError("projector was built for different (n, eps)")
    m = rho.matrix if isinstance(rho, DensityMatrix) else la.as_matrix(rho)
    d = m.shape[0]
    v = tp.isometry
    dim = v.shape[1]
    # apply ρ to one tensor factor at a time instead of forming ρ^{⊗n}
    t = v.reshape((d,) * n + (dim,))
    for k in range(n):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [k])), 0, k)
    compressed = v.conj().T @ t.reshape(d**n, dim)
    mass = float(np.trace(compressed).real)
    s = shannon_entropy(tp.eigenvalues)
    # Π ρ^{⊗n} Π and Π share the support spanned by the isometry, so the
    # sandwich reduces to the spectrum of the compressed operator
    eye = np.eye(dim)
    sandwich_ok = dim == 0 or la.operator_in_interval(
        compressed, 2 ** (-n * (s + eps)) * eye, 2 ** (-n * (s - eps)) * eye, 1e-9)
    upper, lower, converged = _dim_checks(dim, mass, n, s, eps)
    notes = [] if converged else ["mass below 1 - eps: n is below the convergence regime"]
    return TypicalityReport(mass, dim, sandwich_ok, upper, lower, converged, tp.near_boundary, notes)


def _compositions(n: int, d: int):
    if d == 1:
        yield (n,)
        return
    for k in range(n + 1):
        for rest in _compositions(n - k, d - 1):
            yield (k,) + rest


def typicality_report_counting(probs, n: int, eps: float) -> TypicalityReport:
    """Counting version of :func:`typicality_report` for a diagonal state.

    Sums over type classes instead of eigenstrings, so n in the hundreds is
    cheap.  Each type's eigenvalue is checked against the sandwich bounds in
    log space.
    """
    lam = np.asarray(probs, dtype=float)
    if np.any(lam < -1e-12) or abs(lam.sum() - 1) > 1e-10:
        raise ContractError("probabilities must be nonnegative and sum to 1")
    lam = np.where(lam < 1e-12, 0.0, lam)
    s = shannon_entropy(lam)
    surprisal = _neg_log2(lam)
    lo_log, hi_log = -n * (s + eps), -n * (s - eps)
    log_mass_terms = []
    dim = 0
    sandwich_ok = True
    near = False
    for counts in _compositions(n, lam.size):
        counts = np.array(counts)
        used = counts > 0
        neg_log_p = float(np.sum(counts[used] * surprisal[used]))
        if not np.isfinite(neg_log_p):
            continue
        dev = abs(neg_log_p - n * s)
        near = near or abs(dev - eps * n) < 1e-9
        if dev >= eps * n:
            continue
        log_mult = math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in counts)
        dim += math.factorial(n) // math.prod(math.factorial(int(c)) for c in counts)
        log_mass_terms.append(log_mult / math.log(2) - neg_log_p)
        if not lo_log - 1e-9 <= -neg_log_p <= hi_log + 1e-9:
            sandwich_ok = False
    if log_mass_terms:
        top = max(log_mass_terms)
        mass = float(2**top * sum(2 ** (t - top) for t in log_mass_terms))
    else:
        mass = 0.0
    upper, lower, converged = _dim_checks(dim, mass, n, s, eps)
    notes = [] if converged else ["mass below 1 - eps: n is below the convergence regime"]
    return TypicalityReport(mass, dim, sandwich_ok, upper, lower, converged, near, notes)


# -- gentle measurement ----------------------------------------------------------------


@dataclass(frozen=True)
class GentleResult:
    delta: float
    lhs: float
    bound: float
    ok: bool


def gentle_measurement_check(rho, x) -> GentleResult:
    """Compare ``‖ρ - √X ρ √X‖₁`` with ``√(8δ)``, ``δ = tr ρ - tr ρX``.

    ``rho`` may be subnormalized.

    Raises:
        PreconditionError: if ``X`` is not in the interval ``[0; 1]``.
    """
    r = rho.matrix if isinstance(rho, DensityMatrix) else la.as_matrix(rho)
    x = la.as_matrix(x)
    d = r.shape[0]
    if not la.operator_in_interval(x, np.zeros((d, d)), np.eye(d), 1e-9):
        raise PreconditionError("X must satisfy 0 <= X <= 1")
    root = la.sqrtm_psd(x)
    delta = float(np.trace(r).real - np.trace(r @ x).real)
    lhs = la.trace_norm(r - root @ r @ root)
    bound = math.sqrt(8 * max(delta, 0.0))
    return GentleResult(delta, lhs, bound, lhs <= bound + 1e-9)


# -- unitary ensembles --------------------------------------------------------------------


def shift_operator(d: int) -> np.ndarray:
    """``X|j⟩ = |j+1 mod d⟩``."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock_operator(d: int) -> np.ndarray:
    """``Z|j⟩ = e^{2πij/d}|j⟩``."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def weyl_operator(a: int, b: int, d: int) -> np.ndarray:
    """``X^a Z^b`` built directly: column j is ``e^{2πibj/d}|j+a⟩``."""
    u = np.zeros((d, d), dtype=complex)
    j = np.arange(d)
    u[(j + a) % d, j] = np.exp(2j * np.pi * b * j / d)
    return u


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a Ginibre matrix, columns rephased by ``diag(R)``."""
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


@dataclass(frozen=True, eq=False)
class UnitaryEnsembleSpec:
    """Which unitaries to draw, on which subspace.

    ``support`` is an isometry (``d × D``) whose columns span the subspace;
    generated unitaries act as the identity on its orthocomplement.
    """

    kind: str
    dimension: int
    support: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("discrete_weyl", "haar", "phase_family"):
            raise ContractError(f"unknown ensemble kind {self.kind!r}")
        if self.dimension < 1:
            raise ContractError("ensemble dimension must be >= 1")
        if self.support is not None:
            s = np.asarray(self.support, dtype=complex)
            if s.ndim != 2 or s.shape[1] != self.dimension:
                raise ContractError("support isometry must have `dimension` columns")
            if np.max(np.abs(s.conj().T @ s - np.eye(self.dimension))) > 1e-9:
                raise ContractError("support columns must be orthonormal")


def embed(u: np.ndarray, support: np.ndarray | None) -> np.ndarray:
    if support is None:
        return u
    off = np.eye(support.shape[0]) - support @ support.conj().T
    return support @ u @ support.conj().T + off


def generate_ensemble(spec: UnitaryEnsembleSpec, count: int | None = None) -> list[np.ndarray]:
    """Draw unitaries per ``spec``.

    ``discrete_weyl`` returns all ``D²`` operators in ``(a, b)`` order when
    ``count`` is ``None`` or ``D²``, else ``count`` draws with replacement.
    ``phase_family`` always returns its ``D`` members ``U_k``, ``k = 1..D``.
    """
    d = spec.dimension
    rng = rng_for(spec.seed)
    if spec.kind == "discrete_weyl":
        if count is None or count == d * d:
            pairs = [(a, b) for a in range(d) for b in range(d)]
        else:
            flat = rng.integers(0, d * d, size=count)
            pairs = [(int(k) // d, int(k) % d) for k in flat]
        us = [weyl_operator(a, b, d) for a, b in pairs]
    elif spec.kind == "haar":
        if count is None:
            raise ContractError("haar ensembles need a count")
        us = [haar_unitary(d, rng) for _ in range(count)]
    else:
        if count not in (None, d):
            raise ContractError("the phase family has exactly D members")
        us = [np.diag(np.exp(2j * np.pi * np.arange(d) * k / d)) for k in range(1, d + 1)]
    return [embed(u, spec.support) for u in us]


def twirl(unitaries, phi, probs=None) -> np.ndarray:
    phi = la.as_matrix(phi)
    if probs is None:
        probs = np.full(len(unitaries), 1 / len(unitaries))
    return sum(p * (u @ phi @ u.conj().T) for p, u in zip(probs, unitaries))


# -- operator Chernoff bench ----------------------------------------------------------------

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class ChernoffResult:
    violation_rate: float
    bound: float
    stderr: float
    ok: bool
    mu: float
    dim: int
    violations: int
    trials: int


def _support_min_eig(m: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    pos = evals[evals > 1e-12]
    if pos.size == 0:
        raise ContractError("mean operator is zero")
    return float(pos.min())


def chernoff_trial(sampler: Sampler, n_samples: int, eps: float, trials: int, seed: int,
                   mean=None, mu: float | None = None, pilot: int = 1000) -> ChernoffResult:
    """Empirical rate of ``X̄ ∉ [(1-eps)M, (1+eps)M]`` against ``2 d exp(-N mu eps²/2)``.

    ``sampler(rng, size)`` returns an array of ``size`` operators in ``[0, 1]``.
    Without ``mean`` it is estimated from ``pilot`` samples; ``mu`` defaults
    to the least nonzero eigenvalue of the mean.  ``ok`` allows three binomial
    standard errors of slack.
    """
    if not 0 <= eps <= 1:
        raise ContractError("eps must lie in [0, 1]")
    if mean is None:
        mean = np.mean(sampler(rng_for(seed, 2**31 - 1), pilot), axis=0)
    mean = la.as_matrix(mean)
    d = mean.shape[0]
    if mu is None:
        mu = _support_min_eig(mean)
    zero, one = np.zeros((d, d)), np.eye(d)
    lo, hi = (1 - eps) * mean, (1 + eps) * mean
    violations = 0
    for t in range(trials):
        xs = sampler(rng_for(seed, t), n_samples)
        if not la.operator_in_interval(xs[0], zero, one, 1e-9):
            raise PreconditionError("sampler produced an operator outside [0, 1]")
        if not la.operator_in_interval(xs.mean(axis=0), lo, hi, 1e-9):
            violations += 1
    rate = violations / trials
    bound = 2 * d * math.exp(-n_samples * mu * eps**2 / 2)
    stderr = math.sqrt(rate * (1 - rate) / trials)
    return ChernoffResult(rate, bound, stderr, rate <= bound + 3 * stderr, mu, d, violations, trials)


def weyl_sampler(rho_tilde, dims):
    """``X = D (U ⊗ 1) ρ̃ (U ⊗ 1)†`` with ``U`` uniform over the Weyl group on A.

    ``D = 1/λ_max(ρ̃)`` keeps ``X ≤ 1``.

    Returns:
        ``(sampler, mean)`` with the exact mean ``D (1/dA) ⊗ tr_A ρ̃``.
    """
    r = rho_tilde.matrix if isinstance(rho_tilde, DensityMatrix) else la.as_matrix(rho_tilde)
    da, db = dims
    scale = 1.0 / np.linalg.eigvalsh(r)[-1]
    weyls = np.array([weyl_operator(a, b, da) for a in range(da) for b in range(da)])
    t = r.reshape(da, db, da, db)
    mean = scale * np.kron(np.eye(da) / da, la.partial_trace(r, (da, db), [1]))

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        us = weyls[rng.integers(0, da * da, size=size)]
        out = np.einsum("nxa,abcd,nyc->nxbyd", us, t, us.conj(), optimize=True)
        return scale * out.reshape(size, da * db, da * db)

    return sampler, mean


def bernoulli_sampler(p: float):
    """Scalar case: ``X ∈ {0, 1}`` with ``P(X = 1) = p``."""

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        return (rng.random(size) < p).astype(complex).reshape(size, 1, 1)

    return sampler, np.array([[p]], dtype=complex)
