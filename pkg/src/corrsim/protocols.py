"""End-to-end correlation-erasure protocols and verification scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from .channels import (
    KrausChannel,
    Locality,
    MixedUnitaryChannel,
    NoiseCost,
    SeparabilityResult,
    ab_copies,
    dephasing_unitaries,
    epsilon_decorrelates,
    noise_costs,
    ppt_test,
    x_twirl,
    z_twirl,
)
from .errors import ConsistencyError, PreconditionError, ProtocolError
from .states import (
    DensityMatrix,
    PureState,
    bell,
    conditional_mutual_information,
    entanglement_entropy,
    ghz3,
    mutual_information,
    random_state,
    rng_for,
    schmidt,
    subsystem_entropy,
    von_neumann_entropy,
)
from .typicality import (
    UnitaryEnsembleSpec,
    generate_ensemble,
    haar_unitary,
    typical_projector,
)

# -- reports -------------------------------------------------------------------------


def channel_summary(channel) -> dict:
    if isinstance(channel, MixedUnitaryChannel):
        return {"type": "mixed_unitary", "locality": channel.locality.value, "size": channel.size,
                "dims": list(channel.dims), "n_label": channel.n_label}
    return {"type": "kraus", "size": len(channel.kraus), "dims": list(channel.dims), "unital": channel.unital}


def state_snapshot(rho: DensityMatrix, dims) -> dict:
    flat = DensityMatrix(rho.matrix, tuple(dims))
    return {
        "entropy": von_neumann_entropy(flat),
        "entropy_a": subsystem_entropy(flat, [0]),
        "entropy_b": subsystem_entropy(flat, [1]),
        "mutual_information": mutual_information(flat),
    }


@dataclass
class ErasureStep:
    name: str
    channel: dict
    cost: NoiseCost
    achieved_eps: float
    separability: SeparabilityResult
    before: dict
    after: dict

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "channel": self.channel,
            "cost": self.cost.as_dict(),
            "achieved_eps": self.achieved_eps,
            "separability": {"is_ppt": self.separability.is_ppt,
                             "ppt_min_eig": self.separability.ppt_min_eig,
                             "label": self.separability.label},
            "before": self.before,
            "after": self.after,
        }


@dataclass
class ErasureReport:
    """Step-by-step record of an erasure pipeline; ``totals`` sums the step costs."""

    steps: list = field(default_factory=list)
    final_state: DensityMatrix | None = None

    @property
    def totals(self) -> NoiseCost:
        total = NoiseCost(0.0, 0.0, 0.0)
        for step in self.steps:
            total = total + step.cost
        return total

    def as_dict(self) -> dict:
        return {"steps": [s.as_dict() for s in self.steps], "totals": self.totals.as_dict()}


def run_pipeline(rho: DensityMatrix, stages: Sequence[tuple[str, MixedUnitaryChannel]]) -> ErasureReport:
    """Apply mixed-unitary stages in order, recording cost, decorrelation and PPT status."""
    report = ErasureReport()
    state = rho
    for name, channel in stages:
        cost = noise_costs(channel, state)
        eps, _ = epsilon_decorrelates(channel, state)
        out = channel.apply(state)
        report.steps.append(ErasureStep(
            name, channel_summary(channel), cost, eps, ppt_test(out, channel.dims),
            state_snapshot(state, channel.dims), state_snapshot(out, channel.dims),
        ))
        state = out
    report.final_state = state
    return report


def bell_erasure_demo(order: str = "ZX") -> ErasureReport:
    """Erase ``|Φ+⟩`` with a phase-flip twirl then a bit-flip twirl on Alice's side.

    ``order`` may be ``"ZX"``, ``"XZ"``, ``"Z"`` or ``"X"``.
    """
    available = {"Z": ("phase-flip twirl", z_twirl()), "X": ("bit-flip twirl", x_twirl())}
    if not order or any(c not in available for c in order):
        raise PreconditionError(f"order must be built from 'Z' and 'X', got {order!r}")
    return run_pipeline(bell().density(), [available[c] for c in order])


# -- decorrelation from typical subspaces -------------------------------------------------


@dataclass
class DecorrelationResult:
    channel: MixedUnitaryChannel
    achieved_eps: float
    rate: float
    diagnostics: dict


def _copies_projector(tp, n: int, dims) -> np.ndarray:
    """Typical projector of ``ρ^{⊗n}`` reordered from ``(AB)^n`` to ``A^n B^n``."""
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return la.permute_subsystems(tp.projector, tuple(dims) * n, order)


def decorrelate_typical(rho: DensityMatrix, n: int, eps: float, n_unitaries: int, seed: int = 0,
                      eps_typical: float | None = None, eps_cut: float | None = None) -> DecorrelationResult:
    """Uniform A-side randomization that decorrelates ``ρ^{⊗n}``.

    Cuts ``ρ^{⊗n}`` down to the joint and local typical subspaces, removes the
    part of B where the reduced state falls below ``eps/D_B``, then samples
    ``n_unitaries`` discrete Weyl operators on Alice's typical subspace.  The
    single ``eps`` is used for every role unless ``eps_typical`` or
    ``eps_cut`` override it.

    Returns:
        The A-LUR channel on ``A^n B^n``, its trace distance to the product of
        its output marginals, and ``log2(N)/n``.
    """
    if len(rho.dims) != 2:
        raise PreconditionError("decorrelation needs a bipartite state")
    if n_unitaries < 1:
        raise PreconditionError("need at least one unitary")
    eps_t = eps if eps_typical is None else eps_typical
    eps_c = eps if eps_cut is None else eps_cut
    da, db = rho.dims
    la.check_cap((da * db) ** n)
    big = ab_copies(rho, n)
    gd = (da**n, db**n)

    tp = typical_projector(rho, n, eps_t)
    tp_a = typical_projector(rho.marginal([0]), n, eps_t)
    tp_b = typical_projector(rho.marginal([1]), n, eps_t)
    if tp.rank == 0 or tp_a.rank == 0 or tp_b.rank == 0:
        raise ProtocolError(
            f"empty typical subspace (ranks joint={tp.rank}, A={tp_a.rank}, B={tp_b.rank}); "
            "increase n or eps"
        )
    pi = _copies_projector(tp, n, rho.dims)
    pi_ab = np.kron(tp_a.projector, tp_b.projector)
    hat = pi_ab @ pi @ big.matrix @ pi @ pi_ab
    d_b = tp_b.rank
    omega_b = la.partial_trace(hat, gd, [1])
    lam, vecs = la.hermitian_eigensystem(omega_b)
    keep = vecs[:, lam >= eps_c / d_b]
    pi_b_cut = keep @ keep.conj().T
    cut = np.kron(np.eye(gd[0]), pi_b_cut)
    tilde = cut @ hat @ cut
    if np.trace(tilde).real < 1e-12:
        raise ProtocolError("cut-down state vanished; increase n or lower eps")

    spec = UnitaryEnsembleSpec("discrete_weyl", tp_a.rank, support=tp_a.isometry, seed=seed)
    us = generate_ensemble(spec, n_unitaries)
    channel = MixedUnitaryChannel.a_lur(np.full(n_unitaries, 1 / n_unitaries), us, gd, n_label=n)
    flat = DensityMatrix(big.matrix, gd)
    achieved, _ = epsilon_decorrelates(channel, flat)
    diagnostics = {
        "typical_rank": tp.rank,
        "typical_rank_a": tp_a.rank,
        "typical_rank_b": tp_b.rank,
        "cut_rank_b": int(keep.shape[1]),
        "trace_hat": float(np.trace(hat).real),
        "trace_tilde": float(np.trace(tilde).real),
        "distance_tilde": la.trace_norm(tilde - big.matrix),
    }
    return DecorrelationResult(channel, achieved, math.log2(n_unitaries) / n, diagnostics)


def decorrelation_sweep(rho: DensityMatrix, n: int, eps: float, sizes: Sequence[int], seeds: Sequence[int]) -> list[dict]:
    """One row per ``(seed, N)``: achieved eps and the three noise costs."""
    big = None
    rows = []
    for size in sizes:
        for seed in seeds:
            res = decorrelate_typical(rho, n, eps, size, seed)
            if big is None:
                big = DensityMatrix(ab_copies(rho, n).matrix, res.channel.dims)
            cost = noise_costs(res.channel, big)
            rows.append({"seed": seed, "param": size, "achieved_eps": res.achieved_eps, **cost.as_dict()})
    return rows


# -- pure states -----------------------------------------------------------------------


@dataclass
class DisentangleResult:
    channel: MixedUnitaryChannel
    output: DensityMatrix
    costs: NoiseCost
    separability: SeparabilityResult
    schmidt_rank: int


def _bipartite_pure(psi: PureState, cut) -> tuple[PureState, tuple[int, int]]:
    form = schmidt(psi, cut)
    da, db = form.dims
    return PureState(form.vector(), (da, db)), (da, db)


def disentangle_pure(psi: PureState, cut=None) -> DisentangleResult:
    """Phase-randomize Alice's Schmidt basis with the D equiprobable ``U_k``.

    D is the Schmidt rank; the output is ``Σ_j f_j |j⟩⟨j| ⊗ |j⟩⟨j|``.  The
    state is rewritten in its Schmidt form across ``cut`` first, so the
    returned channel acts on the grouped ``(dA, dB)`` space.
    """
    form = schmidt(psi, cut)
    flat = PureState(form.vector(), form.dims)
    rank = max(form.rank, 1)
    us = dephasing_unitaries(form.left_basis[:, :rank])
    channel = MixedUnitaryChannel.a_lur(np.full(rank, 1 / rank), us, form.dims)
    rho = flat.density()
    out = channel.apply(rho)
    return DisentangleResult(channel, out, noise_costs(channel, rho), ppt_test(out, form.dims), rank)


def schmidt_diagonal(psi: PureState, cut=None) -> np.ndarray:
    """``Σ_j λ_j |l_j⟩⟨l_j| ⊗ |r_j⟩⟨r_j|`` computed directly from the Schmidt form."""
    form = schmidt(psi, cut)
    out = np.zeros((form.dims[0] * form.dims[1],) * 2, dtype=complex)
    for j, lam in enumerate(form.coefficients):
        out += lam * np.kron(la.proj(form.left_basis[:, j]), la.proj(form.right_basis[:, j]))
    return out


def classical_correlation_dephasing(psi: PureState, cut=None) -> tuple[DensityMatrix, float]:
    """Schmidt-basis dephasing and the mutual information it leaves (equals E(ψ))."""
    res = disentangle_pure(psi, cut)
    i_cl = mutual_information(res.output)
    e = entanglement_entropy(psi, cut)
    if abs(i_cl - e) > 1e-9:
        raise ConsistencyError(f"dephased mutual information {i_cl} differs from E = {e}")
    return res.output, i_cl


# -- two-step versus one-shot ----------------------------------------------------------------


@dataclass
class TwoStepComparison:
    two_step: float
    one_shot: float
    gap: float
    locally_unital: bool


def two_step_cost_comparison(rho: DensityMatrix, channel) -> TwoStepComparison:
    """Cost of disentangling then decorrelating versus decorrelating directly.

    ``two_step = S(σ_A) + S(σ_B) - S(ρ)`` with ``σ = T(ρ)``; ``one_shot = I(A:B)_ρ``.
    """
    sigma = channel.apply(rho)
    sep = ppt_test(sigma, channel.dims)
    if not sep.separable:
        raise PreconditionError(f"disentangled state is not certified separable ({sep.label})")
    flat = DensityMatrix(rho.matrix, channel.dims)
    sig = DensityMatrix(sigma.matrix, channel.dims)
    s_rho = von_neumann_entropy(flat)
    two = subsystem_entropy(sig, [0]) + subsystem_entropy(sig, [1]) - s_rho
    one = subsystem_entropy(flat, [0]) + subsystem_entropy(flat, [1]) - s_rho
    gap = two - one
    unital = bool(channel.unital)
    if unital and gap < -1e-9:
        raise ConsistencyError(f"unital disentangling map lowered local entropies (gap {gap})")
    return TwoStepComparison(two, one, gap, unital)


def partial_dephasing_kraus(basis: np.ndarray, strength: float) -> list[np.ndarray]:
    """``τ ↦ (1-q) τ + q Σ_j P_j τ P_j`` in the orthonormal ``basis`` (columns)."""
    d = basis.shape[0]
    ks = [math.sqrt(1 - strength) * np.eye(d, dtype=complex)] if strength < 1 else []
    ks += [math.sqrt(strength) * la.proj(basis[:, j]) for j in range(basis.shape[1])]
    return ks


def find_disentangling_twirl(rho: DensityMatrix, rng: np.random.Generator, steps: int = 20) -> KrausChannel:
    """Weakest random-basis local dephasing (same strength on both sides) whose output is PPT.

    Full dephasing on both sides always gives a classical, separable state, so
    the search terminates.  Every candidate is unital.
    """
    da, db = rho.dims
    ba, bb = haar_unitary(da, rng), haar_unitary(db, rng)
    for q in np.linspace(0.0, 1.0, steps + 1):
        ch = KrausChannel.local(partial_dephasing_kraus(ba, q), partial_dephasing_kraus(bb, q), (da, db))
        if ppt_test(ch.apply(rho), (da, db)).separable:
            return ch
    raise ProtocolError("no disentangling dephasing found")  # unreachable for certifying dims


# -- multipartite -------------------------------------------------------------------------------


def multipartite_erasure(rho, parties: Sequence[Sequence[int]] | None = None) -> tuple[float, list[float]]:
    """Total correlation ``Σ S(A_i) - S(A_1..A_p)`` and its one-by-one decomposition.

    ``sequential[k] = I(A_k : A_{k+1} .. A_p)``; the entries telescope to the total.
    """
    if isinstance(rho, PureState):
        rho = rho.density()
    if parties is None:
        parties = [[i] for i in range(len(rho.dims))]
    parties = [list(p) for p in parties]
    if len(parties) < 2:
        raise PreconditionError("need at least two parties")
    everyone = [i for p in parties for i in p]
    c_er = sum(subsystem_entropy(rho, p) for p in parties) - subsystem_entropy(rho, everyone)
    sequential = []
    for k in range(len(parties) - 1):
        rest = [i for p in parties[k + 1:] for i in p]
        sequential.append(mutual_information(rho, (parties[k], rest)))
    if abs(sum(sequential) - c_er) > 1e-9:
        raise ConsistencyError(f"sequential costs {sum(sequential)} do not sum to {c_er}")
    return c_er, sequential


# -- scans ------------------------------------------------------------------------------------------


@dataclass
class SSAScan:
    min_value: float
    violations: int
    count: int
    values: np.ndarray


def ssa_scan(count: int, dims=(2, 2, 2), seed: int = 42, include_ghz: bool = False,
             kind: str = "induced_mixed") -> SSAScan:
    """``I(A:C|B)`` over ``count`` seeded random tripartite states."""
    if len(dims) != 3:
        raise PreconditionError("strong subadditivity scan needs three subsystems")
    la.check_cap(int(np.prod(dims)))
    parts = ([0], [1], [2])
    values = []
    for i in range(count):
        if kind == "product":
            rho = random_state("induced_mixed", dims[:1], seed, 3 * i)
            for j, d in enumerate(dims[1:], start=1):
                rho = rho.tensor(random_state("induced_mixed", (d,), seed, 3 * i + j))
        else:
            rho = random_state(kind, dims, seed, i)
            if isinstance(rho, PureState):
                rho = rho.density()
        values.append(conditional_mutual_information(rho, parts))
    if include_ghz and tuple(dims) == (2, 2, 2):
        values.append(conditional_mutual_information(ghz3(), parts))
    values = np.array(values)
    return SSAScan(float(values.min()), int(np.sum(values < -1e-9)), len(values), values)


@dataclass
class ConjectureScan:
    max_excess: float
    witnesses: list
    trials: int
    separable_trials: int
    family: str
    seed: int


CONJECTURE_FAMILIES = ("schmidt_dephasing", "trace_replace", "random_local")


def _local_channel(family: str, psi: PureState, rng: np.random.Generator):
    da, db = psi.dims
    if family == "schmidt_dephasing":
        form = schmidt(psi)
        ka = [la.proj(form.left_basis[:, j]) for j in range(form.left_basis.shape[1])]
        if form.left_basis.shape[1] < da:
            ka.append(np.eye(da) - sum(ka))
        return KrausChannel.local(ka, [np.eye(db)], (da, db)), {}
    if family == "trace_replace":
        # τ ↦ tr(τ) |0⟩⟨0| on each side
        ka = [np.outer(la.ket(0, da), la.ket(j, da)) for j in range(da)]
        kb = [np.outer(la.ket(0, db), la.ket(j, db)) for j in range(db)]
        return KrausChannel.local(ka, kb, (da, db)), {}
    qa, qb = rng.random(2)
    ba, bb = haar_unitary(da, rng), haar_unitary(db, rng)
    ua, ub = haar_unitary(da, rng), haar_unitary(db, rng)
    ka = [ua @ k for k in partial_dephasing_kraus(ba, qa)]
    kb = [ub @ k for k in partial_dephasing_kraus(bb, qb)]
    params = {"strength_a": float(qa), "strength_b": float(qb)}
    return KrausChannel.local(ka, kb, (da, db)), params


def conjecture_scan(count: int, dims=(2, 2), seed: int = 0, family: str = "random_local",
                    threshold: float = 1e-7) -> ConjectureScan:
    """Search for separable ``σ = (T_A ⊗ T_B)(ψ)`` with ``I(A:B)_σ > E(ψ)``.

    Trials whose output is not certified separable are skipped.  Every trial
    with excess above ``threshold`` is kept as a witness, including the
    state vector and the Kraus operators.
    """
    if family not in CONJECTURE_FAMILIES:
        raise PreconditionError(f"unknown channel family {family!r}; choose from {CONJECTURE_FAMILIES}")
    dims = tuple(int(d) for d in dims)
    if dims not in {(2, 2), (2, 3), (3, 2)}:
        raise PreconditionError("conjecture scan is restricted to dimensions where PPT certifies separability")
    max_excess = -math.inf
    witnesses = []
    separable = 0
    for t in range(count):
        psi = random_state("haar_pure", dims, seed, t)
        channel, params = _local_channel(family, psi, rng_for(seed, count + t))
        sigma = channel.apply(psi.density())
        if not ppt_test(sigma, dims).separable:
            continue
        separable += 1
        excess = mutual_information(sigma) - entanglement_entropy(psi)
        max_excess = max(max_excess, excess)
        if excess > threshold:
            witnesses.append({
                "trial": t,
                "excess": excess,
                "state": [[z.real, z.imag] for z in psi.vector],
                "kraus": [[[[z.real, z.imag] for z in row] for row in k] for k in channel.kraus],
                **params,
            })
    return ConjectureScan(max_excess, witnesses, count, separable, family, seed)
