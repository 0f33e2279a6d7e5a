"""Command-line front end: ``corrsim <subcommand> [options]``.

Every subcommand writes a JSON report (schema ``corrsim-report/1``) to
``--out`` (``-`` for standard output).  Exit codes: 0 success, 2 failed
precondition, 3 unknown state id, 4 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import channels as ch
from . import linalg as la
from . import protocols as pr
from . import states as st
from . import typicality as ty
from .errors import CorrsimError, DimensionCapError, PreconditionError
from .io import dumps_report, load_channel, load_matrix, rows_to_csv, write_atomic

SUBCOMMANDS = (
    "entropy", "erase-bell", "decorrelate", "disentangle", "classical", "two-step",
    "multiparty", "ssa-scan", "conjecture-scan", "chernoff", "typicality", "gentle",
)
STATE_IDS = ("bell", "bell_dephased", "ghz3", "werner:p", "haar:dA,dB:seed")
CSV_COLUMNS = ["seed", "param", "achieved_eps", "log_n", "shannon", "entropy_exchange"]

PROTOCOL_TAGS = {
    "entropy": "entropy-functionals",
    "erase-bell": "bell-two-step-erasure",
    "decorrelate": "typical-subspace-decorrelation",
    "disentangle": "pure-state-phase-randomization",
    "classical": "schmidt-basis-dephasing",
    "two-step": "two-step-versus-one-shot",
    "multiparty": "multipartite-total-correlation",
    "ssa-scan": "strong-subadditivity-scan",
    "conjecture-scan": "separable-output-mutual-information-scan",
    "chernoff": "operator-chernoff-bench",
    "typicality": "typical-subspace-report",
    "gentle": "gentle-measurement-bench",
}


class UnknownStateError(CorrsimError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    state: str | None = None
    state_file: str | None = None
    channel_file: str | None = None
    dims: list | None = None
    cut: str | None = None
    n: int = 4
    eps: float = 0.1
    eps_typical: float | None = None
    eps_cut: float | None = None
    n_unitaries: list = field(default_factory=lambda: [16])
    seeds: int = 1
    trials: int = 100
    count: int = 1000
    seed: int = 0
    family: str = "random_local"
    order: str = "ZX"
    dim: int = 4
    n_samples: int = 256
    probs: list | None = None
    out: str = "-"
    format: str = "json"

    def echo(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k != "out"}


# -- state resolution ---------------------------------------------------------------


def parse_state_id(spec: str):
    """Resolve a named state: bell, bell_dephased, ghz3, werner:p, haar:dA,dB:seed."""
    name, _, arg = spec.partition(":")
    try:
        if name == "bell" and not arg:
            return st.bell()
        if name == "bell_dephased" and not arg:
            return st.bell_dephased()
        if name == "ghz3" and not arg:
            return st.ghz3()
        if name == "werner" and arg:
            return st.werner(float(arg))
        if name == "haar" and arg:
            dim_part, _, seed_part = arg.partition(":")
            dims = tuple(int(x) for x in dim_part.split(","))
            return st.random_state("haar_pure", dims, int(seed_part or 0))
    except ValueError as exc:
        raise UnknownStateError(f"bad parameters in state id {spec!r}: {exc}") from None
    raise UnknownStateError(f"unknown state id {spec!r}; known ids: {', '.join(STATE_IDS)}")


def _file_dims(cfg: RunConfig, d: int) -> tuple:
    if cfg.dims:
        return tuple(cfg.dims)
    return (d,)


def resolve_state(cfg: RunConfig, default: str | None = None):
    if cfg.state_file:
        m = load_matrix(cfg.state_file)
        if m.shape[1] == 1 or m.shape[0] == 1:
            v = m.reshape(-1)
            return st.PureState.normalized(v, _file_dims(cfg, v.size))
        return st.DensityMatrix(m, _file_dims(cfg, m.shape[0]))
    spec = cfg.state or default
    if spec is None:
        raise UnknownStateError(f"no state given; known ids: {', '.join(STATE_IDS)}")
    return parse_state_id(spec)


def as_density(state) -> st.DensityMatrix:
    return state.density() if isinstance(state, st.PureState) else state


def parse_cut(cut: str | None, nsys: int):
    """``"k|m"`` puts the first k subsystems in A and the next m in B."""
    if cut is None:
        return None
    try:
        left, right = (int(x) for x in cut.split("|"))
    except ValueError:
        raise PreconditionError(f"cut must look like 'k|m', got {cut!r}") from None
    if left < 1 or right < 1 or left + right > nsys:
        raise PreconditionError(f"cut {cut!r} does not fit {nsys} subsystems")
    return list(range(left)), list(range(left, left + right))


# -- subcommands -------------------------------------------------------------------------


def _entropy(cfg):
    state = resolve_state(cfg)
    rho = as_density(state)
    result = {
        "dims": list(rho.dims),
        "entropy": st.von_neumann_entropy(rho),
        "subsystem_entropies": [st.subsystem_entropy(rho, [i]) for i in range(len(rho.dims))],
    }
    cut = parse_cut(cfg.cut, len(rho.dims))
    if cut is None and len(rho.dims) == 2:
        cut = ([0], [1])
    if cut is not None:
        result["cut"] = [cut[0], cut[1]]
        result["mutual_information"] = st.mutual_information(rho, cut)
    if isinstance(state, st.PureState) and cut is not None and len(cut[0]) + len(cut[1]) == len(rho.dims):
        result["entanglement_entropy"] = st.entanglement_entropy(state, cut)
    return result, None


def _erase_bell(cfg):
    report = pr.bell_erasure_demo(cfg.order)
    return report.as_dict(), None


def _decorrelate(cfg):
    rho = as_density(resolve_state(cfg, "bell_dephased"))
    if len(rho.dims) != 2:
        raise PreconditionError("decorrelate needs a bipartite state")
    la.check_cap(rho.dim**cfg.n)
    rows = []
    for size in cfg.n_unitaries:
        for seed in range(cfg.seed, cfg.seed + cfg.seeds):
            res = pr.decorrelate_typical(rho, cfg.n, cfg.eps, size, seed, cfg.eps_typical, cfg.eps_cut)
            big = st.DensityMatrix(ch.ab_copies(rho, cfg.n).matrix, res.channel.dims)
            cost = ch.noise_costs(res.channel, big)
            bound = ch.decorrelation_lower_bound(st.mutual_information(rho), cfg.n, res.achieved_eps, math.log2(rho.dim))
            rows.append({"seed": seed, "param": size, "achieved_eps": res.achieved_eps, "rate": res.rate,
                         "entropy_exchange_lower_bound": bound, **cost.as_dict(), **res.diagnostics})
    medians = {str(size): float(np.median([r["achieved_eps"] for r in rows if r["param"] == size]))
               for size in cfg.n_unitaries}
    result = {"mutual_information": st.mutual_information(rho), "n": cfg.n, "eps": cfg.eps,
              "rows": rows, "median_achieved_eps": medians}
    return result, rows


def _pure(cfg) -> st.PureState:
    state = resolve_state(cfg, "bell")
    if not isinstance(state, st.PureState):
        raise PreconditionError("this subcommand needs a pure state")
    return state


def _disentangle(cfg):
    psi = _pure(cfg)
    cut = parse_cut(cfg.cut, len(psi.dims))
    res = pr.disentangle_pure(psi, cut)
    return {
        "schmidt_rank": res.schmidt_rank,
        "costs": res.costs.as_dict(),
        "separability": {"is_ppt": res.separability.is_ppt, "ppt_min_eig": res.separability.ppt_min_eig,
                         "label": res.separability.label},
        "output_mutual_information": st.mutual_information(res.output),
        "entanglement_entropy": st.entanglement_entropy(psi, cut),
        "output_diagonal_error": la.trace_norm(res.output.matrix - pr.schmidt_diagonal(psi, cut)),
    }, None


def _classical(cfg):
    psi = _pure(cfg)
    cut = parse_cut(cfg.cut, len(psi.dims))
    sigma, i_cl = pr.classical_correlation_dephasing(psi, cut)
    return {"i_classical": i_cl, "entanglement_entropy": st.entanglement_entropy(psi, cut),
            "total_mutual_information": st.mutual_information(psi.density(), cut)}, None


def _two_step(cfg):
    rho = as_density(resolve_state(cfg, "bell"))
    if cfg.channel_file:
        channel = load_channel(cfg.channel_file)
    else:
        channel = pr.find_disentangling_twirl(rho, st.rng_for(cfg.seed))
    res = pr.two_step_cost_comparison(rho, channel)
    return {"two_step": res.two_step, "one_shot": res.one_shot, "gap": res.gap,
            "locally_unital": res.locally_unital, "channel": pr.channel_summary(channel)}, None


def _multiparty(cfg):
    rho = as_density(resolve_state(cfg, "ghz3"))
    c_er, seq = pr.multipartite_erasure(rho)
    return {"c_er": c_er, "sequential": seq}, None


def _dims_or(cfg, default):
    return tuple(cfg.dims) if cfg.dims else default


def _ssa_scan(cfg):
    res = pr.ssa_scan(cfg.count, _dims_or(cfg, (2, 2, 2)), cfg.seed)
    return {"min_value": res.min_value, "violations": res.violations, "count": res.count}, None


def _conjecture_scan(cfg):
    res = pr.conjecture_scan(cfg.count, _dims_or(cfg, (2, 2)), cfg.seed, cfg.family)
    return {"max_excess": res.max_excess, "witnesses": res.witnesses, "trials": res.trials,
            "separable_trials": res.separable_trials, "family": res.family}, None


def correlated_state(d: int) -> np.ndarray:
    """``(1/d) Σ_x |x⟩⟨x| ⊗ |x⟩⟨x|``."""
    return np.diag([1.0 / d if i // d == i % d else 0.0 for i in range(d * d)]).astype(complex)


def _chernoff(cfg):
    rows = []
    sampler, mean = ty.weyl_sampler(correlated_state(cfg.dim), (cfg.dim, cfg.dim))
    res = ty.chernoff_trial(sampler, cfg.n_samples, cfg.eps, cfg.trials, cfg.seed, mean=mean)
    rows.append(asdict(res))
    return {"dim": res.dim, "mu": res.mu, "n_samples": cfg.n_samples, "eps": cfg.eps,
            "violation_rate": res.violation_rate, "bound": res.bound, "stderr": res.stderr,
            "ok": res.ok, "trials": res.trials}, None


def _typicality(cfg):
    if cfg.probs:
        probs = np.array(cfg.probs, dtype=float)
        rep = ty.typicality_report_counting(probs, cfg.n, cfg.eps)
        path = "counting"
    else:
        rho = as_density(resolve_state(cfg))
        diag = np.max(np.abs(rho.matrix - np.diag(np.diag(rho.matrix)))) < 1e-12
        if diag and rho.dim**cfg.n > la.dim_cap():
            rep = ty.typicality_report_counting(np.diag(rho.matrix).real, cfg.n, cfg.eps)
            path = "counting"
        else:
            tp = ty.typical_projector(rho, cfg.n, cfg.eps)
            rep = ty.typicality_report(tp, rho, cfg.n, cfg.eps)
            path = "matrix"
    out = asdict(rep)
    out["dim"] = str(rep.dim) if rep.dim > 2**53 else rep.dim
    out["path"] = path
    return out, None


def _gentle(cfg):
    ok = 0
    worst = -math.inf
    for t in range(cfg.trials):
        rng = st.rng_for(cfg.seed, t)
        rho = st.random_state("induced_mixed", (cfg.dim,), cfg.seed, t)
        rank = int(rng.integers(1, cfg.dim + 1))
        basis = ty.haar_unitary(cfg.dim, rng)[:, :rank]
        res = ty.gentle_measurement_check(rho, basis @ basis.conj().T)
        ok += res.ok
        worst = max(worst, res.lhs - res.bound)
    return {"trials": cfg.trials, "ok": ok, "max_lhs_minus_bound": worst}, None


HANDLERS = {
    "entropy": _entropy, "erase-bell": _erase_bell, "decorrelate": _decorrelate,
    "disentangle": _disentangle, "classical": _classical, "two-step": _two_step,
    "multiparty": _multiparty, "ssa-scan": _ssa_scan, "conjecture-scan": _conjecture_scan,
    "chernoff": _chernoff, "typicality": _typicality, "gentle": _gentle,
}


# -- validation and dispatch ----------------------------------------------------------------


def validate(cfg: RunConfig) -> list[str]:
    """Dry-run checks; returns human-readable diagnostics, never raises."""
    diags = []
    if cfg.subcommand not in SUBCOMMANDS:
        diags.append(f"unknown subcommand {cfg.subcommand!r}; choose from {', '.join(SUBCOMMANDS)}")
    cap = la.dim_cap()
    if cfg.dims and int(np.prod(cfg.dims)) > cap:
        diags.append(f"dims {list(cfg.dims)} exceed the dimension cap {cap} (set CORRSIM_DIM_CAP to change)")
    if cfg.state is not None:
        try:
            parse_state_id(cfg.state)
        except UnknownStateError:
            diags.append(f"unknown state id {cfg.state!r}; known ids: {', '.join(STATE_IDS)}")
        except CorrsimError as exc:
            diags.append(str(exc))
    for label, path in (("state file", cfg.state_file), ("channel file", cfg.channel_file)):
        if path and not Path(path).is_file():
            diags.append(f"{label} {path!r} does not exist")
    if cfg.n < 1:
        diags.append("n must be >= 1")
    if not 0 < cfg.eps <= 1:
        diags.append("eps must lie in (0, 1]")
    for name in ("trials", "count", "seeds", "dim", "n_samples"):
        if getattr(cfg, name) < 1:
            diags.append(f"{name} must be >= 1")
    if any(k < 1 for k in cfg.n_unitaries):
        diags.append("n_unitaries entries must be >= 1")
    if cfg.format not in ("json", "csv"):
        diags.append("format must be json or csv")
    return diags


def build_report(cfg: RunConfig, result: dict) -> dict:
    return {
        "schema": "corrsim-report/1",
        "tool": "corrsim",
        "version": __version__,
        "protocol": PROTOCOL_TAGS.get(cfg.subcommand, cfg.subcommand),
        "units": "bits",
        "seed": cfg.seed,
        "config": cfg.echo(),
        "result": result,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        write_atomic(cfg.out, text)


def _error(code: int, kind: str, message: str, diagnostics=None) -> int:
    payload = {"error": kind, "message": message, "exit_code": code}
    if diagnostics:
        payload["diagnostics"] = diagnostics
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def run(cfg: RunConfig) -> int:
    """Execute one subcommand; returns the process exit code."""
    diags = validate(cfg)
    if diags:
        if any("unknown state id" in d for d in diags):
            return _error(3, "unknown_state", diags[0], diags)
        if any("dimension cap" in d for d in diags):
            return _error(4, "dimension_cap", diags[0], diags)
        return _error(2, "precondition", diags[0], diags)
    try:
        result, rows = HANDLERS[cfg.subcommand](cfg)
    except UnknownStateError as exc:
        return _error(3, "unknown_state", str(exc))
    except DimensionCapError as exc:
        return _error(4, "dimension_cap", str(exc))
    except (CorrsimError, OSError) as exc:
        return _error(2, "precondition", f"{type(exc).__name__}: {exc}")
    if cfg.format == "csv":
        if rows is None:
            return _error(2, "precondition", f"{cfg.subcommand} has no sweep rows for CSV output")
        _emit(cfg, rows_to_csv(rows, CSV_COLUMNS))
    else:
        _emit(cfg, dumps_report(build_report(cfg, result)))
    return 0


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corrsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"corrsim {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", help=f"named state: {', '.join(STATE_IDS)}")
    common.add_argument("--state-file", help="JSON matrix literal (density matrix or column vector)")
    common.add_argument("--channel-file", help="JSON channel description")
    common.add_argument("--dims", type=_int_list, help="comma-separated subsystem dimensions")
    common.add_argument("--cut", help="bipartition 'k|m' of the first k+m subsystems")
    common.add_argument("--n", type=int, default=4, help="number of copies")
    common.add_argument("--eps", type=float, default=0.1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "decorrelate":
            p.add_argument("--n-unitaries", type=_int_list, default=[16], help="N values, comma-separated")
            p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds per N")
            p.add_argument("--debug", action="store_true", help="allow separate eps for each role")
            p.add_argument("--eps-typical", type=float)
            p.add_argument("--eps-cut", type=float)
        if name in ("ssa-scan", "conjecture-scan"):
            p.add_argument("--count", type=int, default=1000)
        if name == "conjecture-scan":
            p.add_argument("--family", choices=pr.CONJECTURE_FAMILIES, default="random_local")
        if name == "erase-bell":
            p.add_argument("--order", default="ZX")
        if name in ("chernoff", "gentle"):
            p.add_argument("--dim", type=int, default=4)
            p.add_argument("--trials", type=int, default=100)
        if name == "chernoff":
            p.add_argument("--n-samples", type=int, default=256)
        if name == "typicality":
            p.add_argument("--probs", type=_float_list, help="diagonal spectrum; uses the counting path")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=ns.subcommand)
    for key in asdict(cfg):
        if hasattr(ns, key) and getattr(ns, key) is not None:
            setattr(cfg, key, getattr(ns, key))
    if ns.subcommand == "decorrelate" and not ns.debug:
        cfg.eps_typical = cfg.eps_cut = None
    return cfg


def main(argv=None) -> int:
    ns = make_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
