"""Command-line surface: thin adapters over the library, JSON/CSV artifacts.

Exit codes: 0 success, 2 usage error, 3 guard violation, 4 numeric/contract
error. With --json, errors are emitted on stderr as machine-readable JSON.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import adversarial, assignment, experiments, filters, jsonio, solver, sparsity, spectral
from .errors import (
    ContractError,
    GuardViolationError,
    InvalidParameterError,
    PermsolveError,
)

USAGE_EXIT = 2
GUARD_EXIT = 3
CONTRACT_EXIT = 4


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InvalidParameterError(f"cannot read {path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permsolve",
        description="Sparse-filter frequency-permutation tools: generation, "
        "solving, oracles, counterexamples and Monte-Carlo studies.",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable JSON errors on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random sparse filter matrix")
    g.add_argument("--M", type=int, required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--L", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--mode", choices=[filters.UNIFORM, filters.DISJOINT_BLOCKS], default=filters.UNIFORM)
    g.add_argument("-o", "--output", default="-")

    pm = sub.add_parser("permute", help="apply per-frequency permutations to a matrix")
    pm.add_argument("matrix")
    src = pm.add_mutually_exclusive_group(required=True)
    src.add_argument("--seed", type=int, help="draw i.i.d. uniform permutations with this seed")
    src.add_argument("--perm", help="permutation-sequence document to apply")
    pm.add_argument("-o", "--output", default="-")
    pm.add_argument("--perm-out", help="write the applied sequence here")

    sv = sub.add_parser("solve", help="run the greedy sweep solver")
    sv.add_argument("matrix")
    sv.add_argument("--p", type=float, default=1.9)
    sv.add_argument("--max-sweeps", type=int, default=100)
    sv.add_argument("--zero-tol", type=float, default=None)
    sv.add_argument("--tie-break", choices=[solver.KEEP_CURRENT, solver.LEXICOGRAPHIC], default=solver.KEEP_CURRENT)
    sv.add_argument("--backend", choices=["compiled", "python"], default=None)
    sv.add_argument("-o", "--output", default="Ahat.json", help="recovered matrix document")
    sv.add_argument("--result-out", help="solver run report (trace, sweeps, applied sequence)")

    orc = sub.add_parser("oracle", help="exhaustive minimizer enumeration (guarded)")
    orc.add_argument("matrix")
    orc.add_argument("--p", type=float, default=0.0)
    orc.add_argument("--zero-tol", type=float, default=None)
    orc.add_argument("--guard", type=int, default=solver.BRUTE_FORCE_GUARD)

    ev = sub.add_parser("eval", help="lp norm of a matrix, or SNR between two")
    ev.add_argument("files", nargs="+")
    ev.add_argument("--p", type=float, default=None)
    ev.add_argument("--snr", action="store_true")
    ev.add_argument("--zero-tol", type=float, default=None)

    dl = sub.add_parser("delta", help="permutation size between two matrices")
    dl.add_argument("estimated")
    dl.add_argument("reference")
    dl.add_argument("--zero-tol", type=float, default=None)

    ce = sub.add_parser("counterexample", help="emit a non-uniqueness bundle")
    ce.add_argument("--family", choices=[adversarial.LEMMA3, adversarial.LEMMA4], required=True)
    ce.add_argument("--L", type=int, required=True)
    ce.add_argument("--k", type=int, required=True)
    ce.add_argument("--k-prime", type=int, default=None)
    ce.add_argument("--seed", type=int, default=0)
    ce.add_argument("--embed-M", type=int, default=None)
    ce.add_argument("--embed-N", type=int, default=None)
    ce.add_argument("--embed-seed", type=int, default=0)
    ce.add_argument("-o", "--output", default="-")

    tr = sub.add_parser("transversal", help="above-threshold permutation of a bistochastic matrix")
    tr.add_argument("matrix", help="JSON 2-d array")
    tr.add_argument("--threshold", type=float, default=None, help="default: the guaranteed 2*alpha(N)")

    sq = sub.add_parser("sharp-seq", help="bound-tight permutation sequence")
    sq.add_argument("--N", type=int, required=True)
    sq.add_argument("--L", type=int, required=True)
    sq.add_argument("-o", "--output", default="-")

    mc = sub.add_parser("montecarlo", help="run an experiment grid, write CSVs")
    mc.add_argument("config")
    mc.add_argument("-o", "--out-dir", required=True)
    mc.add_argument("--workers", type=int, default=None)

    fr = sub.add_parser("fit-runtime", help="fit per-sweep time against L^2 log2 L")
    fr.add_argument("trials_csv")

    return parser


def _cmd_gen(args) -> int:
    spec = filters.SparseSpec(k=args.k, support_mode=args.mode)
    matrix = filters.generate_sparse_matrix(args.M, args.N, args.L, spec, seed=args.seed)
    _write(args.output, filters.dumps(matrix))
    return 0


def _cmd_permute(args) -> int:
    matrix = filters.loads(_read(args.matrix))
    if args.perm is not None:
        seq = spectral.loads(_read(args.perm))
    else:
        seq = spectral.random_permutation_sequence(matrix.filter_len, matrix.sources, args.seed)
    out = spectral.apply_frequency_permutations(matrix, seq)
    _write(args.output, filters.dumps(out))
    if args.perm_out:
        _write(args.perm_out, spectral.dumps(seq))
    return 0


def _cmd_solve(args) -> int:
    matrix = filters.loads(_read(args.matrix))
    cfg = solver.SolverConfig(
        p=args.p, max_sweeps=args.max_sweeps, zero_tol=args.zero_tol, tie_break=args.tie_break
    )
    result = solver.greedy_solve(matrix, cfg, backend=args.backend)
    _write(args.output, filters.dumps(result.a_hat))
    if args.result_out:
        _write(args.result_out, solver.result_dumps(result, args.p))
    return 0


def _cmd_oracle(args) -> int:
    matrix = filters.loads(_read(args.matrix))
    result = solver.brute_force_solve(matrix, p=args.p, zero_tol=args.zero_tol, guard=args.guard)
    doc = {
        "p": args.p,
        "best_objective": result.best_objective,
        "evaluated": result.evaluated,
        "optima": [spectral.to_document(s) for s in result.optima],
    }
    _write("-", jsonio.dumps(doc))
    return 0


def _cmd_eval(args) -> int:
    if args.snr:
        if len(args.files) != 2:
            raise InvalidParameterError("eval --snr needs exactly two matrix documents")
        ref = filters.loads(_read(args.files[0]))
        est = filters.loads(_read(args.files[1]))
        snr_db, perm = sparsity.snr(ref, est)
        exact = snr_db == float("inf")
        doc = {
            "snr_db": sparsity.EXACT_MATCH_SNR_DB if exact else snr_db,
            "exact_match": exact,
            "best_perm": list(perm),
        }
    else:
        if args.p is None:
            raise InvalidParameterError("eval needs --p or --snr")
        if len(args.files) != 1:
            raise InvalidParameterError("eval --p needs exactly one matrix document")
        matrix = filters.loads(_read(args.files[0]))
        doc = {"p": args.p, "lp_norm": sparsity.lp_norm(matrix, args.p, args.zero_tol)}
    _write("-", jsonio.dumps(doc))
    return 0


def _cmd_delta(args) -> int:
    est = filters.loads(_read(args.estimated))
    ref = filters.loads(_read(args.reference))
    report = sparsity.delta(est, ref, args.zero_tol)
    doc = {
        "delta": report.delta,
        "best_global_perm": list(report.best_global_perm),
        "per_pair": report.per_pair.tolist(),
    }
    _write("-", jsonio.dumps(doc))
    return 0


def _cmd_counterexample(args) -> int:
    if args.family == adversarial.LEMMA3:
        bundle = adversarial.lemma3_counterexample(args.L, args.k)
    else:
        if args.k_prime is None:
            raise InvalidParameterError("lemma4 needs --k-prime")
        bundle = adversarial.lemma4_counterexample(args.L, args.k_prime, args.k, args.seed)
    if (args.embed_M is None) != (args.embed_N is None):
        raise InvalidParameterError("embedding needs both --embed-M and --embed-N")
    if args.embed_M is not None:
        bundle = adversarial.embed_counterexample(
            bundle, args.embed_M, args.embed_N, args.L, args.embed_seed
        )
    _write(args.output, adversarial.dumps(bundle))
    return 0


def _cmd_transversal(args) -> int:
    raw = jsonio.loads(_read(args.matrix))
    arr = np.asarray(raw, dtype=np.float64)
    threshold = args.threshold
    if threshold is None:
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidParameterError(f"matrix must be square, got shape {arr.shape}")
        threshold = float(2 * sparsity.alpha(arr.shape[0]))
    perm = assignment.hall_transversal(arr, threshold)
    doc = {"threshold": threshold, "perm": None if perm is None else list(perm)}
    _write("-", jsonio.dumps(doc))
    return 0


def _cmd_sharp_seq(args) -> int:
    seq = assignment.sharp_permutation_sequence(args.N, args.L)
    _write(args.output, spectral.dumps(seq))
    return 0


def _cmd_montecarlo(args) -> int:
    cfg = experiments.config_loads(_read(args.config))
    records, aggregates = experiments.run_experiment(cfg, workers=args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trials.csv").write_text(experiments.trials_to_csv(records))
    (out / "aggregate.csv").write_text(experiments.aggregates_to_csv(aggregates))
    return 0


def _cmd_fit_runtime(args) -> int:
    records = experiments.read_trials_csv(_read(args.trials_csv))
    fit = experiments.runtime_model_fit(records)
    doc = {
        "exponent": fit.exponent,
        "coefficient": fit.coefficient,
        "coefficient_ns": fit.coefficient_ns,
    }
    _write("-", jsonio.dumps(doc))
    return 0


_HANDLERS = {
    "gen": _cmd_gen,
    "permute": _cmd_permute,
    "solve": _cmd_solve,
    "oracle": _cmd_oracle,
    "eval": _cmd_eval,
    "delta": _cmd_delta,
    "counterexample": _cmd_counterexample,
    "transversal": _cmd_transversal,
    "sharp-seq": _cmd_sharp_seq,
    "montecarlo": _cmd_montecarlo,
    "fit-runtime": _cmd_fit_runtime,
}


def _emit_error(exc: Exception, code: int, as_json: bool) -> None:
    if as_json:
        doc = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
        sys.stderr.write(jsonio.dumps(doc) + "\n")
    else:
        sys.stderr.write(f"permsolve: error: {exc}\n")


def dispatch(argv) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except GuardViolationError as exc:
        _emit_error(exc, GUARD_EXIT, args.json)
        return GUARD_EXIT
    except InvalidParameterError as exc:
        _emit_error(exc, USAGE_EXIT, args.json)
        return USAGE_EXIT
    except (ContractError, PermsolveError) as exc:
        _emit_error(exc, CONTRACT_EXIT, args.json)
        return CONTRACT_EXIT


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
