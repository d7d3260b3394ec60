"""Monte-Carlo harness: seeded trial grids, CSV emission, runtime model fit.

Each trial draws a fresh k-sparse Gaussian matrix and an i.i.d. uniform
permutation sequence, runs the greedy solver and scores the recovery SNR
against the original. Every trial is a pure function of
(master_seed, cell, trial index), so results are independent of scheduling
and worker count; CSV rows are emitted in canonical cell/trial order.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import itertools
import math
import os
import time
import warnings
from dataclasses import dataclass, fields

import numpy as np

from . import jsonio
from .errors import InvalidParameterError
from .filters import SparseSpec, generate_sparse_matrix
from .rng import derive_seed
from .solver import SolverConfig, greedy_solve
from .sparsity import EXACT_MATCH_SNR_DB, snr
from .spectral import PermutationSequence, apply_frequency_permutations, random_permutation_sequence

TRIAL_COLUMNS = ["L", "k", "M", "N", "p", "trial", "snr_db", "success", "exact_match", "sweeps", "wall_time_s"]
AGGREGATE_COLUMNS = ["L", "k", "M", "N", "p", "trials", "success_rate", "mean_sweeps", "mean_time_s"]

#: sweeps value marking a trial that raised instead of completing
ERROR_SWEEPS = -1


@dataclass(frozen=True)
class Cell:
    L: int
    k: int
    M: int
    N: int
    p: float

    def key(self):
        return (self.L, self.k, self.M, self.N, self.p)


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid of (L, k, M, N, p) cells with a per-cell trial count.

    ``k`` holds absolute sparsity levels; ``k_rel`` holds relative levels
    resolved per L as round(r * L) clamped to [1, L]. Exactly one of the two
    must be given.
    """

    L: tuple
    M: tuple
    N: tuple
    p: tuple
    k: tuple | None = None
    k_rel: tuple | None = None
    trials: int = 200
    master_seed: int = 0
    success_threshold_db: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(int(v) for v in self.L))
        object.__setattr__(self, "M", tuple(int(v) for v in self.M))
        object.__setattr__(self, "N", tuple(int(v) for v in self.N))
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if self.k is not None:
            object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        if self.k_rel is not None:
            object.__setattr__(self, "k_rel", tuple(float(v) for v in self.k_rel))
        if (self.k is None) == (self.k_rel is None):
            raise InvalidParameterError("exactly one of k / k_rel must be given")
        sizes = [self.L, self.M, self.N, self.p, self.k if self.k is not None else self.k_rel]
        if any(len(g) == 0 for g in sizes):
            raise InvalidParameterError("every grid dimension must be non-empty")
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {self.trials}")
        if self.success_threshold_db <= 0:
            raise InvalidParameterError("success threshold must be positive")

    def cells(self) -> list:
        out = []
        for L, M, N, p in itertools.product(self.L, self.M, self.N, self.p):
            if self.k is not None:
                ks = self.k
            else:
                ks = [min(L, max(1, round(r * L))) for r in self.k_rel]
            for k in ks:
                out.append(Cell(L=L, k=k, M=M, N=N, p=p))
        return sorted(set(out), key=Cell.key)

    def to_document(self) -> dict:
        doc = {
            "L": list(self.L),
            "M": list(self.M),
            "N": list(self.N),
            "p": list(self.p),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "success_threshold_db": self.success_threshold_db,
        }
        if self.k is not None:
            doc["k"] = list(self.k)
        else:
            doc["k_rel"] = list(self.k_rel)
        return doc

    @staticmethod
    def from_document(doc) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise InvalidParameterError("experiment config must be a JSON object")
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(doc) - known
        if unknown:
            raise InvalidParameterError(f"unknown config fields: {sorted(unknown)}")
        try:
            return ExperimentConfig(
                L=doc["L"],
                M=doc["M"],
                N=doc["N"],
                p=doc["p"],
                k=doc.get("k"),
                k_rel=doc.get("k_rel"),
                trials=int(doc.get("trials", 200)),
                master_seed=int(doc.get("master_seed", 0)),
                success_threshold_db=float(doc.get("success_threshold_db", 100.0)),
            )
        except KeyError as exc:
            raise InvalidParameterError(f"experiment config missing field: {exc}") from exc


@dataclass(frozen=True)
class TrialRecord:
    L: int
    k: int
    M: int
    N: int
    p: float
    trial: int
    snr_db: float
    success: bool
    exact_match: bool
    sweeps: int
    wall_time_s: float


def trial_seed(master_seed: int, cell: Cell, trial: int) -> int:
    """Per-trial sub-seed; cells are separated by hashing the p bit pattern."""
    return derive_seed(master_seed, "trial", cell.L, cell.k, cell.M, cell.N, float(cell.p), trial)


def run_cell(
    cell: Cell,
    trial: int,
    master_seed: int,
    success_threshold_db: float = 100.0,
    identity_injection: bool = False,
) -> TrialRecord:
    """Run one seeded trial of the cell's configuration.

    ``identity_injection`` is a plumbing diagnostic: the drawn permutations
    are replaced by identities and the solver is skipped, so the recovery is
    bit-exact and the record must report the exact-match sentinel.
    """
    seed = trial_seed(master_seed, cell, trial)
    A = generate_sparse_matrix(cell.M, cell.N, cell.L, SparseSpec(k=cell.k), seed=seed)
    start = time.perf_counter()
    if identity_injection:
        a_hat = apply_frequency_permutations(A, PermutationSequence.identity(cell.L, cell.N))
        sweeps = 0
    else:
        s = random_permutation_sequence(cell.L, cell.N, seed=seed)
        a_tilde = apply_frequency_permutations(A, s)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # p >= 2 cells are intentional here
            result = greedy_solve(a_tilde, SolverConfig(p=cell.p))
        a_hat = result.a_hat
        sweeps = result.sweeps
    wall = time.perf_counter() - start
    snr_db, _ = snr(A, a_hat)
    exact = math.isinf(snr_db)
    if exact:
        snr_db = EXACT_MATCH_SNR_DB
    return TrialRecord(
        L=cell.L,
        k=cell.k,
        M=cell.M,
        N=cell.N,
        p=cell.p,
        trial=trial,
        snr_db=float(snr_db),
        success=snr_db > success_threshold_db,
        exact_match=exact,
        sweeps=sweeps,
        wall_time_s=wall,
    )


def _run_task(args) -> TrialRecord:
    cell, trial, master_seed, threshold = args
    start = time.perf_counter()
    try:
        return run_cell(cell, trial, master_seed, threshold)
    except Exception:  # error marker row; the experiment keeps going
        wall = time.perf_counter() - start
        return TrialRecord(
            L=cell.L, k=cell.k, M=cell.M, N=cell.N, p=cell.p, trial=trial,
            snr_db=float("nan"), success=False, exact_match=False,
            sweeps=ERROR_SWEEPS, wall_time_s=wall,
        )


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, then PERMSOLVE_THREADS, then available parallelism."""
    if workers is None:
        env = os.environ.get("PERMSOLVE_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise InvalidParameterError(f"worker count must be >= 1, got {workers}")
    return workers


def run_experiment(cfg: ExperimentConfig, workers: int | None = None):
    """Execute the full grid; returns (records, aggregates) in canonical order."""
    workers = resolve_workers(workers)
    tasks = [
        (cell, trial, cfg.master_seed, cfg.success_threshold_db)
        for cell in cfg.cells()
        for trial in range(cfg.trials)
    ]
    if workers == 1:
        records = [_run_task(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=8))
    records.sort(key=lambda r: (r.L, r.k, r.M, r.N, r.p, r.trial))
    return records, aggregate(records)


def aggregate(records) -> list:
    """Per-cell success rate and means; error rows count as failures only."""
    out = []
    by_cell: dict = {}
    for r in records:
        by_cell.setdefault((r.L, r.k, r.M, r.N, r.p), []).append(r)
    for key in sorted(by_cell):
        rows = by_cell[key]
        ok = [r for r in rows if r.sweeps != ERROR_SWEEPS]
        out.append(
            {
                "L": key[0],
                "k": key[1],
                "M": key[2],
                "N": key[3],
                "p": key[4],
                "trials": len(rows),
                "success_rate": sum(r.success for r in rows) / len(rows),
                "mean_sweeps": (sum(r.sweeps for r in ok) / len(ok)) if ok else float("nan"),
                "mean_time_s": (sum(r.wall_time_s for r in ok) / len(ok)) if ok else float("nan"),
            }
        )
    return out


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trials_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRIAL_COLUMNS)
    for r in records:
        writer.writerow([_fmt(getattr(r, c)) for c in TRIAL_COLUMNS])
    return buf.getvalue()


def aggregates_to_csv(aggregates) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGGREGATE_COLUMNS)
    for row in aggregates:
        writer.writerow([_fmt(row[c]) for c in AGGREGATE_COLUMNS])
    return buf.getvalue()


def read_trials_csv(text: str) -> list:
    """Parse a per-trial CSV back into TrialRecord rows."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != TRIAL_COLUMNS:
        raise InvalidParameterError(f"unexpected trial CSV header: {reader.fieldnames}")
    records = []
    for row in reader:
        records.append(
            TrialRecord(
                L=int(row["L"]), k=int(row["k"]), M=int(row["M"]), N=int(row["N"]),
                p=float(row["p"]), trial=int(row["trial"]), snr_db=float(row["snr_db"]),
                success=row["success"] == "1", exact_match=row["exact_match"] == "1",
                sweeps=int(row["sweeps"]), wall_time_s=float(row["wall_time_s"]),
            )
        )
    return records


@dataclass(frozen=True)
class RuntimeFit:
    """Power-law fit of per-sweep wall time against L^2 log2 L."""

    exponent: float
    coefficient: float  # seconds at L^2 log2 L = 1

    @property
    def coefficient_ns(self) -> float:
        return self.coefficient * 1e9


def runtime_model_fit(records) -> RuntimeFit:
    """Least-squares fit of log(time per sweep) against log(L^2 log2 L).

    Needs timing rows for at least 4 distinct L at one (M, N, p, k/L)
    configuration; the fitted exponent should sit near 1 when the sweep cost
    follows the L^2 log2 L model.
    """
    rows = [r for r in records if r.sweeps >= 1 and r.wall_time_s > 0]
    configs = {(r.M, r.N, r.p) for r in rows}
    if len(configs) > 1:
        raise InvalidParameterError(f"records mix (M, N, p) configurations: {sorted(configs)}")
    ratios = [r.k / r.L for r in rows]
    if ratios and max(ratios) > 1.25 * min(ratios):
        raise InvalidParameterError("records do not share a fixed relative sparsity k/L")
    if len({r.L for r in rows}) < 4:
        raise InvalidParameterError(
            f"insufficient data: need timings for >= 4 distinct L, got {sorted({r.L for r in rows})}"
        )
    x = np.array([math.log(r.L**2 * math.log2(r.L)) for r in rows])
    y = np.array([math.log(r.wall_time_s / r.sweeps) for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    return RuntimeFit(exponent=float(slope), coefficient=float(math.exp(intercept)))


def config_dumps(cfg: ExperimentConfig) -> str:
    return jsonio.dumps(cfg.to_document())


def config_loads(text: str) -> ExperimentConfig:
    return ExperimentConfig.from_document(jsonio.loads(text))
