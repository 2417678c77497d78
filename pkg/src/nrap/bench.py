"""Benchmark harness: timed solver runs, results CSV, performance
profiles, and log-log scaling fits.

Timing covers the solve call only (generation and verification are
excluded) and every non-failed run is verified against the KKT oracle
before its record is kept; a verification failure aborts the run,
because correctness outranks benchmarking.  One warm-up solve per
(algorithm, cell) is discarded.

Worker count comes from the ``NRAP_THREADS`` environment variable
(default 1, the right setting for timing fidelity); with more workers
cells run in separate processes and records are merged in sorted cell
order so output is order-stable.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .families import Family, Sense
from .generate import GenSpec, generate
from .newton import NzConfig
from .problem import Status, kkt_residual
from .registry import ALGORITHMS, solve_named

__all__ = [
    "BenchRecord",
    "ProfilePoint",
    "BenchMatrix",
    "run_bench",
    "performance_profile",
    "scaling_fit",
    "write_records",
    "read_records",
    "write_profile",
]

RECORD_COLUMNS = (
    "family", "n", "h_frac", "seed", "alg", "rep",
    "time_ns", "iters", "status", "mu", "feas_resid", "kkt_resid",
)

VERIFY_FEAS_RTOL = 1e-8   # on |sum(a x) - b| relative to max(1, |b|)
VERIFY_KKT_TOL = 1e-7     # on the scale-free stationarity-side residuals


@dataclass(frozen=True)
class BenchRecord:
    family: str
    n: int
    h_frac: float
    seed: int
    alg: str
    rep: int
    time_ns: int
    iters: int
    status: str
    mu: float
    feas_resid: float
    kkt_resid: float

    @property
    def key(self):
        return (self.family, self.n, self.h_frac, self.seed, self.alg, self.rep)

    @property
    def problem_key(self):
        return (self.family, self.n, self.h_frac, self.seed)


@dataclass(frozen=True)
class ProfilePoint:
    alg: str
    tau: float
    rho: float


@dataclass(frozen=True)
class BenchMatrix:
    families: tuple
    sizes: tuple
    h_fracs: tuple
    seeds: tuple
    algs: tuple

    def cells(self):
        for fam in self.families:
            for n in self.sizes:
                for h in self.h_fracs:
                    for seed in self.seeds:
                        yield (Family(fam), int(n), float(h), int(seed))


class VerificationError(RuntimeError):
    pass


def _bench_cell(args) -> list[BenchRecord]:
    (fam, n, h, seed), algs, reps, sense, nz_cfg = args
    inst = generate(GenSpec(family=fam, n=n, h_frac=h, seed=seed, sense=sense))
    records = []
    for alg in algs:
        solve_named(inst, alg, nz_cfg)  # warm-up, discarded
        for rep in range(reps):
            t0 = time.perf_counter_ns()
            sol = solve_named(inst, alg, nz_cfg)
            elapsed = time.perf_counter_ns() - t0
            if sol.status is Status.FAILED:
                feas = kkt = float("nan")
            else:
                rep_kkt = kkt_residual(inst, sol.x, sol.mu)
                feas = rep_kkt.feasibility_residual
                kkt = max(
                    rep_kkt.stationarity_residual,
                    rep_kkt.complementarity_residual,
                    rep_kkt.sign_violation,
                )
                if alg != "nz" and (
                    feas > VERIFY_FEAS_RTOL * max(1.0, abs(inst.b)) or kkt > VERIFY_KKT_TOL
                ):
                    raise VerificationError(
                        f"{alg} failed verification on {fam.value} n={n} h={h} seed={seed}: "
                        f"feas={feas:g} kkt={kkt:g}"
                    )
            records.append(
                BenchRecord(
                    family=fam.value, n=n, h_frac=h, seed=seed, alg=alg, rep=rep,
                    time_ns=max(1, elapsed), iters=sol.iterations, status=sol.status.value,
                    mu=float(sol.mu), feas_resid=feas, kkt_resid=kkt,
                )
            )
    return records


def run_bench(
    matrix: BenchMatrix,
    reps: int = 1,
    sense: Sense = Sense.EQUALITY,
    nz_config: NzConfig | None = None,
) -> list[BenchRecord]:
    if not matrix.algs:
        raise ValueError("algorithm list is empty")
    for alg in matrix.algs:
        if alg not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {alg!r}")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    jobs = [(cell, tuple(matrix.algs), reps, sense, nz_config) for cell in matrix.cells()]
    if not jobs:
        raise ValueError("bench matrix is empty")

    workers = int(os.environ.get("NRAP_THREADS", "1"))
    records: list[BenchRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_bench_cell, jobs):
                records.extend(batch)
    else:
        for job in jobs:
            records.extend(_bench_cell(job))
    records.sort(key=lambda r: r.key)
    return records


# ---------------------------------------------------------------------------
# Performance profiles
# ---------------------------------------------------------------------------


def _ratio_table(records: list[BenchRecord]) -> tuple[list[str], dict, float]:
    """Per-problem performance ratios; failures get the cap ratio r_M."""
    algs = sorted({r.alg for r in records})
    by_pa: dict[tuple, list[BenchRecord]] = {}
    for r in records:
        by_pa.setdefault((r.problem_key, r.alg), []).append(r)

    times: dict[tuple, float] = {}
    failed: set[tuple] = set()
    problems = sorted({r.problem_key for r in records})
    for p in problems:
        for a in algs:
            runs = by_pa.get((p, a))
            if not runs or any(r.status == Status.FAILED.value for r in runs):
                failed.add((p, a))
            else:
                times[(p, a)] = float(np.mean([r.time_ns for r in runs]))

    ratios: dict[tuple, float] = {}
    finite_max = 1.0
    for p in problems:
        best = min((times[(p, a)] for a in algs if (p, a) in times), default=None)
        for a in algs:
            if (p, a) in times and best:
                ratio = times[(p, a)] / best
                ratios[(p, a)] = ratio
                finite_max = max(finite_max, ratio)
            else:
                ratios[(p, a)] = math.inf
    return algs, {"ratios": ratios, "problems": problems}, finite_max


def performance_profile(
    records: list[BenchRecord],
    taus=None,
    r_max: float | None = None,
) -> list[ProfilePoint]:
    """Cumulative distribution of per-problem time ratios per algorithm.

    Failed runs count as ratio ``r_M`` (default: 1.05 times the largest
    finite ratio).  With no explicit tau grid the exact step function is
    returned: one point per distinct ratio plus tau=1 and tau=r_M.
    """
    if not records:
        raise ValueError("no records")
    algs, table, finite_max = _ratio_table(records)
    ratios, problems = table["ratios"], table["problems"]
    cap = r_max if r_max is not None else finite_max * 1.05
    for key, val in ratios.items():
        if math.isinf(val):
            ratios[key] = cap

    if taus is None:
        taus = sorted({1.0, cap, *ratios.values()})
    n_p = len(problems)
    points = []
    for a in algs:
        vals = np.sort([ratios[(p, a)] for p in problems])
        for tau in taus:
            rho = float(np.searchsorted(vals, tau, side="right")) / n_p
            points.append(ProfilePoint(alg=a, tau=float(tau), rho=rho))
    return points


def scaling_fit(records: list[BenchRecord], alg: str) -> float:
    """Least-squares slope of log(mean solve time) against log(n)."""
    by_n: dict[int, list[int]] = {}
    for r in records:
        if r.alg == alg and r.status != Status.FAILED.value:
            by_n.setdefault(r.n, []).append(r.time_ns)
    if len(by_n) < 3:
        raise ValueError(f"need at least 3 distinct sizes for {alg}, got {len(by_n)}")
    ns = sorted(by_n)
    logn = np.log([float(n) for n in ns])
    logt = np.log([float(np.mean(by_n[n])) for n in ns])
    slope, _ = np.polyfit(logn, logt, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# CSV round trips
# ---------------------------------------------------------------------------


def write_records(records: list[BenchRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow([
                r.family, r.n, f"{r.h_frac:.17g}", r.seed, r.alg, r.rep,
                r.time_ns, r.iters, r.status, f"{r.mu:.17g}",
                f"{r.feas_resid:.17g}", f"{r.kkt_resid:.17g}",
            ])


def read_records(path) -> list[BenchRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RECORD_COLUMNS:
            raise ValueError(f"unexpected results columns {reader.fieldnames}")
        for row in reader:
            records.append(BenchRecord(
                family=row["family"], n=int(row["n"]), h_frac=float(row["h_frac"]),
                seed=int(row["seed"]), alg=row["alg"], rep=int(row["rep"]),
                time_ns=int(row["time_ns"]), iters=int(row["iters"]), status=row["status"],
                mu=float(row["mu"]), feas_resid=float(row["feas_resid"]),
                kkt_resid=float(row["kkt_resid"]),
            ))
    return records


def write_profile(points: list[ProfilePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("alg", "tau", "rho"))
        for p in points:
            w.writerow([p.alg, f"{p.tau:.17g}", f"{p.rho:.17g}"])
