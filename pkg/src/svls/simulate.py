"""Deterministic experiment harness for phase-transition and noise sweeps.

A sweep is the Cartesian product of the swept parameters times the trial
count.  Every trial's seed is derived from the base seed, the fully
instantiated parameter tuple, and the trial index through a stable hash
(BLAKE2b over a canonical string encoding, truncated to 64 bits), so
trials are independent streams and the sweep output is a pure function
of its configuration regardless of how many worker threads run it.
Failures inside a trial are contained: they become records with an error
tag, never aborting the sweep.

Record CSVs use a fixed column order (parameters first, then metrics),
17-significant-digit numerics, and ``\\n`` line endings.  Wall-clock
timings are kept on the in-memory records but left out of the canonical
CSV so that repeated runs of one configuration are byte-identical; an
opt-in flag appends the timing column for benchmarking use.
"""

from __future__ import annotations

import csv
import hashlib
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baselines import als_recover, apply_operator, gaussian_operator, svp_recover
from .matio import format_float
from .measurements import DesignKind, gen_design, gen_low_rank, measure
from .recovery import cur_recover, svls_recover

ALGORITHMS = ("svls", "cur", "svp", "als")

RECORD_COLUMNS = (
    "m",
    "n",
    "rank",
    "design",
    "k1",
    "k2",
    "sigma",
    "algorithm",
    "trial_index",
    "seed",
    "relative_error",
    "success",
    "iterations",
    "error",
)

SUMMARY_COLUMNS = (
    "m",
    "n",
    "rank",
    "design",
    "k1",
    "k2",
    "sigma",
    "algorithm",
    "trials",
    "mean_relative_error",
    "median_relative_error",
    "success_rate",
    "mean_runtime_seconds",
)


@dataclass(frozen=True)
class TrialPoint:
    """One fully instantiated parameter combination."""

    m: int
    n: int
    rank: int
    design: DesignKind
    k1: int
    k2: int
    sigma: float
    algorithm: str


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """Outcome of a single trial.

    ``runtime_seconds`` is excluded from equality comparisons (two runs
    of the same trial are the same experiment even though the clock
    differs) and from the canonical CSV.  A failed trial carries the
    error tag, ``relative_error = nan``, and ``success = False``; nan
    compares equal to nan here so repeated failed trials stay equal.
    """

    m: int
    n: int
    rank: int
    design: str
    k1: int
    k2: int
    sigma: float
    algorithm: str
    trial_index: int
    seed: int
    relative_error: float
    success: bool
    iterations: int
    error: str = ""
    runtime_seconds: float = field(default=math.nan, compare=False)

    def _key(self) -> tuple:
        return (
            self.m,
            self.n,
            self.rank,
            self.design,
            self.k1,
            self.k2,
            format_float(self.sigma),
            self.algorithm,
            self.trial_index,
            self.seed,
            format_float(self.relative_error),
            self.success,
            self.iterations,
            self.error,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrialRecord):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative sweep specification."""

    m: int
    n: int
    ranks: tuple[int, ...]
    design_kinds: tuple[DesignKind, ...]
    k_values: tuple[tuple[int, int], ...]
    sigmas: tuple[float, ...]
    algorithms: tuple[str, ...]
    trials: int
    base_seed: int
    success_threshold: float = 1e-4

    def __post_init__(self) -> None:
        if min(self.m, self.n) < 1:
            raise ValueError("m and n must be positive")
        for name in ("ranks", "design_kinds", "k_values", "sigmas", "algorithms"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.success_threshold <= 0:
            raise ValueError("success_threshold must be positive")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")

    @classmethod
    def from_json_dict(cls, payload: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        for name in ("m", "n", "ranks", "design_kinds", "k_values", "sigmas",
                     "algorithms", "trials", "base_seed"):
            if name not in payload:
                raise ValueError(f"config missing field {name!r}")
        return cls(
            m=int(payload["m"]),
            n=int(payload["n"]),
            ranks=tuple(int(r) for r in payload["ranks"]),
            design_kinds=tuple(DesignKind(k) for k in payload["design_kinds"]),
            k_values=tuple((int(k1), int(k2)) for k1, k2 in payload["k_values"]),
            sigmas=tuple(float(s) for s in payload["sigmas"]),
            algorithms=tuple(payload["algorithms"]),
            trials=int(payload["trials"]),
            base_seed=int(payload["base_seed"]),
            success_threshold=float(payload.get("success_threshold", 1e-4)),
        )


def _point_key(point: TrialPoint) -> str:
    return "|".join(
        (
            str(point.m),
            str(point.n),
            str(point.rank),
            point.design.value,
            str(point.k1),
            str(point.k2),
            format_float(point.sigma),
            point.algorithm,
        )
    )


def _hash64(text: str) -> int:
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def trial_seed(base_seed: int, point: TrialPoint, trial_index: int) -> int:
    """Stable 64-bit per-trial seed from the sweep coordinates."""
    return _hash64(f"{base_seed}|{_point_key(point)}|{trial_index}")


def _subseed(seed: int, label: str) -> int:
    return _hash64(f"{seed}|{label}")


def run_trial(
    point: TrialPoint,
    seed: int,
    trial_index: int = 0,
    success_threshold: float = 1e-4,
) -> TrialRecord:
    """Generate, measure, and recover one instance; pure in (point, seed).

    The ``svp`` baseline runs on a fresh dense Gaussian operator with
    ``k1*n + k2*m`` scalar measurements (budget parity with the
    row/column design); the other algorithms consume the row/column
    blocks directly.  Any exception from a component is captured in the
    record's error tag.
    """
    base = dict(
        m=point.m,
        n=point.n,
        rank=point.rank,
        design=point.design.value,
        k1=point.k1,
        k2=point.k2,
        sigma=point.sigma,
        algorithm=point.algorithm,
        trial_index=trial_index,
        seed=seed,
    )
    try:
        truth = gen_low_rank(point.m, point.n, point.rank, _subseed(seed, "truth"))
        design_seed = _subseed(seed, "design")
        noise_seed = _subseed(seed, "noise")
        if point.algorithm == "svp":
            k = point.k1 * point.n + point.k2 * point.m
            op = gaussian_operator(point.m, point.n, k, design_seed)
            b = apply_operator(op, truth.x)
            if point.sigma > 0:
                rng = np.random.default_rng(noise_seed)
                b = b + point.sigma * rng.standard_normal(b.shape)
            result = svp_recover(b, op, point.m, point.n, point.rank, truth=truth.x)
        else:
            design = gen_design(
                point.design, point.m, point.n, point.k1, point.k2, design_seed
            )
            meas = measure(truth.x, design, point.sigma, noise_seed)
            if point.algorithm == "svls":
                result = svls_recover(meas, design, point.rank, truth=truth.x)
            elif point.algorithm == "cur":
                result = cur_recover(meas, design, truth=truth.x)
            elif point.algorithm == "als":
                result = als_recover(meas, design, point.rank, truth=truth.x)
            else:
                raise ValueError(f"unknown algorithm {point.algorithm!r}")
    except Exception as exc:  # contained: failures become records
        return TrialRecord(
            **base,
            relative_error=math.nan,
            success=False,
            iterations=0,
            error=f"{type(exc).__name__}: {exc}",
            runtime_seconds=math.nan,
        )
    rel = result.relative_error
    return TrialRecord(
        **base,
        relative_error=rel,
        success=bool(rel < success_threshold),
        iterations=result.iterations or 0,
        error="",
        runtime_seconds=result.runtime_seconds,
    )


def _record_sort_key(rec: TrialRecord):
    return (
        rec.m,
        rec.n,
        rec.rank,
        rec.design,
        rec.k1,
        rec.k2,
        rec.sigma,
        rec.algorithm,
        rec.trial_index,
    )


def sweep(config: ExperimentConfig, jobs: int = 1) -> list[TrialRecord]:
    """Run every (parameter tuple, trial) combination.

    Records come back in canonical order (sorted by parameter tuple,
    then trial index) whatever the parallelism level.
    """
    tasks = []
    for rank in config.ranks:
        for kind in config.design_kinds:
            for k1, k2 in config.k_values:
                for sigma in config.sigmas:
                    for algo in config.algorithms:
                        point = TrialPoint(
                            m=config.m,
                            n=config.n,
                            rank=rank,
                            design=kind,
                            k1=k1,
                            k2=k2,
                            sigma=sigma,
                            algorithm=algo,
                        )
                        for trial in range(config.trials):
                            tasks.append(
                                (point, trial_seed(config.base_seed, point, trial), trial)
                            )

    def run(task):
        point, seed, trial = task
        return run_trial(point, seed, trial, config.success_threshold)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run, tasks))
    else:
        records = [run(task) for task in tasks]
    records.sort(key=_record_sort_key)
    return records


@dataclass(frozen=True)
class SummaryRow:
    """Aggregate over all trials sharing one parameter tuple.

    Error statistics pool the non-failed trials; the success rate counts
    failed trials in its denominator.
    """

    m: int
    n: int
    rank: int
    design: str
    k1: int
    k2: int
    sigma: float
    algorithm: str
    trials: int
    mean_relative_error: float
    median_relative_error: float
    success_rate: float
    mean_runtime_seconds: float = field(compare=False)


def aggregate(records: Iterable[TrialRecord]) -> list[SummaryRow]:
    """Group records by parameter tuple, in canonical order."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault(_record_sort_key(rec)[:-1], []).append(rec)
    rows = []
    for key in sorted(groups):
        recs = groups[key]
        errs = [r.relative_error for r in recs if not math.isnan(r.relative_error)]
        times = [r.runtime_seconds for r in recs if not math.isnan(r.runtime_seconds)]
        rows.append(
            SummaryRow(
                m=key[0],
                n=key[1],
                rank=key[2],
                design=key[3],
                k1=key[4],
                k2=key[5],
                sigma=key[6],
                algorithm=key[7],
                trials=len(recs),
                mean_relative_error=statistics.fmean(errs) if errs else math.nan,
                median_relative_error=statistics.median(errs) if errs else math.nan,
                success_rate=sum(r.success for r in recs) / len(recs),
                mean_runtime_seconds=statistics.fmean(times) if times else math.nan,
            )
        )
    return rows


def write_records_csv(
    path: str | Path, records: Sequence[TrialRecord], include_runtime: bool = False
) -> None:
    columns = RECORD_COLUMNS + (("runtime_seconds",) if include_runtime else ())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            row = [
                rec.m,
                rec.n,
                rec.rank,
                rec.design,
                rec.k1,
                rec.k2,
                format_float(rec.sigma),
                rec.algorithm,
                rec.trial_index,
                rec.seed,
                format_float(rec.relative_error),
                int(rec.success),
                rec.iterations,
                rec.error,
            ]
            if include_runtime:
                row.append(format_float(rec.runtime_seconds))
            writer.writerow(row)


def read_records_csv(path: str | Path) -> list[TrialRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RECORD_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: records CSV missing columns {sorted(missing)}")
        for row in reader:
            records.append(
                TrialRecord(
                    m=int(row["m"]),
                    n=int(row["n"]),
                    rank=int(row["rank"]),
                    design=row["design"],
                    k1=int(row["k1"]),
                    k2=int(row["k2"]),
                    sigma=float(row["sigma"]),
                    algorithm=row["algorithm"],
                    trial_index=int(row["trial_index"]),
                    seed=int(row["seed"]),
                    relative_error=float(row["relative_error"]),
                    success=bool(int(row["success"])),
                    iterations=int(row["iterations"]),
                    error=row["error"],
                    runtime_seconds=float(row.get("runtime_seconds", "nan") or "nan"),
                )
            )
    return records


def write_summary_csv(path: str | Path, rows: Sequence[SummaryRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.m,
                    row.n,
                    row.rank,
                    row.design,
                    row.k1,
                    row.k2,
                    format_float(row.sigma),
                    row.algorithm,
                    row.trials,
                    format_float(row.mean_relative_error),
                    format_float(row.median_relative_error),
                    format_float(row.success_rate),
                    format_float(row.mean_runtime_seconds),
                ]
            )
