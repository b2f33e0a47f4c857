"""Seeded Monte Carlo sweeps over SNR and bit widths, CSV output and aggregation.

Seeding. Each trial index owns one channel draw (Bob's channel and Eve's
AoDs) shared by every grid point and method, so curves are compared on
common random numbers. Each row additionally carries its own ``seed``,
``base_seed ^ stable_hash(grid point, trial)``, which drives Eve's Monte
Carlo gain draws; ``base_seed`` and therefore the channel can be recovered
from a row (see :func:`replay`).
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from itertools import product

import numpy as np

from .channel import SystemConfig, sample_channel, sample_eve_stats
from .optimizer import (TlaisSettings, initial_precoder, mrt_precoder, sr_value, tlais)
from .quantization import QuantizationModel
from .rates import rate_bob, secrecy_rate_mc

METHODS = ("tlais", "tlais-no-an", "mrt-an", "mrt", "max-sr-nsp-init")


class UsageError(ValueError):
    """Invalid sweep specification (bad method name, empty grid, ...)."""


@dataclass(frozen=True)
class SweepSpec:
    method: str = "tlais"
    snr_db: tuple = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    b_dac: tuple = (8,)
    b_ps: tuple = (4,)
    trials: int = 100
    base_seed: int = 42
    mc_samples: int = 10_000
    out: str | None = None
    n_t: int = 32
    k: int = 4
    l_paths: int = 12
    workers: int = 1
    record_timing: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in np.atleast_1d(self.snr_db)))
        object.__setattr__(self, "b_dac", tuple(int(b) for b in np.atleast_1d(self.b_dac)))
        object.__setattr__(self, "b_ps", tuple(int(b) for b in np.atleast_1d(self.b_ps)))
        if not (self.snr_db and self.b_dac and self.b_ps):
            raise UsageError("snr_db, b_dac and b_ps must be nonempty")
        if not all(math.isfinite(s) for s in self.snr_db):
            raise UsageError("SNR values must be finite")
        if self.trials < 1 or self.mc_samples < 1 or self.workers < 1:
            raise UsageError("trials, mc_samples and workers must be >= 1")
        if min(self.b_dac) < 1 or min(self.b_ps) < 1:
            raise UsageError("bit widths must be >= 1")
        if self.base_seed < 0:
            raise UsageError("base_seed must be nonnegative")
        try:
            SystemConfig(n_t=self.n_t, k=self.k, l_paths=self.l_paths)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def grid(self):
        return list(product(self.snr_db, self.b_dac, self.b_ps))


@dataclass(frozen=True)
class ResultRow:
    method: str
    snr_db: float
    b_dac: int
    b_ps: int
    trial: int
    beta_opt: float
    sr_approx: float
    sr_mc: float
    sr_mc_stderr: float
    r_b: float
    outer_iters: int
    wall_ms: float
    seed: int
    sr_approx_raw: float
    sr_mc_raw: float


CSV_FIELDS = tuple(f.name for f in fields(ResultRow))


def stable_hash(*parts) -> int:
    """63-bit hash of the ``repr`` of ``parts``, identical across processes and runs."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") & (2 ** 63 - 1)


def row_seed(base_seed, snr_db, b_dac, b_ps, trial) -> int:
    return base_seed ^ stable_hash(float(snr_db), int(b_dac), int(b_ps), int(trial))


def channel_rng(base_seed, trial):
    return np.random.default_rng([int(base_seed), int(trial)])


def draw_trial(cfg: SystemConfig, base_seed, trial):
    """Bob's channel and Eve's statistics for one trial index."""
    rng = channel_rng(base_seed, trial)
    h = sample_channel(cfg, rng)
    return h, sample_eve_stats(cfg, rng)


def design(method, h, stats, q, cfg, settings: TlaisSettings | None = None):
    """Run ``method``; returns the precoder and the number of outer iterations."""
    settings = settings or TlaisSettings()
    if method == "tlais":
        rep = tlais(h, stats, q, cfg, settings)
        return rep.precoder, rep.outer_iterations
    if method == "tlais-no-an":
        rep = tlais(h, stats, q, cfg, replace(settings, with_an=False))
        return rep.precoder, rep.outer_iterations
    if method == "mrt-an":
        return mrt_precoder(h, stats, q, cfg, with_an=True, gpi=settings.gpi), 0
    if method == "mrt":
        return mrt_precoder(h, stats, q, cfg, with_an=False, gpi=settings.gpi), 0
    if method == "max-sr-nsp-init":
        return initial_precoder(h, stats, q, cfg, with_an=True, gpi=settings.gpi), 0
    raise UsageError(f"unknown method {method!r}")


def run_point(spec: SweepSpec, snr_db, b_dac, b_ps, trial) -> ResultRow:
    cfg = SystemConfig.from_snr_db(snr_db, n_t=spec.n_t, k=spec.k, l_paths=spec.l_paths,
                                   b_dac=b_dac, b_ps=b_ps)
    q = QuantizationModel.from_bits(b_dac, b_ps)
    h, stats = draw_trial(cfg, spec.base_seed, trial)
    t0 = time.perf_counter()
    w, outer = design(spec.method, h, stats, q, cfg)
    wall = (time.perf_counter() - t0) * 1e3 if spec.record_timing else 0.0
    seed = row_seed(spec.base_seed, snr_db, b_dac, b_ps, trial)
    sr_mc, se = secrecy_rate_mc(h, stats, w, q, cfg, spec.mc_samples,
                                rng=np.random.default_rng(seed))
    sr = sr_value(w, h, stats, q, cfg)
    return ResultRow(spec.method, float(snr_db), int(b_dac), int(b_ps), int(trial),
                     float(w.beta), max(0.0, sr), max(0.0, sr_mc), se,
                     rate_bob(h, w, q, cfg), int(outer), wall, seed, sr, sr_mc)


def _run_task(args):
    return run_point(*args)


def _sort_key(row: ResultRow):
    return (METHODS.index(row.method), row.snr_db, row.b_dac, row.b_ps, row.trial)


def run_sweep(spec: SweepSpec, progress=None) -> list[ResultRow]:
    """All (grid point, trial) rows, sorted; written to ``spec.out`` if set.

    The output file is opened before any work starts so that an unwritable
    path fails fast with ``OSError``.
    """
    tasks = [(spec, s, bd, bp, t) for (s, bd, bp) in spec.grid() for t in range(spec.trials)]
    sink = open(spec.out, "w", encoding="utf-8", newline="") if spec.out else None
    try:
        rows = []
        if spec.workers == 1:
            for task in tasks:
                rows.append(_run_task(task))
                if progress:
                    progress(len(rows), len(tasks))
        else:
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                for row in pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * spec.workers))):
                    rows.append(row)
                    if progress:
                        progress(len(rows), len(tasks))
        rows.sort(key=_sort_key)
        if sink:
            write_csv(rows, sink)
    finally:
        if sink:
            sink.close()
    return rows


def replay(row: ResultRow, n_t=32, k=4, l_paths=12, mc_samples=10_000) -> ResultRow:
    """Recompute a single row from the values it records."""
    base = row.seed ^ stable_hash(float(row.snr_db), int(row.b_dac), int(row.b_ps), int(row.trial))
    spec = SweepSpec(row.method, (row.snr_db,), (row.b_dac,), (row.b_ps,), 1, base, mc_samples,
                     n_t=n_t, k=k, l_paths=l_paths)
    return run_point(spec, row.snr_db, row.b_dac, row.b_ps, row.trial)


# -- CSV --------------------------------------------------------------------------

def write_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([getattr(r, f) for f in CSV_FIELDS])


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(path) -> list[ResultRow]:
    types = {f.name: f.type for f in fields(ResultRow)}
    cast = {"str": str, "int": int, "float": float}
    with open(path, encoding="utf-8", newline="") as fh:
        return [ResultRow(**{k: cast[types[k]](v) for k, v in rec.items()})
                for rec in csv.DictReader(fh)]


# -- aggregation --------------------------------------------------------------------

@dataclass(frozen=True)
class Summary:
    method: str
    snr_db: float
    b_dac: int
    b_ps: int
    n: int
    sr_approx: float
    sr_approx_stderr: float
    sr_mc: float
    sr_mc_stderr: float
    beta_opt: float
    beta_opt_stderr: float
    r_b: float
    r_b_stderr: float


def mean_stderr(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(v.size))


def aggregate(rows) -> list[Summary]:
    """Mean and standard error per (method, SNR, b_dac, b_ps) of the clamped SR columns."""
    rows = list(rows)
    if not rows:
        raise ValueError("aggregate needs at least one row")
    groups = {}
    for r in rows:
        groups.setdefault((r.method, r.snr_db, r.b_dac, r.b_ps), []).append(r)
    out = []
    for key in sorted(groups, key=lambda g: (METHODS.index(g[0]) if g[0] in METHODS else len(METHODS),) + g):
        g = groups[key]
        stats = []
        for col in ("sr_approx", "sr_mc", "beta_opt", "r_b"):
            stats.extend(mean_stderr([getattr(r, col) for r in g]))
        out.append(Summary(*key, len(g), *stats))
    return out


def write_summary(summaries, fh):
    names = [f.name for f in fields(Summary)]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(names)
    for s in summaries:
        w.writerow([getattr(s, n) for n in names])


# -- figure programs ----------------------------------------------------------------

@dataclass(frozen=True)
class FigureProgram:
    name: str
    methods: tuple
    snr_db: tuple
    b_dac: tuple
    b_ps: tuple


FIGURES = (
    FigureProgram("sr_vs_snr", METHODS, (-5, 0, 5, 10, 15, 20), (8,), (4,)),
    FigureProgram("sr_vs_bdac", METHODS, (15,), tuple(range(1, 9)), (4,)),
    FigureProgram("sr_vs_bps_dac8", ("tlais", "tlais-no-an", "mrt-an", "mrt"), (15,), (8,),
                  tuple(range(1, 7))),
    FigureProgram("sr_vs_bps_dac4", ("tlais", "tlais-no-an", "mrt-an", "mrt"), (15,), (4,),
                  tuple(range(1, 7))),
)


def run_figures(out_dir, trials=20, base_seed=42, mc_samples=10_000, workers=1, n_t=32, k=4,
                l_paths=12, figures=FIGURES, progress=None):
    """Run every figure program; writes ``<name>.csv`` (rows) and ``<name>_summary.csv``.

    The optimal-PA-factor curve is the ``beta_opt`` column of the
    ``sr_vs_snr`` summary.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for fig in figures:
        rows = []
        for m in fig.methods:
            spec = SweepSpec(m, fig.snr_db, fig.b_dac, fig.b_ps, trials, base_seed, mc_samples,
                             n_t=n_t, k=k, l_paths=l_paths, workers=workers)
            rows.extend(run_sweep(spec, progress))
        rows.sort(key=_sort_key)
        path = os.path.join(out_dir, f"{fig.name}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
        spath = os.path.join(out_dir, f"{fig.name}_summary.csv")
        with open(spath, "w", encoding="utf-8", newline="") as fh:
            write_summary(aggregate(rows), fh)
        written += [path, spath]
    return written
