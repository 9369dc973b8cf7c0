"""Experiment harness: timed (optionally energy-metered) matmul runs over a
layout/size/worker grid, CSV output, and the derived speedup and
energy-vs-time datasets.

Input matrices are uniform [0, 1) draws from a seeded 64-bit PCG generator
and are identical across layouts for a given (seed, n), so the row-major
converted product checksums must agree across layouts in every run - a
built-in audit of the layout-uniform multiplication.

Repetitions are summarised by medians, which are robust to OS jitter.
"""

from __future__ import annotations

import io
import statistics
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codec import LayoutKind
from .energy import EnergyMeter, write_samples_csv
from .matrix import Matrix, matmul

CSV_COLUMNS = (
    "layout", "n", "workers", "rep", "seed", "wall_s",
    "pkg_j", "pp0_j", "dram_j", "checksum", "governor", "freq_khz",
)
CSV_HEADER = ",".join(CSV_COLUMNS)

_CPUFREQ = Path("/sys/devices/system/cpu/cpu0/cpufreq")
_LAYOUT_RANK = {"rowmajor": 0, "morton": 1, "hilbert": 2}
_ENERGY_DOMAINS = (("pkg_j", "package"), ("pp0_j", "pp0"), ("dram_j", "dram"))


@dataclass
class ExperimentConfig:
    sizes: tuple = (6, 8, 10)
    layouts: tuple = (LayoutKind.ROW_MAJOR, LayoutKind.MORTON, LayoutKind.HILBERT)
    worker_counts: tuple = (1, 2, 4, 8)
    repetitions: int = 3
    energy: bool = False
    warmup: int = 1
    seed: int = 1600
    rate_hz: float = 10.0
    no_timing: bool = False  # zero the volatile wall_s / freq_khz columns
    powercap_root: object = None
    samples_dir: object = None  # write per-run energy sample CSVs here

    def __post_init__(self):
        self.sizes = tuple(int(n) for n in self.sizes)
        self.layouts = tuple(
            LayoutKind.parse(l) if isinstance(l, str) else LayoutKind(l) for l in self.layouts
        )
        self.worker_counts = tuple(int(w) for w in self.worker_counts)
        if not self.sizes or not self.layouts or not self.worker_counts:
            raise ValueError("sizes, layouts and worker_counts must be non-empty")
        if any(w < 1 for w in self.worker_counts):
            raise ValueError("worker counts must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")


@dataclass
class ResultRow:
    layout: str
    n: int
    workers: int
    rep: str  # repetition number or "median"
    seed: int
    wall_s: float
    pkg_j: float | None
    pp0_j: float | None
    dram_j: float | None
    checksum: str
    governor: str
    freq_khz: int | None


@dataclass
class BenchResult:
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def read_frequency_note() -> tuple[str, int | None]:
    """Read-only snapshot of the cpufreq governor and current frequency."""
    try:
        governor = (_CPUFREQ / "scaling_governor").read_text().strip()
    except OSError:
        governor = ""
    try:
        freq_khz = int((_CPUFREQ / "scaling_cur_freq").read_text().strip())
    except (OSError, ValueError):
        freq_khz = None
    return governor, freq_khz


def input_matrices(seed: int, n: int, layout: LayoutKind) -> tuple[Matrix, Matrix]:
    """The seeded (A, B) pair for one grid cell; identical across layouts."""
    dense = []
    for which in (0, 1):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, n, which))))
        dense.append(rng.random((1 << n, 1 << n)))
    return Matrix.from_dense(dense[0], layout), Matrix.from_dense(dense[1], layout)


def checksum_matrix(m: Matrix) -> str:
    """CRC32 over the row-major element bytes; layout-independent."""
    return f"{zlib.crc32(np.ascontiguousarray(m.to_dense()).tobytes()) & 0xFFFFFFFF:08x}"


def run_bench(cfg: ExperimentConfig, progress=None) -> BenchResult:
    """Run the full grid; rows are ordered (layout, n, workers, rep) with
    median summary rows appended at the end."""
    result = BenchResult()
    meter = None
    if cfg.energy:
        meter = EnergyMeter(root=cfg.powercap_root, rate_hz=cfg.rate_hz)
        result.notes.extend(meter.notes)
        if not meter.available:
            result.notes.append(
                "energy requested but no readable RAPL domains; emitting empty energy columns"
            )

    summaries = []
    for layout in cfg.layouts:
        for n in cfg.sizes:
            a, b = input_matrices(cfg.seed, n, layout)
            for workers in cfg.worker_counts:
                if progress:
                    progress(f"{layout.label} n={n} workers={workers}")
                for _ in range(cfg.warmup):
                    matmul(a, b, workers)
                reps = []
                for rep in range(cfg.repetitions):
                    governor, freq_khz = read_frequency_note()
                    energies = {}
                    if meter is not None and meter.available:
                        c, report = meter.measure(lambda: matmul(a, b, workers))
                        wall = report.wall_seconds
                        for col, kind in _ENERGY_DOMAINS:
                            dom = report.energy.get(kind)
                            energies[col] = dom.joules if dom else None
                        if cfg.samples_dir is not None:
                            name = f"samples_{layout.label}_n{n}_w{workers}_r{rep}.csv"
                            path = Path(cfg.samples_dir) / name
                            path.parent.mkdir(parents=True, exist_ok=True)
                            with open(path, "w") as fh:
                                write_samples_csv(report, fh)
                    else:
                        t0 = time.perf_counter()
                        c = matmul(a, b, workers)
                        wall = time.perf_counter() - t0
                    row = ResultRow(
                        layout=layout.label,
                        n=n,
                        workers=workers,
                        rep=str(rep),
                        seed=cfg.seed,
                        wall_s=0.0 if cfg.no_timing else wall,
                        pkg_j=energies.get("pkg_j"),
                        pp0_j=energies.get("pp0_j"),
                        dram_j=energies.get("dram_j"),
                        checksum=checksum_matrix(c),
                        governor=governor,
                        freq_khz=0 if cfg.no_timing else freq_khz,
                    )
                    reps.append(row)
                    result.rows.append(row)
                summaries.append(_median_row(reps))
    result.rows.extend(summaries)
    return result


def _median_opt(values) -> float | None:
    values = [v for v in values if v is not None]
    return statistics.median(values) if values else None


def _median_row(reps) -> ResultRow:
    first = reps[0]
    return ResultRow(
        layout=first.layout,
        n=first.n,
        workers=first.workers,
        rep="median",
        seed=first.seed,
        wall_s=statistics.median(r.wall_s for r in reps),
        pkg_j=_median_opt(r.pkg_j for r in reps),
        pp0_j=_median_opt(r.pp0_j for r in reps),
        dram_j=_median_opt(r.dram_j for r in reps),
        checksum=first.checksum,
        governor=first.governor,
        freq_khz=_median_opt(r.freq_khz for r in reps),
    )


# ---------------------------------------------------------------------------
# CSV


def _fmt_opt(v, spec="{:.6f}") -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return spec.format(v)
    return str(v)


def write_bench_csv(rows, fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in rows:
        fh.write(
            ",".join(
                (
                    r.layout,
                    str(r.n),
                    str(r.workers),
                    r.rep,
                    str(r.seed),
                    f"{r.wall_s:.6f}",
                    _fmt_opt(r.pkg_j),
                    _fmt_opt(r.pp0_j),
                    _fmt_opt(r.dram_j),
                    r.checksum,
                    r.governor,
                    "" if r.freq_khz is None else str(int(r.freq_khz)),
                )
            )
            + "\n"
        )


def read_bench_csv(fh) -> list[dict]:
    if isinstance(fh, (str, Path)):
        with open(fh) as real:
            return read_bench_csv(real)
    header = fh.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {header!r}")
    rows = []
    for line in fh:
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"malformed CSV row: {line!r}")
        rows.append(dict(zip(CSV_COLUMNS, parts)))
    return rows


def _layout_key(label: str) -> tuple:
    return (_LAYOUT_RANK.get(label, len(_LAYOUT_RANK)), label)


def _median_view(rows) -> list[dict]:
    """Median rows of a parsed CSV; derived from repetition rows when the
    file carries no summary rows."""
    medians = [r for r in rows if r["rep"] == "median"]
    if medians:
        return medians
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["layout"], r["n"], r["workers"]), []).append(r)
    out = []
    for (layout, n, workers), members in groups.items():
        synth = dict(members[0])
        synth["rep"] = "median"
        synth["wall_s"] = f"{statistics.median(float(m['wall_s']) for m in members):.6f}"
        for col, _ in _ENERGY_DOMAINS:
            vals = [float(m[col]) for m in members if m[col]]
            synth[col] = f"{statistics.median(vals):.6f}" if vals else ""
        out.append(synth)
    return out


# ---------------------------------------------------------------------------
# speedup


def speedup_table(rows) -> list[dict]:
    """speedup(layout, n, w) = median wall(workers=1) / median wall(w)."""
    medians = _median_view(rows)
    walls: dict[tuple, float] = {}
    for r in medians:
        walls[(r["layout"], int(r["n"]), int(r["workers"]))] = float(r["wall_s"])
    out = []
    for (layout, n, workers) in sorted(walls, key=lambda k: (_layout_key(k[0]), k[1], k[2])):
        base = walls.get((layout, n, 1))
        if base is None:
            raise ValueError(f"missing workers=1 baseline for layout={layout}, n={n}")
        out.append(
            {
                "layout": layout,
                "n": n,
                "workers": workers,
                "speedup": base / walls[(layout, n, workers)],
            }
        )
    return out


def write_speedup_csv(table, fh) -> None:
    fh.write("layout,n,workers,speedup\n")
    for r in table:
        fh.write(f"{r['layout']},{r['n']},{r['workers']},{r['speedup']:.4f}\n")


# ---------------------------------------------------------------------------
# energy vs. time


def energy_time_series(rows) -> list[dict]:
    """One (wall_s, joules) point series per (layout, domain) from the
    median rows; raises when the CSV carries no energy data."""
    series: dict[tuple, list] = {}
    for r in _median_view(rows):
        for col, kind in _ENERGY_DOMAINS:
            if r[col]:
                series.setdefault((r["layout"], kind), []).append(
                    (float(r["wall_s"]), float(r[col]))
                )
    if not series:
        raise ValueError("no energy data in input CSV")
    out = []
    for layout, kind in sorted(series, key=lambda k: (_layout_key(k[0]), k[1])):
        out.append(
            {
                "layout": layout,
                "domain": kind,
                "points": sorted(series[(layout, kind)]),
            }
        )
    return out


def render_energy_time(series, dat_name: str) -> tuple[str, str]:
    """Scatter dataset + gnuplot script as strings (written only on success)."""
    dat = io.StringIO()
    plots = []
    for idx, s in enumerate(series):
        dat.write(f"# series {idx}: layout={s['layout']} domain={s['domain']}\n")
        dat.write("# wall_s joules\n")
        for wall, joules in s["points"]:
            dat.write(f"{wall:.6f} {joules:.6f}\n")
        dat.write("\n\n")
        plots.append(
            f"'{dat_name}' index {idx} using 1:2 with linespoints"
            f" title '{s['layout']} {s['domain']}'"
        )
    gp = (
        "set xlabel 'wall time [s]'\n"
        "set ylabel 'energy [J]'\n"
        "set key left top\n"
        "set grid\n"
        "plot \\\n    " + ", \\\n    ".join(plots) + "\n"
    )
    return dat.getvalue(), gp
