"""Space-filling-curve matrix layouts with locality and energy measurement.

Square float64 matrices can be stored row-major, Morton (Z-order) or
Hilbert ordered; one triple-loop multiplication runs on all three, so the
layouts trade index-computation cost against spatial locality while the
numerical results stay bit-identical.  A trace-driven cache simulator and
a RAPL-based energy meter quantify that trade-off.
"""

from .bench import (
    BenchResult,
    ExperimentConfig,
    energy_time_series,
    read_bench_csv,
    render_energy_time,
    run_bench,
    speedup_table,
    write_bench_csv,
    write_speedup_csv,
)
from .cachesim import (
    CacheLevel,
    Hierarchy,
    LevelStats,
    SimStats,
    compare_layouts,
    default_hierarchy,
    desk_hierarchy,
    dump_trace,
    load_trace,
    materialize,
    matmul_trace,
    middle_rows,
    region_bases,
    simulate,
)
from .codec import (
    LayoutKind,
    decode,
    dilate,
    encode,
    hilbert_decode,
    hilbert_encode,
    morton_decode,
    morton_encode,
    op_cost,
    rowmajor_decode,
    rowmajor_encode,
    undilate,
)
from .energy import (
    EnergyMeter,
    EnergyReport,
    RaplDomain,
    counter_delta,
    discover_domains,
    integrate,
    measure,
    power_log,
    read_counter_j,
    write_samples_csv,
)
from .matrix import Matrix, matmul, random_matrix

__version__ = "0.1.0"

__all__ = [
    "BenchResult",
    "CacheLevel",
    "EnergyMeter",
    "EnergyReport",
    "ExperimentConfig",
    "Hierarchy",
    "LayoutKind",
    "LevelStats",
    "Matrix",
    "RaplDomain",
    "SimStats",
    "compare_layouts",
    "counter_delta",
    "decode",
    "default_hierarchy",
    "desk_hierarchy",
    "dilate",
    "discover_domains",
    "dump_trace",
    "encode",
    "energy_time_series",
    "hilbert_decode",
    "hilbert_encode",
    "integrate",
    "load_trace",
    "materialize",
    "matmul",
    "matmul_trace",
    "measure",
    "middle_rows",
    "morton_decode",
    "morton_encode",
    "op_cost",
    "power_log",
    "random_matrix",
    "read_bench_csv",
    "read_counter_j",
    "region_bases",
    "render_energy_time",
    "rowmajor_decode",
    "rowmajor_encode",
    "run_bench",
    "simulate",
    "speedup_table",
    "undilate",
    "write_bench_csv",
    "write_samples_csv",
    "write_speedup_csv",
]
