"""The full benchmark pipeline on a desk-scale grid.

Runs a small layout x size x workers grid, writes the results CSV, then
derives the parallel-speedup table and the energy-vs-time dataset with its
gnuplot script (when energy columns are present).

Equivalent CLI:
  sfcbench bench --sizes 5,6 --workers 1,2 --reps 3 --out bench.csv
  sfcbench speedup bench.csv
  sfcbench energy-time bench.csv --out-prefix energy_time

Run: python3 demos/05_bench_pipeline.py
"""

import io

from sfcbench import (
    ExperimentConfig,
    energy_time_series,
    read_bench_csv,
    render_energy_time,
    run_bench,
    speedup_table,
    write_bench_csv,
    write_speedup_csv,
)

cfg = ExperimentConfig(sizes=(5, 6), worker_counts=(1, 2), repetitions=3, warmup=1, seed=42)
print(f"grid: layouts={[l.label for l in cfg.layouts]} sizes={cfg.sizes} workers={cfg.worker_counts}")
result = run_bench(cfg, progress=lambda msg: print("  running", msg))

with open("bench.csv", "w") as fh:
    write_bench_csv(result.rows, fh)
print(f"\nwrote bench.csv ({len(result.rows)} rows incl. medians)")

rows = read_bench_csv("bench.csv")
medians = [r for r in rows if r["rep"] == "median"]
print("\nmedian wall seconds:")
for r in medians:
    print(f"  {r['layout']:9s} n={r['n']} workers={r['workers']}: {float(r['wall_s']):.4f} s")

buf = io.StringIO()
write_speedup_csv(speedup_table(rows), buf)
print("\nspeedup table:")
print("  " + "\n  ".join(buf.getvalue().splitlines()))

try:
    series = energy_time_series(rows)
except ValueError as exc:
    print(f"\nenergy-vs-time skipped: {exc} (rerun with ExperimentConfig(energy=True) on a RAPL host)")
else:
    dat, gp = render_energy_time(series, "energy_time.dat")
    with open("energy_time.dat", "w") as fh:
        fh.write(dat)
    with open("energy_time.gp", "w") as fh:
        fh.write(gp)
    print(f"\nwrote energy_time.dat ({len(series)} series) and energy_time.gp")
