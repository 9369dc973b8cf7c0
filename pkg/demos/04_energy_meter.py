"""Energy metering: sample RAPL counters around a workload.

On a Linux host with readable powercap counters this measures a real
matmul; elsewhere it falls back to a synthetic counter tree so the whole
pipeline (discovery, sampling, wrap handling, trapezoid integration) still
runs.  Point SFC_POWERCAP_ROOT at a custom tree to test without hardware.

Run: python3 demos/04_energy_meter.py
"""

import os
import tempfile
import threading
import time
from pathlib import Path

import numpy as np

from sfcbench import EnergyMeter, LayoutKind, Matrix, matmul, write_samples_csv


def synthetic_tree(base: Path) -> Path:
    pkg = base / "intel-rapl:0"
    for path, name in ((pkg, "package-0"), (pkg / "intel-rapl:0:0", "core"), (pkg / "intel-rapl:0:1", "dram")):
        path.mkdir(parents=True)
        (path / "name").write_text(name + "\n")
        (path / "max_energy_range_uj").write_text("262143328850\n")
        (path / "energy_uj").write_text("0\n")
    return base


def drive_counters(base: Path, stop: threading.Event) -> None:
    watts = {"intel-rapl:0": 35.0, "intel-rapl:0/intel-rapl:0:0": 24.0, "intel-rapl:0/intel-rapl:0:1": 6.0}
    t0 = time.perf_counter()
    while not stop.wait(0.002):
        elapsed = time.perf_counter() - t0
        for rel, w in watts.items():
            target = base / rel / "energy_uj"
            tmp = target.with_suffix(".tmp")
            tmp.write_text(str(int(w * elapsed * 1e6)))
            os.replace(tmp, target)


meter = EnergyMeter(rate_hz=10)
stop = threading.Event()
if not meter.available:
    print("no readable RAPL domains on this host; using a synthetic counter tree\n")
    root = synthetic_tree(Path(tempfile.mkdtemp()) / "powercap")
    threading.Thread(target=drive_counters, args=(root, stop), daemon=True).start()
    meter = EnergyMeter(root=root, rate_hz=10)

print("domains:", ", ".join(d.label for d in meter.domains) or "(none)")

rng = np.random.default_rng(3)
a = Matrix.from_dense(rng.random((256, 256)), LayoutKind.MORTON)
matmul(a, a)  # warm the kernel outside the measured window

result, report = meter.measure(lambda: matmul(a, a))
stop.set()

print(f"\nwall time: {report.wall_seconds:.3f} s")
for kind, dom in sorted(report.energy.items()):
    print(f"{kind:8s} integrated {dom.joules:8.3f} J   direct delta {dom.joules_direct:8.3f} J")
for note in report.notes:
    print("note:", note)

with open("energy_samples.csv", "w") as fh:
    write_samples_csv(report, fh)
print("\nwrote energy_samples.csv")
