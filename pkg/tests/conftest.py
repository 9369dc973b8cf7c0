import subprocess
import sys
import time
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("sfcbench", deadline=None)
settings.load_profile("sfcbench")

RANGE_UJ = 262143328850  # large enough that fixtures never wrap


def make_powercap_tree(base: Path, sockets: int = 1, pp0: bool = True, dram: bool = True) -> Path:
    """Synthetic powercap tree understood by energy.discover_domains."""
    for sock in range(sockets):
        pkg = base / f"intel-rapl:{sock}"
        domains = [(pkg, f"package-{sock}")]
        sub = 0
        if pp0:
            domains.append((pkg / f"intel-rapl:{sock}:{sub}", "core"))
            sub += 1
        if dram:
            domains.append((pkg / f"intel-rapl:{sock}:{sub}", "dram"))
        for path, name in domains:
            path.mkdir(parents=True, exist_ok=True)
            (path / "name").write_text(name + "\n")
            (path / "max_energy_range_uj").write_text(f"{RANGE_UJ}\n")
            (path / "energy_uj").write_text("0\n")
    return base


_SCRIPT = """
import os, sys, time
try:
    os.nice(-15)  # reduce preemption by the workload under test
except OSError:
    pass
pairs = [arg.rsplit('=', 1) for arg in sys.argv[1:]]
t0 = time.perf_counter()
while True:
    elapsed = time.perf_counter() - t0
    for path, watts in pairs:
        tmp = path + '.tmp'
        with open(tmp, 'w') as fh:
            fh.write(str(int(float(watts) * elapsed * 1e6)))
        os.replace(tmp, path)
    time.sleep(0.001)
"""


class CounterScript:
    """Drives fixture energy_uj files like counters of constant-power
    domains.  Runs as a subprocess so it cannot be starved by GIL-holding
    work in the test process; __enter__ waits until the writer tracks real
    time so cold-start stalls never overlap a measurement."""

    def __init__(self, root: Path, watts: dict):
        first_rel, self._first_watts = next(iter(watts.items()))
        self._first_path = root / first_rel / "energy_uj"
        self.args = [f"{root / rel / 'energy_uj'}={w}" for rel, w in watts.items()]
        self._proc = None

    def _implied_elapsed(self) -> float:
        try:
            return int(self._first_path.read_text()) / self._first_watts / 1e6
        except (OSError, ValueError):
            return 0.0

    def __enter__(self):
        self._proc = subprocess.Popen([sys.executable, "-c", _SCRIPT, *self.args])
        # handshake: demand several consecutive polls where the counter
        # advanced in lockstep with the wall clock
        deadline = time.perf_counter() + 5.0
        streak = 0
        prev_t, prev_e = time.perf_counter(), self._implied_elapsed()
        while streak < 8 and time.perf_counter() < deadline:
            time.sleep(0.02)
            now, elapsed = time.perf_counter(), self._implied_elapsed()
            lag = (now - prev_t) - (elapsed - prev_e)
            streak = streak + 1 if elapsed > prev_e and abs(lag) < 0.015 else 0
            prev_t, prev_e = now, elapsed
        return self

    def __exit__(self, *exc):
        self._proc.terminate()
        self._proc.wait()


@pytest.fixture
def powercap_tree(tmp_path):
    return make_powercap_tree(tmp_path / "powercap")
