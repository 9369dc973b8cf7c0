"""RAPL energy sampling via the Linux powercap filesystem.

Cumulative per-domain energy counters (package, power plane 0, DRAM) are
sampled at a fixed rate while a workload runs; the sample deltas give a
power log, which is integrated back to joules with the trapezoidal rule.
Both the integrated figure and the raw end-minus-start counter delta are
reported so the two routes can be cross-checked.

The powercap root defaults to /sys/class/powercap and can be redirected
with the SFC_POWERCAP_ROOT environment variable, which is also how the
test fixtures inject synthetic counter trees.  Hosts without RAPL degrade
to time-only measurement instead of failing.

Counters are exposed in microjoules (the underlying registers tick in
~15.3 uJ units); conversion to joules is an exact division by 1e6.
"""

from __future__ import annotations

import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

POWERCAP_ROOT_ENV = "SFC_POWERCAP_ROOT"
DEFAULT_POWERCAP_ROOT = "/sys/class/powercap"

PACKAGE = "package"
PP0 = "pp0"
DRAM = "dram"

_COVERAGE_NOTE = (
    "RAPL covers CPU package and DRAM domains only; on the dual-socket "
    "Sandy Bridge-EP reference system these account for roughly 38% of "
    "wall-plug power under full load."
)

_PKG_DIR = re.compile(r"^intel-rapl:(\d+)$")
_SUB_DIR = re.compile(r"^intel-rapl:(\d+):(\d+)$")
_PKG_NAME = re.compile(r"^package-(\d+)$")


@dataclass(frozen=True)
class RaplDomain:
    kind: str  # one of PACKAGE, PP0, DRAM
    socket: int
    path: Path
    max_range_j: float

    @property
    def label(self) -> str:
        return f"{self.kind}-{self.socket}"


def powercap_root(root=None) -> Path:
    if root is not None:
        return Path(root)
    return Path(os.environ.get(POWERCAP_ROOT_ENV, DEFAULT_POWERCAP_ROOT))


def _classify(name: str, fallback_socket: int) -> tuple[str, int] | None:
    m = _PKG_NAME.match(name)
    if m:
        return PACKAGE, int(m.group(1))
    if name in ("core", "pp0"):
        return PP0, fallback_socket
    if name == "dram":
        return DRAM, fallback_socket
    return None  # uncore, psys, ... are out of scope


def _read_domain_dir(path: Path, fallback_socket: int) -> RaplDomain | None:
    name = (path / "name").read_text().strip()
    classified = _classify(name, fallback_socket)
    if classified is None:
        return None
    kind, socket = classified
    max_uj = int((path / "max_energy_range_uj").read_text().strip())
    # counters are often root-only even when the tree itself is listable;
    # probe now so lack of privilege surfaces as PermissionError
    (path / "energy_uj").read_text()
    return RaplDomain(kind=kind, socket=socket, path=path, max_range_j=max_uj / 1e6)


def discover_domains(root=None) -> list[RaplDomain]:
    """Walk the powercap tree and return the supported RAPL domains.

    Returns an empty list when the tree is absent (non-Linux hosts, no
    RAPL); raises PermissionError when the tree exists but is unreadable,
    so callers can tell lack of privilege apart from lack of hardware.
    """
    base = powercap_root(root)
    if not base.is_dir():
        return []
    found: dict[tuple[str, int], RaplDomain] = {}
    try:
        entries = sorted(p for p in base.iterdir() if p.is_dir())
        for entry in entries:
            m = _PKG_DIR.match(entry.name)
            if not m:
                continue
            socket = int(m.group(1))
            dom = _read_domain_dir(entry, socket)
            if dom is not None:
                found.setdefault((dom.kind, dom.socket), dom)
            for sub in sorted(p for p in entry.iterdir() if p.is_dir()):
                if _SUB_DIR.match(sub.name):
                    dom = _read_domain_dir(sub, socket)
                    if dom is not None:
                        found.setdefault((dom.kind, dom.socket), dom)
        # flat layouts list subdomains next to their parents
        for entry in entries:
            m = _SUB_DIR.match(entry.name)
            if not m:
                continue
            dom = _read_domain_dir(entry, int(m.group(1)))
            if dom is not None:
                found.setdefault((dom.kind, dom.socket), dom)
    except PermissionError:
        raise
    except OSError:
        return []
    return sorted(found.values(), key=lambda d: (d.kind, d.socket))


def read_counter_j(domain: RaplDomain) -> float:
    """Current cumulative energy of a domain in joules."""
    return int((domain.path / "energy_uj").read_text().strip()) / 1e6


def counter_delta(prev_j: float, next_j: float, max_range_j: float) -> float:
    """Energy between two counter readings, correcting one wrap at most.

    Valid while the sampling interval is well below the counter's wrap
    period, which holds for >= 1 Hz sampling at realistic power draws.
    """
    if next_j >= prev_j:
        return next_j - prev_j
    return next_j + max_range_j - prev_j


def power_log(times, cumulative_j, max_range_j) -> list[tuple[float, float]]:
    """(timestamp, watts) points from cumulative counter samples.

    Power over each interval is the backward difference divided by the
    interval, placed at the interval midpoint to minimise bias.  Counters
    tick in coarse quanta (~15.3 uJ), so intervals in which the counter
    did not advance are below granularity and are coalesced into the next
    advancing interval rather than reported as spurious zero-power dips.
    """
    points = []
    span_start = None
    for i in range(1, len(times)):
        if times[i] <= times[i - 1]:
            raise ValueError("sample timestamps must be strictly increasing")
        if span_start is None:
            span_start = times[i - 1]
        delta = counter_delta(cumulative_j[i - 1], cumulative_j[i], max_range_j)
        if delta == 0 and i < len(times) - 1:
            continue
        points.append(((span_start + times[i]) / 2, delta / (times[i] - span_start)))
        span_start = None
    return points


def integrate(points) -> float:
    """Trapezoidal integral of (t, watts) points, in joules."""
    points = list(points)
    if len(points) < 2:
        raise ValueError("integration needs at least 2 power samples")
    total = 0.0
    for (t0, w0), (t1, w1) in zip(points, points[1:]):
        total += (w0 + w1) / 2 * (t1 - t0)
    return total


@dataclass
class DomainSamples:
    domain: RaplDomain
    times: list = field(default_factory=list)  # seconds since meter start
    joules: list = field(default_factory=list)  # cumulative counter readings

    def energy_direct(self) -> float:
        total = 0.0
        for prev, nxt in zip(self.joules, self.joules[1:]):
            total += counter_delta(prev, nxt, self.domain.max_range_j)
        return total

    def energy_integrated(self) -> float:
        """Trapezoid over the midpoint power log, with the half intervals
        before the first and after the last midpoint covered by constant
        extension so the integral spans the whole sample window."""
        log = power_log(self.times, self.joules, self.domain.max_range_j)
        if not log:
            raise ValueError("need at least 2 samples to integrate")
        if len(log) == 1:
            return log[0][1] * (self.times[-1] - self.times[0])
        total = integrate(log)
        total += log[0][1] * (log[0][0] - self.times[0])
        total += log[-1][1] * (self.times[-1] - log[-1][0])
        return total


@dataclass
class DomainEnergy:
    joules: float  # trapezoid over the power log
    joules_direct: float  # sum of raw counter deltas


@dataclass
class EnergyReport:
    wall_seconds: float
    samples: list  # DomainSamples per (kind, socket)
    energy: dict  # kind -> DomainEnergy, summed over sockets
    notes: list

    @property
    def time_only(self) -> bool:
        return not self.samples


class EnergyMeter:
    """Samples all discovered RAPL domains while a workload runs.

    The sampler is a background thread sharing only a stop event with the
    workload; it takes one sample per tick plus one final sample after the
    workload completes, so even a zero-length workload yields two samples.
    Sampler failures mid-run are recorded as notes and never abort the
    workload.
    """

    def __init__(self, root=None, rate_hz: float = 10.0):
        if not 1.0 <= rate_hz <= 1000.0:
            raise ValueError(f"rate_hz must be within [1, 1000], got {rate_hz}")
        self.rate_hz = rate_hz
        self.notes: list[str] = []
        try:
            self.domains = discover_domains(root)
        except PermissionError as exc:
            self.domains = []
            self.notes.append(f"energy counters present but not readable: {exc}")

    @property
    def available(self) -> bool:
        return bool(self.domains)

    def measure(self, workload: Callable[[], object]):
        """Run ``workload()`` under sampling; returns (result, EnergyReport)."""
        notes = list(self.notes)
        samples = [DomainSamples(d) for d in self.domains]
        failed: set[str] = set()
        t_start = time.perf_counter()

        def take_sample():
            now = time.perf_counter() - t_start
            for ds in samples:
                try:
                    value = read_counter_j(ds.domain)
                except (OSError, ValueError) as exc:
                    if ds.domain.label not in failed:
                        failed.add(ds.domain.label)
                        notes.append(f"sampler: {ds.domain.label}: {exc}")
                    continue
                ds.times.append(now)
                ds.joules.append(value)

        stop = threading.Event()
        period = 1.0 / self.rate_hz

        def run_sampler():
            next_tick = time.perf_counter() + period
            while not stop.wait(max(0.0, next_tick - time.perf_counter())):
                take_sample()
                next_tick += period
                now = time.perf_counter()
                if next_tick < now:  # overslept: skip missed ticks, never burst
                    next_tick = now + period

        take_sample()
        sampler = threading.Thread(target=run_sampler, name="rapl-sampler", daemon=True)
        sampler.start()
        w0 = time.perf_counter()
        try:
            result = workload()
        finally:
            wall = time.perf_counter() - w0
            stop.set()
            sampler.join()
            take_sample()

        energy: dict[str, DomainEnergy] = {}
        for ds in samples:
            if len(ds.times) < 2:
                if ds.times or ds.domain.label not in failed:
                    notes.append(f"sampler: {ds.domain.label}: too few samples to integrate")
                continue
            agg = energy.setdefault(ds.domain.kind, DomainEnergy(0.0, 0.0))
            agg.joules += ds.energy_integrated()
            agg.joules_direct += ds.energy_direct()
        if not samples:
            notes.append("no RAPL domains found; running in time-only mode")
        notes.append(_COVERAGE_NOTE)
        return result, EnergyReport(wall, samples, energy, notes)


def measure(workload: Callable[[], object], rate_hz: float = 10.0, root=None):
    return EnergyMeter(root=root, rate_hz=rate_hz).measure(workload)


def write_samples_csv(report: EnergyReport, fh) -> None:
    """Per-run sample dump: t_s,domain,socket,cumulative_j (9 significant digits)."""
    fh.write("t_s,domain,socket,cumulative_j\n")
    for ds in report.samples:
        for t, j in zip(ds.times, ds.joules):
            fh.write(f"{t:.9g},{ds.domain.kind},{ds.domain.socket},{j:.9g}\n")
