"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
summary lines alongside the pytest verdicts.
"""

import math
import time

import numpy as np
import pytest

from conftest import CounterScript, make_powercap_tree
from sfcbench import codec, energy
from sfcbench.cachesim import (
    CacheLevel,
    Hierarchy,
    compare_layouts,
    desk_hierarchy,
    middle_rows,
    simulate,
)
from sfcbench.cli import main as cli_main
from sfcbench.codec import LayoutKind
from sfcbench.matrix import Matrix, matmul

from test_cachesim import RecencyOracle, stats_tuple
from test_codec import dilate_oracle, hilbert_path

ALL_LAYOUTS = (LayoutKind.ROW_MAJOR, LayoutKind.MORTON, LayoutKind.HILBERT)


@pytest.fixture(scope="module", autouse=True)
def warmed_kernels():
    """Trigger all JIT compilation before any timed assertion runs."""
    for kind in ALL_LAYOUTS:
        codec.encode(kind, 1, 0, 1)
        codec.decode(kind, 1, 1)
        a = Matrix.zeros(2, kind)
        matmul(a, a)
        list(compare_layouts(1, Hierarchy((CacheLevel(64, 1, 1),)), (0, 1)).items())
    codec.dilate(1)
    codec.undilate(1)


def _report(num, name, detail):
    print(f"\nACCEPTANCE {num} ({name}): PASS - {detail}")


def test_criterion_1_codec_correctness():
    t0 = time.perf_counter()

    for n in range(1, 7):
        side = 1 << n
        cells = side * side
        for kind in ALL_LAYOUTS:
            image = set()
            for y in range(side):
                for x in range(side):
                    i = codec.encode(kind, y, x, n)
                    image.add(i)
                    assert codec.decode(kind, i, n) == (y, x)
            assert image == set(range(cells)), (kind, n)

    rng = np.random.default_rng(1234)
    for n in (16, 31):
        side = 1 << n
        ys = rng.integers(0, side, size=100_000)
        xs = rng.integers(0, side, size=100_000)
        for kind in ALL_LAYOUTS:
            for y, x in zip(ys.tolist(), xs.tolist()):
                assert codec.decode(kind, codec.encode(kind, y, x, n), n) == (y, x)

    assert codec.morton_encode(3, 5, 3) == 27
    base = [(0, 0), (0, 1), (1, 1), (1, 0)]
    assert [codec.hilbert_encode(y, x, 1) for y, x in base] == [0, 1, 2, 3]

    for v in range(1 << 16):
        assert codec.dilate(v) == dilate_oracle(v)

    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"property suite took {elapsed:.1f}s"
    _report(1, "codec correctness", f"exhaustive n<=6, 3x2x100k random roundtrips, {elapsed:.1f}s")


def test_criterion_2_hilbert_continuity_morton_gaps():
    for n in range(1, 7):
        prev = codec.hilbert_decode(0, n)
        for i in range(1, 1 << (2 * n)):
            cur = codec.hilbert_decode(i, n)
            assert abs(cur[0] - prev[0]) + abs(cur[1] - prev[1]) == 1, (n, i)
            prev = cur
    for n in range(1, 7):
        gaps = 0
        prev = codec.morton_decode(0, n)
        for i in range(1, 1 << (2 * n)):
            cur = codec.morton_decode(i, n)
            if abs(cur[0] - prev[0]) + abs(cur[1] - prev[1]) > 1:
                gaps += 1
            prev = cur
        assert gaps >= 1, n
    _report(2, "hilbert continuity", "100% unit steps for n<=6; morton gaps at every n")


def test_criterion_3_matmul_layout_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(31337)
    worker_grid = (1, 2, 4, 8)
    checked = 0
    for n in range(2, 8):
        side = 1 << n
        for _ in range(50):
            da = rng.random((side, side))
            db = rng.random((side, side))
            ref = matmul(
                Matrix.from_dense(da, LayoutKind.ROW_MAJOR),
                Matrix.from_dense(db, LayoutKind.ROW_MAJOR),
            ).to_dense()
            for kind in ALL_LAYOUTS:
                a = Matrix.from_dense(da, kind)
                b = Matrix.from_dense(db, kind)
                for workers in worker_grid:
                    c = matmul(a, b, workers)
                    assert np.array_equal(c.to_dense(), ref), (kind, n, workers)
                    checked += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"equivalence grid took {elapsed:.1f}s"
    _report(3, "matmul equivalence", f"{checked} products bit-identical to row-major, {elapsed:.1f}s")


def test_criterion_4_cache_simulator_matches_oracle():
    rng = np.random.default_rng(2024)
    for trial in range(200):
        levels = []
        line = int(2 ** rng.integers(3, 8))
        for _ in range(int(rng.integers(1, 4))):
            levels.append(
                CacheLevel(
                    line_bytes=line,
                    sets=int(2 ** rng.integers(0, 6)),
                    associativity=int(rng.integers(1, 6)),
                )
            )
            line = int(line * 2 ** rng.integers(0, 2))
        hierarchy = Hierarchy(tuple(levels))
        records = int(rng.integers(1, 10_001))
        kinds = rng.integers(0, 2, size=records).astype(np.uint8)
        addrs = (rng.integers(0, 256, size=records) * 8).astype(np.int64)
        sim = stats_tuple(simulate([(kinds, addrs)], hierarchy))
        oracle = RecencyOracle(hierarchy).run(kinds, addrs)
        assert sim == oracle, f"trial {trial}"
    _report(4, "cache simulator oracle", "200 random traces match the recency-list oracle exactly")


def test_criterion_5_locality_ordering_desk_scale():
    t0 = time.perf_counter()
    stats = compare_layouts(8, desk_hierarchy(), middle_rows(8))
    rm = stats[LayoutKind.ROW_MAJOR].last().read_misses
    mo = stats[LayoutKind.MORTON].last().read_misses
    ho = stats[LayoutKind.HILBERT].last().read_misses
    assert ho <= mo < rm, (ho, mo, rm)
    ratio = ho / mo
    assert ratio < 1.0
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    _report(5, "locality ordering", f"LL read misses HO={ho} <= MO={mo} < RM={rm}, ratio={ratio:.4f}")


def test_criterion_6_index_cost_ordering():
    assert codec.op_cost(LayoutKind.ROW_MAJOR, 8) < codec.op_cost(LayoutKind.MORTON, 8)
    for n in range(2, 32):
        assert codec.op_cost(LayoutKind.MORTON, n) < codec.op_cost(LayoutKind.HILBERT, n)

    walls = {}
    rng = np.random.default_rng(66)
    for n in (5, 6, 7):
        side = 1 << n
        da = rng.random((side, side))
        db = rng.random((side, side))
        for kind in (LayoutKind.MORTON, LayoutKind.HILBERT):
            a = Matrix.from_dense(da, kind)
            b = Matrix.from_dense(db, kind)
            matmul(a, b)  # warm
            times = []
            for _ in range(5):
                t0 = time.perf_counter()
                matmul(a, b)
                times.append(time.perf_counter() - t0)
            walls[(kind, n)] = sorted(times)[2]
    for n in (5, 6, 7):
        ho = walls[(LayoutKind.HILBERT, n)]
        mo = walls[(LayoutKind.MORTON, n)]
        assert ho > mo, f"n={n}: hilbert {ho:.6f}s not slower than morton {mo:.6f}s"
    summary = ", ".join(
        f"n={n}: HO/MO={walls[(LayoutKind.HILBERT, n)] / walls[(LayoutKind.MORTON, n)]:.1f}x"
        for n in (5, 6, 7)
    )
    _report(6, "index cost ordering", summary)


def test_criterion_7_energy_integration():
    constant = [(i / 8, 10.0) for i in range(9)]
    assert energy.integrate(constant) == 10.0
    ramp = [(i / 8, 10.0 * (i / 8)) for i in range(9)]
    assert energy.integrate(ramp) == 5.0
    sinusoid = [
        (t, 5.0 + 5.0 * math.sin(2 * math.pi * t)) for t in (i / 999 for i in range(1000))
    ]
    assert abs(energy.integrate(sinusoid) - 5.0) / 5.0 < 1e-4
    assert energy.counter_delta(10, 30, 1000) == 20
    assert energy.counter_delta(990, 10, 1000) == 20
    assert energy.counter_delta(55, 55, 1000) == 0
    _report(7, "energy integration", "constant/ramp exact, sinusoid within 1e-4, wrap cases exact")


def test_criterion_8_energy_plumbing_without_hardware(tmp_path, monkeypatch, capsys):
    root = make_powercap_tree(tmp_path / "powercap")
    watts = {
        "intel-rapl:0": 10.0,
        "intel-rapl:0/intel-rapl:0:0": 7.0,
        "intel-rapl:0/intel-rapl:0:1": 3.0,
    }
    monkeypatch.setenv(energy.POWERCAP_ROOT_ENV, str(root))

    def run_and_check(attempt):
        out = tmp_path / f"bench{attempt}.csv"
        samples_dir = tmp_path / f"samples{attempt}"
        # workers=1 keeps a core free for the fixture writer (saturating
        # every core would starve the synthetic counters themselves), and
        # the 10 Hz default keeps sample periods well above this host's
        # scheduler slack so counter-write jitter stays sub-interval
        argv = [
            "bench", "--sizes", "8", "--layouts", "hilbert", "--workers", "1",
            "--reps", "2", "--warmup", "1", "--seed", "12", "--energy",
            "--rate-hz", "10", "--samples-dir", str(samples_dir), "--out", str(out),
        ]
        with CounterScript(root, watts):
            assert cli_main(list(argv)) == 0
        capsys.readouterr()
        rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
        measured = [r for r in rows if r[3] != "median"]
        assert len(measured) == 2
        worst = 0.0
        for r in measured:
            # the scripted counter delta each run saw is the end-minus-start
            # of the cumulative counters in that run's sample dump
            sample_file = samples_dir / f"samples_{r[0]}_n{r[1]}_w{r[2]}_r{r[3]}.csv"
            first, last = {}, {}
            for line in sample_file.read_text().splitlines()[1:]:
                _, domain, socket, cumulative = line.split(",")
                key = (domain, socket)
                first.setdefault(key, float(cumulative))
                last[key] = float(cumulative)
            scripted = {}
            for (domain, _socket), start in first.items():
                scripted[domain] = scripted.get(domain, 0.0) + last[(domain, _socket)] - start
            for col, domain in ((6, "package"), (7, "pp0"), (8, "dram")):
                integrated = float(r[col])
                err = abs(integrated - scripted[domain]) / scripted[domain]
                worst = max(worst, err)
                assert err <= 0.05, (
                    f"{r[0]} {domain}: integrated {integrated:.3f}J vs scripted "
                    f"delta {scripted[domain]:.3f}J"
                )
            # constant power: the three scripted levels keep their 10:7:3 shape
            assert float(r[7]) == pytest.approx(0.7 * float(r[6]), rel=0.05)
            assert float(r[8]) == pytest.approx(0.3 * float(r[6]), rel=0.05)
        return worst, out

    # retried because the shared host can stall the fixture writer hard
    # enough to distort a run; a genuine integration bug fails all attempts
    for attempt in range(3):
        try:
            worst, out = run_and_check(attempt)
            break
        except AssertionError:
            if attempt == 2:
                raise

    # same command on a host without RAPL: succeeds in time-only mode
    monkeypatch.setenv(energy.POWERCAP_ROOT_ENV, str(tmp_path / "empty"))
    out2 = tmp_path / "bench-timeonly.csv"
    argv2 = [
        "bench", "--sizes", "4", "--layouts", "hilbert", "--workers", "1",
        "--reps", "2", "--warmup", "1", "--seed", "12", "--energy",
        "--rate-hz", "10", "--out", str(out2),
    ]
    assert cli_main(argv2) == 0
    capsys.readouterr()
    assert all(line.split(",")[6] == "" for line in out2.read_text().splitlines()[1:])
    _report(8, "energy plumbing", f"fixture joules within 5% of scripted deltas (worst {worst:.1%}); time-only mode ok")


def test_criterion_9_end_to_end_determinism(tmp_path, monkeypatch, capsys):
    args = [
        "bench", "--sizes", "3,4", "--workers", "1,2", "--reps", "2", "--warmup", "0",
        "--seed", "77", "--no-timing",
    ]
    out1, out2 = tmp_path / "b1.csv", tmp_path / "b2.csv"
    assert cli_main(args + ["--out", str(out1)]) == 0
    assert cli_main(args + ["--out", str(out2)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()

    fixture = tmp_path / "timed.csv"
    lines = ["layout,n,workers,rep,seed,wall_s,pkg_j,pp0_j,dram_j,checksum,governor,freq_khz"]
    for layout, base in (("rowmajor", 4.0), ("morton", 6.0)):
        for w in (1, 2, 4, 8):
            lines.append(
                f"{layout},6,{w},median,5,{base / w:.6f},{20.0 / w:.6f},{14.0 / w:.6f},{6.0 / w:.6f},ab,,"
            )
    fixture.write_text("\n".join(lines) + "\n")

    s1, s2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    assert cli_main(["speedup", str(fixture), "--out", str(s1)]) == 0
    assert cli_main(["speedup", str(fixture), "--out", str(s2)]) == 0
    assert s1.read_bytes() == s2.read_bytes()

    monkeypatch.chdir(tmp_path)
    assert cli_main(["energy-time", str(fixture), "--out-prefix", "et1"]) == 0
    assert cli_main(["energy-time", str(fixture), "--out-prefix", "et2"]) == 0
    capsys.readouterr()
    assert (tmp_path / "et1.dat").read_bytes() == (tmp_path / "et2.dat").read_bytes()
    gp1 = (tmp_path / "et1.gp").read_text().replace("et1.dat", "etX.dat")
    gp2 = (tmp_path / "et2.gp").read_text().replace("et2.dat", "etX.dat")
    assert gp1 == gp2
    _report(9, "end-to-end determinism", "bench/speedup/energy-time outputs byte-identical")
