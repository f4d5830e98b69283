import csv
import io

import numpy as np
import pytest

from acmix import bench, cli
from acmix.container import ArchiveHeader
from acmix.corpus import PERIODS, RASTER_WIDTHS, generate, periodic


def run(*argv):
    out = io.StringIO()
    code = cli.main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def period7(tmp_path):
    path = tmp_path / "p7.bin"
    rng = np.random.default_rng(7)
    path.write_bytes(np.resize(rng.integers(0, 256, 7, dtype=np.uint8), 2000).tobytes())
    return path


def test_analyze_single_lag(period7):
    code, out = run("analyze", period7, "--n", 1)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["rank", "lag", "score"]
    assert rows[1][:2] == ["1", "7"] and len(rows) == 2


def test_analyze_is_deterministic(period7):
    assert run("analyze", period7, "--n", 5) == run("analyze", period7, "--n", 5)


@pytest.mark.parametrize("argv", [
    ["analyze", "x", "--n", "0"],
    ["analyze", "x", "--n", "abc"],
    ["analyze", "x", "--mode", "other"],
    ["analyze", "x", "--min-lag", "9", "--max-lag", "3"],
    ["compress", "a"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_2(argv, period7):
    argv = [str(period7) if a == "x" else a for a in argv]
    assert run(*argv)[0] == 2


def test_planar_lags_beyond_n_is_usage_error(period7, tmp_path):
    assert run("compress", period7, tmp_path / "o", "--n", 3, "--planar", "--planar-lags", 4)[0] == 2


def test_compress_decompress(period7, tmp_path):
    arc, back = tmp_path / "a.accm", tmp_path / "back.bin"
    code, out = run("compress", period7, arc, "--n", 4, "--mem", 1)
    assert code == 0 and "2000 ->" in out
    assert ArchiveHeader.parse(arc.read_bytes()).table_bits == 18
    assert run("decompress", arc, back)[0] == 0
    assert back.read_bytes() == period7.read_bytes()


def test_memory_env_default(period7, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.MEM_ENV, "2")
    run("compress", period7, tmp_path / "a", "--n", 2)
    assert ArchiveHeader.parse((tmp_path / "a").read_bytes()).table_bits == 19
    run("compress", period7, tmp_path / "b", "--n", 2, "--mem", 1)
    assert ArchiveHeader.parse((tmp_path / "b").read_bytes()).table_bits == 18
    monkeypatch.setenv(cli.MEM_ENV, "lots")
    assert run("compress", period7, tmp_path / "c", "--n", 2)[0] == 2


@pytest.mark.parametrize("mib,bits", [(1, 18), (16, 22), (3, 19), (1 << 20, 28), (0, 16)])
def test_table_bits_for(mib, bits):
    assert cli.table_bits_for(mib) == bits


def test_runtime_errors_exit_1(tmp_path):
    assert run("compress", tmp_path / "missing", tmp_path / "o")[0] == 1
    bad = tmp_path / "bad.accm"
    bad.write_bytes(b"ACCM\x01garbage")
    assert run("decompress", bad, tmp_path / "o")[0] == 1
    empty = tmp_path / "empty"
    empty.write_bytes(b"")
    assert run("analyze", empty)[0] == 1
    assert run("bench", tmp_path / "nodir")[0] == 1


def test_empty_file_round_trip(tmp_path):
    src = tmp_path / "e"
    src.write_bytes(b"")
    assert run("compress", src, tmp_path / "e.accm")[0] == 0
    assert (tmp_path / "e.accm").stat().st_size == 18
    assert run("decompress", tmp_path / "e.accm", tmp_path / "e.out")[0] == 0
    assert (tmp_path / "e.out").read_bytes() == b""


def test_gen_corpus_deterministic(tmp_path):
    assert run("gen-corpus", tmp_path / "a", "--seed", 3)[0] == 0
    run("gen-corpus", tmp_path / "b", "--seed", 3)
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(names) == len(PERIODS) + len(RASTER_WIDTHS) + 2
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_corpus_contents():
    files = generate(0)
    assert generate(0) == files
    assert generate(1)["random.bin"] != files["random.bin"]
    assert len(files["raster_w256.rgb"]) == 256 * 3 * 256
    text = files["markov.txt"].decode("ascii")
    assert text.count(" ") > 1000
    p = np.frombuffer(periodic(13), np.uint8).astype(int)
    # consecutive periods differ by at most one step per byte
    assert np.all(np.minimum((p[13:] - p[:-13]) % 256, (p[:-13] - p[13:]) % 256) <= 1)


def test_bench_csv(tmp_path):
    d = tmp_path / "c"
    d.mkdir()
    (d / "one.bin").write_bytes(periodic(13, size=3000))
    (d / "two.txt").write_bytes(b"banana " * 300)
    report = tmp_path / "r.csv"
    assert run("bench", d, "--csv", report, "--n", 4, "--mem", 1)[0] == 0
    rows = list(csv.DictReader(report.open()))
    assert list(rows[0].keys()) == list(bench.CSV_COLUMNS)
    assert [(r["file"], r["config"].split()[0]) for r in rows] == [
        ("one.bin", "discovered"), ("one.bin", "adjacent"), ("two.txt", "discovered"), ("two.txt", "adjacent")]
    for r in rows:
        assert float(r["ratio"]) == pytest.approx(int(r["compressed"]) / int(r["original"]), abs=1e-6)


def test_bench_single_baseline_to_stdout(tmp_path):
    d = tmp_path / "c"
    d.mkdir()
    (d / "x").write_bytes(b"abcd" * 100)
    code, out = run("bench", d, "--baseline", "adjacent", "--n", 3, "--mem", 1)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and rows[0]["config"].startswith("adjacent n=3")


def test_bench_fails_on_broken_round_trip(tmp_path, monkeypatch):
    d = tmp_path / "c"
    d.mkdir()
    (d / "x").write_bytes(b"abcd" * 100)
    monkeypatch.setattr(bench, "decompress", lambda a: b"wrong")
    report = tmp_path / "r.csv"
    assert run("bench", d, "--csv", report, "--n", 3, "--mem", 1)[0] == 1
    assert not report.exists()


def test_bench_record_ratio():
    r = bench.BenchRecord("f", 200, 50, 1.0, 2.0, "cfg")
    assert r.ratio == 0.25
    assert bench.BenchRecord("f", 0, 18, 0, 0, "cfg").ratio == 0.0
