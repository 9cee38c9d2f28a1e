import numpy as np
import pytest

from freqdir import bench
from freqdir.cli import main
from freqdir.data import write_matrix
from freqdir.sketchfile import SketchFile


@pytest.fixture
def matrix(tmp_path):
    p = tmp_path / "a.fdmx"
    assert main(["gen", "--n", "300", "--d", "20", "--m", "4", "--seed", "1", "--out", str(p)]) == 0
    return p


def test_gen_refuses_overwrite(matrix):
    with pytest.raises(SystemExit, match="exists"):
        main(["gen", "--n", "10", "--d", "5", "--m", "2", "--out", str(matrix)])
    assert main(["gen", "--n", "10", "--d", "5", "--m", "2", "--eta", "3", "--out", str(matrix), "--force"]) == 0


def test_gen_bad_parameters(tmp_path):
    with pytest.raises(SystemExit):
        main(["gen", "--n", "10", "--d", "5", "--m", "9", "--out", str(tmp_path / "x.fdmx")])


@pytest.mark.parametrize("algo", bench.ALGORITHMS)
def test_sketch_every_algorithm(tmp_path, matrix, algo, capsys):
    out = tmp_path / f"{algo}.fdsk"
    assert main(["sketch", "--algo", algo, "--ell", "6", "--in", str(matrix), "--out", str(out)]) == 0
    line = capsys.readouterr().out
    assert f"algo={algo}" in line and "rows=300" in line and "io_seconds=" in line
    rec = SketchFile.read(str(out))
    assert rec.kind == algo and rec.matrix.shape == (6, 20)


def test_merge_and_eval(tmp_path, capsys):
    a = np.random.default_rng(0).standard_normal((200, 12))
    paths = []
    for i, part in enumerate(np.array_split(a, 3)):
        mp = tmp_path / f"p{i}.csv"
        write_matrix(str(mp), part)
        sp = tmp_path / f"p{i}.fdsk"
        main(["sketch", "--ell", "5", "--in", str(mp), "--out", str(sp)])
        paths.append(str(sp))
    full = tmp_path / "full.fdmx"
    write_matrix(str(full), a)
    merged = tmp_path / "m.fdsk"
    assert main(["merge", *paths, "--out", str(merged)]) == 0
    rec = SketchFile.read(str(merged))
    assert rec.rows_seen == 200
    capsys.readouterr()
    assert main(["eval", "--matrix", str(full), "--sketch", str(merged), "--k", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("algo,ell,k")
    fields = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(fields["covar_err"]) <= 1 / 5 + 1e-8
    assert float(fields["proj_err"]) <= 5 / 3 + 1e-8


def test_merge_mismatch(tmp_path, matrix):
    s1, s2, s3 = (tmp_path / f"{n}.fdsk" for n in "abc")
    main(["sketch", "--ell", "4", "--in", str(matrix), "--out", str(s1)])
    main(["sketch", "--ell", "5", "--in", str(matrix), "--out", str(s2)])
    main(["sketch", "--algo", "hash", "--ell", "4", "--in", str(matrix), "--out", str(s3)])
    with pytest.raises(SystemExit, match="ell=5"):
        main(["merge", str(s1), str(s2), "--out", str(tmp_path / "m.fdsk")])
    with pytest.raises(SystemExit, match="only Frequent Directions"):
        main(["merge", str(s1), str(s3), "--out", str(tmp_path / "m.fdsk")])


def test_eval_naive_identity(tmp_path, capsys):
    d = 8
    mp = tmp_path / "eye.csv"
    write_matrix(str(mp), np.eye(d))
    sp = tmp_path / "n.fdsk"
    main(["sketch", "--algo", "naive", "--ell", "3", "--in", str(mp), "--out", str(sp)])
    capsys.readouterr()
    main(["eval", "--matrix", str(mp), "--sketch", str(sp), "--k", "2"])
    row = capsys.readouterr().out.strip().splitlines()[1].split(",")
    assert float(row[4]) == pytest.approx(1 / d)


def test_eval_degenerate_exit_code(tmp_path, capsys):
    mp = tmp_path / "r1.csv"
    write_matrix(str(mp), np.outer(np.arange(1.0, 6.0), [1.0, 2.0, 3.0]))
    sp = tmp_path / "s.fdsk"
    main(["sketch", "--ell", "2", "--in", str(mp), "--out", str(sp)])
    assert main(["eval", "--matrix", str(mp), "--sketch", str(sp), "--k", "1"]) == 1
    assert "degenerate" in capsys.readouterr().err


class TestConfig:
    def test_grammar(self):
        cfg = bench.BenchConfig.from_text(
            "# comment\nn = 100, 200\nd = 16\neta = 3.5\nalgorithms = fd, hash  # trailing\n"
            "ell = 4:12:4\nk = 2\ntrials = 2\nevaluate = yes\n")
        assert cfg.n == [100, 200] and cfg.d == [16] and cfg.zeta == 3.5
        assert cfg.algorithms == ["fd", "hash"]
        assert cfg.ells == [4, 8, 12]
        assert cfg.evaluate

    @pytest.mark.parametrize("text", ["ell 4", "foo = 1", "ell = 1:5", "algorithms = nope",
                                      "k = 5\nell = 5", "trials = 1, 2", "evaluate = maybe"])
    def test_errors(self, text):
        with pytest.raises(bench.ConfigError):
            bench.BenchConfig.from_text(text)

    def test_cell_seed_stable(self):
        assert bench.cell_seed(0, "sample", 10, 0) == bench.cell_seed(0, "sample", 10, 0)
        assert bench.cell_seed(0, "sample", 10, 0) != bench.cell_seed(0, "sample", 10, 1)


def _bench_cfg(tmp_path, extra=""):
    p = tmp_path / "b.cfg"
    p.write_text("n = 300\nd = 20\nm = 3\nalgorithms = fd-fast, sample, hash, project, naive\n"
                 "ell = 6:9:3\nk = 2\ntrials = 3\n" + extra)
    return p


def test_bench_deterministic(tmp_path, monkeypatch):
    monkeypatch.setenv("FD_THREADS", "2")
    cfg = _bench_cfg(tmp_path)
    o1, o2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert main(["bench", str(cfg), "--out", str(o1)]) == 0
    monkeypatch.setenv("FD_THREADS", "1")
    assert main(["bench", str(cfg), "--out", str(o2)]) == 0

    def strip_time(path):
        lines = path.read_text().splitlines()
        col = lines[0].split(",").index("sketch_seconds")
        return [[v for i, v in enumerate(l.split(",")) if i != col] for l in lines]

    rows1 = strip_time(o1)
    assert rows1 == strip_time(o2)
    assert rows1[0][-2:] == ["n", "d"]
    assert len(rows1) == 1 + 5 * 2 * 3 + 5 * 2
    medians = [r for r in rows1 if r[3] == "median" and r[0] == "fd-fast"]
    assert all(float(r[4]) <= float(r[6]) for r in medians)


def test_bench_failed_cell(tmp_path, capsys):
    cfg = _bench_cfg(tmp_path, "algorithms = brute\nd = 3000\nn = 5\nm = 2\nell = 4\ntrials = 1\n")
    assert main(["bench", str(cfg)]) == 1
    out = capsys.readouterr()
    assert "error" in out.out and "failed" in out.err


def test_bench_bad_config(tmp_path):
    p = tmp_path / "x.cfg"
    p.write_text("bogus = 1\n")
    with pytest.raises(SystemExit, match="unknown keys"):
        main(["bench", str(p)])
