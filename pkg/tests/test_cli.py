import csv
import subprocess
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest

from graphids.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main, run
from graphids.config import parse_config, parse_config_text
from graphids.errors import ConfigError
from graphids.graph import bowtie_graph, bundled_path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def small_config(tmp_path, extra=""):
    (tmp_path / "g.txt").write_text("3\n1 1 0\n1 1 1\n0 1 1\n")
    text = f"""# tiny experiment
K = 3
T = 25
trials = 4
n = 200
feedback = deterministic
graph = g.txt
seed = 5
{extra}
"""
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    return path


def test_bundled_configs():
    cfg = parse_config("appendix_b.cfg")
    assert (cfg.K, cfg.T, cfg.trials, cfg.n, cfg.feedback) == (5, 1000, 1000, 1000, "deterministic")
    np.testing.assert_array_equal(cfg.build_model().adjacency, bowtie_graph())
    assert cfg.monitor
    er = parse_config("er_025.cfg")
    assert er.feedback == "er" and er.build_model().r_at(1) == 0.25
    for name in ("er_uniform.cfg", "er_graphs.cfg"):
        model = parse_config(name).build_model()
        assert model.horizon == 1000


def test_defaults(tmp_path):
    cfg = parse_config(small_config(tmp_path).parent / "exp.cfg")
    assert cfg.n == 200
    cfg = parse_config_text("K = 2\nT = 3\nfeedback = er\nr = 0.5\n")
    assert (cfg.n, cfg.trials, cfg.monitor, cfg.seed) == (1000, 1000, True, 0)
    np.testing.assert_array_equal(cfg.prior_array(), np.ones((2, 2)))


@pytest.mark.parametrize("text, key, line", [
    ("K = 2\nT = 3\nfeedback = er\nr = 0.5\ncolour = red\n", "colour", 5),
    ("K = 2\nT = 0\nfeedback = er\nr = 0.5\n", "T", 2),
    ("K = 2\nT = 3\nfeedback = er\nr = 1.5\n", "r", 4),
    ("K = 2\nT = 3\nfeedback = er\n\nr = 0.5\npolicies = ts-n, exp3\n", "policies", 6),
    ("K = 2\nT = 3\nfeedback = deterministic\ngraph = missing.txt\n", "graph", 4),
    ("K = 2\nT = 3\nfeedback = er\nr = 0.5\nprior = 1, 0\n", "prior", 5),
    ("K = 2\nT = 3\nfeedback = er\nr = 0.5\ntrials = many\n", "trials", 5),
    ("K = 2\nT = 3\nfeedback = er\nr = 0.5, 0.2\n", "r", 4),
    ("K = 2\nT = 3\nfeedback = magic\n", "feedback", 3),
])
def test_config_errors_name_key_and_line(text, key, line, tmp_path):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text, base_dir=tmp_path)
    assert info.value.key == key
    assert info.value.line == line
    assert key in str(info.value) and f"line {line}" in str(info.value)


def test_graph_size_mismatch(tmp_path):
    path = small_config(tmp_path)
    text = path.read_text().replace("K = 3", "K = 4")
    with pytest.raises(ConfigError, match="graph"):
        parse_config_text(text, base_dir=tmp_path)


def test_run_writes_outputs(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--config", str(small_config(tmp_path)), "--out", str(out), "-q"])
    assert code == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["aggregate.csv", "bounds.csv", "curves.csv", "monitor.csv"]
    curves = read_csv(out / "curves.csv")
    assert len(curves) == 6 * 4 * 25
    assert list(curves[0]) == ["policy", "trial", "round", "instant_regret", "cum_regret"]
    bounds = {r["policy"]: r["theoretical_bound"] for r in read_csv(out / "bounds.csv")}
    assert bounds["ucb-n"] == "" and bounds["ucb-maxn"] == ""
    assert float(bounds["ts-n"]) > 0
    monitor = read_csv(out / "monitor.csv")
    assert {r["policy"] for r in monitor} == {"ts-n", "ids-n", "idsn-lp", "ids-lp"}
    assert all(int(v) == 0 for r in monitor for k, v in r.items() if k.startswith("violations_"))


def test_csv_round_trip(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(small_config(tmp_path)), "--out", str(out), "-q"]) == EXIT_OK
    per_round = defaultdict(list)
    for r in read_csv(out / "curves.csv"):
        per_round[(r["policy"], int(r["round"]))].append(float(r["cum_regret"]))
    for r in read_csv(out / "aggregate.csv"):
        values = per_round[(r["policy"], int(r["round"]))]
        assert abs(np.mean(values) - float(r["mean_cum_regret"])) < 1e-12
        assert abs(np.std(values, ddof=1) / np.sqrt(len(values)) - float(r["stderr"])) < 1e-12


def test_rerun_is_byte_identical(tmp_path):
    cfg = small_config(tmp_path)
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "a"), "-q"])
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "-q", "--parallelism", "2"])
    for name in ("curves.csv", "aggregate.csv", "bounds.csv", "monitor.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_overrides(tmp_path):
    out = tmp_path / "o"
    main(["run", "--config", str(small_config(tmp_path)), "--out", str(out), "-q",
          "--trials", "2", "--policies", "ucb-n,ts-n", "--seed", "9"])
    curves = read_csv(out / "curves.csv")
    assert {r["policy"] for r in curves} == {"ucb-n", "ts-n"}
    assert {r["trial"] for r in curves} == {"0", "1"}
    assert curves[0]["policy"] == "ucb-n"


def test_usage_errors(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == EXIT_USAGE
    assert main(["run", "--config", str(small_config(tmp_path)), "--policies", "bogus"]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = parse_config(small_config(tmp_path)).with_overrides(out=blocker / "sub", trials=1)
    with pytest.raises(OSError):
        run(cfg)
    assert main(["run", "--config", str(small_config(tmp_path)), "--out", str(blocker / "sub"), "-q"]) == EXIT_IO


def test_violation_exit_code(tmp_path, monkeypatch):
    import graphids.simulator as sim

    monkeypatch.setattr(sim, "MONITOR_TOL", -1.0)  # every ratio check now fails
    out = tmp_path / "v"
    code = main(["run", "--config", str(small_config(tmp_path)), "--out", str(out), "-q", "--policies", "ts-n"])
    assert code == EXIT_VIOLATION


def test_module_entry_point(tmp_path):
    out = tmp_path / "m"
    proc = subprocess.run([sys.executable, "-m", "graphids", "run", "--config", str(small_config(tmp_path)),
                           "--out", str(out), "--trials", "1", "--policies", "ids-n", "-q"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (out / "curves.csv").exists()


def test_bundled_graph_file_exists():
    assert Path(bundled_path("bowtie.txt")).exists()
