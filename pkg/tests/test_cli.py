import json
import subprocess
import sys

import pytest

from asymdiff.cli import EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, EXIT_RUNTIME, main
from asymdiff.topology import read_edge_list

TINY = """
[network]
nodes = 5
param = 0.6
[system]
taps = 3
[noise]
kind = gaussian
[run]
iterations = {iterations}
monte_carlo = {trials}
master_seed = 4
"""


@pytest.fixture
def write_cfg(tmp_path):
    def write(iterations=1, trials=1, extra="", name="exp.cfg"):
        path = tmp_path / name
        path.write_text(TINY.format(iterations=iterations, trials=trials) + extra)
        return path
    return write


def run(args):
    return main([str(a) for a in args])


class TestRun:
    def test_single_iteration_shape(self, write_cfg, tmp_path):
        out = tmp_path / "out"
        assert run(["run", write_cfg(), "--out-dir", out]) == EXIT_OK
        lines = (out / "msd.csv").read_text().splitlines()
        assert lines[0] == "iteration,algorithm,msd_db"
        assert len(lines) == 1 + 6
        assert [l.split(",")[1] for l in lines[1:]] == ["DLMS", "DSELMS", "DLLAD", "DLLCLMS", "DQQCLMS", "DLECLMS"]

    def test_byte_identical_reruns(self, write_cfg, tmp_path):
        cfg = write_cfg(iterations=50, trials=3)
        run(["run", cfg, "--out-dir", tmp_path / "a", "--plot"])
        run(["run", cfg, "--out-dir", tmp_path / "b", "--plot"])
        for name in ("msd.csv", "msd.manifest.json", "msd.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_manifest_reproduces_csv(self, write_cfg, tmp_path):
        run(["run", write_cfg(iterations=40, trials=2), "--out-dir", tmp_path / "a"])
        manifest = json.loads((tmp_path / "a" / "msd.manifest.json").read_text())
        echo = tmp_path / "echo.cfg"
        echo.write_text(manifest["config"])
        run(["run", echo, "--out-dir", tmp_path / "b"])
        assert (tmp_path / "a" / "msd.csv").read_bytes() == (tmp_path / "b" / "msd.csv").read_bytes()

    def test_manifest_contents(self, write_cfg, tmp_path):
        run(["run", write_cfg(iterations=5, trials=2), "--out-dir", tmp_path])
        m = json.loads((tmp_path / "msd.manifest.json").read_text())
        assert len(m["unknown_system"]) == 3
        assert len(m["regressor_variances"]) == 5
        assert len(m["stream_checksums"]) == 2
        assert set(m["algorithms"]) == {"DLMS", "DSELMS", "DLLAD", "DLLCLMS", "DQQCLMS", "DLECLMS"}
        assert m["topologies"][0]["nodes"] == 5
        assert "version" in m["software"]

    def test_seed_override(self, write_cfg, tmp_path):
        cfg = write_cfg(iterations=20)
        run(["run", cfg, "--out-dir", tmp_path / "a"])
        run(["run", cfg, "--out-dir", tmp_path / "b", "--seed", "5"])
        assert (tmp_path / "a" / "msd.csv").read_bytes() != (tmp_path / "b" / "msd.csv").read_bytes()

    def test_env_output_dir(self, write_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("ASYMDIFF_OUTPUT_DIR", str(tmp_path / "env"))
        assert run(["run", write_cfg()]) == EXIT_OK
        assert (tmp_path / "env" / "msd.csv").exists()

    def test_partial_exit(self, write_cfg, tmp_path):
        cfg = write_cfg(iterations=300, trials=2, extra="[algorithm DLMS]\nmu = 5\n[algorithm DSELMS]\nmu = 0.01\n")
        assert run(["run", cfg, "--out-dir", tmp_path]) == EXIT_PARTIAL
        lines = (tmp_path / "msd.csv").read_text().splitlines()
        assert {l.split(",")[1] for l in lines[1:]} == {"DSELMS"}
        m = json.loads((tmp_path / "msd.manifest.json").read_text())
        assert m["algorithms"]["DLMS"]["status"] == "all_diverged"

    def test_config_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[algorithm DLMS]\nmu = 0\n")
        assert run(["run", bad, "--out-dir", tmp_path]) == EXIT_CONFIG
        assert "mu must be positive" in capsys.readouterr().err

    def test_missing_config_exit(self, tmp_path):
        assert run(["run", tmp_path / "nope.cfg", "--out-dir", tmp_path]) == EXIT_RUNTIME


class TestSweep:
    def test_outputs(self, write_cfg, tmp_path, capsys):
        cfg = write_cfg(iterations=30, trials=2, extra="[algorithm DQQCLMS]\nmu = 0.05\n")
        assert run(["sweep", cfg, "--param", "b", "--values", "2,6", "--out-dir", tmp_path]) == EXIT_OK
        assert (tmp_path / "sweep_b_2.csv").exists() and (tmp_path / "sweep_b_6.csv").exists()
        summary = (tmp_path / "sweep_b_summary.csv").read_text().splitlines()
        assert summary[0] == "value,algorithm,final_msd_db"
        assert [l.split(",")[:2] for l in summary[1:]] == [["2.0", "DQQCLMS"], ["6.0", "DQQCLMS"]]

    def test_empty_values(self, write_cfg, tmp_path, capsys):
        assert run(["sweep", write_cfg(), "--param", "mu", "--values", " ", "--out-dir", tmp_path]) == EXIT_RUNTIME
        assert "empty value list" in capsys.readouterr().err


class TestOtherCommands:
    def test_bounds(self, tmp_path, capsys):
        cfg = tmp_path / "b.cfg"
        cfg.write_text("[signal]\nprofile = uniform_scalar\n[algorithm DQQCLMS]\n[algorithm DSELMS]\n")
        assert run(["bounds", cfg]) == EXIT_OK
        out = capsys.readouterr().out
        assert "positive=2.5" in out and "negative=0.333333" in out
        assert "VIOLATION (negative branch)" in out
        assert "DSELMS [DSELMS] mu=0.35 a=1 b=1: bound: not provided" in out

    def test_topology_export(self, write_cfg, tmp_path):
        dest = tmp_path / "net.txt"
        assert run(["topology", write_cfg(), "--out", dest]) == EXIT_OK
        with open(dest) as fh:
            topo = read_edge_list(fh)
        assert topo.node_count == 5 and topo.is_connected()

    def test_topology_stdout(self, write_cfg, capsys):
        assert run(["topology", write_cfg(), "--out", "-"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("N 5\n")

    def test_plot(self, tmp_path):
        csv_path = tmp_path / "c.csv"
        csv_path.write_text("iteration,algorithm,msd_db\n0,A,-10.0\n1,A,-10.0\n2,A,-10.0\n")
        run(["plot", csv_path, "--out", tmp_path / "a.svg"])
        run(["plot", csv_path, "--out", tmp_path / "b.svg"])
        svg = (tmp_path / "a.svg").read_text()
        assert svg == (tmp_path / "b.svg").read_text()
        assert svg.count("<polyline") == 1
        line = svg.split('points="')[1].split('"')[0]
        assert len({p.split(",")[1] for p in line.split()}) == 1  # horizontal

    def test_plot_empty(self, tmp_path, capsys):
        csv_path = tmp_path / "empty.csv"
        csv_path.write_text("iteration,algorithm,msd_db\n")
        assert run(["plot", csv_path, "--out", tmp_path / "x.svg"]) == EXIT_RUNTIME
        assert "no data rows" in capsys.readouterr().err

    def test_complexity(self, tmp_path, capsys):
        assert run(["complexity", "--csv", tmp_path / "c.csv"]) == EXIT_OK
        assert "756" in capsys.readouterr().out
        assert (tmp_path / "c.csv").read_text().startswith("algorithm,recursion_label")

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "asymdiff", "complexity", "--taps", "1", "--nodes", "1"],
                              capture_output=True, text=True, check=True)
        assert "DSELMS" in proc.stdout
