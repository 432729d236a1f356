"""Command-line entry points: exit codes, outputs, determinism."""

import numpy as np
import pytest

from quasiflow import cli, snapshots

SH_CFG = """\
symmetry = dihedral:12
equation = sh
lam = 0.2
N = 1
T = 0.3
dt = 0.01
diag_every = 10
ic = quasicrystal
ic_amplitude = 0.5
perturbation = 0.001
seed = 0
"""

BRUSS_CFG = """\
symmetry = dihedral:12
equation = brusselator
A = 2
B = 4.2
d1 = 1
d2 = 4
N = 1
T = 0.2
dt = 0.01
diag_every = 10
ic = steady-plus-critical
perturbation = 1e-4
"""


@pytest.fixture()
def sh_cfg(tmp_path):
    path = tmp_path / "sh.cfg"
    path.write_text(SH_CFG)
    return path


@pytest.fixture()
def bruss_cfg(tmp_path):
    path = tmp_path / "br.cfg"
    path.write_text(BRUSS_CFG)
    return path


class TestSimulateSH:
    def test_produces_outputs(self, tmp_path, sh_cfg, capsys):
        out = tmp_path / "run"
        code = cli.main(["simulate-sh", "--config", str(sh_cfg),
                         "--output", str(out)])
        assert code == 0
        assert (out / "config.txt").exists()
        assert (out / "diagnostics.csv").exists()
        assert (out / "final.qcs").exists()
        assert "diagnostics.csv" in capsys.readouterr().out

    def test_csv_has_expected_records(self, tmp_path, sh_cfg):
        out = tmp_path / "run"
        cli.main(["simulate-sh", "--config", str(sh_cfg), "--output", str(out)])
        cols = snapshots.read_diagnostics_csv(out / "diagnostics.csv")
        # T = 0.3, dt = 0.01, diag_every = 10: records at 0, 0.1, 0.2, 0.3
        assert cols["t"].shape == (4,)
        assert np.allclose(cols["t"], [0.0, 0.1, 0.2, 0.3], atol=1e-12)

    def test_final_snapshot_reloads(self, tmp_path, sh_cfg):
        out = tmp_path / "run"
        cli.main(["simulate-sh", "--config", str(sh_cfg), "--output", str(out)])
        state, cfg = snapshots.read_snapshot(out / "final.qcs")
        assert state.step_index == 30
        assert cfg.lam == 0.2

    def test_config_echo_reparses(self, tmp_path, sh_cfg):
        from quasiflow.config import parse_config

        out = tmp_path / "run"
        cli.main(["simulate-sh", "--config", str(sh_cfg), "--output", str(out)])
        cfg = parse_config((out / "config.txt").read_text())
        assert cfg.T == 0.3 and cfg.N == 1

    def test_snapshot_cadence(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text(SH_CFG + "snapshot_every = 10\n")
        out = tmp_path / "run"
        cli.main(["simulate-sh", "--config", str(cfg), "--output", str(out)])
        names = sorted(p.name for p in out.glob("snapshot_*.qcs"))
        assert names == [
            "snapshot_00000000.qcs", "snapshot_00000010.qcs",
            "snapshot_00000020.qcs", "snapshot_00000030.qcs",
        ]

    def test_deterministic_bytes(self, tmp_path, sh_cfg):
        a, b = tmp_path / "a", tmp_path / "b"
        cli.main(["simulate-sh", "--config", str(sh_cfg), "--output", str(a)])
        cli.main(["simulate-sh", "--config", str(sh_cfg), "--output", str(b)])
        assert (a / "diagnostics.csv").read_bytes() == \
            (b / "diagnostics.csv").read_bytes()
        assert (a / "final.qcs").read_bytes() == (b / "final.qcs").read_bytes()

    def test_equation_subcommand_mismatch(self, tmp_path, bruss_cfg, capsys):
        code = cli.main(["simulate-sh", "--config", str(bruss_cfg),
                         "--output", str(tmp_path / "x")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        code = cli.main(["simulate-sh", "--config", str(tmp_path / "no.cfg"),
                         "--output", str(tmp_path / "x")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_config_value(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text(SH_CFG + "dt = -1\n")
        code = cli.main(["simulate-sh", "--config", str(cfg),
                         "--output", str(tmp_path / "x")])
        assert code == 1
        assert "dt" in capsys.readouterr().err


class TestSimulateBruss:
    def test_produces_two_component_csv(self, tmp_path, bruss_cfg):
        out = tmp_path / "run"
        code = cli.main(["simulate-bruss", "--config", str(bruss_cfg),
                         "--output", str(out)])
        assert code == 0
        header = (out / "diagnostics.csv").read_bytes().split(b"\n")[0]
        assert header.endswith(b",min_v,max_v")

    def test_final_snapshot_reloads(self, tmp_path, bruss_cfg):
        out = tmp_path / "run"
        cli.main(["simulate-bruss", "--config", str(bruss_cfg),
                  "--output", str(out)])
        state, cfg = snapshots.read_snapshot(out / "final.qcs")
        assert state.params.B == 4.2
        assert state.u_field.active is state.v_field.active


class TestTuring:
    def test_reference_triple(self, capsys):
        code = cli.main(["turing", "--A", "2", "--d1", "0.25", "--d2", "1"])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "eta = 0.5"
        assert out[1] == "B_c = 4"
        assert out[2] == "k_c = 2"
        assert out[3].startswith("eigenvector = -0.894")
        assert out[4] == "turing_first = true"

    def test_rejects_nonpositive(self, capsys):
        code = cli.main(["turing", "--A", "-2", "--d1", "1", "--d2", "1"])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestRender:
    def test_pgm_from_snapshot(self, tmp_path, sh_cfg, capsys):
        out = tmp_path / "run"
        cli.main(["simulate-sh", "--config", str(sh_cfg), "--output", str(out)])
        img = tmp_path / "f.pgm"
        code = cli.main(["render", "--snapshot", str(out / "final.qcs"),
                         "--out", str(img), "--resolution", "32"])
        assert code == 0
        assert img.read_bytes().startswith(b"P5\n32 32\n255\n")

    def test_two_component_renders_activator(self, tmp_path, bruss_cfg):
        out = tmp_path / "run"
        cli.main(["simulate-bruss", "--config", str(bruss_cfg),
                  "--output", str(out)])
        img = tmp_path / "f.pgm"
        code = cli.main(["render", "--snapshot", str(out / "final.qcs"),
                         "--out", str(img), "--resolution", "16",
                         "--window", "-10", "10"])
        assert code == 0
        assert img.read_bytes().startswith(b"P5\n16 16\n255\n")

    def test_missing_snapshot(self, tmp_path, capsys):
        code = cli.main(["render", "--snapshot", str(tmp_path / "no.qcs"),
                         "--out", str(tmp_path / "f.pgm")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        code = cli.main(["nosuchcmd"])
        assert code == 2

    def test_no_subcommand(self, capsys):
        code = cli.main([])
        assert code == 2

    def test_missing_required_flag(self, capsys):
        code = cli.main(["turing", "--A", "2"])
        assert code == 2
