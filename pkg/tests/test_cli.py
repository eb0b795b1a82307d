import subprocess
import sys

import pytest

from snlse import cli
from snlse.dynamics import BlowUpError
from snlse.fileformats import load_field, read_csv

SMALL = ["--N", "64", "--a", "-8", "--b", "8", "--T", "0.1"]


def strip_stamp(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("# generated"))


class TestParse:
    def test_alpha_guard(self, capsys):
        assert cli.main(["sweep-eps", "--alpha", "-0.5"]) == 2
        err = capsys.readouterr().err
        assert "alpha" in err and "(-1/3, 0)" in err
        with pytest.raises(cli.ConfigError, match="alpha"):
            cli.parse_config(["evolve", "--alpha", "1"])
        assert cli.parse_config(["dynamics2d", "--alpha", "1"]).num("alpha") == 1

    def test_precedence(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("# comment line\ntau = 1e-2   # trailing comment\nepsilon=1e-3\n")
        cfg = cli.parse_config(["evolve", "--config", str(cfg_file), "--tau", "1e-3"])
        assert cfg.nums("tau") == [1e-3]
        assert cfg.nums("epsilon") == [1e-3]

    def test_sweep_eps_defaults(self):
        cfg = cli.parse_config(["sweep-eps"])
        assert cfg.num("alpha") == -0.2 and cfg.num("T") == 1
        assert (cfg.num("a"), cfg.num("b"), cfg.integer("N")) == (-16, 16, 512)
        assert cfg.nums("epsilon") == [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]

    def test_unknown_key_in_file(self, tmp_path, capsys):
        f = tmp_path / "bad.cfg"
        f.write_text("alpha=-0.2\nfrobnicate=3\n")
        assert cli.main(["evolve", "--config", str(f)]) == 2
        assert "frobnicate" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert cli.main(["evolve", "--frobnicate", "3"]) == 2
        assert "frobnicate" in capsys.readouterr().err

    @pytest.mark.parametrize("key,value", [("tau", "fast"), ("N", "63"), ("N", "12.5"), ("lambda", "0"),
                                           ("reg", "cubic"), ("integrator", "rk4"), ("b", "-20"),
                                           ("epsilon", "-1"), ("dim", "3"), ("ic", "soliton"),
                                           ("paper-scale", "maybe"), ("n", "0")])
    def test_invalid_values_name_key(self, key, value, capsys):
        assert cli.main(["evolve", f"--{key}", value, "--reg", "ler"] if key != "reg"
                        else ["evolve", f"--{key}", value]) == 2
        assert key in capsys.readouterr().err

    def test_sweep_needs_three_values(self):
        with pytest.raises(cli.ConfigError, match="tau"):
            cli.parse_config(["sweep-tau", "--tau", "1e-2,5e-3"])

    def test_missing_config_file(self, tmp_path):
        assert cli.main(["evolve", "--config", str(tmp_path / "nope.cfg")]) == 4


class TestCommands:
    def test_evolve(self, tmp_path):
        out = tmp_path / "ev"
        assert cli.main(["evolve", *SMALL, "--tau", "1e-2", "--snapshots", "0.05", "--out-dir", str(out)]) == 0
        assert load_field(out / "final.snls").grid.N == (64,)
        assert (out / "snapshot_t0.05.snls").exists()
        lines = (out / "diagnostics.csv").read_text().splitlines()
        assert lines[0] == "t,mass,energy,momentum_0" and len(lines) == 4

    def test_resolved_cfg_reparses(self, tmp_path):
        out = tmp_path / "r"
        assert cli.main(["evolve", *SMALL, "--tau", "1e-2", "--out-dir", str(out)]) == 0
        resolved = out / "resolved.cfg"
        again = cli.parse_config(["evolve", "--config", str(resolved)])
        assert again.params == cli.parse_config(["evolve", *SMALL, "--tau", "1e-2", "--out-dir", str(out)]).params

    def test_sweep_deterministic_and_self_describing(self, tmp_path):
        args = ["sweep-tau", *SMALL, "--tau", "1e-2,5e-3,2.5e-3", "--reg", "ler3,shift",
                "--cache-dir", str(tmp_path / "cache")]
        assert cli.main([*args, "--out-dir", str(tmp_path / "a")]) == 0
        assert cli.main([*args, "--out-dir", str(tmp_path / "b")]) == 0
        a = (tmp_path / "a" / "sweep.csv").read_text()
        b = (tmp_path / "b" / "sweep.csv").read_text()
        assert a.startswith("# generated ")
        assert strip_stamp(a) == strip_stamp(b)
        rows, slopes = read_csv(tmp_path / "a" / "sweep.csv")
        assert len(rows) == 2 * 2 * 3
        assert 0.8 < slopes["ler3@tsfp"] < 1.2
        for row in rows:
            cli.parse_config(["evolve", *[f"--{k}={row[k]}" for k in
                                          ("reg", "alpha", "epsilon", "n", "integrator", "tau")]])

    def test_sweep_eps_small(self, tmp_path):
        out = tmp_path / "e"
        assert cli.main(["sweep-eps", *SMALL, "--epsilon", "1e-1,1e-2,1e-3", "--tau", "1e-3",
                         "--reg", "rational", "--cache-dir", str(tmp_path / "c"), "--out-dir", str(out)]) == 0
        rows, slopes = read_csv(out / "sweep.csv")
        assert [r["epsilon"] for r in rows] == ["0.1", "0.01", "0.001"]
        assert set(slopes) == {"rational", "rational:err_density_l1", "rational:err_energy"}

    def test_compare_reg(self, tmp_path):
        out = tmp_path / "c"
        assert cli.main(["compare-reg", *SMALL, "--tau", "1e-3", "--cache-dir", str(tmp_path / "cc"),
                         "--out-dir", str(out)]) == 0
        rows, slopes = read_csv(out / "compare.csv")
        assert [r["reg"] for r in rows] == ["ler5", "shift", "rational"] and slopes == {}

    def test_dynamics2d_small(self, tmp_path, monkeypatch):
        import snlse.experiments as ex
        monkeypatch.setattr(ex, "DESK_H_2D", 1 / 4)
        out = tmp_path / "d"
        assert cli.main(["dynamics2d", "--case", "III", "--snapshots", "0,0.01", "--tau", "1e-2",
                         "--out-dir", str(out)]) == 0
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[-2].startswith("0.0,") and summary[-2].endswith(",2,0")
        assert (out / "density_caseIII_t0.01.snls").exists()
        assert "# snapshot_times=(0.0, 0.01)" in summary

    def test_numerical_abort(self, tmp_path, monkeypatch, capsys):
        def boom(*a, **k):
            raise BlowUpError(3, 0.03)
        monkeypatch.setattr(cli, "evolve", boom)
        assert cli.main(["evolve", *SMALL, "--out-dir", str(tmp_path / "x")]) == 3
        assert "step 3" in capsys.readouterr().err

    def test_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert cli.main(["evolve", *SMALL, "--out-dir", str(blocker / "sub")]) == 4

    def test_console_entry(self):
        proc = subprocess.run([sys.executable, "-m", "snlse.cli", "sweep-eps", "--alpha", "-0.4"],
                              capture_output=True, text=True)
        assert proc.returncode == 2 and "alpha" in proc.stderr


def test_incommensurate_time_step(tmp_path, capsys):
    assert cli.main(["evolve", *SMALL, "--tau", "0.03", "--out-dir", str(tmp_path)]) == 2
    assert "tau" in capsys.readouterr().err
