import math
import numpy as np
import pytest

from kirchhoffsim import cli
from kirchhoffsim.errors import ConfigError

BASE_CFG = """\
schema_version = 1
eigenvalues = 1,2,3
gamma = 1.0
epsilon = 0.05
u0 = 1,0.5,0.25
u1 = 0,0,0
t_end = 20000.0
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestConfigParsing:
    def test_round_trip(self):
        cfg = cli.resolve_config(cli.parse_config(BASE_CFG))
        emitted = cli.emit_config(cfg)
        assert cli.parse_config(emitted) == cfg

    def test_metadata_block_round_trip(self):
        cfg = cli.resolve_config(cli.parse_config(BASE_CFG))
        block = cli.emit_config(cfg, prefix="# ")
        assert cli.parse_config(block) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            cli.parse_config(BASE_CFG + "mystery_knob = 3\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            cli.parse_config("schema_version = 1\ngamma = fast\n")

    def test_schema_version_checked(self):
        with pytest.raises(ConfigError):
            cli.parse_config("schema_version = 99\n")

    def test_preset_resolution(self):
        text = ("schema_version = 1\npreset = laplacian_interval\ncount = 3\n"
                f"length = {math.pi!r}\ngamma = 1.0\nepsilon = 0.05\n"
                "u0 = 1,0,0\nt_end = 10.0\n")
        cfg = cli.resolve_config(cli.parse_config(text))
        np.testing.assert_allclose(cfg.eigenvalues, [1, 2, 3], rtol=1e-12)
        assert cfg.u1 == (0.0, 0.0, 0.0)

    def test_missing_eigenvalues(self):
        with pytest.raises(ConfigError):
            cli.resolve_config(cli.parse_config("schema_version = 1\nu0 = 1\n"))


class TestSimulate:
    def test_csv_contract(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE_CFG)
        out = tmp_path / "out"
        code = cli.main(["simulate", "--config", cfg, "--out", str(out),
                         "--t-end", "100"])
        assert code == 0
        lines = (out / "trace.csv").read_text().splitlines()
        header_idx = next(i for i, ln in enumerate(lines)
                          if not ln.startswith("#"))
        assert lines[header_idx] == cli.TRACE_HEADER
        first = lines[header_idx + 1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == pytest.approx(2.5625)  # b0 of this data

    def test_metadata_echoes_resolved_eigenvalues(self, tmp_path):
        text = ("schema_version = 1\npreset = laplacian_interval\ncount = 3\n"
                f"length = {math.pi!r}\ngamma = 1.0\nepsilon = 0.05\n"
                "u0 = 1,0,0\nt_end = 10.0\n")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        meta = [ln for ln in (out / "trace.csv").read_text().splitlines()
                if ln.startswith("# eigenvalues")]
        vals = [float(x) for x in meta[0].split("=")[1].split(",")]
        np.testing.assert_allclose(vals, [1, 2, 3], rtol=1e-12)

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE_CFG)
        out = tmp_path / "a"
        cli.main(["simulate", "--config", cfg, "--out", str(out),
                  "--t-end", "500"])
        b1 = (out / "trace.csv").read_bytes()
        cli.main(["simulate", "--config", cfg, "--out", str(out),
                  "--t-end", "500"])
        b2 = (out / "trace.csv").read_bytes()
        assert b1 == b2

    def test_blowup_exit_code(self, tmp_path):
        text = ("schema_version = 1\neigenvalues = 1\ngamma = 1.0\n"
                "epsilon = 0.9\nu0 = 0.1\nu1 = 100.0\nt_end = 100.0\n")
        cfg = write_cfg(tmp_path, text)
        code = cli.main(["simulate", "--config", cfg,
                         "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_NUMERIC

    def test_config_error_exit_code(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE_CFG + "bogus = 1\n")
        assert cli.main(["simulate", "--config", cfg]) == cli.EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        code = cli.main(["simulate", "--config", str(tmp_path / "nope.cfg")])
        assert code == cli.EXIT_CONFIG


class TestVerify:
    def test_all_claims_pass(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE_CFG)
        out = tmp_path / "out"
        code = cli.main(["verify", "--config", cfg, "--out", str(out)])
        assert code == 0
        report = (out / "report.txt").read_text()
        assert "overall pass=true" in report
        assert "claim id=B2" in report
        assert "predicted=0.5" in report

    def test_claim_filter(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE_CFG)
        out = tmp_path / "out"
        code = cli.main(["verify", "--config", cfg, "--out", str(out),
                         "--claims", "B5"])
        assert code == 0
        report = (out / "report.txt").read_text()
        claim_lines = [ln for ln in report.splitlines()
                       if ln.startswith("claim")]
        assert claim_lines
        assert all("id=B5" in ln for ln in claim_lines)

    def test_insufficient_tail_exit_one(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE_CFG)
        out = tmp_path / "out"
        code = cli.main(["verify", "--config", cfg, "--out", str(out),
                         "--t-end", "10"])
        assert code == cli.EXIT_CLAIM_FAIL
        report = (out / "report.txt").read_text()
        assert "insufficient_tail" in report


class TestLinear:
    def test_propositions_pipeline(self, tmp_path):
        text = ("schema_version = 1\neigenvalues = 1,2\ngamma = 1.0\n"
                "epsilon = 0.05\nu0 = 1,0.5\nu1 = 0,0.3\nt_end = 10000.0\n"
                "coeff_family = power\ncoeff_k = 1.0\ncoeff_p = 1.0\n")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        code = cli.main(["linear", "--config", cfg, "--out", str(out)])
        assert code == 0
        report = (out / "report.txt").read_text()
        for cid in ("SL1b", "SL2b", "SL3b"):
            assert f"claim id={cid}" in report
        lines = (out / "trace.csv").read_text().splitlines()
        header = next(ln for ln in lines if not ln.startswith("#"))
        assert header == cli.LINEAR_HEADER


class TestSweep:
    def test_epsilon_sweep(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE_CFG + "sweep_epsilon = 0.1,0.05\n")
        out = tmp_path / "out"
        code = cli.main(["sweep", "--config", cfg, "--out", str(out)])
        assert code == 0
        rows = [ln for ln in (out / "sweep.csv").read_text().splitlines()
                if ln.startswith("epsilon")]
        assert len(rows) == 2
        assert all(",true," in ln for ln in rows)

    def test_empty_sweep_is_config_error(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE_CFG)
        assert cli.main(["sweep", "--config", cfg,
                         "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG

    def test_row_error_recorded_and_continues(self, tmp_path):
        # second epsilon is far outside the decay regime for this data
        text = ("schema_version = 1\neigenvalues = 1\ngamma = 1.0\n"
                "epsilon = 0.05\nu0 = 0.1\nu1 = 100.0\nt_end = 3000.0\n"
                "sweep_epsilon = 0.9,0.05\n")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        code = cli.main(["sweep", "--config", cfg, "--out", str(out)])
        assert code == cli.EXIT_CLAIM_FAIL
        rows = [ln for ln in (out / "sweep.csv").read_text().splitlines()
                if ln.startswith("epsilon")]
        assert len(rows) == 2
        assert "BlowupDetected" in rows[0]

    def test_threads_give_same_rows(self, tmp_path):
        cfg1 = write_cfg(tmp_path, BASE_CFG + "sweep_epsilon = 0.1,0.05\n",
                         "one.cfg")
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        cli.main(["sweep", "--config", cfg1, "--out", str(out1)])
        cli.main(["sweep", "--config", cfg1, "--out", str(out2),
                  "--threads", "2"])
        rows1 = [ln for ln in (out1 / "sweep.csv").read_text().splitlines()
                 if ln.startswith("epsilon")]
        rows2 = [ln for ln in (out2 / "sweep.csv").read_text().splitlines()
                 if ln.startswith("epsilon")]
        assert rows1 == rows2
