"""
tests/test_cli.py
─────────────────
Config loading, CSV emission and the four epiwave commands end to end.

Run:
  pytest tests/test_cli.py -v
"""

import csv
import math
from pathlib import Path

import numpy as np
import pytest

from cli.commands import (
    EXIT_BAD_RANGE,
    EXIT_CONFIG,
    EXIT_INSTABILITY,
    EXIT_INVALID_PARAMS,
    EXIT_NOT_SUPERCRITICAL,
    EXIT_OK,
    build_parser,
    main,
)
from cli.config_loader import (
    KNOWN_KEYS,
    OUT_ENV_VAR,
    ConfigParseError,
    load_run_config,
    parse_config_text,
)
from cli.csv_writer import format_number, snapshot_name, write_csv
from model_core.derived import InvalidParams
from rd_solver.grid import Grid1D
from rd_solver.solver import build_split_ic
from schemas.params_schema import ModelParams


BASE_DIR = Path(__file__).parent
EXPECTED_DIR = BASE_DIR / "expected"
BASELINE = BASE_DIR.parent / "configs" / "baseline.cfg"
SMALL_RUN = EXPECTED_DIR / "small_run.cfg"
REF = ModelParams.reference()

RATES = "\n".join(f"{key} = {value!r}" for key, value in REF.as_dict().items())


@pytest.fixture(autouse=True)
def no_out_override(monkeypatch):
    monkeypatch.delenv(OUT_ENV_VAR, raising=False)


def read_rows(path: Path) -> list[list[str]]:
    """CSV rows without '#' trailer lines (header included)."""
    with open(path, newline="", encoding="utf-8") as f:
        return [row for row in csv.reader(line for line in f if not line.startswith("#"))]


def read_table(path: Path) -> dict[str, str]:
    return {row[0]: row[1] for row in read_rows(path)[1:]}


def trailer(path: Path) -> str:
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[-1].startswith("# ")
    return lines[-1][2:]


# ─────────────────────────────────────────────────────────────────────────────
# CONFIG LOADER
# ─────────────────────────────────────────────────────────────────────────────

class TestConfigLoader:

    def test_baseline_matches_reference(self):
        config = load_run_config(BASELINE)
        assert config.params == REF
        assert config.grid.n == 1001
        assert config.time.dt == "auto"
        assert config.ic.split_at == 200.0

    def test_defaults_for_run_settings(self):
        values = parse_config_text(RATES)
        assert set(values) == set(REF.as_dict())
        config = load_run_config(SMALL_RUN)
        assert config.out.dir == "out"
        assert config.ic.seed == 0.25

    def test_comments_and_blank_lines(self):
        text = "# header\n\n" + RATES + "  # trailing comment\n\ngrid.n = 11\ntime.dt = 0.01\n"
        values = parse_config_text(text)
        assert values["grid.n"] == 11
        assert values["time.dt"] == 0.01
        assert values["d_v"] == REF.d_v

    def test_missing_rate_names_key(self):
        with pytest.raises(ConfigParseError) as exc:
            load_run_config(EXPECTED_DIR / "missing_mu.cfg")
        assert exc.value.key == "mu"
        assert "'mu'" in str(exc.value)

    @pytest.mark.parametrize("extra, key", [
        ("gamma = 1.0", "gamma"),
        ("mu = 0.9", "mu"),
        ("grid.n = 1.5", "grid.n"),
        ("time.t_end = soon", "time.t_end"),
    ])
    def test_malformed_entries(self, extra, key):
        with pytest.raises(ConfigParseError) as exc:
            parse_config_text(RATES + "\n" + extra)
        assert exc.value.key == key

    def test_line_without_equals(self):
        with pytest.raises(ConfigParseError):
            parse_config_text(RATES + "\njust words")

    @pytest.mark.parametrize("extra", [
        "time.snapshot_every = 0",
        "grid.n = 2",
        "ic.split_at = 600",
        "ic.seed = 1.5",
        "time.dt = -0.1",
    ])
    def test_invalid_run_settings(self, extra, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(RATES + "\n" + extra + "\n", encoding="utf-8")
        with pytest.raises(ConfigParseError):
            load_run_config(path)

    def test_nonpositive_rate(self):
        with pytest.raises(InvalidParams):
            load_run_config(EXPECTED_DIR / "bad_param.cfg")

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigParseError):
            load_run_config(tmp_path / "absent.cfg")

    def test_env_override(self):
        config = load_run_config(BASELINE, env={OUT_ENV_VAR: "/tmp/elsewhere"})
        assert config.out.dir == "/tmp/elsewhere"
        assert load_run_config(BASELINE, env={OUT_ENV_VAR: ""}).out.dir == "out"

    def test_known_keys_cover_manifest(self):
        keys = [key for key, _ in load_run_config(BASELINE).flat_items()]
        assert set(keys) == set(KNOWN_KEYS)


# ─────────────────────────────────────────────────────────────────────────────
# CSV WRITER
# ─────────────────────────────────────────────────────────────────────────────

class TestCsvWriter:

    @pytest.mark.parametrize("value, text", [
        (0.1, "0.1"),
        (1e-300, "1e-300"),
        (34.0, "34.0"),
        (7, "7"),
        (np.int64(3), "3"),
        (True, "true"),
        (np.bool_(False), "false"),
        (math.nan, "nan"),
        (np.float64(0.25), "0.25"),
    ])
    def test_format_number(self, value, text):
        assert format_number(value) == text

    def test_shortest_repr_round_trips(self):
        rng = np.random.default_rng(71)
        for value in rng.uniform(-1e6, 1e6, size=200):
            assert float(format_number(value)) == value

    def test_write_with_trailer(self, tmp_path):
        path = write_csv(tmp_path / "sub" / "t.csv", ["a", "b"], [(1, 0.5), ("x", None)], trailer="k=v")
        assert path.read_text(encoding="utf-8") == "a,b\n1,0.5\nx,\n# k=v\n"
        assert not list(tmp_path.rglob("*.tmp"))

    def test_snapshot_names(self):
        assert snapshot_name(0.0) == "snap_0.0.csv"
        assert snapshot_name(0.5) == "snap_0.5.csv"
        assert snapshot_name(50) == "snap_50.0.csv"


# ─────────────────────────────────────────────────────────────────────────────
# COMMANDS
# ─────────────────────────────────────────────────────────────────────────────

class TestAnalyze:

    def test_reference_summary(self, tmp_path):
        assert main(["analyze", "--config", str(BASELINE), "--out", str(tmp_path)]) == EXIT_OK
        rows = read_rows(tmp_path / "summary.csv")
        assert rows[0] == ["quantity", "value"]
        table = read_table(tmp_path / "summary.csv")
        assert math.isclose(float(table["r0"]), 34.20, abs_tol=0.01)
        assert math.isclose(float(table["c_star"]), 0.3410, abs_tol=5e-4)
        assert math.isclose(float(table["lambda_star"]), 0.3583, abs_tol=1e-3)
        assert math.isclose(float(table["e0_x1"]), 120.48, abs_tol=0.01)
        assert math.isclose(float(table["e1_x2"]), 33.87, abs_tol=0.01)
        assert math.isclose(float(table["e1_x4"]), 97.38, abs_tol=0.01)

    def test_subcritical_summary(self, tmp_path):
        assert main(["analyze", "--config", str(EXPECTED_DIR / "subcritical.cfg"), "--out", str(tmp_path)]) == EXIT_OK
        table = read_table(tmp_path / "summary.csv")
        assert math.isclose(float(table["r0"]), 0.342, abs_tol=1e-3)
        assert table["endemic"] == "none"
        assert table["c_star"] == "subcritical"
        assert "e1_x1" not in table

    def test_missing_rate_exit_code(self, tmp_path, capsys):
        code = main(["analyze", "--config", str(EXPECTED_DIR / "missing_mu.cfg"), "--out", str(tmp_path)])
        assert code == EXIT_CONFIG
        assert "'mu'" in capsys.readouterr().out
        assert not (tmp_path / "summary.csv").exists()

    def test_invalid_rate_exit_code(self, tmp_path):
        code = main(["analyze", "--config", str(EXPECTED_DIR / "bad_param.cfg"), "--out", str(tmp_path)])
        assert code == EXIT_INVALID_PARAMS

    def test_env_output_directory(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUT_ENV_VAR, str(tmp_path / "from_env"))
        assert main(["analyze", "--config", str(BASELINE)]) == EXIT_OK
        assert (tmp_path / "from_env" / "summary.csv").exists()

    def test_out_flag_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUT_ENV_VAR, str(tmp_path / "from_env"))
        assert main(["analyze", "--config", str(BASELINE), "--out", str(tmp_path / "flag")]) == EXIT_OK
        assert (tmp_path / "flag" / "summary.csv").exists()
        assert not (tmp_path / "from_env").exists()


class TestDispersionCommand:

    def test_default_range(self, tmp_path):
        assert main(["dispersion", "--config", str(BASELINE), "--out", str(tmp_path)]) == EXIT_OK
        path = tmp_path / "dispersion.csv"
        rows = read_rows(path)
        assert rows[0] == ["lambda", "alpha_min", "alpha_max", "c_lambda"]
        data = np.array([[float(v) for v in row] for row in rows[1:]])
        assert data.shape == (500, 4)
        assert math.isclose(data[:, 3].min(), 0.3410, abs_tol=1e-3)
        assert trailer(path).startswith("lambda_star=")

    def test_single_minimum(self, tmp_path):
        main(["dispersion", "--config", str(BASELINE), "--out", str(tmp_path)])
        c = np.array([float(row[3]) for row in read_rows(tmp_path / "dispersion.csv")[1:]])
        signs = np.sign(np.diff(c))
        assert np.count_nonzero(signs[1:] != signs[:-1]) == 1

    def test_two_samples(self, tmp_path):
        args = ["dispersion", "--config", str(BASELINE), "--out", str(tmp_path), "--samples", "2"]
        assert main(args) == EXIT_OK
        assert len(read_rows(tmp_path / "dispersion.csv")) == 3

    def test_subcritical_trailer(self, tmp_path):
        main(["dispersion", "--config", str(EXPECTED_DIR / "subcritical.cfg"), "--out", str(tmp_path)])
        assert trailer(tmp_path / "dispersion.csv") == "lambda_star=none,c_star=none"

    @pytest.mark.parametrize("extra", [
        ["--lambda-min", "1", "--lambda-max", "0.5"],
        ["--lambda-min", "0"],
        ["--samples", "1"],
    ])
    def test_bad_range(self, extra, tmp_path):
        code = main(["dispersion", "--config", str(BASELINE), "--out", str(tmp_path)] + extra)
        assert code == EXIT_BAD_RANGE
        assert not (tmp_path / "dispersion.csv").exists()


class TestCertifyCommand:

    def test_passing_certificate(self, tmp_path):
        assert main(["certify", "--config", str(BASELINE), "--out", str(tmp_path), "--c", "0.5"]) == EXIT_OK
        rows = read_rows(tmp_path / "report_certificate.csv")
        assert rows[0] == ["section", "name", "value", "bound", "passed"]
        by_name = {(row[0], row[1]): row for row in rows[1:]}
        assert by_name[("constraint", "B0_separation")][4] == "true"
        assert by_name[("residual", "ordering")][4] == "true"
        assert all(row[4] == "true" for row in rows[1:] if row[0] in ("constraint", "residual"))

    def test_speed_not_supercritical(self, tmp_path):
        code = main(["certify", "--config", str(BASELINE), "--out", str(tmp_path), "--c", "0.3"])
        assert code == EXIT_NOT_SUPERCRITICAL

    def test_subcritical_parameters(self, tmp_path):
        code = main(["certify", "--config", str(EXPECTED_DIR / "subcritical.cfg"), "--out", str(tmp_path), "--c", "1.0"])
        assert code == EXIT_NOT_SUPERCRITICAL


class TestSimulateCommand:

    @pytest.fixture(scope="class")
    def small_out(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("small_run")
        assert main(["simulate", "--config", str(SMALL_RUN), "--out", str(out)]) == EXIT_OK
        return out

    def test_outputs_present(self, small_out):
        for name in [
            "snap_0.0.csv", "snap_0.5.csv", "snap_5.0.csv", "front.csv", "manifest.csv",
            "report_conservation.csv", "report_lower_bounds.csv", "report_speed.csv",
            "report_harnack.csv",
        ]:
            assert (small_out / name).exists(), name
        assert len(list(small_out.glob("snap_*.csv"))) == 11
        assert not list(small_out.glob("*.tmp"))

    def test_initial_snapshot_is_split_profile(self, small_out):
        rows = read_rows(small_out / "snap_0.0.csv")
        assert rows[0] == ["y", "x1", "x2", "x3", "x4"]
        data = np.array([[float(v) for v in row] for row in rows[1:]])
        grid = Grid1D(500.0, 201)
        expected = build_split_ic(grid, REF, 200.0)
        np.testing.assert_array_equal(data[:, 0], grid.y)
        np.testing.assert_array_equal(data[:, 1:].T, expected.clipped())

    def test_front_trace(self, small_out):
        rows = read_rows(small_out / "front.csv")
        assert rows[0] == ["t", "y_front"]
        assert len(rows) == 12
        assert math.isclose(float(rows[1][1]), 198.75, abs_tol=1e-9)

    def test_speed_report(self, small_out):
        table = read_table(small_out / "report_speed.csv")
        assert float(table["speed"]) > 0
        assert int(table["points"]) in (5, 6)

    def test_manifest(self, small_out):
        table = read_table(small_out / "manifest.csv")
        assert table["mu"] == "0.83"
        assert table["grid.n"] == "201"
        assert table["time.dt"] == "auto"
        assert table["snapshots"] == "11"
        assert math.isclose(float(table["r0"]), 34.20, abs_tol=0.01)

    def test_deterministic(self, small_out, tmp_path):
        assert main(["simulate", "--config", str(SMALL_RUN), "--out", str(tmp_path)]) == EXIT_OK
        names = sorted(p.name for p in small_out.iterdir())
        assert names == sorted(p.name for p in tmp_path.iterdir())
        for name in names:
            assert (small_out / name).read_bytes() == (tmp_path / name).read_bytes(), name

    def test_manifest_reproduces_run(self, small_out, tmp_path):
        entries = [row for row in read_rows(small_out / "manifest.csv")[1:] if row[0] in KNOWN_KEYS]
        cfg = tmp_path / "replay.cfg"
        cfg.write_text("".join(f"{key} = {value}\n" for key, value in entries), encoding="utf-8")
        out = tmp_path / "replay"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        for snap in small_out.glob("snap_*.csv"):
            assert snap.read_bytes() == (out / snap.name).read_bytes()

    def test_subcritical_run_reports_extinction(self, tmp_path):
        config = EXPECTED_DIR / "subcritical.cfg"
        assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "report_extinction.csv").exists()
        assert not (tmp_path / "front.csv").exists()
        assert "monotone_after_transient=" in trailer(tmp_path / "report_extinction.csv")

    def test_instability_exit_code(self, tmp_path, capsys):
        code = main(["simulate", "--config", str(EXPECTED_DIR / "unstable.cfg"), "--out", str(tmp_path)])
        assert code == EXIT_INSTABILITY
        assert "last stable time" in capsys.readouterr().out


class TestParser:

    def test_command_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_certify_needs_speed(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["certify", "--config", "x.cfg"])

    @pytest.mark.parametrize("speed", ["inf", "-inf", "nan"])
    def test_certify_rejects_nonfinite_speed(self, speed, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["certify", "--config", str(BASELINE), "--out", str(tmp_path), "--c", speed])
        assert exc.value.code == 2
        assert not (tmp_path / "report_certificate.csv").exists()

    def test_dispersion_rejects_infinite_range(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["dispersion", "--config", "x.cfg", "--lambda-max", "inf"])
