"""Tests for configuration handling, emission and the command-line interface."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from spiralspec import cli, config, emit
from spiralspec.errors import ConfigurationError


def write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_bytes(directory):
    return {f: open(os.path.join(directory, f), "rb").read() for f in sorted(os.listdir(directory))}


QUICK_BARKLEY = {
    "model": {"name": "barkley"},
    "grid_n": 128,
    "gamma_range": [0.0, 5.0],
    "dgamma": 0.5,
    "ell_list": [-1, 0, 1],
    "seed": {"n": 128, "t_end": 60.0},
}


class TestConfig:
    def test_defaults(self):
        cfg = config.parse({"model": {"name": "barkley"}})
        assert cfg.kappa == 0.6165
        assert cfg.omega0_for(0.0) == 2.09
        assert cfg.omega0_for(0.19) == 1.87

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match="bogus"):
            config.parse({"bogus": 1})
        with pytest.raises(ConfigurationError):
            config.parse({"seed": {"nn": 3}})

    @pytest.mark.parametrize("grid_n", [63, 32, 1.5, True])
    def test_grid_n(self, grid_n):
        with pytest.raises(ConfigurationError):
            config.parse({"grid_n": grid_n})

    def test_user_model_needs_kappa_and_omega0(self):
        with pytest.raises(ConfigurationError):
            config.parse({"model": {"name": "mine"}})
        cfg = config.parse({"model": {"name": "mine"}, "kappa": 1.0})
        with pytest.raises(ConfigurationError):
            cfg.omega0_for(0.0)

    def test_round_trip_and_hash(self):
        cfg = config.parse(QUICK_BARKLEY)
        again = config.parse(json.loads(cfg.to_json()))
        assert again.to_dict() == cfg.to_dict()
        assert again.hash() == cfg.hash()
        moved = config.parse({**QUICK_BARKLEY, "output_dir": "elsewhere"})
        assert moved.hash() == cfg.hash()
        assert config.parse({**QUICK_BARKLEY, "dgamma": 0.25}).hash() != cfg.hash()

    def test_load_errors(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        with pytest.raises(ConfigurationError):
            config.load(str(bad))
        with pytest.raises(ConfigurationError):
            config.load(str(tmp_path / "missing.json"))


class TestEmit:
    def test_float_round_trip(self):
        for x in (0.1, -1e-300, np.pi, 2.0**60):
            assert float(emit.fmt(x)) == x

    def test_json_complex(self):
        text = emit.json_text({"z": 1 + 2j, "a": np.float64(0.5)})
        assert json.loads(text) == {"a": 0.5, "z": {"re": 1.0, "im": 2.0}}

    def test_write_failure(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(emit.OutputError):
            emit.write_atomic(str(blocker / "sub" / "a.txt"), "y")


class TestCli:
    def test_unknown_key_exit_2(self, tmp_path, capsys):
        path = write_config(tmp_path, {"model": {"name": "barkley"}, "nope": 1})
        assert cli.main(["essential", "--config", path]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["exit_code"] == 2 and "nope" in err["message"]

    def test_grid_override_validated(self, tmp_path):
        path = write_config(tmp_path, {"model": {"name": "barkley"}})
        assert cli.main(["essential", "--config", path, "--grid-n", "65"]) == 2

    def test_unknown_figure(self):
        assert cli.main(["reproduce", "fig-99"]) == 2

    def test_missing_config(self):
        assert cli.main(["cusp"]) == 2

    def test_unwritable_output_exit_4(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        path = write_config(tmp_path, {"n_instances": 1})
        assert cli.main(["operators-test", "--config", path, "--output", str(blocker)]) == 4

    def test_operators_test_is_deterministic(self, tmp_path):
        path = write_config(tmp_path, {"n_instances": 2, "random_seed": 5})
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["operators-test", "--config", path, "--output", str(a)]) == 0
        assert cli.main(["operators-test", "--config", path, "--output", str(b)]) == 0
        assert read_bytes(a) == read_bytes(b)
        manifest = json.loads((a / "manifest.json").read_text())
        assert manifest["subcommand"] == "operators-test"
        assert {x["file"] for x in manifest["artifacts"]} == {"operators_test.json", "config.json"}
        report = json.loads((a / "operators_test.json").read_text())
        assert report["all_passed"]


@pytest.fixture(scope="module")
def essential_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("ess")
    path = write_config(base, QUICK_BARKLEY)
    out = base / "out"
    assert cli.main(["essential", "--config", path, "--output", str(out)]) == 0
    return out


class TestEssential:
    def test_copies_differ_by_omega0(self, essential_run):
        files = sorted(f for f in os.listdir(essential_run) if f.startswith("curve_"))
        assert len(files) == 3
        curves = {}
        for f in files:
            gamma, lam, ell, delta, frame = emit.read_curve_csv(os.path.join(essential_run, f))
            curves[ell[0]] = lam
            assert set(frame) == {"spiral"} and set(delta) == {0.0}
        assert np.allclose(curves[1] - curves[0], 2.09j)
        assert np.allclose(curves[0] - curves[-1], 2.09j)
        assert abs(curves[0][0]) < 1e-6

    def test_rerun_is_byte_identical(self, tmp_path):
        # fresh processes, as a user would rerun; the config file differs only in output_dir
        runs = []
        for name in ("a", "b"):
            path = write_config(tmp_path, {**QUICK_BARKLEY, "output_dir": name}, f"{name}.json")
            proc = subprocess.run([sys.executable, "-m", "spiralspec.cli", "essential",
                                   "--config", path, "--output", str(tmp_path / name)],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            runs.append(read_bytes(tmp_path / name))
        assert runs[0] == runs[1]
