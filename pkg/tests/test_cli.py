import json
import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml

from src.config import (
    OUTPUT_DIR_ENV,
    PRESETS,
    TimeConfig,
    emit_config,
    load_config,
    parse_config,
    preset,
    save_config,
)
from src.plot_data import controls_frame, emit_plot_data, write_csv
from src.run import main
from src.utils.errors import ConfigError, ShapeError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
SHIPPED = {
    "one_qubit": "default_config.yaml",
    "qutrit_v": "qutrit_v.yaml",
    "two_qubit_mixed": "two_qubit_mixed.yaml",
    "two_qubit_bell": "two_qubit_bell.yaml",
}


def short_config(name, tmp_path, **time):
    config = preset(name)
    config.time = TimeConfig(**{"t_end": 2.0, "n_points": 41, **time})
    path = tmp_path / f"{name}.yaml"
    save_config(config, path)
    return str(path)


def read_json(path):
    with open(path) as f:
        return json.load(f)


def error_line(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    directory = tmp_path / "out"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(directory))
    return directory


class TestConfig:

    @pytest.mark.parametrize("name", PRESETS)
    def test_preset_round_trip(self, name):
        config = preset(name)
        assert parse_config(emit_config(config)).to_dict() == config.to_dict()

    @pytest.mark.parametrize("name", PRESETS)
    def test_shipped_configs_match_presets(self, name):
        assert load_config(str(CONFIG_DIR / SHIPPED[name])).to_dict() == preset(name).to_dict()

    def test_unknown_section_key(self):
        text = emit_config(preset("one_qubit")).replace("t_end:", "t_stop:")
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_initial_state_needs_one_source(self):
        data = preset("one_qubit").to_dict()
        data["initial_state"]["density"] = {"re": [[1.0, 0.0], [0.0, 0.0]]}
        with pytest.raises(ConfigError):
            parse_config(yaml.safe_dump(data))

    def test_output_dir_from_environment(self, out_dir):
        assert preset("qutrit_v").output_dir == str(out_dir)

    def test_two_qubit_seed_follows_decay_rate(self):
        config = preset("two_qubit_mixed", gamma=2.0)
        assert config.system.params["gamma"] == 2.0
        assert config.solver.initial_xi == [0.0] * 8 + [0.5]
        assert preset("two_qubit_mixed").solver.initial_xi[-1] == 0.25

    def test_preset_rejects_unknown_override(self):
        with pytest.raises(ConfigError):
            preset("qutrit_v", detuning=1.0)

    def test_ket_initial_state(self):
        data = preset("one_qubit").to_dict()
        data["initial_state"] = {"ket": {"re": [1.0, 1.0]}}
        config = parse_config(yaml.safe_dump(data))
        basis = config.system.build()[1]
        assert np.allclose(config.initial_state.coherence_vector(basis).values, [1.0, 0.0, 0.0])


class TestPlotData:

    def test_header_only_csv(self, tmp_path):
        path, columns = emit_plot_data(None, None, "empty", str(tmp_path), "run", times=[])
        assert columns == ["t"]
        assert Path(path).read_text() == "t\n"

    def test_controls_frame(self):
        frame = controls_frame([0.0, 0.5], [[1.0, 2.0], [3.0, 4.0]], ["x", "y"])
        assert list(frame.columns) == ["t", "u_x", "u_y"]
        assert frame["u_y"].tolist() == [2.0, 4.0]
        with pytest.raises(ShapeError):
            controls_frame([0.0, 0.5], [[1.0, 2.0], [3.0, 4.0]], ["x"])

    def test_full_precision(self, tmp_path):
        path = tmp_path / "values.csv"
        write_csv(pd.DataFrame({"t": [0.1], "m_x": [1.0 / 3.0]}), str(path))
        assert Path(path).read_text().splitlines()[1] == "0.10000000000000001,0.33333333333333331"


class TestCommands:

    def test_emit_preset(self, tmp_path):
        path = tmp_path / "qutrit.yaml"
        assert main(["preset", "qutrit_v", "--emit", str(path), "--quiet"]) == 0
        assert load_config(str(path)).to_dict() == preset("qutrit_v").to_dict()

    def test_print_preset(self, capsys):
        assert main(["preset", "two_qubit_bell"]) == 0
        assert parse_config(capsys.readouterr().out).to_dict() == preset("two_qubit_bell").to_dict()

    def test_check(self, out_dir, capsys):
        assert main(["check", "preset:one_qubit"]) == 0
        assert "all hold" in capsys.readouterr().out
        report = read_json(out_dir / "one_qubit_checks.json")
        assert report["ok"]
        assert report["d_min"] == pytest.approx(0.5)

    def test_check_phase_damping(self, out_dir, tmp_path, capsys):
        config = preset("one_qubit")
        config.system.params["channel"] = "phase_damping"
        path = tmp_path / "phase.yaml"
        save_config(config, path)
        assert main(["check", str(path), "--quiet"]) == 3
        assert error_line(capsys)["error"] == "assumption"
        assert not read_json(out_dir / "one_qubit_checks.json")["assumptions"]["H2"]

    def test_solve_two_qubit_mixed(self, out_dir):
        assert main(["solve", "preset:two_qubit_mixed", "--quiet"]) == 0
        report = read_json(out_dir / "two_qubit_mixed_solution.json")
        assert report["solver"]["status"] == "exact"
        active = [label for label, mode in zip(report["control_labels"], report["modes"])
                  if abs(mode["offset"]) > 1e-6 or any(c["amplitude"] > 1e-6 for c in mode["components"])]
        assert sorted(active) == ["xx", "xy", "yx", "yy", "zz"]

    def test_solve_bell(self, out_dir, tmp_path, capsys):
        assert main(["solve", "preset:two_qubit_bell", "--quiet"]) == 0
        assert read_json(out_dir / "two_qubit_bell_solution.json")["solver"]["status"] == "least_squares"

        config = preset("two_qubit_bell")
        config.solver.allow_least_squares = False
        path = tmp_path / "bell.yaml"
        save_config(config, path)
        assert main(["solve", str(path), "--quiet"]) == 3
        assert error_line(capsys)["error"] == "infeasible"

    def test_run_one_qubit(self, out_dir, tmp_path):
        assert main(["run", short_config("one_qubit", tmp_path), "--quiet"]) == 0
        for suffix in ("checks.json", "solution.json", "report.json", "plots.txt", "controlled.csv",
                       "uncontrolled.csv", "target.csv", "stationary.csv", "oracle.csv", "m_x.csv",
                       "m_y.csv", "controls.csv", "tracking_error.csv", "coherence.csv", "lidar.csv",
                       "lidar_controls.csv", "lidar_gap.csv"):
            assert (out_dir / f"one_qubit_{suffix}").exists(), suffix

        controls = pd.read_csv(out_dir / "one_qubit_controls.csv")
        assert list(controls.columns) == ["t", "u_x", "u_y"]
        t = controls["t"].to_numpy()
        assert np.allclose(controls["u_x"], np.sqrt(2) / 2 * np.sin(3 * t), atol=1e-12)
        assert np.allclose(controls["u_y"], -np.sqrt(2) / 2 * np.cos(3 * t), atol=1e-12)

        report = read_json(out_dir / "one_qubit_report.json")
        assert report["status"] == "exact"
        assert report["lidar"]["status"] == "diverged"
        assert report["bound"]["holds"]
        assert report["oracle_gap"] < 1e-8

        trajectory = pd.read_csv(out_dir / "one_qubit_controlled.csv")
        assert list(trajectory.columns) == ["t", "m_x", "m_y", "m_z"]
        assert len(trajectory) == 41

    def test_run_is_deterministic(self, tmp_path, monkeypatch):
        path = short_config("two_qubit_mixed", tmp_path, t_end=1.0, n_points=11, step=1e-2)
        outputs = []
        for run in ("first", "second"):
            directory = tmp_path / run
            monkeypatch.setenv(OUTPUT_DIR_ENV, str(directory))
            assert main(["run", path, "--quiet"]) == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(directory.iterdir())})
        assert outputs[0].keys() == outputs[1].keys()
        assert "two_qubit_mixed_entanglement.csv" in outputs[0]
        assert outputs[0] == outputs[1]

    def test_empty_time_grid(self, out_dir, tmp_path, capsys):
        data = preset("one_qubit").to_dict()
        data["time"]["t_end"] = data["time"]["t0"]
        path = tmp_path / "empty.yaml"
        path.write_text(yaml.safe_dump(data))
        assert main(["run", str(path), "--quiet"]) == 2
        assert error_line(capsys)["error"] == "config"

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.yaml"), "--quiet"]) == 5
        assert error_line(capsys)["error"] == "io"

    def test_unwritable_output_directory(self, tmp_path, monkeypatch, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        monkeypatch.setenv(OUTPUT_DIR_ENV, os.path.join(str(blocker), "out"))
        assert main(["check", "preset:one_qubit", "--quiet"]) == 5
        assert error_line(capsys)["error"] == "io"
