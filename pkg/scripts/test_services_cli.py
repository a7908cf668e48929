import json
import math
import pickle

import pytest
import yaml

from backend.main import main
from backend.models.records import CheckKind, ScanAxis, ScanSpacing
from backend.services.config_manager import ConfigManager
from backend.services.errors import ConfigError, GridCoverageError, ServiceError
from backend.services.experiment_service import ExperimentService, preset_overrides
from backend.services.figure_service import FigureService
from backend.services.report_service import ReportService
from backend.services.validation_service import (
    GATE_ROW_OVERRIDES,
    GATE_TARGETS,
    GATE_TOLERANCES,
    THERMAL_POINTS,
    ValidationService,
)
from physics_models.units import override_constants

from conftest import CONFIG_PATH


def _write_config(tmp_path, **changes):
    data = yaml.safe_load(CONFIG_PATH.read_text())
    for key, value in changes.items():
        node = data
        parts = key.split("__")
        for part in parts[:-1]:
            node = node[part]
        node[parts[-1]] = value
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(data))
    return path


# Function: test_scan_axis_parse_log
def test_scan_axis_parse_log():
    axis = ScanAxis.parse("trap.freq_parallel_hz=1e3:1e5:3:log")
    assert axis.spacing == ScanSpacing.LOG
    assert axis.grid() == pytest.approx([1e3, 1e4, 1e5])


# Function: test_scan_axis_parse_values
def test_scan_axis_parse_values():
    axis = ScanAxis.parse("atom.temperature_k=1e-6,2e-6,5e-6")
    assert axis.variable == "atom.temperature_k"
    assert axis.grid() == [1e-6, 2e-6, 5e-6]


# Function: test_scan_axis_rejects_bad_text
@pytest.mark.parametrize("text", ["atom.temperature_k", "trap.freq_parallel_hz=0:1e3:3:log"])
def test_scan_axis_rejects_bad_text(text):
    with pytest.raises(ValueError):
        ScanAxis.parse(text)


# Function: test_config_dot_access
def test_config_dot_access(config):
    assert config.get("beams.1.wavelength_nm") == 1038.0
    assert config.get("atom.missing", "fallback") == "fallback"
    assert config.has("solver.n_max")


# Function: test_config_overrides_copy
def test_config_overrides_copy(config):
    warm = config.with_overrides({"atom.temperature_k": 1e-6})
    assert warm.get("atom.temperature_k") == 1e-6
    assert config.get("atom.temperature_k") == 0.0
    assert warm.hash() != config.hash()
    assert ConfigManager(config.config_path, config=config.get_all()).hash() == config.hash()


# Function: test_config_override_unknown_key
def test_config_override_unknown_key(config):
    with pytest.raises(ConfigError) as exc:
        config.with_overrides({"atom.bogus": 1.0})
    assert exc.value.code == "CONFIG_UNKNOWN_KEY"


# Function: test_config_file_missing
def test_config_file_missing(tmp_path):
    with pytest.raises(ConfigError) as exc:
        ConfigManager(tmp_path / "nope.yaml")
    assert exc.value.code == "CONFIG_NOT_FOUND"


# Function: test_service_error_pickles
def test_service_error_pickles():
    error = GridCoverageError("KSPACE_GRID_COVERAGE", "grid too narrow", {"coverage": 0.9})
    restored = pickle.loads(pickle.dumps(error))
    assert isinstance(restored, GridCoverageError)
    assert restored.exit_code == 3
    assert restored.to_dict()["details"] == {"coverage": 0.9}


# Function: test_estimate_single_point
def test_estimate_single_point(config):
    frame = ExperimentService(config).estimate()
    assert len(frame) == 1
    row = frame.iloc[0]
    assert row["tau1_us"] == pytest.approx(1.0044)
    assert row["K_rad_um"] == pytest.approx(7.635, rel=1e-3)
    parts = [c for c in frame.columns if c.startswith("budget_") and c != "budget_total"]
    assert row["budget_total"] == pytest.approx(sum(row[c] for c in parts))


# Function: test_estimate_scan_grows_with_temperature
def test_estimate_scan_grows_with_temperature(config):
    frame = ExperimentService(config).estimate([ScanAxis.parse("atom.temperature_k=1e-6,2e-6")])
    assert list(frame["atom.temperature_k"]) == [1e-6, 2e-6]
    assert frame["T_uK"].tolist() == pytest.approx([1.0, 2.0])
    assert frame["budget_total"].iloc[1] > frame["budget_total"].iloc[0]


# Function: test_estimate_unknown_scan_key
def test_estimate_unknown_scan_key(config):
    with pytest.raises(ConfigError) as exc:
        ExperimentService(config).estimate([ScanAxis.parse("atom.bogus=0:1:2")])
    assert exc.value.code == "CONFIG_UNKNOWN_KEY"


# Function: test_csv_header_and_determinism
def test_csv_header_and_determinism(config):
    reports = ReportService(config)
    frame = ExperimentService(config).estimate()
    meta = reports.metadata("estimate", ["first note"])
    first = reports.write_csv(frame, "estimate", meta).read_text()
    second = reports.write_csv(frame, "estimate", reports.metadata("estimate", ["first note"])).read_text()
    assert first == second
    lines = first.splitlines()
    assert lines[0] == "# command: estimate"
    assert lines[1] == f"# config_hash: {config.hash()}"
    assert "# first note" in lines
    assert lines[lines.index("# first note") + 2].startswith("T_uK,")


# Function: test_gnuplot_script
def test_gnuplot_script(config):
    path = ReportService(config).write_gnuplot(
        "fig", "tau_us", [{"column": "eps", "label": "closed form"}], "kick", "tau", "eps"
    )
    text = path.read_text()
    assert 'using "tau_us":"eps"' in text
    assert "set logscale y" in text
    assert 'set output "fig.png"' in text


# Function: test_analytic_validation_rows_pass
def test_analytic_validation_rows_pass(config):
    rows = ValidationService(config).analytic_rows()
    failed = [r.name for r in rows if not r.passed and not r.informational]
    assert failed == []


# Function: test_analytic_validation_detects_wrong_constant
def test_analytic_validation_detects_wrong_constant(config):
    with override_constants(amu=1.1 * 1.66053906660e-27):
        rows = ValidationService(config).analytic_rows()
    failed = {r.name for r in rows if not r.passed}
    assert "sr_eps1_tau100ns" in failed
    assert "recoil_energy_nk" in failed


# Function: test_cli_estimate
def test_cli_estimate(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["estimate", "--config", str(CONFIG_PATH), "--out", str(out)])
    assert code == 0
    assert (out / "estimate.csv").exists()
    assert "budget_total" in capsys.readouterr().out


# Function: test_cli_simulate_internal_only
def test_cli_simulate_internal_only(tmp_path, capsys):
    path = _write_config(tmp_path, solver__mode="internal_only")
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(path), "--out", str(out)]) == 0
    text = (out / "simulate.csv").read_text()
    assert text.startswith("# command: simulate")
    assert "# mode: internal_only" in text
    assert (out / "simulate.json").exists()
    assert "bell_fidelity" in capsys.readouterr().out


# Function: test_cli_bad_config_exit_code
def test_cli_bad_config_exit_code(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("- just\n- a list\n")
    assert main(["estimate", "--config", str(path), "--out", str(tmp_path)]) == 2


# Function: test_cli_bad_scan_exit_code
@pytest.mark.parametrize("scan", ["atom.temperature_k", "atom.bogus=0:1:2"])
def test_cli_bad_scan_exit_code(tmp_path, scan):
    code = main(["estimate", "--config", str(CONFIG_PATH), "--out", str(tmp_path), "--scan", scan])
    assert code == 2


# Function: test_cli_gate_search_needs_rabi_frequency
def test_cli_gate_search_needs_rabi_frequency(tmp_path, capsys):
    path = _write_config(tmp_path, gate__adiabatic__omega0_rad_us=0.0)
    assert main(["gate-search", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "SEARCH_INPUT" in capsys.readouterr().err


# Function: test_exit_codes_by_family
def test_exit_codes_by_family():
    assert ServiceError("X", "m").exit_code == 1
    assert ConfigError("X", "m").exit_code == 2
    assert GridCoverageError("X", "m").exit_code == 3


# Function: test_reproduce_analytic_figure
def test_reproduce_analytic_figure(config):
    paths = FigureService(config, quick=True).reproduce("fig5")
    assert set(paths) == {"csv", "json", "gp"}
    text = paths["csv"].read_text()
    assert "# analytic only: closed-form epsilon, no full-dynamics runs" in text
    assert 'using "tau1_us":"eps1_T5uK"' in paths["gp"].read_text()


# Function: test_reproduce_unknown_target
def test_reproduce_unknown_target(config):
    with pytest.raises(ConfigError) as exc:
        FigureService(config).reproduce("fig99")
    assert exc.value.code == "UNKNOWN_TARGET"


# Function: test_cli_reproduce_focusing
def test_cli_reproduce_focusing(tmp_path, capsys):
    code = main(["reproduce", "fig7", "--quick", "--config", str(CONFIG_PATH), "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "fig7.csv").exists()


# Function: test_presets_load_as_numbers
def test_presets_load_as_numbers():
    data = yaml.safe_load(CONFIG_PATH.read_text())
    presets = data["presets"]
    assert isinstance(data["rydberg"]["blockade_rad_s"], float)
    for name, gate in presets["gates"].items():
        for key in ("blockade_rad_s", "detuning_ratio", "delta_t_us"):
            assert isinstance(gate[key], (int, float)), f"{name}.{key}"
        assert all(isinstance(v, (int, float)) for v in gate["r12_um"].values())
    assert all(isinstance(v, (int, float)) for v in presets["lifetimes_us"].values())
    assert presets["gates"]["gate3"]["blockade_rad_s"] == pytest.approx(2.0 * math.pi * 4e6)


# Function: test_preset_overrides_are_floats
def test_preset_overrides_are_floats(config):
    overrides = preset_overrides(config, "gate2", "106S")
    assert overrides["rydberg.blockade_rad_s"] == pytest.approx(2.0 * math.pi * 60e6)
    assert isinstance(overrides["rydberg.r12_um"], float)
    assert overrides["rydberg.lifetime_us"] == 366.0


# Function: test_cli_simulate_json_echoes_setup
def test_cli_simulate_json_echoes_setup(tmp_path):
    path = _write_config(tmp_path, solver__mode="internal_only")
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(path), "--out", str(out)]) == 0
    document = json.loads((out / "simulate.json").read_text())
    report = document["result"][0]["report"]
    assert report["config_hash"] == document["metadata"]["config_hash"]
    assert len(report["schedule_hash"]) == 64
    assert report["setup"]["r12_um"] == pytest.approx(2.6)


# Function: test_gate_rows_have_tolerances
def test_gate_rows_have_tolerances():
    for targets in GATE_TARGETS.values():
        assert set(targets) <= set(GATE_TOLERANCES)
    freqs = {freq for freq, _ in THERMAL_POINTS}
    assert freqs == {10e3, 20e3, 50e3}
    assert max(temp for _, temp in THERMAL_POINTS) == pytest.approx(5e-6)


# Function: test_table1_row_listed_gate3
@pytest.mark.slow
def test_table1_row_listed_gate3(config):
    row = FigureService(config, quick=True).table1_row("gate3")
    assert row["delta_t_us"] == pytest.approx(0.49769, abs=2e-4)
    assert row["detuning_ratio"] == pytest.approx(-0.3, abs=5e-5)
    assert row["defect_at_listed_rad"] == pytest.approx(4.0 * math.sqrt(1.3e-5), rel=0.10)
    assert row["blockade_mhz"] == pytest.approx(4.0)


# Function: test_gate1_tau_a_row_is_checked
def test_gate1_tau_a_row_is_checked():
    check, tolerance, note = GATE_ROW_OVERRIDES[("gate1", "tau_a_ns")]
    assert check == CheckKind.ABSOLUTE
    assert tolerance == pytest.approx(8.0)
    assert "95 ns" in note


# Function: test_command_modules_bootstrap_project_root
def test_command_modules_bootstrap_project_root():
    commands = CONFIG_PATH.parent.parent / "backend" / "commands"
    for path in sorted(commands.glob("*.py")):
        source = path.read_text(encoding="utf-8")
        assert "sys.path.insert(0, str(project_root))" in source, path.name
