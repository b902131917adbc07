"""Command-line interface: golden outputs, determinism, byte-level
equivalence of the zero-reflectivity paths, exit codes, and error JSON.
"""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from biphoton.cli import cli
from biphoton.config import paper_device_text


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def light_config(tmp_path):
    """Preset config with a 256-point grid: fast, still resolution-safe."""
    text = paper_device_text().replace("points = 512", "points = 256")
    path = tmp_path / "light.cfg"
    path.write_text(text, encoding="utf-8")
    return str(path)


def _ok(result):
    assert result.exit_code == 0, result.stderr or result.output
    return result.stdout


# ------------------------------------------------------------------- goldens


def test_tunability_golden(runner, golden_check):
    out = _ok(runner.invoke(cli, ["tunability"]))
    golden_check("tunability.csv", out)


def test_hom_closed_form_golden(runner, golden_check):
    out = _ok(runner.invoke(cli, ["hom", "--closed-form"]))
    golden_check("hom_closed_form.csv", out)


def test_tomo_golden(runner, golden_check):
    out = _ok(runner.invoke(cli, ["tomo", "--p", "0.517", "--visibility", "0.701"]))
    golden_check("tomo_paper_point.json", out)


# -------------------------------------------------------------- determinism


_WINDOW_20PS = ["--tau-min-ps", "-20", "--tau-max-ps", "20", "--points", "31"]


def test_repeat_runs_are_byte_identical(runner, light_config):
    first = _ok(runner.invoke(cli, ["-c", light_config, "hom"] + _WINDOW_20PS))
    second = _ok(runner.invoke(cli, ["-c", light_config, "hom"] + _WINDOW_20PS))
    assert first == second


def test_thread_count_does_not_change_bytes(runner, light_config):
    args = ["-c", light_config, "hom"] + _WINDOW_20PS
    one = _ok(runner.invoke(cli, args, env={"BIPHOTON_THREADS": "1"}))
    three = _ok(runner.invoke(cli, args, env={"BIPHOTON_THREADS": "3"}))
    assert one == three


def test_bad_thread_env_is_config_error(runner, light_config):
    result = runner.invoke(
        cli,
        ["-c", light_config, "hom"] + _WINDOW_20PS,
        env={"BIPHOTON_THREADS": "0"},
    )
    assert result.exit_code == 2


# ------------------------------------------------- zero-reflectivity identity


def test_hom_fp_without_reflectivity_matches_hom(runner, light_config):
    window = ["--tau-min-ps", "-2", "--tau-max-ps", "2", "--points", "21"]
    ideal = _ok(runner.invoke(cli, ["-c", light_config, "hom"] + window))
    cavity_off = _ok(
        runner.invoke(
            cli,
            ["-c", light_config, "hom-fp", "--reflectivity", "0", "--raw"] + window,
        )
    )
    assert ideal == cavity_off


# ------------------------------------------------------------------ commands


def test_tunability_headers_and_symmetry(runner):
    out = _ok(runner.invoke(cli, ["tunability", "--points", "5"]))
    lines = out.strip().splitlines()
    assert lines[0] == "theta_deg,lambda_s_HV_nm,lambda_i_HV_nm,lambda_s_VH_nm,lambda_i_VH_nm"
    assert len(lines) == 6
    mid = lines[3].split(",")
    assert float(mid[0]) == 0.0
    # at zero tilt the two interactions emit mirrored wavelength pairs
    assert float(mid[1]) == pytest.approx(float(mid[4]), rel=1e-12)
    assert float(mid[2]) == pytest.approx(float(mid[3]), rel=1e-12)


def test_jsi_matrix_structure(runner, light_config):
    out = _ok(runner.invoke(cli, ["-c", light_config, "jsi"]))
    lines = out.strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "lambda_s_nm\\lambda_i_nm"
    lam_i = np.array([float(v) for v in header[1:]])
    assert lam_i.size == 256
    assert np.all(np.diff(lam_i) > 0)
    assert len(lines) == 257
    lam_s = np.array([float(line.split(",", 1)[0]) for line in lines[1:]])
    assert np.all(np.diff(lam_s) > 0)
    values = np.array([[float(v) for v in line.split(",")[1:]] for line in lines[1:]])
    assert values.min() >= 0.0
    assert values.max() > 0.0


def test_jsi_marginals_to_stdout(runner, light_config):
    out = _ok(runner.invoke(cli, ["-c", light_config, "jsi", "--marginals"]))
    assert "# signal_marginal" in out and "# idler_marginal" in out
    signal_block = out.split("# signal_marginal\n")[1]
    assert signal_block.startswith("lambda_s_nm,intensity")


def test_jsi_marginals_to_files(runner, light_config, tmp_path):
    target = tmp_path / "jsi.csv"
    result = runner.invoke(
        cli, ["-c", light_config, "jsi", "--marginals", "-o", str(target)]
    )
    assert result.exit_code == 0, result.stderr
    assert target.exists()
    assert (tmp_path / "jsi.signal.csv").exists()
    assert (tmp_path / "jsi.idler.csv").exists()


def test_output_file_matches_stdout(runner, tmp_path):
    out = _ok(runner.invoke(cli, ["tunability", "--points", "7"]))
    target = tmp_path / "curve.csv"
    result = runner.invoke(cli, ["tunability", "--points", "7", "-o", str(target)])
    assert result.exit_code == 0
    assert target.read_text(encoding="utf-8") == out


def test_tomo_json_fields(runner):
    out = _ok(runner.invoke(cli, ["tomo", "--p", "0.5", "--visibility", "1.0"]))
    payload = json.loads(out)
    assert payload["purity"] == pytest.approx(1.0)
    assert payload["fidelity"] == pytest.approx(1.0)
    assert payload["concurrence"] == pytest.approx(1.0)
    matrix = np.array(payload["matrix_real"]) + 1j * np.array(payload["matrix_imag"])
    assert matrix.shape == (4, 4)
    assert matrix[1, 2] == pytest.approx(0.5)


def test_fit_roundtrip_from_hom_output(runner):
    curve = _ok(runner.invoke(cli, ["hom", "--closed-form"]))
    result = runner.invoke(cli, ["fit", "-"], input=curve)
    assert result.exit_code == 0, result.stderr
    payload = json.loads(result.stdout)
    assert payload["converged"] is True
    assert payload["degenerate"] == []
    assert payload["params"]["V"] == pytest.approx(1.0, rel=1e-6)
    assert payload["params"]["delta_tau"] == pytest.approx(1.0507268998742e-11, rel=1e-4)
    assert payload["params"]["mu"] == pytest.approx(4.640636030854e12, rel=1e-4)


def test_fit_counts_csv_from_file(runner, tmp_path):
    rng = np.random.default_rng(3)
    tau = np.linspace(-30, 30, 121)
    import biphoton as bp

    truth = bp.HomFitParams(V=0.7, delta_tau=1e-11, mu=3.5e12, a=0.0, b=0.0)
    mean = 1000.0 * bp.fit_model(tau * 1e-12, truth)
    counts = rng.poisson(mean)
    path = tmp_path / "counts.csv"
    path.write_text(
        "tau_ps,counts\n"
        + "\n".join(f"{t:.6f},{c:d}" for t, c in zip(tau, counts))
        + "\n",
        encoding="utf-8",
    )
    result = runner.invoke(cli, ["fit", str(path)])
    assert result.exit_code == 0, result.stderr
    payload = json.loads(result.stdout)
    assert payload["converged"] is True
    assert payload["params"]["V"] == pytest.approx(0.7, abs=0.1)


def test_fit_kind_override(runner):
    tau = np.linspace(-30, 30, 61)
    import biphoton as bp

    values = bp.fit_model(
        tau * 1e-12, bp.HomFitParams(V=0.8, delta_tau=1e-11, mu=3.5e12)
    )
    headerless = "\n".join(f"{t},{v}" for t, v in zip(tau, values)) + "\n"
    result = runner.invoke(cli, ["fit", "-", "--kind", "probability"], input=headerless)
    assert result.exit_code == 0, result.stderr
    payload = json.loads(result.stdout)
    assert payload["params"]["V"] == pytest.approx(0.8, rel=1e-6)


# ---------------------------------------------------------------- exit codes


def _stderr_payload(result):
    line = result.stderr.strip().splitlines()[-1]
    payload = json.loads(line)
    assert set(payload) == {"error", "message", "subcommand"}
    return payload


def test_bad_config_exits_2(runner, tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text(
        paper_device_text().replace("points = 512", "points = 512\nmystery = 1"),
        encoding="utf-8",
    )
    result = runner.invoke(cli, ["-c", str(path), "tunability"])
    assert result.exit_code == 2
    payload = _stderr_payload(result)
    assert payload["error"] == "ConfigError"
    assert "mystery" in payload["message"]
    assert payload["subcommand"] == "config"


def test_unresolved_grid_exits_3(runner, tmp_path):
    path = tmp_path / "coarse.cfg"
    path.write_text(
        paper_device_text().replace("points = 512", "points = 64"), encoding="utf-8"
    )
    result = runner.invoke(cli, ["-c", str(path), "jsi"])
    assert result.exit_code == 3
    payload = _stderr_payload(result)
    assert payload["error"] == "ResolutionError"
    assert payload["subcommand"] == "jsi"


def test_oversized_delay_exits_3(runner, light_config):
    result = runner.invoke(
        cli,
        ["-c", light_config, "hom", "--tau-min-ps", "-60", "--tau-max-ps", "60"],
    )
    assert result.exit_code == 3
    assert _stderr_payload(result)["error"] == "ResolutionError"


def test_underdetermined_fit_exits_4(runner):
    text = "tau_ps,p_coincidence\n" + "\n".join(
        f"{t},0.5" for t in range(-3, 4)
    ) + "\n"
    result = runner.invoke(cli, ["fit", "-"], input=text)
    assert result.exit_code == 4
    payload = _stderr_payload(result)
    assert payload["error"] == "DegenerateFitError"
    assert payload["subcommand"] == "fit"


def test_invalid_flag_value_exits_2(runner):
    result = runner.invoke(cli, ["tomo", "--p", "1.4", "--visibility", "0.2"])
    assert result.exit_code == 2
    assert _stderr_payload(result)["error"] == "PhysicalityError"


def test_malformed_fit_input_exits_2(runner):
    result = runner.invoke(cli, ["fit", "-"], input="tau_ps,wattage\n0,1\n")
    assert result.exit_code == 2
    assert "wattage" in _stderr_payload(result)["message"]
