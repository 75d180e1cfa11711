import json

import numpy as np
import pytest

from blenderlab.blender import CoveringCertificate, recheck, verify_blender_1d
from blenderlab.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, emit_plot_data, run
from blenderlab.errors import ConfigError
from blenderlab.hetero_model import affine_model


def call(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = run([*args, "--out", str(out), "--no-plot"])
    return code, out


def test_blender_check_ok(tmp_path):
    code, out = call(tmp_path, "blender-check", "--delta-contraction", "1.5")
    assert code == EXIT_OK
    cert = CoveringCertificate.from_dict(json.loads((out / "certificate.json").read_text()))
    assert cert.covered and cert.margin == pytest.approx(1 / 3) and recheck(cert)
    assert (out / "boxes.csv").read_text().splitlines()[0] == "branch,lo,hi"


def test_blender_check_negative(tmp_path):
    code, out = call(tmp_path, "blender-check", "--delta-contraction", "2.5")
    assert code == EXIT_NEGATIVE
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["verdict"] == "gap" and cert["witness"] == [0.0]


def test_plots_written_when_enabled(tmp_path):
    out = tmp_path / "p"
    assert run(["blender-check", "--out", str(out)]) == EXIT_OK
    png = (out / "covering.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


@pytest.mark.parametrize("args", [["--bogus"], ["blender-check", "--eta", "-1"], ["blender-check", "--workers", "0"],
                                  ["nope"]])
def test_usage_errors(tmp_path, args):
    assert run([*args, "--out", str(tmp_path / "u")]) == EXIT_USAGE


@pytest.mark.parametrize("args,code", [
    (["parablender-check"], EXIT_OK),
    (["parablender-check", "--shrink-index", "1"], EXIT_NEGATIVE),
    (["cantor"], EXIT_OK),
    (["cantor", "--N", "8"], EXIT_NEGATIVE),
    (["horseshoe"], EXIT_OK),
    (["horseshoe", "--N", "5"], EXIT_ERROR),
    (["misiurewicz", "--a", "-2"], EXIT_OK),
    (["misiurewicz", "--a", "0"], EXIT_NEGATIVE),
    (["chain-boost"], EXIT_OK),
    (["exponents"], EXIT_OK),
])
def test_exit_codes(tmp_path, args, code):
    assert call(tmp_path, *args)[0] == code


def test_error_json_on_failure(tmp_path):
    code, out = call(tmp_path, "horseshoe", "--N", "5")
    assert code == EXIT_ERROR
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "PreconditionError"


def test_exponents_plan(tmp_path):
    code, out = call(tmp_path, "exponents")
    plan = json.loads((out / "plan.json").read_text())
    assert plan["plan"]["base_pair"] == [19, 12] and all(plan["invariants"].values())


def test_chain_boost_output(tmp_path):
    code, out = call(tmp_path, "chain-boost")
    rep = json.loads((out / "flatness.json").read_text())
    assert (rep["n"], rep["m"]) == (22, 12)


def test_config_file_model(tmp_path):
    cfg = tmp_path / "model.json"
    cfg.write_text(json.dumps(affine_model().to_config()))
    code, out = call(tmp_path, "cantor", "--config", str(cfg))
    assert code == EXIT_OK
    cfg.write_text(json.dumps({"eigenvalues": {}}))
    assert call(tmp_path, "cantor", "--config", str(cfg), name="bad")[0] == EXIT_ERROR


def test_census_deterministic_across_workers(tmp_path):
    a = call(tmp_path, "sink-census", "--workers", "1", name="w1")[1]
    b = call(tmp_path, "sink-census", "--workers", "3", name="w3")[1]
    assert (a / "census.csv").read_bytes() == (b / "census.csv").read_bytes()
    assert len((a / "census.csv").read_text().splitlines()) == 2


def test_ifs_cloud_points(tmp_path):
    code, out = call(tmp_path, "ifs-cloud", "--iterations", "500", "--seed", "4")
    assert code == EXIT_OK
    rows = (out / "points.csv").read_text().splitlines()
    assert len(rows) == 1 + 480
    again = call(tmp_path, "ifs-cloud", "--iterations", "500", "--seed", "4", name="again")[1]
    assert (again / "points.csv").read_bytes() == (out / "points.csv").read_bytes()


def test_emit_plot_data_kinds(tmp_path):
    cert = verify_blender_1d(1.5)
    (path,) = emit_plot_data(cert, "covering", tmp_path)
    assert path.read_text().splitlines()[1].startswith("g+,")
    (path,) = emit_plot_data(np.array([[0.1], [0.2]]), "ifs-cloud", tmp_path / "c")
    assert path.name == "points.csv"
    first = path.read_bytes()
    emit_plot_data(np.array([[0.1], [0.2]]), "ifs-cloud", tmp_path / "c")
    assert path.read_bytes() == first
    with pytest.raises(ConfigError):
        emit_plot_data(cert, "violin", tmp_path)


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "blender-check" in capsys.readouterr().out
