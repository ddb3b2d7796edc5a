"""CLI: config parsing, run modes, exit codes, artifact round-trips."""

import json

import numpy as np
import pytest

from fractorus import cli
from fractorus.errors import ParseError, ValidationError
from fractorus.grids import Spectrum, object_from_json

MINIMAL = {
    "grid": {"N": 1, "T": 6.283185307179586, "n": 64},
    "frac": {"s": 0.5, "m": 1.0},
    "nonlinearity": {"kind": "pure_power", "p": 3, "mu": 4, "r0": 1},
    "solver": {},
    "mode": "solve",
    "seed": 7,
}


def _doc(**overrides):
    doc = json.loads(json.dumps(MINIMAL))
    doc.update(overrides)
    return json.dumps(doc)


def test_parse_minimal():
    cfg = cli.parse_config(_doc())
    assert cfg.grid.n == 64
    assert cfg.frac.s == 0.5
    assert cfg.nonlinearity.p == 3.0
    assert cfg.mode == "solve"


def test_parse_malformed():
    with pytest.raises(ParseError):
        cli.parse_config("{not json")


def test_parse_unknown_key():
    doc = json.loads(json.dumps(MINIMAL))
    doc["grid"]["radius"] = 3
    with pytest.raises(ValidationError) as exc:
        cli.parse_config(json.dumps(doc))
    assert "$.grid.radius" in str(exc.value)


def test_parse_supercritical_growth():
    doc = json.loads(json.dumps(MINIMAL))
    doc["nonlinearity"] = {"kind": "pure_power", "p": 5}
    doc["frac"] = {"s": 0.25, "m": 1.0}  # critical growth is 3
    with pytest.raises(ValidationError) as exc:
        cli.parse_config(json.dumps(doc))
    assert "$.nonlinearity" in str(exc.value)


def test_parse_bad_mode():
    with pytest.raises(ValidationError):
        cli.parse_config(_doc(mode="train"))


def test_parse_sweep_needs_m_list():
    with pytest.raises(ValidationError):
        cli.parse_config(_doc(mode="sweep"))
    cfg = cli.parse_config(_doc(mode="sweep", m_list=[0.5, 0.1]))
    assert cfg.m_list == [0.5, 0.1]
    with pytest.raises(ValidationError):
        cli.parse_config(_doc(mode="sweep", m_list=[0.1, 0.5]))


def test_verify_mode(tmp_path):
    cfg = cli.parse_config(_doc(mode="verify"))
    code = cli.run(cfg, output_dir=tmp_path)
    assert code == cli.EXIT_OK
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["passed"] is True
    assert report["n_properties"] >= 20
    assert all(p["passed"] for p in report["properties"])


def test_solve_mode_artifacts(tmp_path):
    cfg = cli.parse_config(_doc())
    code = cli.run(cfg, output_dir=tmp_path, solver_trace=True, dump_extension=True)
    assert code == cli.EXIT_OK
    sol = object_from_json(json.loads((tmp_path / "solution.json").read_text()))
    assert isinstance(sol, Spectrum)
    erep = json.loads((tmp_path / "energy.json").read_text())
    assert erep["status"] == "Converged"
    assert erep["residual"] < 1e-8
    assert erep["level"] > 0
    assert (tmp_path / "solver_trace.csv").exists()
    ext = json.loads((tmp_path / "extension.json").read_text())
    assert len(ext["slices"]) == len(ext["y"])


def test_trace_determinism(tmp_path):
    # identical config + seed: byte-identical solver traces
    for sub in ("a", "b"):
        cfg = cli.parse_config(_doc())
        cli.run(cfg, output_dir=tmp_path / sub, solver_trace=True)
    a = (tmp_path / "a" / "solver_trace.csv").read_bytes()
    b = (tmp_path / "b" / "solver_trace.csv").read_bytes()
    assert a == b


def test_sweep_mode(tmp_path):
    cfg = cli.parse_config(_doc(mode="sweep", m_list=[0.5, 0.1]))
    code = cli.run(cfg, output_dir=tmp_path)
    assert code == cli.EXIT_OK
    rows = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    assert rows[0] == "m,alpha,hs_norm_T,l2_norm,residual,status"
    assert len(rows) == 3
    assert (tmp_path / "limit.json").exists()
    assert (tmp_path / "sol_m0.5.json").exists()


def test_sweep_mass_above_m0_exits_config(tmp_path):
    cfg = cli.parse_config(_doc(mode="sweep", m_list=[50.0, 0.1]))
    with pytest.raises(ValidationError):
        cli.run(cfg, output_dir=tmp_path)


def test_diagnose_mode(tmp_path):
    cfg = cli.parse_config(_doc())
    cli.run(cfg, output_dir=tmp_path)
    dcfg = cli.parse_config(_doc(mode="diagnose",
                                 solution_file=str(tmp_path / "solution.json")))
    code = cli.run(dcfg, output_dir=tmp_path)
    assert code == cli.EXIT_OK
    doc = json.loads((tmp_path / "diagnose.json").read_text())
    assert len(doc["bootstrap"]) >= 3
    assert doc["holder_alpha"] is None or 0 < doc["holder_alpha"] < 1


def test_main_exit_codes(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(_doc(mode="verify"))
    assert cli.main(["verify", "--config", str(cfg_path), "--output", str(tmp_path)]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert cli.main(["solve", "--config", str(bad)]) == cli.EXIT_CONFIG
    sweep_bad = tmp_path / "sweep_bad.json"
    sweep_bad.write_text(_doc(mode="sweep", m_list=[50.0, 0.1]))
    assert cli.main(["sweep", "--config", str(sweep_bad),
                     "--output", str(tmp_path)]) == cli.EXIT_CONFIG


def test_output_files_roundtrip(tmp_path):
    cfg = cli.parse_config(_doc())
    cli.run(cfg, output_dir=tmp_path)
    for name in ("solution.json",):
        obj = object_from_json(json.loads((tmp_path / name).read_text()))
        assert isinstance(obj, Spectrum)
        assert np.all(np.isfinite(obj.coeffs.view(float)))
