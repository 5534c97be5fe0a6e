import copy
import json
import os

import numpy as np
import pytest

from bathmodes.cli import main
from bathmodes.config import apply_override, load_config, parse_complex, parse_config
from bathmodes.errors import ConfigError

BASE = {
    "coupling": {
        "type": "lorentzian_sum",
        "strengths": [0.5],
        "centers": [0.0],
        "widths": [1.0],
    },
    "system": {
        "dim": 2,
        "h_schedule": [[0.0, [[0.0, 0.0], [0.0, 0.0]]]],
        "L": [[0.0, 1.0], [0.0, 0.0]],
    },
    "surrogate": {"type": "pseudomode", "M": 4, "omega_c": 2.0, "kappa": 0.2},
    "evolve": {
        "t_end": 1.0,
        "h": 0.01,
        "init": [[0.0, 0.0], [0.0, 1.0]],
        "oracle_h": 0.005,
    },
}


def _write(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_parse_complex_forms():
    assert parse_complex(2) == 2 + 0j
    assert parse_complex([1.0, -1.0]) == 1 - 1j
    with pytest.raises(ConfigError):
        parse_complex("nope")


def test_override_paths():
    data = {"surrogate": {"M": 4}}
    apply_override(data, "surrogate.M", "16")
    apply_override(data, "evolve.h", "0.5")
    assert data["surrogate"]["M"] == 16
    assert data["evolve"]["h"] == 0.5
    with pytest.raises(ConfigError):
        apply_override({"surrogate": 3}, "surrogate.M", "16")


def test_parse_config_requires_blocks():
    cfg = parse_config(copy.deepcopy(BASE))
    assert cfg.surrogate.M == 4
    assert cfg.evolve.oracle_h == 0.005
    for key in ("coupling", "system", "surrogate"):
        broken = copy.deepcopy(BASE)
        del broken[key]
        with pytest.raises(ConfigError):
            parse_config(broken)


def test_fit_command_artifacts(tmp_path):
    path = _write(tmp_path, BASE)
    out = str(tmp_path / "out")
    assert main(["fit", "--config", path, "--out", out]) == 0
    fit = json.loads((tmp_path / "out" / "fit.json").read_text())
    bound = json.loads((tmp_path / "out" / "bound.json").read_text())
    assert len(fit["nodes"]) == 4
    assert fit["kappa"] == 0.2
    assert bound["total"] == pytest.approx(
        bound["smoothing"] + bound["discretization"] + bound["tails"]
    )


def test_fit_override_changes_mode_count(tmp_path):
    path = _write(tmp_path, BASE)
    out = str(tmp_path / "out")
    code = main(
        ["fit", "--config", path, "--out", out, "--override", "surrogate.M=7"]
    )
    assert code == 0
    fit = json.loads((tmp_path / "out" / "fit.json").read_text())
    assert len(fit["nodes"]) == 7


def test_chain_command_artifacts(tmp_path):
    cfg = copy.deepcopy(BASE)
    cfg["surrogate"] = {"type": "chain", "N": 4, "omega_c": 2.0}
    path = _write(tmp_path, cfg)
    out = str(tmp_path / "out")
    assert main(["chain", "--config", path, "--out", out]) == 0
    chain = json.loads((tmp_path / "out" / "chain.json").read_text())
    rule = json.loads((tmp_path / "out" / "gauss.json").read_text())
    assert len(chain["alpha"]) == 4
    assert len(chain["b"]) == 3
    assert abs(sum(rule["weights"]) - 1.0) < 1e-12


def test_simulate_artifacts_and_determinism(tmp_path):
    path = _write(tmp_path, BASE)
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["simulate", "--config", path, "--out", out1]) == 0
    assert main(["simulate", "--config", path, "--out", out2]) == 0
    csv1 = (tmp_path / "a" / "trajectory.csv").read_bytes()
    csv2 = (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert csv1 == csv2
    assert (tmp_path / "a" / "trajectory.png").exists()
    meta = json.loads((tmp_path / "a" / "metadata.json").read_text())
    assert meta["surrogate"] == "pseudomode"
    header = csv1.decode().splitlines()[0].split(",")
    assert header[0] == "t"
    assert header[-1] == "leakage"
    assert len(header) == 1 + 2 * 4 + 1


def test_simulate_chain_surrogate(tmp_path):
    cfg = copy.deepcopy(BASE)
    cfg["surrogate"] = {"type": "chain", "N": 3, "omega_c": 2.0}
    cfg["evolve"]["init"] = [0.0, 1.0]
    path = _write(tmp_path, cfg)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", path, "--out", out]) == 0


def test_strict_mode_flags_leakage(tmp_path):
    cfg = copy.deepcopy(BASE)
    cfg["evolve"]["leak_threshold"] = 0.0
    path = _write(tmp_path, cfg)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", path, "--out", out, "--strict"]) == 3
    assert main(["simulate", "--config", path, "--out", out]) == 0


def test_sweep_report(tmp_path):
    cfg = copy.deepcopy(BASE)
    cfg["sweep"] = {"values": [2, 4]}
    path = _write(tmp_path, cfg)
    out = str(tmp_path / "out")
    assert main(["sweep", "--config", path, "--out", out]) == 0
    lines = (tmp_path / "out" / "report.csv").read_text().splitlines()
    assert lines[0] == "M,trace_distance,certificate"
    assert len(lines) == 3
    for line in lines[1:]:
        m, err, cert = line.split(",")
        assert float(err) <= float(cert)
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert set(meta["timings"]) == {"2", "4"}
    assert (tmp_path / "out" / "convergence.png").exists()


def test_sweep_parallel_matches_serial(tmp_path):
    cfg = copy.deepcopy(BASE)
    cfg["sweep"] = {"values": [2, 4]}
    path = _write(tmp_path, cfg)
    out1, out2 = str(tmp_path / "serial"), str(tmp_path / "parallel")
    assert main(["sweep", "--config", path, "--out", out1]) == 0
    assert main(["sweep", "--config", path, "--out", out2, "--workers", "2"]) == 0
    assert (tmp_path / "serial" / "report.csv").read_bytes() == (
        tmp_path / "parallel" / "report.csv"
    ).read_bytes()


def test_bounds_command(tmp_path):
    cfg = copy.deepcopy(BASE)
    cfg["gamma"] = 0.1
    cfg["certificates"] = [
        {"name": "g_factor", "t": 1.0},
        {"name": "xi", "a": 0.0, "b": 2.0, "y": 0.5, "p": 10.0},
        {"name": "lorentz_l1", "omega_c": 2.0, "kappa": 0.2, "M": 4},
    ]
    path = _write(tmp_path, cfg)
    out = str(tmp_path / "out")
    assert main(["bounds", "--config", path, "--out", out]) == 0
    records = json.loads((tmp_path / "out" / "bounds.json").read_text())
    assert [r["bound"] for r in records] == ["g_factor", "xi", "lorentz_l1"]
    assert all(r["value"] > 0 for r in records)


def test_exit_code_config_errors(tmp_path):
    broken = copy.deepcopy(BASE)
    del broken["coupling"]
    path = _write(tmp_path, broken)
    assert main(["fit", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert main(["fit", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["fit", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_exit_code_numeric_failures(tmp_path):
    cfg = copy.deepcopy(BASE)
    cfg["surrogate"]["M"] = 1
    path = _write(tmp_path, cfg)
    assert main(["fit", "--config", path, "--out", str(tmp_path / "o")]) == 3

    flat = copy.deepcopy(BASE)
    flat["coupling"] = {"type": "flat", "amplitude": 1.0}
    flat["certificates"] = [{"name": "cutoff_error_sq_int", "omega_c": 4.0, "t": 1.0}]
    path2 = _write(tmp_path, flat, "flat.json")
    assert main(["bounds", "--config", path2, "--out", str(tmp_path / "o")]) == 3


def test_load_config_applies_overrides(tmp_path):
    path = _write(tmp_path, BASE)
    cfg = load_config(path, ["surrogate.M=9", "evolve.t_end=2.5"])
    assert cfg.surrogate.M == 9
    assert cfg.evolve.t_end == 2.5
    with pytest.raises(ConfigError):
        load_config(path, ["no_equals_sign"])
