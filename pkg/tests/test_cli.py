"""Command-line front end: config grammar, outputs, exit codes, determinism."""

import json
import subprocess
import sys

import pytest

from ekemq.cli import ConfigError, RunConfig, main

MM1_BASE = {
    "model.k": 1,
    "model.m": 1,
    "model.arrival.base": 3.0,
    "model.service.base": 5.0,
    "series.order": 0,
    "oracle.levels": 40,
    "oracle.grid": 64,
    "oracle.tol": 1e-10,
    "analyze.levels": "1,2",
    "analyze.times": 8,
    "waiting.horizon": 2.0,
    "waiting.steps": 21,
    "busy.horizon": 1.0,
    "busy.step": 0.015625,
    "busy.cap": 30,
}


def write_cfg(tmp_path, name="run.cfg", drop=(), **overrides):
    entries = {**MM1_BASE, **overrides}
    for key in drop:
        entries.pop(key, None)
    text = "# generated by the test suite\n"
    text += "\n".join(f"{k} = {v}" for k, v in entries.items()) + "\n"
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_config_defaults_and_parsing():
    cfg = RunConfig.from_text(
        "model.k = 7\nmodel.m = 4\n"
        "model.arrival.base = 3\nmodel.arrival.sin = 1:-2\n"
        "model.service.base = 5\nmodel.service.sin = 1:4\n"
    )
    assert cfg["series.order"] == 10
    assert cfg["oracle.grid"] == 512
    assert cfg["model.arrival.sin"] == ((1, -2.0),)
    assert cfg["busy.phase"] == (0, 0)
    spec = cfg.spec()
    assert spec.k == 7 and spec.m == 4
    assert spec.arrival.value(0.25) == pytest.approx(1.0)


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError, match="line 2: unknown key"):
        RunConfig.from_text("model.k = 1\nmodel.q = 2\n")


def test_config_rejects_duplicate_and_missing():
    with pytest.raises(ConfigError, match="duplicate"):
        RunConfig.from_text("model.k = 1\nmodel.k = 2\n")
    with pytest.raises(ConfigError, match="missing required key"):
        RunConfig.from_text("model.k = 1\nmodel.m = 1\n")
    with pytest.raises(ConfigError, match="expected key = value"):
        RunConfig.from_text("model.k\n")


def test_bad_values_exit_2(tmp_path, capsys):
    bad_value = write_cfg(tmp_path, "bad1.cfg", **{"oracle.grid": "many"})
    assert main(["oracle", "--config", bad_value,
                 "--out", str(tmp_path / "o1")]) == 2
    shared_factor = write_cfg(tmp_path, "bad2.cfg",
                              **{"model.k": 4, "model.m": 2})
    assert main(["oracle", "--config", shared_factor,
                 "--out", str(tmp_path / "o2")]) == 2
    unstable = write_cfg(tmp_path, "bad3.cfg", **{
        "model.arrival.base": 5.0, "model.service.base": 3.0})
    assert main(["oracle", "--config", unstable,
                 "--out", str(tmp_path / "o3")]) == 2
    missing_file = str(tmp_path / "absent.cfg")
    assert main(["roots", "--config", missing_file,
                 "--out", str(tmp_path / "o4")]) == 2
    err = capsys.readouterr().err
    assert err.count("configuration error") == 4


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_roots_output_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path, **{
        "model.k": 7, "model.m": 4,
        "model.arrival.sin": "1:-2", "model.service.sin": "1:4",
        "series.order": 3,
    })
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["roots", "--config", cfg, "--out", str(out)]) == 0
        outs.append((out / "roots.csv").read_bytes())
    assert outs[0] == outs[1]

    lines = outs[0].decode().splitlines()
    assert lines[0] == "# schema: roots v1"
    assert lines[1].split(",")[:3] == ["n", "branch", "re_y"]
    data = [line.split(",") for line in lines[2:]]
    assert len(data) == 7 * 4          # (2 * order + 1) * m outer roots
    assert {int(row[0]) for row in data} == set(range(-3, 4))
    assert all(float(row[5]) < 1e-10 for row in data)


def test_oracle_outputs(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    assert main(["oracle", "--config", cfg, "--out", str(out)]) == 0
    meta = json.loads((out / "oracle.json").read_text())
    assert meta["residual"] <= 1e-10
    # the level cap sits at 40, so the parked mass is the geometric tail
    assert meta["cap_mass"] == pytest.approx(0.4 * 0.6 ** 40, rel=1e-3)
    assert meta["level_cap"] == 40
    dist_lines = (out / "distribution.csv").read_text().splitlines()
    assert dist_lines[0] == "# schema: periodic-distribution v1"
    # level-0 rows carry no service stage
    first = dist_lines[2].split(",")
    assert first[1] == "0" and first[3] == "-1"
    assert (out / "boundary.csv").exists()


def test_analyze_outputs_and_threads(tmp_path):
    cfg = write_cfg(tmp_path)
    out1, out2 = tmp_path / "t1", tmp_path / "t2"
    assert main(["analyze", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["analyze", "--config", cfg, "--out", str(out2),
                 "--threads", "2"]) == 0
    meta1 = json.loads((out1 / "analyze.json").read_text())
    meta2 = json.loads((out2 / "analyze.json").read_text())
    assert meta1["sup_error_by_level"] == meta2["sup_error_by_level"]
    assert all(v < 1e-8 for v in meta1["sup_error_by_level"].values())
    lines = (out1 / "levels.csv").read_text().splitlines()
    assert lines[0] == "# schema: level-comparison v1"
    assert len(lines) == 2 + 8 * 2     # times * levels, one phase each
    assert lines[2].rstrip().endswith("NA")


def test_waiting_overrides(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "w"
    assert main(["waiting", "--config", cfg, "--out", str(out),
                 "--u", "0.5", "--kind", "sojourn"]) == 0
    meta = json.loads((out / "waiting.json").read_text())
    assert meta["kind"] == "sojourn"
    assert meta["u"] == 0.5
    assert meta["sup_diff"] < 1e-8
    lines = (out / "waiting.csv").read_text().splitlines()
    assert lines[0] == "# schema: waiting v1"
    assert len(lines) == 2 + 21


def test_busy_overrides(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "b"
    assert main(["busy", "--config", cfg, "--out", str(out),
                 "--j", "2", "--u", "0.25"]) == 0
    meta = json.loads((out / "busy.json").read_text())
    assert meta["level"] == 2
    assert meta["u"] == 0.25
    assert meta["sup_diff"] < 1e-3
    assert meta["cap_mass"] < 1e-10
    header = (out / "busy.csv").read_text().splitlines()[1].split(",")
    assert header == ["t", "volterra_a0", "ode_a0",
                      "volterra_total", "ode_total"]


def test_compare_output(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "c"
    assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
    meta = json.loads((out / "compare.json").read_text())
    assert set(meta["levels_sup_diff"]) == {"1", "2"}
    assert set(meta["waiting_sup_diff"]) == {"queue", "sojourn"}
    assert all(v < 1e-8 for v in meta["levels_sup_diff"].values())


def test_numerical_failure_exits_3(tmp_path, capsys):
    cfg = write_cfg(tmp_path, **{"oracle.tol": 1e-14,
                                 "oracle.max_periods": 1})
    assert main(["analyze", "--config", cfg,
                 "--out", str(tmp_path / "f")]) == 3
    err = capsys.readouterr().err
    assert "numerical failure in analyze" in err


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, **{
        "model.k": 7, "model.m": 4,
        "model.arrival.sin": "1:-2", "model.service.sin": "1:4",
        "series.order": 1,
    })
    proc = subprocess.run(
        [sys.executable, "-m", "ekemq.cli", "roots",
         "--config", cfg, "--out", str(tmp_path / "m")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "m" / "roots.csv").exists()
