from __future__ import annotations

import json

import numpy as np
import pytest

from restrictlab import runner
from restrictlab.cli import main
from restrictlab.errors import LabError, PreconditionError
from restrictlab.io import (
    load_spec,
    read_measure_csv,
    save_spec,
    spec_from_json,
    spec_to_json,
    write_measure_csv,
)
from restrictlab.measures import (
    AtomicMeasure,
    CantorSpec,
    SharpExampleSpec,
    build_cantor_measure,
    build_sharp_example,
)
from restrictlab.runner import ExperimentConfig, ConfigError, format_report, report, run


# measure CSV and spec JSON


def test_measure_csv_roundtrip_exact(tmp_path):
    mu, _ = build_sharp_example(SharpExampleSpec(2.0, 1.5, 64.0, samples_per_bump=8))
    path = tmp_path / "m.csv"
    write_measure_csv(mu, path)
    back = read_measure_csv(path)
    assert np.array_equal(back.positions, mu.positions)
    assert np.array_equal(back.weights, mu.weights)
    assert back.declared_alpha == 1.5 and back.provenance == "sharp_example"


def test_measure_csv_format(tmp_path):
    mu = AtomicMeasure([[0.25, -1.0]], [0.5 + 0.25j], declared_alpha=1.0)
    path = tmp_path / "m.csv"
    write_measure_csv(mu, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# atomic-measure v1, alpha=1.0, provenance=custom"
    assert lines[1] == "x,y,re_w,im_w"
    fields = lines[2].split(",")
    assert len(fields) == 4
    for f in fields:
        mantissa = f.split("e")[0].replace("-", "").replace(".", "")
        assert len(mantissa) >= 15


def test_measure_csv_without_column_line(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("# atomic-measure v1, alpha=0.5, provenance=custom\n0.1,0.2,1.0,0.0\n0.3,0.4,0.5,-0.5\n")
    mu = read_measure_csv(path)
    assert mu.n_atoms == 2 and mu.weights[1] == 0.5 - 0.5j


def test_measure_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("x,y,re_w,im_w\n0,0,1,0\n")
    with pytest.raises(PreconditionError):
        read_measure_csv(path)


def test_spec_json_roundtrip(tmp_path):
    for spec in (CantorSpec(2, 0.3, 3, 0.25, 4), SharpExampleSpec(2.0, 0.4, 128.0, "case_iii")):
        assert spec_from_json(spec_to_json(spec)) == spec
        save_spec(spec, tmp_path / "s.json")
        assert load_spec(tmp_path / "s.json") == spec
    with pytest.raises(PreconditionError):
        spec_from_json({"kind": "fractal"})
    with pytest.raises(PreconditionError):
        spec_from_json({"kind": "cantor", "depth": 2})


# runner


def _write(tmp_path, obj, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_whitney_run(tmp_path):
    cfg = ExperimentConfig("whitney", {"n_max": 12, "points": 10_000}, seed=5, output_dir=str(tmp_path / "w"))
    manifest = run(cfg)
    assert manifest.passed
    summary = json.loads((tmp_path / "w" / "summary.json").read_text())
    assert summary["histogram"] == {"1": 10_000}
    assert summary["pairs_n2"] == 6


def test_decay_run_outputs(tmp_path):
    cfg = ExperimentConfig(
        "decay",
        {"measure": {"kind": "cantor_alpha", "alpha": 1.5}, "R_exponents": [6, 9]},
        output_dir=str(tmp_path / "d"),
        atom_budget=10**12,
    )
    manifest = run(cfg)
    out = tmp_path / "d"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["predicted"] == pytest.approx(-0.75)
    assert "slope" in summary and "max_residual" in summary
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header == "R,value,gamma,kind,quad_nodes,converged"
    svg = (out / "plot.svg").read_text()
    assert svg.startswith("<svg") and "stroke-dasharray" in svg and "2^6" in svg
    m = json.loads((out / "manifest.json").read_text())
    assert m["config"]["experiment"] == "decay" and m["version"]
    assert manifest.converged and all(manifest.converged)


def test_results_bitwise_reproducible(tmp_path):
    params = {"R_exponents": [6, 8], "mc_samples": 10_000, "n_values": [3]}
    a = run(ExperimentConfig("tubes", params, seed=9, output_dir=str(tmp_path / "a")))
    b = run(ExperimentConfig("tubes", params, seed=9, output_dir=str(tmp_path / "b")))
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()
    assert a.passed == b.passed


@pytest.mark.parametrize(
    "experiment,params",
    [
        ("threshold", {"alpha": 1.5, "gamma": -1.5}),
        ("threshold", {"alpha": 2.5, "gamma": 0.0}),
        ("decay", {"measure": {"kind": "cantor_alpha", "alpha": 1.5}, "R_exponents": [6, 7]}),
        ("decay", {"measure": {"kind": "grid", "n": 8}, "bogus": 1}),
        ("tubes", {"I_tilde": [1.0, 1.5], "J_tilde": [1.25, 2.0]}),
        ("m_scan", {"m_values": [0.5, 2, 4]}),
        ("vdc", {"intervals": [[2.0, 1.0]]}),
        ("rect", {"intervals": [[0.5, 1.0]]}),
    ],
)
def test_invalid_configs_rejected_before_compute(tmp_path, experiment, params):
    out = tmp_path / "bad"
    with pytest.raises(ConfigError):
        run(ExperimentConfig(experiment, params, output_dir=str(out)))
    assert not out.exists()


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig("fourier", {})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json({"experiment": "vdc", "colour": "red"})


def test_failure_removes_partial_outputs(tmp_path, monkeypatch):
    def prepare(params, cfg):
        params.finish()

        def compute():
            raise LabError("boom")

        return compute

    monkeypatch.setitem(runner.PREPARE, "rect", prepare)
    out = tmp_path / "r"
    out.mkdir()
    (out / "results.csv").write_text("stale")
    with pytest.raises(LabError):
        run(ExperimentConfig("rect", {}, output_dir=str(out)))
    assert not (out / "results.csv").exists()
    m = json.loads((out / "manifest.json").read_text())
    assert m["error"]["experiment"] == "rect" and m["error"]["message"] == "boom"


def test_report_rows(tmp_path):
    assert report([]) == []
    run(ExperimentConfig("rect", {"R_exponents": [0, 4]}, output_dir=str(tmp_path / "r")))
    rows = report([tmp_path / "r"])
    assert rows[0]["experiment"] == "rect" and rows[0]["predicted"] == 1.0 and rows[0]["passed"]
    assert rows[0]["warning"] == ""
    m = json.loads((tmp_path / "r" / "manifest.json").read_text())
    m["version"] = "0.0.1"
    (tmp_path / "r" / "manifest.json").write_text(json.dumps(m))
    assert "version" in report([tmp_path / "r"])[0]["warning"]
    assert "rect" in format_report(report([tmp_path / "r"]))


def test_report_missing_or_corrupt(tmp_path):
    with pytest.raises(LabError, match="missing"):
        report([tmp_path / "nothing"])
    (tmp_path / "c").mkdir()
    (tmp_path / "c" / "manifest.json").write_text("{not json")
    with pytest.raises(LabError, match="corrupt"):
        report([tmp_path / "c"])


# command line


def test_cli_run_exit_codes(tmp_path, capsys):
    ok = _write(tmp_path, {"experiment": "rect", "parameters": {"R_exponents": [0, 3]}, "output_dir": "ok"}, "ok.json")
    assert main(["run", str(ok)]) == 0
    assert (tmp_path / "ok" / "results.csv").exists()
    fail = _write(tmp_path, {"experiment": "vdc", "parameters": {"intervals": [[1.0, 2.0]]}, "output_dir": "f"}, "f.json")
    assert main(["run", str(fail)]) == 1
    bad = _write(tmp_path, {"experiment": "threshold", "parameters": {"alpha": 1.5, "gamma": -2}}, "bad.json")
    assert main(["run", str(bad)]) == 2
    big = _write(
        tmp_path,
        {"experiment": "decay", "parameters": {"measure": {"kind": "cantor_alpha", "alpha": 1.8}}, "output_dir": "big"},
        "big.json",
    )
    assert main(["run", str(big)]) == 3
    assert main(["run", str(tmp_path / "absent.json")]) == 2
    assert main(["frobnicate"]) == 2


def test_cli_report(tmp_path, capsys):
    assert main(["report"]) == 0
    cfg = _write(tmp_path, {"experiment": "rect", "parameters": {"R_exponents": [0, 3]}, "output_dir": "r"})
    main(["run", str(cfg)])
    capsys.readouterr()
    assert main(["report", str(tmp_path / "r")]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("run\texperiment")
    assert main(["report", str(tmp_path / "missing")]) == 2


def test_cli_synth_and_audit(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    save_spec(CantorSpec(2, 1 / 3, 2, 1 / 3, 3), spec)
    csv_path = tmp_path / "m.csv"
    assert main(["synth-measure", str(spec), "-o", str(csv_path)]) == 0
    back = read_measure_csv(csv_path)
    ref = build_cantor_measure(CantorSpec(2, 1 / 3, 2, 1 / 3, 3))
    assert np.array_equal(back.positions, ref.positions)
    capsys.readouterr()
    assert main(["audit-dim", str(csv_path), "--alpha", "1.2619"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["worst_ratio"] > 0 and rep["alpha"] == pytest.approx(1.2619)
    assert main(["audit-dim", str(csv_path), "--alpha", "3"]) == 2


def test_cli_ft_dump(tmp_path):
    spec = tmp_path / "spec.json"
    save_spec(CantorSpec(2, 1 / 3, 1, 1.0, 3), spec)
    pts = tmp_path / "pts.csv"
    pts.write_text("xi1,xi2\n3,0\n0,0\n")
    out = tmp_path / "ft.csv"
    assert main(["ft", str(spec), "--points", str(pts), "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "xi1,xi2,re,im"
    assert float(lines[2].split(",")[2]) == pytest.approx(1.0)
    assert float(lines[1].split(",")[2]) == pytest.approx(-0.383022221559489, abs=1e-14)
