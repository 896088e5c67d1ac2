import json

import pytest

from finitepop.cli import main, render_report
from finitepop.fixtures import p8_future, p8_observed
from finitepop.io import save_future_csv, save_observed_csv


@pytest.fixture
def p8_files(tmp_path):
    obs = tmp_path / "observed.csv"
    fut = tmp_path / "future.csv"
    save_observed_csv(p8_observed(with_instrument=True), obs)
    save_future_csv(p8_future(), fut)
    return obs, fut


def write_config(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_p8_oracle_mode(tmp_path, p8_files):
    obs, fut = p8_files
    out = tmp_path / "report.json"
    cfg = write_config(
        tmp_path,
        "run.yaml",
        f"schema: 1\nmode: oracle\nobserved: {obs}\nfuture: {fut}\n"
        f"methods: [rct, matching]\nout: {out}\n",
    )
    assert main(["run", "--config", cfg]) == 0
    report = json.loads(out.read_text())
    for method in ("rct", "matching"):
        entry = report["methods"][method]
        assert entry["per_treatment"]["1"]["estimate"] == 7.0
        assert entry["per_treatment"]["0"]["estimate"] == 4.0
        assert entry["verdicts"]["1"]["budget"] == 0.0
        assert entry["verdicts"]["1"]["pass"] is True
    assert report["ground_truth"]["ate"] == 3.0
    assert report["ok"] is True


def test_run_data_mode_no_verdicts(tmp_path, p8_files):
    obs, _ = p8_files
    out = tmp_path / "report.json"
    cfg = write_config(
        tmp_path, "run.yaml",
        f"schema: 1\nmode: data\nobserved: {obs}\nmethods: [rct]\nout: {out}\n",
    )
    assert main(["run", "--config", cfg]) == 0
    report = json.loads(out.read_text())
    assert "verdicts" not in report["methods"]["rct"]
    assert "ground_truth" not in report


def test_audit_cfd_data_mode_exits_3(tmp_path, p8_files, capsys):
    obs, fut = p8_files
    cfg = write_config(
        tmp_path, "audit.yaml",
        f"schema: 1\nmode: data\nobserved: {obs}\nfuture: {fut}\naudits: [cfd]\n",
    )
    assert main(["audit", "--config", cfg]) == 3
    assert "CFD unobservable without ground truth" in capsys.readouterr().err


def test_malformed_csv_header_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,treat,y\n1,1,2.0\n")
    out = tmp_path / "report.json"
    cfg = write_config(
        tmp_path, "run.yaml",
        f"schema: 1\nobserved: {bad}\nmethods: [rct]\nout: {out}\n",
    )
    assert main(["run", "--config", cfg]) == 2
    assert "line 1" in capsys.readouterr().err
    assert not out.exists()  # no partial report


def test_unsupported_schema_version_exits_2(tmp_path, p8_files, capsys):
    obs, _ = p8_files
    out = tmp_path / "report.json"
    cfg = write_config(
        tmp_path, "run.yaml",
        f"schema: 2\nobserved: {obs}\nmethods: [rct]\nout: {out}\n",
    )
    assert main(["run", "--config", cfg]) == 2
    assert not out.exists()


def test_missing_schema_key_exits_2(tmp_path, p8_files):
    obs, _ = p8_files
    cfg = write_config(tmp_path, "run.yaml", f"observed: {obs}\nmethods: [rct]\n")
    assert main(["run", "--config", cfg]) == 2


def test_support_failure_exits_3(tmp_path, capsys):
    obs = tmp_path / "obs.csv"
    obs.write_text("id,t,y,xc_level\n1,1,2.0,a\n2,0,1.0,a\n3,0,1.0,b\n")
    cfg = write_config(
        tmp_path, "run.yaml", f"schema: 1\nobserved: {obs}\nmethods: [matching]\n"
    )
    assert main(["run", "--config", cfg]) == 3
    err = capsys.readouterr().err
    assert "matching" in err


def test_env_overrides_config_and_flag_overrides_env(tmp_path, p8_files, monkeypatch):
    obs, fut = p8_files
    out_cfg = tmp_path / "from_config.json"
    out_env = tmp_path / "from_env.json"
    out_flag = tmp_path / "from_flag.json"
    cfg = write_config(
        tmp_path, "run.yaml",
        f"schema: 1\nmode: oracle\nobserved: {obs}\nfuture: {fut}\n"
        f"methods: [rct]\nout: {out_cfg}\n",
    )
    monkeypatch.setenv("FINITEPOP_OUT", str(out_env))
    assert main(["run", "--config", cfg]) == 0
    assert out_env.exists() and not out_cfg.exists()
    assert main(["run", "--config", cfg, "--out", str(out_flag)]) == 0
    assert out_flag.exists() and not out_cfg.exists()


def test_simulate_writes_artifacts(tmp_path):
    out_dir = tmp_path / "sim"
    cfg = write_config(
        tmp_path, "sim.yaml",
        "schema: 1\nn_observed: 20\nn_future: 30\nlevels: [a, b]\n"
        "base_outcomes:\n  a: [2.0, 6.0]\n  b: [3.0, 5.0]\nnoise_sd: 0.4\nseed: 6\n",
    )
    assert main(["simulate", "--config", cfg, "--out", str(out_dir)]) == 0
    assert (out_dir / "observed.csv").exists()
    assert (out_dir / "future.csv").exists()
    sidecar = json.loads((out_dir / "ground_truth.json").read_text())
    assert "ate" in sidecar["ground_truth"]


def test_sweep_byte_identical_reruns(tmp_path):
    cfg = write_config(
        tmp_path, "sweep.yaml",
        "schema: 1\nseed: 11\nreplications: 4\nmethods: [rct, matching]\n"
        "scenario:\n  n_observed: 24\n  n_future: 30\n  levels: [a, b]\n"
        "  base_outcomes:\n    a: [2.0, 6.0]\n    b: [3.0, 5.0]\n  noise_sd: 0.5\n",
    )
    out1, out2 = tmp_path / "s1.json", tmp_path / "s2.json"
    assert main(["sweep", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    assert report["summary"]["rct"]["pass_rate"] == 1.0


def test_sweep_zero_replications(tmp_path):
    cfg = write_config(
        tmp_path, "sweep.yaml",
        "schema: 1\nseed: 1\nreplications: 0\nmethods: [rct]\n"
        "scenario:\n  n_observed: 10\n  n_future: 10\n  levels: [a]\n"
        "  base_outcomes:\n    a: [2.0, 6.0]\n",
    )
    out = tmp_path / "s.json"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["summary"] == {}


def test_render_report_17_significant_digits():
    text = render_report({"v": 1.0 / 3.0})
    assert "0.33333333333333331" in text


def test_render_report_sorted_and_stable():
    a = render_report({"b": 1, "a": [2.0, None, True]})
    b = render_report({"a": [2.0, None, True], "b": 1})
    assert a == b
    assert json.loads(a) == {"a": [2.0, None, True], "b": 1}
