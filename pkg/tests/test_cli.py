import json

import pytest

from coulomb_gn import __version__, cli

LIONS = ["--d", "3", "--s", "1", "--p", "2", "--q", "2", "--alpha", "2"]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def only_run_dir(root):
    dirs = [p for p in root.iterdir() if p.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


def test_check_params_admissible(capsys):
    code, out, _ = run(["check-params", *LIONS, "--gamma", "3"], capsys)
    assert code == 0
    assert json.loads(out)["gn"]["admissible"] is True


def test_check_params_inadmissible(capsys):
    code, out, _ = run(["check-params", *LIONS, "--gamma", "2.7"], capsys)
    assert code == 2
    assert json.loads(out)["gn"]["admissible"] is False


def test_check_params_parse_error(capsys):
    code, _, err = run(["check-params", "--d", "3", "--s", "x", "--p", "2", "--q", "2", "--alpha", "2",
                        "--gamma", "3"], capsys)
    assert code == 1 and "--s" in err


def test_check_params_missing_value(capsys):
    code, _, _ = run(["check-params", "--d", "3"], capsys)
    assert code == 1


def test_hardy_const_gradient(capsys):
    code, out, _ = run(["hardy-const", "--d", "3", "--s", "1", "--p", "2"], capsys)
    assert code == 0 and json.loads(out)["value"] == 0.25


def test_hardy_const_fractional(capsys):
    code, out, _ = run(["hardy-const", "--d", "1", "--s", "0.25", "--p", "2"], capsys)
    # value frozen from a 30-digit tanh-sinh oracle (see test_constants)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.4037085997664525, rel=1e-8)


def test_hardy_const_domain_gate(capsys):
    code, out, _ = run(["hardy-const", "--d", "1", "--s", "0.75", "--p", "2"], capsys)
    assert code == 2 and json.loads(out)["error"] == "HARDY_UNDEFINED"


def test_counterexample_writes_csv(tmp_path, capsys):
    code, out, _ = run(["counterexample", "--preset", "inadmissible-d3", "--m", "2,4,8,16,32",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    assert 0.1 <= json.loads(out)["scan"]["slope"] <= 0.3
    run_dir = only_run_dir(tmp_path)
    assert run_dir.name.startswith("counterexample-")
    lines = (run_dir / "result.csv").read_text().splitlines()
    assert lines[0] == f"# version: {__version__}"
    assert lines[3] == "m,ratio,ratio_pow_gamma,est_rel_err" and len(lines) == 9


def test_manybody_lieb_oxford(tmp_path, capsys):
    code, out, _ = run(["manybody", "lieb-oxford", "--preset", "product-bump-d1", "--gamma", "0.5",
                        "--out", str(tmp_path)], capsys)
    rep = json.loads(out)["report"]
    assert code == 0 and rep["residual"] >= -3 * rep["abs_err"]


def test_every_file_echoes_config_and_version(tmp_path, capsys):
    run(["manybody", "fdl", "--x", "0", "--y", "3", "--gamma", "0.5", "--out", str(tmp_path)], capsys)
    run_dir = only_run_dir(tmp_path)
    doc = json.loads((run_dir / "result.json").read_text())
    rec = json.loads((run_dir / "record.json").read_text())
    csv_text = (run_dir / "result.csv").read_text()
    assert doc["version"] == rec["version"] == __version__
    assert doc["config"] == rec["inputs"]
    assert doc["config"]["options"]["gamma"] == 0.5
    assert f"# version: {__version__}" in csv_text and '"gamma": 0.5' in csv_text
    assert sorted(rec["outputs"]) == ["record.json", "result.csv", "result.json"]


def test_rerun_reproduces(tmp_path, capsys):
    argv = ["manybody", "hoffman-ostenhof", "--preset", "grid-random-d1", "--s", "0.5", "--seed", "4"]
    a = b = None
    for sub in ("a", "b"):
        run([*argv, "--out", str(tmp_path / sub)], capsys)
        doc = json.loads((only_run_dir(tmp_path / sub) / "result.json").read_text())
        a, b = b, doc
    assert a["result"] == b["result"] and a["config"] == b["config"]
    assert only_run_dir(tmp_path / "a").name.split("-")[-1] == only_run_dir(tmp_path / "b").name.split("-")[-1]


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nseed = 9\n[manybody]\npreset = product-gaussian-d1\ngamma = 0.25\n")
    code, out, _ = run(["manybody", "lieb-oxford", "--config", str(cfg), "--gamma", "0.5",
                        "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    doc = json.loads((only_run_dir(tmp_path / "o") / "result.json").read_text())
    assert doc["config"]["seed"] == 9
    assert doc["config"]["options"]["preset"] == "product-gaussian-d1"
    assert doc["config"]["options"]["gamma"] == 0.5


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[evaluate]\nbogus = 1\n")
    code, _, err = run(["evaluate", "--config", str(cfg)], capsys)
    assert code == 1 and "bogus" in err


def test_output_root_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path))
    code, _, _ = run(["constants", "--remainder", "2,3"], capsys)
    assert code == 0
    assert "remainder,,,3.0" in (only_run_dir(tmp_path) / "result.csv").read_text()


def test_print_only_commands_leave_no_files(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path))
    run(["hardy-const", "--d", "3", "--s", "1", "--p", "2"], capsys)
    assert not any(tmp_path.iterdir())


def test_evaluate_lions_gaussian(tmp_path, capsys):
    code, out, _ = run(["evaluate", "--preset", "lions", "--function", "gaussian", "--function-params", "1",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads(out)["report"]["ratio"] == pytest.approx(0.5951983, rel=1e-6)


def test_evaluate_inadmissible_needs_flag(tmp_path, capsys):
    code, out, _ = run(["evaluate", "--preset", "inadmissible-d3", "--out", str(tmp_path)], capsys)
    assert code == 2 and json.loads(out)["error"] == "INADMISSIBLE"


def test_estimate_constant_small_budget(tmp_path, capsys):
    code, out, _ = run(["estimate-constant", "--preset", "lions", "--budget", "6", "--starts", "1",
                        "--target-rel-err", "1e-4", "--radial-nodes", "8", "--out", str(tmp_path)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["search"]["evaluations"] <= 6
    rows = (only_run_dir(tmp_path) / "result.csv").read_text().splitlines()
    assert rows[3].startswith("index,start,ratio")


def test_descriptor_input(tmp_path, capsys):
    desc = tmp_path / "g.json"
    desc.write_text(json.dumps({"variant": "PARAMETRIC", "d": 3, "family": "gaussian", "params": [1.0]}))
    code, out, _ = run(["evaluate", "--preset", "lions", "--descriptor", str(desc), "--out", str(tmp_path / "o")],
                       capsys)
    assert code == 0
    assert json.loads(out)["report"]["ratio"] == pytest.approx(0.5951983, rel=1e-6)


def test_version_flag(capsys):
    assert cli.main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out
