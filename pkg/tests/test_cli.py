import json

import pytest

from dulac.cli import EXIT_ERROR, EXIT_OK, EXIT_UNCERTIFIED, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_families_lists_builtins(capsys):
    code, data = run_json(capsys, "families")
    assert code == EXIT_OK
    names = {f["name"] for f in data["families"]}
    assert {"vdp", "vil", "eq1-3"} <= names


def test_verify_vdp_bound_one(capsys):
    code, data = run_json(capsys, "verify", "--family", "vdp", "--param", "lambda=1")
    assert code == EXIT_OK
    cert = data["certificate"]
    assert cert["certified"] and cert["bound"] == 1
    assert cert["verdict"]["sign"] == "NonNegative"


def test_verify_vil_above_threshold_no_cycles(capsys):
    code, data = run_json(capsys, "verify", "--family", "vil", "--param", "m=2", "--param", "lambda=3.5")
    assert code == EXIT_OK
    assert data["certificate"]["bound"] == 0


def test_verify_uncertified_exit_code(capsys):
    code, _ = run(capsys, "verify", "--family", "vil", "--param", "m=2", "--param", "lambda=1.4")
    assert code == EXIT_UNCERTIFIED


def test_verify_invalid_input_exit_code(capsys):
    code, _ = run(capsys, "verify", "--family", "vil", "--param", "m=1")
    assert code == EXIT_ERROR
    code, _ = run(capsys, "verify", "--family", "no-such-family")
    assert code == EXIT_ERROR


def test_verify_raw_field(capsys):
    code, data = run_json(capsys, "verify", "--P", "y", "--Q", "-x - lambda*(x^2 - 1)*y",
                          "--V", "x^2 + y^2 - 1", "--s", "2", "--param", "lambda=1")
    assert code == EXIT_OK
    assert data["certificate"]["bound"] == 1


def test_cycles_negative_box_and_enclosure(capsys):
    code, data = run_json(capsys, "cycles", "--family", "eq1-3", "--box", "-1:2")
    assert code == EXIT_OK
    assert data["count"] == 1
    cyc = data["cycles"][0]
    assert cyc["enclosed_equilibria"] == 3
    assert cyc["multiplier"] > 1
    assert cyc["r"] == pytest.approx(0.4159, abs=1e-3)


def test_cycles_linear_center(capsys):
    code, data = run_json(capsys, "cycles", "--family", "linear-center")
    assert code == EXIT_OK
    assert data["center"] is True


def test_melnikov_matches_closed_form(capsys):
    code, data = run_json(capsys, "melnikov", "--family", "vil", "--param", "m=2")
    assert code == EXIT_OK
    assert data["rows"]
    for row in data["rows"]:
        assert abs(row["difference"]) <= 1e-10 * max(1.0, abs(row["closed_form"]))


def test_roots_default_polynomial(capsys):
    code, data = run_json(capsys, "roots")
    assert code == EXIT_OK
    assert data["count"] == 2
    lo = data["roots"][0]
    assert lo["mid"] == pytest.approx(-1.440095657315, abs=1e-10)
    assert lo["width"] < 1e-10


def test_zstar(capsys):
    code, data = run_json(capsys, "zstar")
    assert code == EXIT_OK
    assert data["b_star"] == pytest.approx(0.7470240944, abs=1e-8)


def test_sweep_deterministic_across_workers(capsys):
    argv = ("sweep", "--family", "vil", "--param", "m=2", "--range", "lambda=3.5:4:0.5", "--csv")
    c1, one = run(capsys, *argv, "--workers", "1")
    c2, two = run(capsys, *argv, "--workers", "2")
    assert c1 == c2 == EXIT_OK
    assert one == two
    lines = one.strip().splitlines()
    assert lines[0].startswith("lambda,count,bound,certified")
    assert len(lines) == 3


def test_output_file_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "--family", "vdp", "--out", str(p)]) == EXIT_OK
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert json.loads(paths[0].read_text())["certificate"]["bound"] == 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[common]\nfamily = vil\n\n[verify]\nparam = m=2, lambda=3.5\n")
    code, data = run_json(capsys, "verify", "--config", str(cfg))
    assert code == EXIT_OK
    assert data["config"]["params"]["lambda"] == "7/2"
    code, data = run_json(capsys, "verify", "--config", str(cfg), "--param", "m=2", "--param", "lambda=4")
    assert data["config"]["params"]["lambda"] == "4"


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[common]\nfamliy = vdp\n")
    code, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == EXIT_ERROR
