import json

import pytest

from ffpn.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_factor_int_text(capsys):
    code, out = run_cli(capsys, "factor-int", "--n", "387420488")
    assert code == 0
    assert "2^3 * 7 * 13 * 19 * 37 * 757" in out
    assert "omega = 6" in out


def test_factor_int_json_roundtrip(capsys):
    code, out = run_cli(capsys, "--json", "factor-int", "--n", "26")
    assert code == 0
    payload = json.loads(out)
    assert payload["theta"] == {"num": "6", "den": "13"}
    # byte-identical re-rendering
    assert json.dumps(payload, sort_keys=True, indent=2) + "\n" == out


def test_check_verdicts_agree_between_modes(capsys):
    code, text = run_cli(capsys, "check", "--q", "3", "--m", "4")
    assert code == 0 and "fail" in text and "384" in text
    code, js = run_cli(capsys, "--json", "check", "--q", "3", "--m", "4")
    payload = json.loads(js)
    assert payload["verdict"] == "fail" and payload["rhs"] == 384


def test_sieve_command(capsys):
    code, out = run_cli(capsys, "--json", "sieve", "--q", "3", "--m", "18", "--d", "14")
    payload = json.loads(out)
    assert payload["verdict"] == "pass"
    assert payload["n"] == 4
    lam = payload["Lambda"]
    assert abs(int(lam["num"]) / int(lam["den"]) - 12.231) < 5e-4


def test_auto_sieve_command(capsys):
    code, out = run_cli(capsys, "--json", "auto-sieve", "--q", "3", "--m", "3")
    assert code == 0
    assert json.loads(out)["verdict"] == "fail"


def test_table_command(capsys):
    code, out = run_cli(capsys, "--json", "table", "--which", "1")
    rows = json.loads(out)
    assert code == 0 and len(rows) == 8
    by_pair = {(int(r["q"]), int(r["m"])): r for r in rows}
    assert by_pair[(9, 9)]["rhs_matches"] is False
    assert by_pair[(3, 18)]["lambda_matches"] is True
    code, text_out = run_cli(capsys, "table", "--which", "2")
    assert code == 0 and "(27,5)" in text_out and "printed 67.72974" in text_out


def test_enumerate_command(capsys):
    code, out = run_cli(capsys, "--json", "enumerate", "--p", "3", "--r", "1", "--m", "3")
    payload = json.loads(out)
    assert payload["count"] == 9


def test_count_and_witness(capsys):
    code, out = run_cli(
        capsys, "--json", "count", "--p", "3", "--r", "2", "--m", "2",
        "--a", "1", "--b", "0", "--c", "2", "--e1", "1", "--e2", "1", "--g", "1",
    )
    assert json.loads(out)["count"] == 78
    code, out = run_cli(
        capsys, "--json", "witness", "--p", "3", "--r", "1", "--m", "3",
        "--a", "1", "--b", "1", "--c", "2",
    )
    assert json.loads(out)["witness"] is None
    code, out = run_cli(
        capsys, "--json", "witness", "--p", "3", "--r", "1", "--m", "3",
        "--a", "1", "--b", "0", "--c", "1",
    )
    assert json.loads(out)["witness"] is not None


def test_resolve_pair_command(capsys, tmp_path):
    code, out = run_cli(
        capsys, "--json", "--threads", "1",
        "resolve-pair", "--q", "3", "--m", "2",
        "--checkpoint", str(tmp_path / "ck.json"),
    )
    payload = json.loads(out)
    assert code == 0
    assert payload["status"] == "exception_found"
    assert len(payload["bad_quadratics"]) == 32


def test_char_audit_command(capsys):
    code, out = run_cli(
        capsys, "--json", "--threads", "1",
        "char-audit", "--p", "3", "--r", "1", "--m", "2", "--quadratics", "10",
    )
    payload = json.loads(out)
    assert code == 0
    assert payload["weil_violations"] == 0
    assert payload["orthogonality_worst"] < 1e-9


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sieve", "--q", "3"])  # missing required flags
    assert exc.value.code == 2


def test_budget_error_exit_3(capsys):
    code = main(["--json", "enumerate", "--p", "3", "--r", "1", "--m", "17"])
    assert code == 3


def test_factor_poly_command(capsys):
    code, out = run_cli(capsys, "--json", "factor-poly", "--q", "3", "--m", "9")
    payload = json.loads(out)
    assert payload["multiplicity"] == 9
    assert len(payload["factors"]) == 1


def test_cache_flag(capsys, tmp_path):
    path = str(tmp_path / "cache.json")
    code, _ = run_cli(capsys, "--cache", path, "factor-int", "--n", "4782968")
    assert code == 0
    with open(path, encoding="utf-8") as fh:
        assert str(4782968) in json.load(fh)


def test_env_cache_variable(capsys, tmp_path, monkeypatch):
    path = str(tmp_path / "envcache.json")
    monkeypatch.setenv("FFPN_CACHE", path)
    code, _ = run_cli(capsys, "factor-int", "--n", "26")
    assert code == 0
    with open(path, encoding="utf-8") as fh:
        assert json.load(fh)["26"] == ["2", "13"]


def test_sieve_g_flag_variants(capsys):
    code, out = run_cli(capsys, "--json", "sieve", "--q", "3", "--m", "4", "--d", "80", "--g", "1")
    payload = json.loads(out)
    assert code == 0 and payload["k"] == 3  # all three factors remain
    code, out = run_cli(capsys, "--json", "sieve", "--q", "3", "--m", "4", "--d", "80", "--g", "0,1")
    assert json.loads(out)["k"] == 1
