import io
import json

import pytest

from fqmzv import cli
from fqmzv.checks import zeta_bruteforce
from fqmzv.completions import embed_inf, embed_v
from fqmzv.fqarith import FiniteField, RatFunc
from fqmzv.mzv import builtin_certificate
from fqmzv.polylog import li_star_trunc


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_zeta_at_infinity():
    code, out, _ = run("zeta", "[2]", "--q", "2", "--Ninf", "40")
    assert code == 0
    F2 = FiniteField(2)
    # partial sums up to degree 6 are far past the T^-40 cutoff
    oracle = embed_inf(zeta_bruteforce(F2, [2], 6), 40).render()
    assert out.splitlines()[0] == oracle
    assert "T^-40" in out


def test_li_star_v_adic():
    code, out, _ = run("li_star", "[1]", "@", "[T]", "--v", "T", "--Mv", "20", "--q", "2")
    assert code == 0
    F2 = FiniteField(2)
    T = F2.theta()
    oracle = embed_v(li_star_trunc([1], [RatFunc(F2, T)], 6), T, 20)
    assert out.splitlines()[0] == oracle.render()
    assert "v^20" in out


def test_star_collapse():
    code, out, _ = run("star", "z[1,T]", "z[1,T]", "--q", "2")
    assert code == 0 and out.splitlines()[0] == "z[2,T^2]"


def test_eval_keyword_and_json():
    code, out, _ = run("eval", "zeta_v", "[2]", "--q", "2^2", "--Mv", "10", "--format", "json")
    assert code == 0
    record = json.loads(out)
    assert record["value"].endswith("O(v^11)") and "v^10" in record["precision"]


def test_log_expression():
    code, out, _ = run("log", "G([2,1],[T,1])", "@", "[T,1,1,1]", "--Ninf", "10")
    assert code == 0
    assert len([l for l in out.splitlines() if l.startswith("coordinate")]) == 4


def test_certificate_files(tmp_path):
    F4 = FiniteField(2, 2)
    path = tmp_path / "zeta2.json"
    path.write_text(builtin_certificate(F4, [2]).to_json())
    code, out, _ = run("zeta_v", "[2]", "--q", "4", "--Mv", "12", "--certs", str(path))
    assert code == 0
    _, plain, _ = run("zeta_v", "[2]", "--q", "4", "--Mv", "12")
    assert out == plain


@pytest.mark.parametrize("argv", [
    ("zeta", "[1]", "--q", "6"),
    ("zeta", "[1]", "--q", "2", "--v", "T^2+1"),
    ("zeta", "[1]", "--Ninf", "0"),
    ("zeta", "[1", "--q", "2"),
    ("frobnicate", "[1]"),
    ("li_star", "[1]", "@", "[T+$]"),
    ("zeta_v", "[3]", "--q", "2"),
    ("zeta", "[1]", "--q", "4", "--modulus", "g^2+1"),
    ("suite", "nonexistent"),
    ("log", "G([2,1],[T,1])", "@", "[T,1]"),
])
def test_configuration_errors_exit_2(argv):
    code, _, err = run(*argv)
    assert code == 2


def test_parse_error_reports_position():
    code, _, err = run("li_star", "[1]", "@", "[T+$]")
    assert code == 2 and "position 2" in err


def test_domain_violation_exit_1():
    code, _, err = run("li_star", "[1]", "@", "[T^5]")
    assert code == 1 and "val_inf(u_1) = -5" in err


def test_suite_json_schema():
    code, out, _ = run("suite", "paper-example", "--q", "4", "--v", "T", "--Mv", "25", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["ok"] is True
    for record in report["checks"]:
        assert {"id", "verdict", "precision_claimed", "elapsed_ms"} <= set(record)
        assert record["verdict"] == "PASS"


def test_invariants_suite_q3_sorted():
    code, out, _ = run("suite", "invariants", "--q", "3", "--format", "json", "--jobs", "3")
    assert code == 0
    ids = [r["id"] for r in json.loads(out)["checks"]]
    assert ids == sorted(ids) and len(ids) >= 5


def test_failing_check_exits_1(monkeypatch):
    monkeypatch.setattr(cli, "invariants_suite",
                        lambda q: [("Z-fails", lambda: (False, "deliberate"), "exact"),
                                   ("A-passes", lambda: (True, ""), "exact")])
    code, out, _ = run("suite", "invariants")
    assert code == 1
    lines = out.splitlines()
    assert lines[0].startswith("PASS A-passes") and lines[1].startswith("FAIL Z-fails")


def test_crashing_check_is_reported_as_failure(monkeypatch):
    def boom():
        raise RuntimeError("kaboom")
    monkeypatch.setattr(cli, "invariants_suite", lambda q: [("X", boom, "exact")])
    code, out, _ = run("suite", "invariants", "--format", "json")
    assert code == 1 and "kaboom" in json.loads(out)["checks"][0]["detail"]
