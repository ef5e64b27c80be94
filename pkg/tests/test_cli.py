import asyncio
import json
from pathlib import Path

import pytest

from app.cli import build_parser, explicit_flags, run
from app.commands import verify
from app.config import Config
from app.errors import IdentityError, ValidationError
from app.instances import CORPUS_DIR, load_instance


def _run(*argv) -> int:
    return asyncio.run(run(list(argv)))


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv("MCM_SEED", raising=False)


def test_explicit_flags():
    args = build_parser().parse_args(["hpoly", "x.json", "--seed", "3", "--format", "json"])
    assert explicit_flags(args) == {"seed", "fmt"}


def test_unknown_command_exits_with_usage():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["frobnicate"])
    assert info.value.code == 2


def test_hpoly_json(capsys):
    assert _run("hpoly", str(CORPUS_DIR / "ex4.json"), "--format", "json") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["invariants"]["h"] == [4, 3]
    assert data["invariants"]["e"] == [7, 3, 0, 0]
    assert data["command"] == "hpoly"


def test_invariants_table(capsys):
    assert _run("invariants", str(CORPUS_DIR / "case5.json")) == 0
    out = capsys.readouterr().out
    assert "h: 4 + 4z" in out
    assert "minimal_multiplicity: True" in out


def test_rr_on_depth_zero_example(capsys):
    assert _run("rr", str(CORPUS_DIR / "ex1.json"), "--format", "json") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["rr"]["r_coeffs"] == [1]
    assert data["rr"]["h_tilde"] == [3, 4]
    assert data["rr"]["depth_positive"] is False


def test_classify_table(capsys):
    assert _run("classify", str(CORPUS_DIR / "ex4.json")) == 0
    assert "case_id: 4a" in capsys.readouterr().out


def test_verify_single_instance(capsys):
    assert _run("verify", str(CORPUS_DIR / "ex4.json"), "--seeds", "2", "--format", "json") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["checks"]["passed"] is True
    assert data["checks"]["instances"]["ex4"]["depth"] == 3
    assert data["checks"]["property_pairs"] == 6


def test_command_needs_instance(capsys):
    assert _run("depth") == 3
    assert "needs an instance file" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"variables": ["x", "y"], "f": "x^3", "phi": [["x +"]]}), encoding="utf-8")
    assert _run("hpoly", str(path)) == 2
    assert "position" in capsys.readouterr().err


def test_validation_error_exit_code(tmp_path):
    path = tmp_path / "rect.json"
    path.write_text(json.dumps({"variables": ["x", "y"], "f": "x^3", "phi": [["x", "y"]]}), encoding="utf-8")
    assert _run("hpoly", str(path)) == 3


def test_bad_environment_seed(monkeypatch):
    monkeypatch.setenv("MCM_SEED", "not-a-number")
    assert _run("hpoly", str(CORPUS_DIR / "ex4.json")) == 3


def test_cap_escalation_failure():
    assert _run("hpoly", str(CORPUS_DIR / "ex1.json"), "--cap", "2", "--max-cap", "3") == 4


def test_verify_reports_mismatches(tmp_path, capsys):
    doc = json.loads((CORPUS_DIR / "ulrich.json").read_text(encoding="utf-8"))
    doc["expect"]["h"] = [4, 1]
    path = Path(tmp_path) / "wrong.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert _run("verify", str(path), "--seeds", "1") == 5
    err = capsys.readouterr().err
    assert "ulrich: h: expected [4, 1], computed [4]" in err


def test_verify_failed_identity_is_a_diff(monkeypatch, capsys):
    def broken(*args, **kwargs):
        raise IdentityError("Singh's equality fails")

    monkeypatch.setattr(verify, "verify_exact_sequences", broken)
    assert _run("verify", str(CORPUS_DIR / "ulrich.json"), "--seeds", "1", "--max-cap", "8") == 5
    err = capsys.readouterr().err
    assert "ulrich: property: Singh's equality fails: expected holds, computed IdentityError" in err


def test_corpus_run_continues_after_failure(monkeypatch):
    original = verify.presentation_for

    def flaky(inst, cfg):
        if inst.label == "ulrich":
            raise ValidationError("not maximal Cohen-Macaulay")
        return original(inst, cfg)

    monkeypatch.setattr(verify, "presentation_for", flaky)
    instances = [load_instance(CORPUS_DIR / "ulrich.json"), load_instance(CORPUS_DIR / "case5.json")]
    outcomes = asyncio.run(verify.run_corpus(instances, Config(seeds=1)))

    assert [o.label for o in outcomes] == ["case5", "ulrich"]
    assert outcomes[0].diffs == []
    assert outcomes[0].summary["depth"] == 3
    assert outcomes[1].diffs[0]["key"] == "error: not maximal Cohen-Macaulay"
