import json

import pytest

from app.config import Config
from app.errors import ParseError, ValidationError
from app.instances import bundled_corpus, load_instance, load_schema, validate_instance

GOOD = {
    "label": "diag",
    "variables": ["x", "y"],
    "f": "x^3",
    "phi": [["x", "0"], ["0", "x^2"]],
}


def test_bundled_corpus(corpus):
    labels = [inst.label for inst in bundled_corpus()]
    assert labels == sorted(labels)
    assert {"ex1", "ex2", "ex3", "ex4", "free", "ulrich", "case5"} <= set(labels)
    assert corpus["ex1"].expect["h"] == [4, 0, 6, -4, 1]


def test_validate_instance():
    inst = validate_instance(GOOD)
    assert inst.variables == ("x", "y")
    assert inst.phi == (("x", "0"), ("0", "x^2"))
    assert inst.expect == {}


@pytest.mark.parametrize(
    "patch",
    [
        {"phi": [["x", "0"]]},
        {"phi": [["x", "0"], ["0"]]},
        {"variables": ["x", "x"]},
        {"p": "7"},
        {"p": 1},
        {"cap": True},
        {"extra": 1},
        {"expect": {"colour": "red"}},
    ],
)
def test_validate_instance_rejects(patch):
    with pytest.raises(ValidationError):
        validate_instance({**GOOD, **patch})


def test_missing_required_key():
    doc = dict(GOOD)
    del doc["f"]
    with pytest.raises(ValidationError, match="'f'"):
        validate_instance(doc)


def test_load_instance_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"variables": ["x"], ', encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_instance(bad)
    assert info.value.position is not None
    with pytest.raises(ValidationError):
        load_instance(tmp_path / "absent.json")


def test_label_defaults_to_file_stem(tmp_path):
    doc = {k: v for k, v in GOOD.items() if k != "label"}
    path = tmp_path / "mine.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert load_instance(path).label == "mine"


def test_schema_lists_expectation_keys():
    keys = set(load_schema()["properties"]["expect"]["properties"])
    assert {"depth", "h", "e", "case", "a_tuple", "r_coeffs", "h_tilde", "delta"} <= keys


def test_tune_respects_explicit_flags():
    inst = validate_instance({**GOOD, "p": 101, "cap": 8, "seed": 7})
    cfg = Config()
    tuned = inst.tune(cfg)
    assert (tuned.p, tuned.cap, tuned.seed) == (101, 8, 7)
    kept = inst.tune(cfg.with_overrides(seed=3), explicit={"seed"})
    assert kept.seed == 3
    assert kept.p == 101


def test_presentation_uses_prime_override():
    inst = validate_instance({**GOOD, "p": 101})
    assert inst.presentation(8).spec.p == 101
    assert inst.presentation(8, p=103).spec.p == 103
    assert validate_instance(GOOD).presentation(8).spec.p == 32003
