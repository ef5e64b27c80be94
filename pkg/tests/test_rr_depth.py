import pytest

from app.classifier import artinian_decompose
from app.config import Config
from app.errors import CapTooSmallError, ValidationError
from app.invariants import poly_trim
from app.module_model import Presentation, build_module, guarded
from app.ring import RingSpec
from app.rr_depth import (
    RRReport,
    SequenceCheck,
    SequenceReport,
    delta_vv,
    depth_assoc_graded,
    depth_at_cap,
    graded_quotient_series,
    reduction_number,
    rr_filtration,
    rr_mod_superficial,
    superficial_chain,
    ulrich_check,
    verify_exact_sequences,
)


@pytest.fixture(scope="module")
def depth_reports(presentations):
    cfg = Config()
    return {label: depth_assoc_graded(presentations[label], cfg) for label in ("ex1", "ex2", "ex3", "ex4", "ulrich")}


@pytest.mark.parametrize(
    "label, depth, h",
    [
        ("ex1", 0, (4, 0, 6, -4, 1)),
        ("ex2", 1, (4, 1, 3, -1)),
        ("ex3", 2, (4, 2, 1)),
        ("ex4", 3, (4, 3)),
    ],
)
def test_depth_of_ex1_to_ex4(depth_reports, label, depth, h):
    rep = depth_reports[label]
    assert rep.depth == depth
    assert rep.h_chain[0] == h
    assert rep.method_agreement
    assert len(rep.witnesses) == 3
    # h не меняется, пока x_1..x_c регулярны на G(M)
    assert all(hc == h for hc in rep.h_chain[: depth + 1])


def _seed_invariants(pres: Presentation, cap: int, seed: int):
    rep = depth_at_cap(pres, cap, seed)
    a = artinian_decompose(rep.chain.stages[-1], rep.chain.hilbert[-1])
    return rep.depth, rep.h_chain, tuple(a)


@pytest.mark.parametrize("label", ["ex1", "ex2", "ex3"])
def test_depth_and_a_tuple_do_not_depend_on_seed(presentations, label):
    pres = presentations[label]
    runs = [guarded(lambda c: _seed_invariants(pres, c, seed), lambda r: r, Config())[0] for seed in (42, 43)]
    assert runs[0] == runs[1]
    assert runs[0][0] == {"ex1": 0, "ex2": 1, "ex3": 2}[label]


def test_ratliff_rush_of_depth_zero_example(presentations):
    rr, _ = guarded(
        lambda c: rr_filtration(build_module(presentations["ex1"], c)),
        lambda r: (poly_trim(r.r_coeffs), r.h_tilde),
        Config(),
    )
    assert poly_trim(rr.r_coeffs) == [1]
    assert rr.h_tilde == (3, 4)
    assert rr.excess(1) == 1
    assert rr.excess(2) == 0


def test_ratliff_rush_is_adic_for_positive_depth(presentations):
    rr = rr_filtration(build_module(presentations["ex4"], 7))
    assert not any(rr.r_coeffs)
    assert rr.h_tilde == (4, 3)
    assert rr.window == 3


def test_ratliff_rush_preconditions(presentations):
    spec = RingSpec(("x", "y"), 101, 8)
    residue = Presentation.from_strings(spec, [["x", "y"]], "x^3", "k")
    with pytest.raises(ValidationError):
        rr_filtration(build_module(residue, 7))
    with pytest.raises(CapTooSmallError):
        rr_filtration(build_module(presentations["ex4"], 7), window=4)


def test_delta_and_graded_quotient_for_cohen_macaulay(depth_reports):
    rep = depth_reports["ex4"]
    m = rep.chain.module(0)
    forms = rep.chain.lifted_forms(0)
    assert delta_vv(m, forms, rep.depth).delta == 0
    assert graded_quotient_series(m, forms) == (4, 3, 0)
    assert reduction_number(m, forms) == 1
    assert rep.reduction_number == 1
    assert not ulrich_check(m, forms)


def test_ulrich_module(depth_reports):
    rep = depth_reports["ulrich"]
    m = rep.chain.module(0)
    forms = rep.chain.lifted_forms(0)
    assert ulrich_check(m, forms)
    assert reduction_number(m, forms) == 0
    assert delta_vv(m, forms).delta == 0


def test_delta_bounds_depth_of_depth_zero_example(depth_reports):
    rep = depth_reports["ex1"]
    dr = delta_vv(rep.chain.module(0), rep.chain.lifted_forms(0), rep.depth)
    # δ <= 2 влекло бы depth >= 1
    assert dr.delta >= 3
    assert dr.delta == sum(dr.per_n)


@pytest.mark.parametrize("label", ["ex2", "ex3", "ex4"])
def test_exact_sequences(depth_reports, label):
    report = verify_exact_sequences(depth_reports[label].chain)
    assert report.ok
    counts = report.count()
    assert counts["reduction_additivity"] == 3
    assert counts["dim_one_colon"] == 1
    assert counts["five_term"] >= 1
    assert counts["rr_left_exact"] >= 1


def test_rr_mod_superficial():
    def rr(excess):
        return RRReport((), tuple(excess), (), ())

    assert rr_mod_superficial(rr([0, 0]), rr([1, 0])).ok
    check = rr_mod_superficial(rr([1, 0]), rr([0, 0]), stage=1)
    assert not check.ok
    assert check.terms == (1, 0)


def test_sequence_report_counts():
    checks = (
        SequenceCheck("five_term", 0, 1, (0, 0, 0, 0, 0), True),
        SequenceCheck("five_term", 0, 2, (0, 0, 0, 0, 0), True),
        SequenceCheck("dim_one_colon", 2, 2, (0, 0, 0), False),
    )
    report = SequenceReport(checks)
    assert report.count() == {"five_term": 2, "dim_one_colon": 1}
    assert not report.ok


def test_chain_rejects_non_maximal_modules():
    spec = RingSpec(("x", "y", "z"), 101, 10)
    residue = Presentation.from_strings(spec, [["x", "y", "z"]], "x^3", "k")
    with pytest.raises(ValidationError, match="maximal Cohen-Macaulay"):
        superficial_chain(residue, 7, 42, 5)
