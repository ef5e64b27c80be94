import numpy as np
import pytest

from app.config import Config
from app.errors import CapEscalationError, CapTooSmallError, IdentityError, ValidationError
from app.module_model import (
    Presentation,
    build_module,
    colon_element,
    colon_ideal_power,
    determinant_order,
    guarded,
    image_dims,
    multiplication_rows,
    power_submodule,
    presentation_invariants,
    quotient_by_form,
)
from app.ring import RingSpec, parse_poly


@pytest.fixture
def spec2() -> RingSpec:
    return RingSpec(("x", "y"), 101, 8)


@pytest.fixture
def line(spec2) -> Presentation:
    """Q/(x) над k[[x, y]]/(x^2): M ≅ k[[y]]."""
    return Presentation.from_strings(spec2, [["x"]], "x^2", "line")


def test_residue_field(spec2):
    pres = Presentation.from_strings(spec2, [["x", "y"]], "x^3", "k")
    m = build_module(pres, 6)
    assert m.dim == 1
    assert [m.length(n) for n in range(7)] == [0, 1, 1, 1, 1, 1, 1]


def test_line_module(line):
    m = build_module(line, 6)
    assert m.offsets == (0, 1, 2, 3, 4, 5, 6)
    assert [m.graded_length(n) for n in range(6)] == [1] * 6
    assert m.element_vector([parse_poly("y^2", line.spec)]).tolist() == [0, 0, 1, 0, 0, 0]
    assert not np.any(m.element_vector([parse_poly("x*y", line.spec)]))


def test_mu_of_ex4_module(presentations):
    m = build_module(presentations["ex4"], 6)
    assert m.offsets[1] == 4


def test_f_must_annihilate(spec2):
    with pytest.raises(ValidationError, match="annihilate"):
        build_module(Presentation.from_strings(spec2, [["x"]], "y^2"), 5)


@pytest.mark.parametrize(
    "phi, f",
    [
        ([["1 + x"]], "x^2"),
        ([["x", "y"], ["x"]], "x^2"),
        ([["x"]], "x + y"),
    ],
)
def test_presentation_validation(spec2, phi, f):
    with pytest.raises(ValidationError):
        Presentation.from_strings(spec2, phi, f)


def test_cap_bounds(line):
    with pytest.raises(ValidationError):
        build_module(line, 9)
    with pytest.raises(ValidationError):
        build_module(line, 1)
    with pytest.raises(ValidationError):
        power_submodule(build_module(line, 5), 6)


def test_colon_element(line):
    m = build_module(line, 6)
    f3 = power_submodule(m, 3)
    y = parse_poly("y", line.spec)
    x = parse_poly("x", line.spec)
    assert colon_element(m, f3, y) == power_submodule(m, 2)
    # x действует нулём
    assert colon_element(m, f3, x).dim == m.dim


def test_colon_ideal_power(line):
    m = build_module(line, 6)
    assert colon_ideal_power(m, power_submodule(m, 4), 2) == power_submodule(m, 2)
    assert colon_ideal_power(m, power_submodule(m, 4), 0) == power_submodule(m, 4)
    with pytest.raises(CapTooSmallError):
        colon_ideal_power(m, power_submodule(m, 4), 6)


def test_multiplication_rows(line):
    m = build_module(line, 6)
    y = parse_poly("y", line.spec)
    rows = multiplication_rows(m, y, 2)
    assert rows.shape == (4, 6)
    assert np.array_equal(rows, m.form_matrix(y)[2:])
    # y·y^2 = y^3
    assert rows[0].tolist() == [0, 0, 0, 1, 0, 0]


def test_image_dims(line):
    m = build_module(line, 6)
    y = parse_poly("y", line.spec)
    assert image_dims(m, [y]) == [5, 4, 3, 2, 1, 0, 0]
    assert image_dims(m, [parse_poly("x", line.spec)]) == [0] * 7


def test_form_matrix_rejects_foreign_form(line):
    m = build_module(line, 5)
    other = RingSpec(("x", "z"), 101, 8)
    with pytest.raises(ValidationError):
        m.form_matrix(parse_poly("z", other))


def test_quotient_by_form(line):
    reduced = quotient_by_form(line, parse_poly("y", line.spec))
    assert reduced.spec.names == ("x",)
    assert reduced.to_strings() == [["x"]]
    assert build_module(reduced, 5).dim == 1


def test_presentation_invariants(presentations):
    inv = presentation_invariants(presentations["ex4"])
    assert (inv.mu, inv.iM, inv.det_order, inv.eA_bound) == (4, 1, 7, 4)
    assert presentation_invariants(presentations["case5"]).iM == 2


def test_determinant_order_errors(spec2):
    with pytest.raises(ValidationError):
        determinant_order(Presentation.from_strings(spec2, [["x", "y"]], "x^2"))
    with pytest.raises(ValidationError):
        determinant_order(Presentation.from_strings(spec2, [["x", "x"], ["y", "y"]], "x^2"))


def test_guarded_escalates_past_small_caps():
    calls = []

    def compute(cap):
        calls.append(cap)
        if cap < 8:
            raise CapTooSmallError("too small")
        return "stable"

    result, cap = guarded(compute, lambda r: r, Config(cap=7, max_cap=10))
    assert (result, cap) == ("stable", 8)
    assert calls == [7, 8, 9]


def test_guarded_gives_up_on_disagreement():
    with pytest.raises(CapEscalationError):
        guarded(lambda cap: cap, lambda r: r, Config(cap=7, max_cap=10))


def test_guarded_reraises_identity_failures():
    def compute(cap):
        raise IdentityError("broken identity")

    with pytest.raises(IdentityError):
        guarded(compute, lambda r: r, Config(cap=7, max_cap=9))
