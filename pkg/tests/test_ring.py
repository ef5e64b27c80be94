import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import ParseError, ValidationError
from app.ring import (
    ORDER_INF,
    RingSpec,
    TruncPoly,
    determinant,
    eliminate_linear_form,
    embed_poly,
    graded_basis,
    parse_poly,
)


@pytest.fixture
def spec() -> RingSpec:
    return RingSpec(("x", "y", "z"), 101, 5)


def test_graded_basis_order(spec):
    assert graded_basis(1, spec) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert len(graded_basis(2, spec)) == 6
    with pytest.raises(ValidationError):
        graded_basis(5, spec)


def test_parse_and_print(spec):
    f = parse_poly("x^2*(x - y)", spec)
    assert str(f) == "x^3 - x^2*y"
    assert f.order == 3
    assert parse_poly("-(x + 2*y)^2", spec) == parse_poly("-x^2 - 4*x*y - 4*y^2", spec)
    assert parse_poly("0", spec).order == ORDER_INF


def test_truncation(spec):
    assert parse_poly("x^5 + y", spec) == parse_poly("y", spec)
    assert (parse_poly("x^3", spec) * parse_poly("y^2", spec)).is_zero()


@pytest.mark.parametrize(
    "text, pos",
    [
        ("x +", 3),
        ("x * w", 4),
        ("(x + y", 6),
        ("x^y", 2),
        ("x^2^3", 3),
        ("x $ y", 2),
    ],
)
def test_parse_errors_carry_position(spec, text, pos):
    with pytest.raises(ParseError) as info:
        parse_poly(text, spec)
    assert info.value.position == pos


def test_parse_rejects_non_strings(spec):
    with pytest.raises(ParseError):
        parse_poly(3, spec)


def test_ring_spec_validation():
    with pytest.raises(ValidationError):
        RingSpec(("x", "x"))
    with pytest.raises(ValidationError):
        RingSpec(("x", "1y"))
    with pytest.raises(ValidationError):
        RingSpec(("x",), 100)


def test_inverse_of_unit(spec):
    u = parse_poly("1 + x - 3*y*z", spec)
    one = TruncPoly.constant(spec, 1)
    assert u * u.inverse() == one
    with pytest.raises(ValidationError):
        parse_poly("x", spec).inverse()


def test_eliminate_linear_form(spec):
    form = parse_poly("x + 2*z", spec)
    target, sub = eliminate_linear_form(spec, form)
    assert target.names == ("x", "y")
    assert sub.eliminated == "z"
    # z -> -x/2, значит form уходит в ноль
    assert sub.apply(form).is_zero()
    assert sub.apply(parse_poly("y*z", spec)) == parse_poly("-x*y", target).scale(pow(2, -1, 101))


def test_eliminate_needs_linear_form(spec):
    with pytest.raises(ValidationError):
        eliminate_linear_form(spec, parse_poly("x^2", spec))


def test_embed_poly(spec):
    small = RingSpec(("x", "z"), 101, 5)
    assert embed_poly(parse_poly("x + 3*z", small), spec) == parse_poly("x + 3*z", spec)
    with pytest.raises(ValidationError):
        embed_poly(parse_poly("w", RingSpec(("w",), 101, 5)), spec)


def test_determinant(spec):
    m = [[parse_poly(e, spec) for e in row] for row in (("x", "y"), ("y^2", "x"))]
    assert determinant(m) == parse_poly("x^2 - y^3", spec)
    with pytest.raises(ValidationError):
        determinant([[parse_poly("x", spec), parse_poly("y", spec)]])


coeffs = st.integers(-5, 5)
monomial_text = st.sampled_from(["1", "x", "y", "z", "x*y", "y^2", "x*z^2"])
poly_text = st.lists(st.tuples(coeffs, monomial_text), min_size=1, max_size=4).map(
    lambda terms: " + ".join(f"({c})*{m}" for c, m in terms)
)


@settings(max_examples=50, deadline=None)
@given(poly_text, poly_text)
def test_parser_is_a_ring_homomorphism(a, b):
    spec = RingSpec(("x", "y", "z"), 101, 5)
    pa, pb = parse_poly(a, spec), parse_poly(b, spec)
    assert parse_poly(f"({a})*({b})", spec) == pa * pb
    assert parse_poly(f"({a}) - ({b})", spec) == pa - pb
    assert parse_poly(f"({a})^2", spec) == pa * pa


@settings(max_examples=30, deadline=None)
@given(poly_text)
def test_order_is_additive(a):
    spec = RingSpec(("x", "y", "z"), 101, 8)
    pa = parse_poly(a, spec)
    x = parse_poly("x", spec)
    if pa.is_zero():
        assert (pa * x).is_zero()
    else:
        assert (pa * x).order == pa.order + 1
