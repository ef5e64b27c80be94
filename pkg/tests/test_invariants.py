import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.errors import CapTooSmallError, IdentityError
from app.invariants import (
    HilbertData,
    detect_dimension,
    hilbert_coefficient,
    hilbert_coefficients,
    hilbert_data,
    hilbert_function,
    minimal_multiplicity_check,
    one_minus_z_pow,
    poly_add,
    poly_eval,
    poly_mul,
    poly_sub,
    poly_trim,
)
from app.module_model import PresInvariants, build_module

ints = st.lists(st.integers(-20, 20), max_size=6)


def test_poly_helpers():
    assert poly_trim([1, 0, 2, 0, 0]) == [1, 0, 2]
    assert poly_add([1, 2], [0, -2]) == [1]
    assert poly_sub([1, 2], [1, 2]) == []
    assert poly_mul([1, 1], [1, -1]) == [1, 0, -1]
    assert poly_mul([1, 1], [1, 1], length=2) == [1, 2]
    assert one_minus_z_pow(3) == [1, -3, 3, -1]
    assert poly_eval([4, 0, 6, -4, 1], 1) == 7


@given(ints, ints, ints)
def test_poly_ring_identities(a, b, c):
    assert poly_mul(a, poly_add(b, c)) == poly_add(poly_mul(a, b), poly_mul(a, c))
    assert poly_mul(a, b) == poly_mul(b, a)
    assert poly_sub(poly_add(a, b), b) == poly_trim(a)


@given(ints)
def test_hilbert_coefficient_is_derivative_at_one(h):
    assert hilbert_coefficient(h, 0) == sum(h)
    assert hilbert_coefficient(h, 1) == sum(k * c for k, c in enumerate(h))


def test_hilbert_coefficients_of_depth_zero_example():
    hd = HilbertData(H=(), L=(), r=3, h_coeffs=(4, 0, 6, -4, 1), e=(), mu=4)
    assert hilbert_coefficients(hd) == [7, 4, 0, 0]


def test_detect_dimension():
    assert detect_dimension([1, 1, 1, 1], 3) == 0
    assert detect_dimension([1, 2, 3, 4, 5], 3) == 1
    assert detect_dimension([4, 11, 21, 34, 50, 69], 3) == 2
    with pytest.raises(CapTooSmallError):
        detect_dimension([1, 2], 3)


@pytest.mark.parametrize(
    "label, r, h, e",
    [
        ("ex4", 3, (4, 3), (7, 3, 0, 0)),
        ("ulrich", 3, (4,), (4, 0, 0, 0)),
        ("ringA", 3, (1, 1, 1), (3, 3, 1, 0)),
    ],
)
def test_hilbert_data(presentations, label, r, h, e):
    hd = hilbert_data(build_module(presentations[label], 7))
    assert (hd.r, hd.h_coeffs, hd.e) == (r, h, e)
    assert hd.mu == h[0]


def test_depth_zero_example_h_polynomial(presentations):
    hd = hilbert_data(build_module(presentations["ex1"], 8))
    assert hd.h_coeffs == (4, 0, 6, -4, 1)
    assert hd.e == (7, 4, 0, 0)
    assert hd.degree == 4


def test_h_polynomial_needs_room(presentations):
    with pytest.raises(CapTooSmallError):
        hilbert_data(build_module(presentations["ex1"], 5))


def test_hilbert_function_window(presentations):
    m = build_module(presentations["ex4"], 6)
    H = hilbert_function(m, 2)
    # H[0] = μ
    assert H[0] == 4
    assert len(H) == 3
    with pytest.raises(CapTooSmallError):
        hilbert_function(m, 6)


def test_minimal_multiplicity():
    inv = PresInvariants(mu=4, iM=2, det_order=8, eA_bound=8)
    hd = HilbertData(H=(), L=(), r=3, h_coeffs=(4, 4), e=(8, 4, 0, 0), mu=4)
    assert minimal_multiplicity_check(hd, inv)
    above = HilbertData(H=(), L=(), r=3, h_coeffs=(4, 3, 2), e=(9, 7, 2, 0), mu=4)
    assert not minimal_multiplicity_check(above, inv)
    below = HilbertData(H=(), L=(), r=3, h_coeffs=(4, 3), e=(7, 3, 0, 0), mu=4)
    with pytest.raises(IdentityError):
        minimal_multiplicity_check(below, inv)
    wrong_shape = HilbertData(H=(), L=(), r=3, h_coeffs=(4, 2, 2), e=(8, 6, 2, 0), mu=4)
    with pytest.raises(IdentityError):
        minimal_multiplicity_check(wrong_shape, inv)
