from fractions import Fraction

import pytest
from conftest import (
    ALG,
    ODD,
    build,
    coords,
    even_coords,
    odd_coords,
    superscalars,
    terms,
)
from hypothesis import given
from hypothesis import strategies as st

from supertwist.errors import (
    ChartMismatchError,
    JetOrderError,
    NotInvertibleError,
    ParityError,
    UnknownCoordinateError,
)
from supertwist.graded import (
    INHOMOGENEOUS,
    FunctionSymbol,
    Parity,
    SuperAlgebra,
    add,
    body,
    invert,
    is_zero,
    merge_monomials,
    mul,
    parity_of,
    partial_derivative,
)

x, y, z = (ALG.coord(c) for c in ("x", "y", "z"))
xi1, xi2, xi3, xi4 = (ALG.coord(c) for c in ODD)
h = ALG.func("h")


def bubble_sign(word):
    """Sign and sorted word by adjacent transpositions; None when a generator repeats."""
    w = list(word)
    s = 1
    for i in range(len(w)):
        for j in range(len(w) - 1 - i):
            if w[j] > w[j + 1]:
                w[j], w[j + 1] = w[j + 1], w[j]
                s = -s
    if len(set(w)) != len(w):
        return None
    return s, tuple(w)


# -- worked examples --------------------------------------------------------


def test_odd_generators_anticommute():
    assert mul(xi1, xi2) == -mul(xi2, xi1)
    assert (xi2 * xi1).render() == "-xi1*xi2"


def test_odd_generator_squares_to_zero():
    assert is_zero(mul(xi1, xi1))


def test_square_of_even_plus_nilpotent():
    f = x + xi1 * xi2
    assert mul(f, f) == x * x + 2 * x * xi1 * xi2


def test_add_examples():
    assert is_zero(add(xi1, -xi1))
    assert add(x * xi1, y * xi1) == (x + y) * xi1
    assert add(xi1 / x, xi1 / y) == ((x + y) / (x * y)) * xi1


def test_left_derivative_examples():
    assert partial_derivative(xi1 * xi2, "xi1") == xi2
    assert partial_derivative(xi1 * xi2, "xi2") == -xi1
    assert partial_derivative(h, "x") == ALG.jet("h", ["x"])
    assert partial_derivative(h, "x").render() == "h_x"


def test_parity_examples():
    assert parity_of(x + xi1 * xi2) is Parity.EVEN
    assert parity_of(xi1) is Parity.ODD
    assert parity_of(x + xi1) is INHOMOGENEOUS
    assert parity_of(ALG.zero()) is Parity.EVEN


def test_is_zero_examples():
    hx = ALG.jet("h", ["x"])
    assert is_zero(hx * h - h * hx)
    assert is_zero(x / (x * x - x) - 1 / (x - 1))


def test_invert_examples():
    assert invert(ALG.one()) == ALG.one()
    f = h + xi1 * xi2
    assert invert(f) == 1 / h - xi1 * xi2 / (h * h)
    with pytest.raises(NotInvertibleError):
        invert(xi1 * xi2)
    with pytest.raises(ParityError):
        invert(xi1)
    with pytest.raises(ParityError):
        invert(1 + xi1)


def test_body_examples():
    assert body(x + xi1 * xi2) == ALG.even_const(0) + body(x)
    assert body(xi1).is_zero()
    f = h + xi1 * xi2
    assert body(f * f) == body(f) * body(f)


def test_chart_mismatch():
    other = SuperAlgebra(["x"], ["xi1"])
    with pytest.raises(ChartMismatchError):
        mul(x, other.coord("x"))
    with pytest.raises(ChartMismatchError):
        add(x, other.coord("x"))


def test_unknown_coordinate():
    with pytest.raises(UnknownCoordinateError):
        partial_derivative(x, "w")
    with pytest.raises(UnknownCoordinateError):
        ALG.coord("w")


def test_jets_outside_dependencies_vanish():
    assert is_zero(partial_derivative(h, "z"))
    assert ALG.jet("h", ["x", "y"]) == ALG.jet("h", ["y", "x"])


def test_jet_order_is_enforced():
    alg = SuperAlgebra(["x"], [], [FunctionSymbol("f", ("x",))], jet_order=1)
    f = alg.func("f")
    assert f.derivative("x").render() == "f_x"
    with pytest.raises(JetOrderError):
        f.derivative("x").derivative("x")


def test_registered_derivative_rule():
    # E' = E, an exponential
    exp = FunctionSymbol("E", ("x",), invertible=True, derivatives=(("x", lambda a: a.func("E")),))
    alg = SuperAlgebra(["x"], [], [exp])
    e = alg.func("E")
    assert e.derivative("x").derivative("x") == e


def test_rendering_is_canonical():
    f = xi2 * xi1 * (y + x) + 3 - x * x / 2
    assert f.render() == "-1/2*x^2 + 3 + (-x - y)*xi1*xi2"
    assert (xi1 / (h * h)).render() == "(1/h^2)*xi1"


def test_term_cap(monkeypatch):
    from supertwist.errors import ExpressionTooLargeError

    monkeypatch.setenv("SUPERTWIST_MAX_TERMS", "3")
    with pytest.raises(ExpressionTooLargeError):
        (x + y + z + 1) * (x + 1)


def test_fraction_coefficients():
    assert (ALG.const(Fraction(1, 3)) * 3) == ALG.one()


# -- properties -------------------------------------------------------------------


@given(st.lists(st.sampled_from(range(4)), max_size=3), st.lists(st.sampled_from(range(4)), max_size=3))
def test_merge_matches_bubble_sort(a, b):
    a, b = tuple(sorted(set(a))), tuple(sorted(set(b)))
    assert merge_monomials(a, b) == bubble_sign(a + b)


@given(superscalars(0) | superscalars(1), superscalars(0) | superscalars(1))
def test_sign_rule(a, b):
    pa, pb = int(a.parity()), int(b.parity())
    assert mul(a, b) == (-1) ** (pa * pb) * mul(b, a)


@given(superscalars(), superscalars(), superscalars())
def test_associative_and_distributive(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(superscalars(0) | superscalars(1), superscalars(), coords)
def test_leibniz(a, b, coord):
    d_par = int(ALG.parity_of_coordinate(coord))
    lhs = partial_derivative(a * b, coord)
    rhs = partial_derivative(a, coord) * b + (-1) ** (d_par * int(a.parity())) * a * partial_derivative(b, coord)
    assert lhs == rhs


@given(superscalars(), odd_coords, odd_coords)
def test_odd_derivatives_anticommute(f, c1, c2):
    assert f.derivative(c1).derivative(c2) == -f.derivative(c2).derivative(c1)


@given(superscalars(), even_coords, even_coords)
def test_even_derivatives_commute(f, c1, c2):
    assert f.derivative(c1).derivative(c2) == f.derivative(c2).derivative(c1)


@given(superscalars(0) | superscalars(1), coords)
def test_derivative_parity(f, coord):
    d = f.derivative(coord)
    if not d.is_zero():
        assert d.parity() is f.parity() + ALG.parity_of_coordinate(coord)


@given(terms())
def test_invert_is_two_sided(t):
    f = build(t, 0) + 1 + x * x
    g = invert(f)
    assert mul(f, g) == ALG.one()
    assert mul(g, f) == ALG.one()


@given(superscalars(), superscalars())
def test_is_zero_is_a_congruence(a, b):
    assert is_zero(a - b) == (a.terms.keys() == b.terms.keys() and all(a.terms[m] == b.terms[m] for m in a.terms))


@given(superscalars())
def test_body_is_a_morphism(f):
    g = f + 2
    assert body(f * g) == body(f) * body(g)
