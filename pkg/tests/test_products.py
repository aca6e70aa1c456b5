from itertools import product

import pytest
from conftest import scenario

from supertwist.errors import FrameSignatureError, ScenarioError
from supertwist.geometry import Chart, Metric, covariant_derivative, k_tensor
from supertwist.graded import FunctionSymbol, SuperAlgebra
from supertwist.parser import parse_expression, parse_scenario
from supertwist.products import (
    ALL_CLAIMS,
    ClaimId,
    Tier,
    TwistedProduct,
    TwistedProductSpec,
    build_twisted_product,
    closed_form,
    definitional_k,
    direct_value,
    mixed_ricci_flat_residuals,
    tier_of,
    verify,
    w2_flat_check,
    warped_factorization,
)

MUST_PASS = [c for c in ALL_CLAIMS if tier_of(c) is Tier.MUST_PASS]


@pytest.fixture(scope="module")
def super12():
    return scenario("super12").product


@pytest.fixture(scope="module")
def twisted2d():
    return scenario("twisted2d")


def P(tp, text):
    return parse_expression(text, tp.algebra)


# -- construction -------------------------------------------------------------------


def test_unit_twist_gives_direct_sum():
    tp = scenario("flat").product
    assert {k: v.render() for k, v in tp.metric.items()} == {("x", "x"): "1", ("y", "y"): "1"}


def test_even_line_product_metric(twisted2d):
    _, g = build_twisted_product(twisted2d.spec())
    assert {k: v.render() for k, v in g.items()} == {("x", "x"): "1", ("y", "y"): "h^2"}


def test_odd_block_is_scaled_and_stays_graded_symmetric(super12):
    g = super12.metric
    assert g.entry("eta1", "eta2").render() == "h^2"
    assert g.entry("eta2", "eta1").render() == "-h^2"
    assert g.entry("x", "eta1").is_zero()


def test_spec_rejects_odd_twist():
    alg = SuperAlgebra(["x", "y"], ["t"])
    c1, c2 = Chart(alg, ["x"]), Chart(alg, ["y"])
    g1 = Metric(c1, {("x", "x"): alg.one()})
    g2 = Metric(c2, {("y", "y"): alg.one()})
    with pytest.raises(ScenarioError, match="even"):
        TwistedProductSpec(c1, g1, c2, g2, alg.coord("t"))
    with pytest.raises(ScenarioError, match="invertible"):
        TwistedProductSpec(c1, g1, c2, g2, alg.zero())


def test_frame_order_keeps_factor_blocks(super12):
    assert super12.chart.frames == ("x", "xi1", "xi2", "y", "eta1", "eta2")


# -- closed forms and direct values ---------------------------------------------------


def test_closed_form_examples(twisted2d):
    tp = twisted2d.product
    assert closed_form(tp, ClaimId.L3_1_2, ("x", "y")).render() == "(h_x/h) d_y"
    assert closed_form(tp, ClaimId.P3_2_3, ("x", "x", "y")).is_zero()
    expected = P(tp, "-h*h_xx")  # Ric of the line factor vanishes; g_mu(y,y)*Lap(h)/h
    assert closed_form(tp, ClaimId.P3_3_4, ("y", "y")) == expected


def test_direct_value_examples(twisted2d):
    tp = twisted2d.product
    # q - m2 - 1 = 0 here, so mixed Ricci vanishes
    assert direct_value(tp, ClaimId.P3_3_2, ("x", "y")).is_zero()
    f = tp.chart.frame
    assert direct_value(tp, ClaimId.T3_4_2, ("x", "x", "y")) == k_tensor(tp.metric, f("x"), f("x"), f("y"))


def test_unit_twist_connection_is_base_connection():
    tp = scenario("flat").product
    f = tp.chart.frame
    assert direct_value(tp, ClaimId.L3_1_1, ("x", "x")) == covariant_derivative(tp.conn1, f("x"), f("x"))


def test_frame_signature_is_checked(super12):
    with pytest.raises(FrameSignatureError):
        closed_form(super12, ClaimId.L3_1_2, ("y", "x"))
    with pytest.raises(FrameSignatureError):
        direct_value(super12, ClaimId.P3_2_5, ("x", "y"))
    with pytest.raises(FrameSignatureError):
        closed_form(super12, ClaimId.L3_1_1, ("x", "w"))


def test_claim_ids():
    assert ClaimId.parse("c4.4") is ClaimId.T4_3
    assert ClaimId.parse(" T3.4.3 ") is ClaimId.T3_4_3
    with pytest.raises(ValueError):
        ClaimId.parse("T9")
    assert [str(c) for c in ALL_CLAIMS][:2] == ["L3.1.1", "L3.1.2"]


# -- verification -------------------------------------------------------------------


@pytest.mark.parametrize(
    "name",
    ["flat", "warped2d", "twisted2d", "twisted4d", "super12", "super12_warped", "super12_curved", "line_product"],
)
def test_must_pass_tier_holds(name):
    report = verify(scenario(name).product, MUST_PASS)
    for c in report.claims:
        assert c.status in ("pass", "not-applicable"), (c.claim, c.note)
        for case in c.cases:
            assert case.passed, (c.claim, case.frames, case.residual.render())


def test_flat_product_passes_everything():
    report = verify(scenario("flat").product)
    assert report.summary()["failed"] == 0
    assert report.summary()["reported"] == 0


def test_report_tier_residuals_are_kept(super12):
    report = verify(super12, [ClaimId.T3_4_3])
    (c,) = report.claims
    assert c.status == "report"
    bad = [k for k in c.cases if not k.passed]
    assert bad and all(not k.residual.is_zero() for k in bad)
    assert report.summary() == {"passed": 0, "failed": 0, "reported": 1, "not_applicable": 0}


def test_undefined_k_marks_claims_not_applicable():
    report = verify(scenario("unit_dimension").product, [ClaimId.T3_4_1, ClaimId.T4_3])
    assert [c.status for c in report.claims] == ["not-applicable", "not-applicable"]


def test_unit_twist_kills_mixed_curvature():
    tp = scenario("flat").product
    for claim in (ClaimId.P3_2_2, ClaimId.P3_2_3, ClaimId.P3_2_4, ClaimId.P3_2_5):
        assert all(case.direct.is_zero() for case in verify(tp, [claim]).claims[0].cases)


def test_mixed_ricci_is_graded_symmetric(super12):
    for x, v in product(super12.chart1.frames, super12.chart2.frames):
        sgn = -1 if super12.parity(x) & super12.parity(v) else 1
        assert super12.conn.frame_ricci(v, x) == sgn * super12.conn.frame_ricci(x, v)


def test_definitional_k_identity(super12):
    f = super12.chart.frame
    for a, b, c in product(super12.chart.frames, repeat=3):
        assert k_tensor(super12.metric, f(a), f(b), f(c)) == definitional_k(super12, a, b, c)


# -- the two readings of the leaf curvature terms -----------------------------------

WARPED_GRADED = """
[chart.M1]
even = x
odd = xi1, xi2
[chart.M2]
even = y
odd = eta1, eta2
[symbols]
h = x ; invertible
[metric.M1]
dx,dx = 1
dxi1,dxi2 = 1
[metric.M2]
dy,dy = 1
deta1,deta2 = 1
[twist]
h = h(x)
"""


def test_leaf_reading_needed_for_y_dependent_twist(super12):
    cases = [("y", "y"), ("eta1", "eta2")]
    for frames in cases:
        direct = direct_value(super12, ClaimId.P3_3_4, frames)
        assert direct == closed_form(super12, ClaimId.P3_3_4, frames)
        assert direct != closed_form(super12, ClaimId.P3_3_4, frames, literal=True)


def test_printed_ricci_form_holds_for_warped_twist():
    tp = parse_scenario(WARPED_GRADED).product
    for frames in product(tp.chart2.frames, repeat=2):
        assert direct_value(tp, ClaimId.P3_3_4, frames) == closed_form(tp, ClaimId.P3_3_4, frames, literal=True)


def test_printed_curvature_form_mixes_up_g2_and_g_mu():
    tp = parse_scenario(WARPED_GRADED).product
    frames = ("y", "eta1", "y")
    residual = direct_value(tp, ClaimId.P3_2_6, frames) - closed_form(tp, ClaimId.P3_2_6, frames, literal=True)
    assert residual.render() == "((h^2*h_x^2 - h_x^2)/h^2) d_eta1"
    assert direct_value(tp, ClaimId.P3_2_6, frames) == closed_form(tp, ClaimId.P3_2_6, frames)


# -- mixed Ricci flatness and warped structure --------------------------------------


def test_declared_product_twist_is_separable_and_mixed_ricci_flat():
    tp = scenario("super12_warped").product
    assert all(r.ricci.is_zero() and r.mixed_log_derivative.is_zero() for r in mixed_ricci_flat_residuals(tp))
    w = warped_factorization(tp)
    assert w.separable
    assert (w.phi.render(), w.psi.render()) == ("Phi", "Psi")


def test_twist_on_base_only_is_mixed_ricci_flat():
    tp = parse_scenario(WARPED_GRADED).product
    assert all(r.ricci.is_zero() for r in mixed_ricci_flat_residuals(tp))
    assert warped_factorization(tp).separable


def test_unit_twist_factorization_is_trivial():
    w = warped_factorization(scenario("flat").product)
    assert w.separable and w.phi.render() == "1" and w.psi.render() == "1"


def test_opaque_twist_is_not_separable(super12):
    residuals = {r.frames: r for r in mixed_ricci_flat_residuals(super12)}
    r = residuals[("x", "y")]
    assert r.prefactor == 2  # -(q - m2 - 1) with q = 1, m2 = 2
    assert r.ricci == r.prefactor * r.mixed_log_derivative
    assert r.mixed_log_derivative.render() == "(h*h_xy - h_x*h_y)/h^2"
    assert not r.ricci.is_zero()
    w = warped_factorization(super12)
    assert not w.separable and w.phi is None
    assert [k for k, _ in w.witnesses] == [("x", "y")]


def test_opaque_twist_has_nonzero_mixed_k(super12):
    check = w2_flat_check(super12)
    assert check.branch == "XYQ"
    assert not check.k_flat
    assert any("h_xy" in v.render() for _, v in check.witnesses)
    assert check.equivalence_holds


def test_line_fibre_branch_with_product_twist():
    check = w2_flat_check(scenario("line_product").product)
    assert check.branch == "UVX"
    assert check.k_flat and check.separable


def test_k_flatness_does_not_force_separability_over_a_line():
    # over a one-dimensional even fibre the mixed K components vanish for every twist
    check = w2_flat_check(scenario("line_product_opaque").product)
    assert check.branch == "UVX"
    assert check.k_flat
    assert not check.separable
    assert not check.equivalence_holds


def test_k_flatness_does_not_force_separability_over_a_line_base(twisted2d):
    tp = twisted2d.product
    xyq = [v for _, v in w2_flat_check(tp).xyq]
    assert all(v.is_zero() for v in xyq)
    assert not warped_factorization(tp).separable


def test_t42_reports_equivalence(super12):
    (c,) = verify(super12, [ClaimId.T4_2]).claims
    assert c.status == "pass"
    assert "separable=False" in c.note


def test_registered_exponential_twist_is_separable():
    # h = exp(x + y) = exp(x) exp(y) through a derivative rule, not a declared product
    exp = FunctionSymbol(
        "E", ("x", "y"), invertible=True, derivatives=(("x", lambda a: a.func("E")), ("y", lambda a: a.func("E")))
    )
    alg = SuperAlgebra(["x", "y"], [], [exp])
    c1, c2 = Chart(alg, ["x"]), Chart(alg, ["y"])
    spec = TwistedProductSpec(
        c1, Metric(c1, {("x", "x"): alg.one()}), c2, Metric(c2, {("y", "y"): alg.one()}), alg.func("E")
    )
    w = warped_factorization(TwistedProduct(spec))
    assert w.separable and w.phi is None
