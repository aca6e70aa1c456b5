import pytest
from conftest import ALG, SCENARIOS, superscalars
from hypothesis import given
from hypothesis import strategies as st

from supertwist.errors import ParseError, ScenarioError, SuperGeometryError
from supertwist.parser import parse_expression, parse_scenario, tokenize

x, y = ALG.coord("x"), ALG.coord("y")
xi1, xi2 = ALG.coord("xi1"), ALG.coord("xi2")
h = ALG.func("h")


def E(text):
    return parse_expression(text, ALG)


def test_expression_examples():
    f = E("x^2 + x*xi1*xi2")
    assert f.terms.keys() == {(), (0, 1)}
    assert f == x * x + x * xi1 * xi2
    assert E("xi2*xi1") == -(xi1 * xi2)
    assert E("h(x,y)^2") == h * h


def test_precedence():
    assert E("-x^2") == -(x * x)
    assert E("2*x + 3*y") == 2 * x + 3 * y
    assert E("x - y - 1") == x - y - 1
    assert E("x/2/y") == x / (2 * y)
    assert E("(x + 1)^2") == x * x + 2 * x + 1


def test_numbers_are_exact():
    assert E("0.25*x") == x / 4
    assert E("1/3 + 2/3") == ALG.one()


def test_odd_powers_vanish():
    assert E("xi1^2").is_zero()
    assert E("xi1^1") == xi1
    assert E("xi1^0") == ALG.one()


def test_jet_names_and_bare_symbols():
    assert E("h") == h
    assert E("h_xy") == h.derivative("x").derivative("y")
    with pytest.raises(ParseError, match="unknown identifier"):
        E("h_yx")  # jets are spelled in dependency order


def test_symbol_arguments_must_match_declaration():
    with pytest.raises(ParseError, match="declared as h"):
        E("h(y, x)")
    with pytest.raises(ParseError, match="not a declared function"):
        E("x(y)")


@pytest.mark.parametrize(
    "text, offset",
    [
        ("x +", 3),
        ("x y", 2),
        ("w + 1", 0),
        ("x ^ y", 4),
        ("(x + 1", 6),
        ("x $ 1", 2),
        ("", 0),
        ("x/xi1", 1),
        ("2^-1", 2),
    ],
)
def test_errors_carry_byte_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        E(text)
    assert info.value.offset == offset
    assert "^" in str(info.value)


def test_offsets_are_in_bytes():
    with pytest.raises(ParseError) as info:
        E("x + é")
    assert info.value.offset == 4
    toks = tokenize("x+y")
    assert [t.offset for t in toks] == [0, 1, 2, 3]


@given(superscalars())
def test_render_round_trip(f):
    assert (parse_expression(f.render(), ALG) - f).is_zero()


@given(superscalars(0))
def test_render_round_trip_of_quotients(f):
    g = f / (h + xi1 * xi2)
    assert parse_expression(g.render(), ALG) == g


@given(st.text(alphabet="xyzhi12_()+-*/^., 0", max_size=20))
def test_parser_is_total(text):
    try:
        parse_expression(text, ALG)
    except SuperGeometryError:
        pass


# -- scenarios -------------------------------------------------------------------

MINIMAL = """
[chart.M1]
even = x
[chart.M2]
even = y
[symbols]
h = x, y ; invertible
[metric.M1]
dx,dx = 1
[metric.M2]
dy,dy = 1
[twist]
h = h(x,y)
"""


def test_minimal_scenario():
    doc = parse_scenario(MINIMAL, name="minimal")
    assert doc.name == "minimal"
    assert doc.chart1.frames == ("x",) and doc.chart2.frames == ("y",)
    assert doc.product.metric.entry("y", "y").render() == "h^2"
    assert len(doc.claims) == 22


def graded(metric2_lines=("dy,dy = 1", "deta1,deta2 = 1")):
    return f"""
[chart.M1]
even = x
odd = xi1, xi2
[chart.M2]
even = y
odd = eta1, eta2
[symbols]
h = x, y ; invertible
[metric.M1]
dx,dx = 1
dxi1,dxi2 = 1
[metric.M2]
{chr(10).join(metric2_lines)}
[twist]
h = h(x,y)
"""


def test_graded_symmetry_fill():
    doc = parse_scenario(graded())
    g2 = doc.metric2
    assert g2.entry("eta2", "eta1") == -g2.entry("eta1", "eta2")


def test_consistent_transpose_is_accepted():
    doc = parse_scenario(graded(("dy,dy = 1", "deta1,deta2 = 1", "deta2,deta1 = -1")))
    assert doc.metric2.entry("eta2", "eta1") == -doc.algebra.one()


@pytest.mark.parametrize(
    "lines, message",
    [
        (("dy,dy = 1", "deta1,deta2 = 1", "deta2,deta1 = 1"), "conflict"),
        (("dy,dy = 1", "deta1,deta2 = 1", "deta1,deta1 = 1"), "must vanish"),
        (("dy,dy = 1", "deta1,deta2 = 1", "dy,deta1 = 1"), "parity"),
        (("dy,dy = 1", "deta1,deta2 = x"), "outside M2"),
        (("dy,dy = 1", "deta1,deta2 = 1", "dz,dy = 1"), "not a frame"),
        (("dy,dy = 1",), "degenerate"),
        (("dy,dy = 1", "deta1,deta2 = 1", "dy, dy = 2"), "given twice|malformed"),
    ],
)
def test_invalid_metrics(lines, message):
    with pytest.raises(ScenarioError, match=message):
        parse_scenario(graded(lines))


def test_odd_twist_rejected():
    with pytest.raises(ScenarioError, match="even"):
        parse_scenario(graded().replace("h = h(x,y)\n", "h = xi1\n"))
    with pytest.raises(ScenarioError, match="even"):
        parse_scenario((SCENARIOS / "bad_odd_twist.scn").read_text())


def test_nilpotent_twist_rejected():
    with pytest.raises(ScenarioError, match="zero body"):
        parse_scenario(graded().replace("h = h(x,y)\n", "h = xi1*xi2\n"))


def test_twist_needs_invertible_symbols():
    text = MINIMAL.replace("h = x, y ; invertible", "h = x, y")
    with pytest.raises(ScenarioError, match="not declared invertible"):
        parse_scenario(text)


@pytest.mark.parametrize(
    "mutate, error",
    [
        (lambda t: t.replace("[twist]", "[twist]\nk = 1"), ScenarioError),
        (lambda t: t.replace("[chart.M2]\neven = y", "[chart.M2]\neven = x"), ScenarioError),
        (lambda t: t.replace("[chart.M1]", "[chart.M1]\nodd = x"), ScenarioError),
        (lambda t: t + "\n[plots]\nkind = surface\n", ScenarioError),
        (lambda t: t + "\n[claims]\nverify = L9.9\n", ScenarioError),
        (lambda t: t.replace("h = h(x,y)", "h = h(x,"), ParseError),
        (lambda t: t.replace("[metric.M1]\n", ""), ScenarioError),
        (lambda t: t.replace("[symbols]", "[symbols]\ng = x ; smooth"), ScenarioError),
    ],
)
def test_malformed_scenarios(mutate, error):
    with pytest.raises(error):
        parse_scenario(mutate(MINIMAL))


def test_claim_selection():
    doc = parse_scenario(MINIMAL + "\n[claims]\nverify = L3.1.2, C4.4\n")
    assert [c.value for c in doc.claims] == ["L3.1.2", "T4.3"]


def test_all_shipped_scenarios_load():
    for path in sorted(SCENARIOS.glob("*.scn")):
        if path.stem.startswith("bad"):
            continue
        parse_scenario(path.read_text(), name=path.stem).product  # noqa: B018
