"""Expressions and scenario documents.

Expression grammar (no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ['-'] atom ['^' nat]
    atom   := number | ident | ident '(' ident-list ')' | '(' expr ')'

Division is accepted only by even expressions with an invertible body, so
rendered output (which uses '/' for rational functions) parses back.
Identifiers are coordinates, function symbols (bare or applied to exactly
their declared dependencies) and jet names such as ``h_xy``.

Scenario documents are INI files::

    [scenario]      name = warped2d            (optional)
    [chart.M1]      even = x      odd = xi1, xi2
    [chart.M2]      even = y
    [symbols]       h = x, y ; invertible
    [metric.M1]     dx,dx = 1     dxi1,dxi2 = 1
    [metric.M2]     dy,dy = 1
    [twist]         h = h(x, y)
    [claims]        verify = all
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from .errors import NotInvertibleError, ParseError, ScenarioError, SuperGeometryError
from .geometry import Chart, Metric, validate_metric
from .graded import FunctionSymbol, Parity, SuperAlgebra, SuperScalar, sign

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | ident | op | end
    text: str
    offset: int  # byte offset into the source


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    out.append(Token("end", "", _byte_offset(text, n)))
    return out


class _Parser:
    def __init__(self, text: str, algebra: SuperAlgebra):
        self.text = text
        self.alg = algebra
        self.tokens = tokenize(text)
        self.i = 0
        self._jets = _jet_table(algebra)

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.offset, self.text)

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, op: str) -> Token | None:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            self.i += 1
            return tok
        return None

    def expect(self, op: str) -> Token:
        tok = self.accept(op)
        if tok is None:
            found = self.peek().text or "end of input"
            raise self.error(f"expected {op!r}, found {found!r}")
        return tok

    def parse(self) -> SuperScalar:
        if self.peek().kind == "end":
            raise self.error("empty expression")
        value = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected {self.peek().text!r}")
        return value

    def expr(self) -> SuperScalar:
        value = self.term()
        while True:
            if self.accept("+"):
                value = value + self.term()
            elif self.accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> SuperScalar:
        value = self.factor()
        while True:
            if self.accept("*"):
                value = value * self.factor()
            elif self.peek().kind == "op" and self.peek().text == "/":
                tok = self.take()
                divisor = self.factor()
                try:
                    value = value * divisor.invert()
                except (NotInvertibleError, SuperGeometryError) as exc:
                    raise self.error(f"cannot divide: {exc}", tok) from None
            else:
                return value

    def factor(self) -> SuperScalar:
        negate = self.accept("-") is not None
        value = self.atom()
        if self.accept("^"):
            tok = self.take()
            if tok.kind != "num" or not tok.text.isdigit():
                raise self.error("exponent must be a non-negative integer", tok)
            value = value ** int(tok.text)
        return -value if negate else value

    def atom(self) -> SuperScalar:
        tok = self.take()
        if tok.kind == "num":
            try:
                return self.alg.const(Fraction(Decimal(tok.text)))
            except InvalidOperation:  # pragma: no cover - the token regex only admits decimals
                raise self.error(f"bad number {tok.text!r}", tok) from None
        if tok.kind == "ident":
            return self.identifier(tok)
        if tok.kind == "op" and tok.text == "(":
            value = self.expr()
            self.expect(")")
            return value
        found = tok.text or "end of input"
        raise self.error(f"expected a number, identifier or '(', found {found!r}", tok)

    def identifier(self, tok: Token) -> SuperScalar:
        name = tok.text
        alg = self.alg
        if self.accept("("):
            if name not in alg.symbols:
                raise self.error(f"{name!r} is not a declared function symbol", tok)
            args = []
            if not self.accept(")"):
                while True:
                    arg = self.take()
                    if arg.kind != "ident":
                        raise self.error("expected a coordinate name", arg)
                    args.append(arg.text)
                    if self.accept(")"):
                        break
                    self.expect(",")
            deps = alg.symbols[name].depends_on
            if tuple(args) != deps:
                raise self.error(
                    f"{name} is declared as {name}({', '.join(deps)}), not {name}({', '.join(args)})", tok
                )
            return alg.func(name)
        if alg.is_coordinate(name):
            return alg.coord(name)
        if name in self._jets:
            sym, coords = self._jets[name]
            return alg.jet(sym, coords)
        raise self.error(f"unknown identifier {name!r}", tok)


def _jet_table(alg: SuperAlgebra) -> dict[str, tuple[str, tuple[str, ...]]]:
    out = {}
    for key, vname in zip(alg._keys, alg._var_names):
        if key[0] != "jet":
            continue
        s = alg.symbols[key[1]]
        coords = tuple(c for c, k in zip(s.depends_on, key[2]) for _ in range(k))
        out[vname] = (s.name, coords)
    return out


def parse_expression(text: str, ctx) -> SuperScalar:
    """Parse ``text`` in the algebra of ``ctx`` (a SuperAlgebra or a Chart)."""
    alg = ctx.algebra if isinstance(ctx, Chart) else ctx
    return _Parser(text, alg).parse()


# -- scenarios ----------------------------------------------------------------


@dataclass
class ScenarioDocument:
    name: str
    algebra: SuperAlgebra
    chart1: Chart
    chart2: Chart
    metric1: Metric
    metric2: Metric
    twist: SuperScalar
    twist_name: str = "h"
    claims: tuple = ()
    _product: object = field(default=None, repr=False)

    def spec(self):
        from .products import TwistedProductSpec

        return TwistedProductSpec(self.chart1, self.metric1, self.chart2, self.metric2, self.twist, self.name)

    @property
    def product(self):
        """The built TwistedProduct, constructed once."""
        if self._product is None:
            from .products import TwistedProduct

            self._product = TwistedProduct(self.spec())
        return self._product


def _names(value: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in value.split(",") if p.strip())


def _section(cp: configparser.ConfigParser, name: str, required: bool = True) -> dict[str, str]:
    if not cp.has_section(name):
        if required:
            raise ScenarioError(f"missing section [{name}]")
        return {}
    return dict(cp.items(name))


_KNOWN_SECTIONS = {
    "scenario",
    "chart.M1",
    "chart.M2",
    "symbols",
    "metric.M1",
    "metric.M2",
    "twist",
    "claims",
}


def _parse_symbols(table: dict[str, str]) -> list[FunctionSymbol]:
    out = []
    for name, spec in table.items():
        deps_text, _, flags = spec.partition(";")
        flag_set = {f.strip() for f in flags.split(",") if f.strip()}
        unknown = flag_set - {"invertible"}
        if unknown:
            raise ScenarioError(f"symbol {name}: unknown flag(s) {sorted(unknown)}")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ScenarioError(f"bad symbol name {name!r}")
        out.append(FunctionSymbol(name, _names(deps_text), invertible="invertible" in flag_set))
    return out


def _frame_name(raw: str, chart: Chart) -> str:
    raw = raw.strip()
    if raw.startswith("d") and raw[1:] in chart.frames:
        return raw[1:]
    if raw in chart.frames:
        return raw
    raise ScenarioError(f"metric key refers to {raw!r}, which is not a frame of chart {chart.name}")


def _parse_metric(table: dict[str, str], chart: Chart, label: str) -> Metric:
    alg = chart.algebra
    given: dict[tuple[str, str], SuperScalar] = {}
    allowed = set(chart.frames)
    for key, text in table.items():
        parts = key.split(",")
        if len(parts) != 2:
            raise ScenarioError(f"[metric.{label}] key {key!r} must name two frames, e.g. dx,dy")
        a, b = (_frame_name(p, chart) for p in parts)
        if (a, b) in given:
            raise ScenarioError(f"[metric.{label}] entry ({a}, {b}) given twice")
        try:
            value = parse_expression(text, alg)
        except ParseError as exc:
            raise ParseError(f"[metric.{label}] {key}: {exc.message}", exc.offset, exc.text) from None
        foreign = {c for c in value.support() if c not in allowed}
        if foreign:
            raise ScenarioError(
                f"[metric.{label}] entry ({a}, {b}) depends on {sorted(foreign)}, outside {label}"
            )
        expected = chart.parity(a) + chart.parity(b)
        if not value.is_zero() and value.parity() is not expected:
            raise ScenarioError(
                f"[metric.{label}] entry ({a}, {b}) has parity {value.parity()} but the metric is even, "
                f"so it must be {expected}"
            )
        if a == b and chart.parity(a) is Parity.ODD and not value.is_zero():
            raise ScenarioError(
                f"[metric.{label}] entry ({a}, {a}) must vanish: graded symmetry gives <X,X> = -<X,X> for odd X"
            )
        given[(a, b)] = value
    for (a, b), v in given.items():
        if (b, a) in given and a < b:
            s = sign(chart.parity(a) * chart.parity(b))
            other = given[(b, a)]
            if not (v - (other if s > 0 else -other)).is_zero():
                raise ScenarioError(
                    f"[metric.{label}] entries ({a}, {b}) and ({b}, {a}) conflict with graded symmetry"
                )
    metric = Metric(chart, given, fill_symmetric=True)
    problems = validate_metric(metric)
    if problems:
        raise ScenarioError(f"[metric.{label}] " + "; ".join(problems))
    return metric


def _check_twist(twist: SuperScalar, name: str) -> None:
    alg = twist.algebra
    if twist.is_zero():
        raise ScenarioError(f"twist {name} is zero")
    if twist.parity() is not Parity.EVEN:
        raise ScenarioError(f"twist {name} must be even, got parity {twist.parity()}")
    body = twist.body()
    if body.is_zero():
        raise ScenarioError(f"twist {name} has zero body and cannot be inverted")
    # every factor of the body numerator must be a coordinate polynomial or an invertible symbol
    _, factors = body.num.factor()
    for fac, _mult in factors:
        for var in range(len(alg._keys)):
            key = alg._keys[var]
            if key[0] != "jet" or fac.degrees()[var] == 0:
                continue
            sym = alg.symbols[key[1]]
            if not sym.invertible:
                raise ScenarioError(
                    f"twist {name} is not invertible: symbol {sym.name!r} is not declared invertible"
                )


def parse_scenario(text: str, name: str = "scenario") -> ScenarioDocument:
    cp = configparser.ConfigParser(
        strict=True,
        delimiters=("=",),
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=None,
        interpolation=None,
        empty_lines_in_values=False,
    )
    cp.optionxform = str  # type: ignore[assignment]
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None
    extra = set(cp.sections()) - _KNOWN_SECTIONS
    if extra:
        raise ScenarioError(f"unknown section(s): {', '.join(sorted(extra))}")

    meta = _section(cp, "scenario", required=False)
    name = meta.get("name", name).strip() or name
    jet_order = int(meta.get("jet_order", "4"))

    c1 = _section(cp, "chart.M1")
    c2 = _section(cp, "chart.M2")
    for label, table in (("M1", c1), ("M2", c2)):
        bad = set(table) - {"even", "odd"}
        if bad:
            raise ScenarioError(f"[chart.{label}] unknown key(s) {sorted(bad)}")
    e1, o1 = _names(c1.get("even", "")), _names(c1.get("odd", ""))
    e2, o2 = _names(c2.get("even", "")), _names(c2.get("odd", ""))
    if not (e1 or o1) or not (e2 or o2):
        raise ScenarioError("each factor chart needs at least one coordinate")
    symbols = _parse_symbols(_section(cp, "symbols", required=False))
    try:
        alg = SuperAlgebra(e1 + e2, o1 + o2, symbols, jet_order=jet_order)
        chart1 = Chart(alg, e1, o1, name="M1")
        chart2 = Chart(alg, e2, o2, name="M2")
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None

    metric1 = _parse_metric(_section(cp, "metric.M1"), chart1, "M1")
    metric2 = _parse_metric(_section(cp, "metric.M2"), chart2, "M2")

    twist_table = _section(cp, "twist")
    if len(twist_table) != 1:
        raise ScenarioError("[twist] must contain exactly one entry, e.g. h = h(x, y)")
    ((twist_name, twist_text),) = twist_table.items()
    try:
        twist = parse_expression(twist_text, alg)
    except ParseError as exc:
        raise ParseError(f"[twist] {twist_name}: {exc.message}", exc.offset, exc.text) from None
    _check_twist(twist, twist_name)

    from .products import ALL_CLAIMS, ClaimId

    claim_text = _section(cp, "claims", required=False).get("verify", "all").strip()
    if claim_text.lower() == "all" or not claim_text:
        claims = ALL_CLAIMS
    else:
        try:
            claims = tuple(ClaimId.parse(c) for c in _names(claim_text))
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None

    return ScenarioDocument(name, alg, chart1, chart2, metric1, metric2, twist, twist_name, claims)


def load_scenario(path) -> ScenarioDocument:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {p}: {exc.strerror or exc}") from None
    return parse_scenario(text, name=p.stem)
