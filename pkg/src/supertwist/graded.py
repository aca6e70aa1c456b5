"""Exact arithmetic for superfunctions on a coordinate chart.

A superfunction is stored as a finite map from odd monomials (strictly
increasing tuples of odd-generator indices) to even coefficients.  Even
coefficients live in the fraction field of a polynomial ring over QQ whose
indeterminates are the even coordinates together with the jets of every
declared function symbol; jets are algebraically independent, so zero
testing is exact and needs no simplifier.

The polynomial arithmetic is delegated to FLINT (``fmpq_mpoly``).
"""

from __future__ import annotations

import os
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Union

import flint

from .errors import (
    ChartMismatchError,
    ExpressionTooLargeError,
    JetOrderError,
    NotInvertibleError,
    ParityError,
    UnknownCoordinateError,
)

MAX_TERMS_ENV = "SUPERTWIST_MAX_TERMS"
DEFAULT_MAX_TERMS = 20000


def max_terms() -> int:
    """Safety cap on the number of terms in a numerator or denominator."""
    raw = os.environ.get(MAX_TERMS_ENV)
    if not raw:
        return DEFAULT_MAX_TERMS
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_MAX_TERMS
    return value if value > 0 else DEFAULT_MAX_TERMS


class Parity(IntEnum):
    EVEN = 0
    ODD = 1

    def __add__(self, other):  # type: ignore[override]
        return Parity((int(self) + int(other)) % 2)

    __radd__ = __add__

    def __str__(self) -> str:
        return self.name.lower()


class _Inhomogeneous:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INHOMOGENEOUS"


INHOMOGENEOUS = _Inhomogeneous()


def sign(exponent: int) -> int:
    """(-1)**exponent for integer exponents."""
    return -1 if exponent & 1 else 1


@dataclass(frozen=True)
class FunctionSymbol:
    """An opaque smooth function of some even coordinates.

    ``derivatives`` optionally registers closed-form partials: a tuple of
    ``(coordinate, rule)`` pairs where ``rule(algebra)`` returns the partial
    derivative as a purely even SuperScalar.  A symbol with registered rules
    must register one for every coordinate it depends on.
    """

    name: str
    depends_on: tuple[str, ...]
    invertible: bool = False
    derivatives: tuple[tuple[str, Callable[[SuperAlgebra], SuperScalar]], ...] = field(
        default=(), compare=False
    )

    def __post_init__(self):
        object.__setattr__(self, "depends_on", tuple(self.depends_on))
        if len(set(self.depends_on)) != len(self.depends_on):
            raise ValueError(f"repeated dependency in function symbol {self.name!r}")
        if self.derivatives:
            covered = {c for c, _ in self.derivatives}
            if covered != set(self.depends_on):
                raise ValueError(
                    f"registered derivatives of {self.name!r} must cover exactly {self.depends_on}"
                )


Scalar = Union[int, Fraction, "flint.fmpq"]


def _to_fmpq(value) -> flint.fmpq:
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, int):
        return flint.fmpq(value)
    raise TypeError(f"unsupported scalar {value!r}")


class SuperAlgebra:
    """Coordinate system plus function symbols: the home of all scalars.

    Every SuperScalar belongs to exactly one algebra; mixing algebras raises
    ChartMismatchError.  Factor charts of a product share the product's
    algebra and select a subset of its coordinates as their frame.
    """

    def __init__(
        self,
        even: Iterable[str],
        odd: Iterable[str] = (),
        symbols: Iterable[FunctionSymbol] = (),
        jet_order: int = 4,
    ):
        self.even_coords = tuple(even)
        self.odd_coords = tuple(odd)
        self.symbols: dict[str, FunctionSymbol] = {}
        for s in symbols:
            if s.name in self.symbols:
                raise ValueError(f"duplicate function symbol {s.name!r}")
            self.symbols[s.name] = s
        self.jet_order = jet_order

        names = list(self.even_coords) + list(self.odd_coords) + list(self.symbols)
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate and symbol names must be unique: {names}")
        for s in self.symbols.values():
            for c in s.depends_on:
                if c not in self.even_coords:
                    raise ValueError(
                        f"function symbol {s.name!r} may only depend on even coordinates, got {c!r}"
                    )
        self._odd_index = {n: i for i, n in enumerate(self.odd_coords)}

        # polynomial indeterminates: even coordinates, then jets symbol by symbol
        keys: list[tuple] = [("coord", c) for c in self.even_coords]
        var_names = list(self.even_coords)
        for s in self.symbols.values():
            orders = range(1) if s.derivatives else range(jet_order + 1)
            for k in orders:
                for combo in combinations_with_replacement(range(len(s.depends_on)), k):
                    alpha = tuple(combo.count(i) for i in range(len(s.depends_on)))
                    keys.append(("jet", s.name, alpha))
                    var_names.append(self._jet_name(s, alpha))
        if len(set(var_names)) != len(var_names):
            raise ValueError(f"jet names collide: {var_names}")
        self._keys = keys
        self._var_names = tuple(var_names)
        self._var_index = {k: i for i, k in enumerate(keys)}
        self.ctx = flint.fmpq_mpoly_ctx.get(self._var_names, "lex")
        self._gens = self.ctx.gens()
        self._one_poly = self.ctx.from_dict({(0,) * len(keys): 1}) if keys else None
        self._rule_cache: dict[tuple[str, str], EvenScalar] = {}
        # d(var)/d(coord): coord -> list of (var index, polynomial | rule-key | jet-overflow)
        self._dtable: dict[str, list[tuple[int, object]]] = {}
        for c in self.even_coords:
            entries: list[tuple[int, object]] = []
            for i, key in enumerate(keys):
                if key[0] == "coord":
                    if key[1] == c:
                        entries.append((i, self._one_poly))
                    continue
                s = self.symbols[key[1]]
                if c not in s.depends_on:
                    continue
                if s.derivatives:
                    entries.append((i, ("rule", s.name, c)))
                    continue
                alpha = list(key[2])
                alpha[s.depends_on.index(c)] += 1
                nxt = ("jet", s.name, tuple(alpha))
                if nxt in self._var_index:
                    entries.append((i, self._gens[self._var_index[nxt]]))
                else:
                    entries.append((i, ("overflow", s.name)))
            self._dtable[c] = entries

    # -- naming -------------------------------------------------------------

    @staticmethod
    def _jet_name(s: FunctionSymbol, alpha: tuple[int, ...]) -> str:
        if not any(alpha):
            return s.name
        return s.name + "_" + "".join(c * k for c, k in zip(s.depends_on, alpha))

    @property
    def coordinates(self) -> tuple[str, ...]:
        return self.even_coords + self.odd_coords

    def parity_of_coordinate(self, name: str) -> Parity:
        if name in self._odd_index:
            return Parity.ODD
        if name in self.even_coords:
            return Parity.EVEN
        raise UnknownCoordinateError(f"unknown coordinate {name!r}")

    def is_coordinate(self, name: str) -> bool:
        return name in self._odd_index or name in self.even_coords

    def variable_support(self, var: int) -> frozenset[str]:
        """Even coordinates an indeterminate depends on."""
        key = self._keys[var]
        if key[0] == "coord":
            return frozenset([key[1]])
        return frozenset(self.symbols[key[1]].depends_on)

    # -- constructors -------------------------------------------------------

    def poly_one(self):
        return self._one_poly if self._one_poly is not None else self.ctx.from_dict({(): 1})

    def even(self, num, den=None) -> EvenScalar:
        return EvenScalar.make(self, num, den if den is not None else self.poly_one())

    def even_const(self, value: Scalar) -> EvenScalar:
        return EvenScalar.make(self, self.poly_one() * _to_fmpq(value), self.poly_one())

    def const(self, value: Scalar) -> SuperScalar:
        return SuperScalar.from_even(self, self.even_const(value))

    def zero(self) -> SuperScalar:
        return SuperScalar(self, {})

    def one(self) -> SuperScalar:
        return self.const(1)

    def coord(self, name: str) -> SuperScalar:
        if name in self._odd_index:
            return SuperScalar(self, {(self._odd_index[name],): self.even_const(1)})
        if name in self.even_coords:
            return SuperScalar.from_even(self, self.even(self._gens[self._var_index[("coord", name)]]))
        raise UnknownCoordinateError(f"unknown coordinate {name!r}")

    def func(self, name: str) -> SuperScalar:
        return self.jet(name, ())

    def jet(self, name: str, coords: Iterable[str]) -> SuperScalar:
        """Jet symbol of ``name`` differentiated once along each listed coordinate."""
        if name not in self.symbols:
            raise UnknownCoordinateError(f"unknown function symbol {name!r}")
        s = self.symbols[name]
        coords = tuple(coords)
        for c in coords:
            if c not in s.depends_on:
                if not self.is_coordinate(c):
                    raise UnknownCoordinateError(f"unknown coordinate {c!r}")
                return self.zero()
        alpha = tuple(coords.count(c) for c in s.depends_on)
        key = ("jet", name, alpha)
        if key not in self._var_index:
            if s.derivatives and coords:
                value = self.func(name)
                for c in coords:
                    value = value.derivative(c)
                return value
            raise JetOrderError(f"jet {self._jet_name(s, alpha)} exceeds jet order {self.jet_order}")
        return SuperScalar.from_even(self, self.even(self._gens[self._var_index[key]]))

    # -- differentiation support ----------------------------------------------

    def _rule(self, symbol: str, coord: str) -> EvenScalar:
        cache_key = (symbol, coord)
        cached = self._rule_cache.get(cache_key)
        if cached is not None:
            return cached
        rule = dict(self.symbols[symbol].derivatives)[coord]
        value = rule(self)
        if not isinstance(value, SuperScalar) or value.algebra is not self:
            raise ChartMismatchError(f"derivative rule for {symbol!r} returned a foreign value")
        if value.has_odd_part():
            raise ParityError(f"derivative rule for {symbol!r} must be purely even")
        result = value.body()
        self._rule_cache[cache_key] = result  # idempotent under concurrent writers
        return result

    def _poly_derivative(self, p, coord: str) -> EvenScalar:
        """Total derivative of a polynomial along an even coordinate."""
        degs = p.degrees()
        poly_acc = None
        frac_acc = None
        for i, dv in self._dtable[coord]:
            if not degs[i]:
                continue
            partial = p.derivative(i)
            if isinstance(dv, tuple):
                if dv[0] == "overflow":
                    raise JetOrderError(
                        f"differentiating {dv[1]!r} along {coord!r} exceeds jet order {self.jet_order}"
                    )
                term = self._rule(dv[1], dv[2]) * self.even(partial)
                frac_acc = term if frac_acc is None else frac_acc + term
            else:
                term = partial * dv
                poly_acc = term if poly_acc is None else poly_acc + term
        out = self.even(poly_acc) if poly_acc is not None else self.even_const(0)
        return out if frac_acc is None else out + frac_acc

    # -- rendering -----------------------------------------------------------

    def render_poly(self, p) -> str:
        if p.is_zero():
            return "0"
        pieces = []
        for monom, coeff in p.to_dict().items():
            factors = []
            for i, e in enumerate(monom):
                if e == 1:
                    factors.append(self._var_names[i])
                elif e > 1:
                    factors.append(f"{self._var_names[i]}^{e}")
            mon = "*".join(factors)
            if not mon:
                pieces.append(str(coeff))
            elif coeff == 1:
                pieces.append(mon)
            elif coeff == -1:
                pieces.append("-" + mon)
            else:
                pieces.append(f"{coeff}*{mon}")
        return _join_terms(pieces)

    def __repr__(self) -> str:
        return f"SuperAlgebra(even={self.even_coords}, odd={self.odd_coords}, symbols={tuple(self.symbols)})"


def _join_terms(pieces: list[str]) -> str:
    out = pieces[0]
    for piece in pieces[1:]:
        if piece.startswith("-"):
            out += " - " + piece[1:]
        else:
            out += " + " + piece
    return out


class EvenScalar:
    """Canonical fraction num/den: gcd-reduced, denominator monic."""

    __slots__ = ("algebra", "den", "num")

    def __init__(self, algebra: SuperAlgebra, num, den):
        self.algebra = algebra
        self.num = num
        self.den = den

    @classmethod
    def make(cls, algebra: SuperAlgebra, num, den) -> EvenScalar:
        if den.is_zero():
            raise NotInvertibleError("zero denominator")
        if num.is_zero():
            return cls(algebra, num, algebra.poly_one())
        if not den.is_one():
            g = num.gcd(den)
            if not g.is_one():
                num = num / g
                den = den / g
            lc = den.leading_coefficient()
            if lc != 1:
                num = num / lc
                den = den / lc
        limit = max_terms()
        if len(num) > limit or len(den) > limit:
            raise ExpressionTooLargeError(
                f"expression exceeds {limit} terms (raise {MAX_TERMS_ENV} to allow larger)"
            )
        return cls(algebra, num, den)

    def _coerce(self, other) -> EvenScalar:
        if isinstance(other, EvenScalar):
            if other.algebra is not self.algebra:
                raise ChartMismatchError("scalars belong to different charts")
            return other
        return self.algebra.even_const(other)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def __add__(self, other) -> EvenScalar:
        o = self._coerce(other)
        if self.den == o.den:
            return EvenScalar.make(self.algebra, self.num + o.num, self.den)
        return EvenScalar.make(self.algebra, self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> EvenScalar:
        return EvenScalar(self.algebra, -self.num, self.den)

    def __sub__(self, other) -> EvenScalar:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> EvenScalar:
        return self._coerce(other) - self

    def __mul__(self, other) -> EvenScalar:
        o = self._coerce(other)
        if self.den.is_one() and o.den.is_one():
            return EvenScalar.make(self.algebra, self.num * o.num, self.den)
        return EvenScalar.make(self.algebra, self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> EvenScalar:
        if self.is_zero():
            raise NotInvertibleError("division by zero")
        return EvenScalar.make(self.algebra, self.den, self.num)

    def __truediv__(self, other) -> EvenScalar:
        return self * self._coerce(other).inverse()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.algebra.even_const(other)
        if not isinstance(other, EvenScalar) or other.algebra is not self.algebra:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    __hash__ = None  # type: ignore[assignment]

    def derivative(self, coord: str) -> EvenScalar:
        alg = self.algebra
        if coord not in alg.even_coords:
            if alg.is_coordinate(coord):
                return alg.even_const(0)  # coefficients never depend on odd coordinates
            raise UnknownCoordinateError(f"unknown coordinate {coord!r}")
        dn = alg._poly_derivative(self.num, coord)
        if self.den.is_one():
            return dn
        dd = alg._poly_derivative(self.den, coord)
        return (dn * alg.even(self.den) - alg.even(self.num) * dd) / alg.even(self.den * self.den)

    def variables(self) -> set[int]:
        used = set()
        for p in (self.num, self.den):
            used.update(i for i, d in enumerate(p.degrees()) if d)
        return used

    def support(self) -> frozenset[str]:
        """Even coordinates this scalar depends on (through coordinates or jets)."""
        out: set[str] = set()
        for i in self.variables():
            out |= self.algebra.variable_support(i)
        return frozenset(out)

    def is_constant(self) -> bool:
        return not self.variables()

    def is_monomial_numerator(self) -> bool:
        return len(self.num) <= 1

    def render(self) -> str:
        alg = self.algebra
        n = alg.render_poly(self.num)
        if self.den.is_one():
            return n
        d = alg.render_poly(self.den)
        if len(self.num) > 1:
            n = f"({n})"
        if len(self.den) > 1 or not _is_single_power(self.den):
            d = f"({d})"
        return f"{n}/{d}"

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"EvenScalar({self.render()})"


def _is_single_power(p) -> bool:
    if len(p) != 1:
        return False
    (monom, coeff), = p.to_dict().items()
    return coeff == 1 and sum(1 for e in monom if e) <= 1


@lru_cache(maxsize=65536)
def merge_monomials(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """Product of two odd monomials as (sign, monomial), or None if it vanishes."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    if set(a) & set(b):
        return None
    inversions = 0
    for x in a:
        for y in b:
            if x > y:
                inversions += 1
    return sign(inversions), tuple(sorted(a + b))


class SuperScalar:
    """Element of the Grassmann-valued function algebra of a chart."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: SuperAlgebra, terms: Mapping[tuple[int, ...], EvenScalar]):
        self.algebra = algebra
        self.terms = {m: c for m, c in terms.items() if not c.is_zero()}

    @classmethod
    def from_even(cls, algebra: SuperAlgebra, coeff: EvenScalar) -> SuperScalar:
        return cls(algebra, {(): coeff})

    def _coerce(self, other) -> SuperScalar:
        if isinstance(other, SuperScalar):
            if other.algebra is not self.algebra:
                raise ChartMismatchError("superfunctions belong to different charts")
            return other
        if isinstance(other, EvenScalar):
            if other.algebra is not self.algebra:
                raise ChartMismatchError("superfunctions belong to different charts")
            return SuperScalar.from_even(self.algebra, other)
        return self.algebra.const(other)

    # -- structure -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def parity(self):
        """Parity.EVEN / Parity.ODD, or INHOMOGENEOUS.  Zero is even."""
        parities = {len(m) % 2 for m in self.terms}
        if not parities:
            return Parity.EVEN
        if len(parities) > 1:
            return INHOMOGENEOUS
        return Parity(parities.pop())

    def split_parity(self) -> dict[Parity, SuperScalar]:
        """Homogeneous components keyed by parity (zero parts omitted)."""
        parts: dict[Parity, dict] = {}
        for m, c in self.terms.items():
            parts.setdefault(Parity(len(m) % 2), {})[m] = c
        return {p: SuperScalar(self.algebra, t) for p, t in sorted(parts.items())}

    def body(self) -> EvenScalar:
        c = self.terms.get(())
        return c if c is not None else self.algebra.even_const(0)

    def has_odd_part(self) -> bool:
        return any(m for m in self.terms)

    def support(self) -> frozenset[str]:
        out: set[str] = set()
        for m, c in self.terms.items():
            out |= c.support()
            out |= {self.algebra.odd_coords[i] for i in m}
        return frozenset(out)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> SuperScalar:
        o = self._coerce(other)
        terms = dict(self.terms)
        for m, c in o.terms.items():
            terms[m] = terms[m] + c if m in terms else c
        return SuperScalar(self.algebra, terms)

    __radd__ = __add__

    def __neg__(self) -> SuperScalar:
        return SuperScalar(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> SuperScalar:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> SuperScalar:
        return self._coerce(other) - self

    def __mul__(self, other) -> SuperScalar:
        o = self._coerce(other)
        terms: dict[tuple[int, ...], EvenScalar] = {}
        for ma, ca in self.terms.items():
            for mb, cb in o.terms.items():
                merged = merge_monomials(ma, mb)
                if merged is None:
                    continue
                s, m = merged
                c = ca * cb
                if s < 0:
                    c = -c
                terms[m] = terms[m] + c if m in terms else c
        return SuperScalar(self.algebra, terms)

    def __rmul__(self, other) -> SuperScalar:
        return self._coerce(other) * self

    def __pow__(self, n: int) -> SuperScalar:
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = self.algebra.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other) -> SuperScalar:
        return self * self._coerce(other).invert()

    def __rtruediv__(self, other) -> SuperScalar:
        return self._coerce(other) * self.invert()

    def __eq__(self, other) -> bool:
        try:
            o = self._coerce(other)
        except (TypeError, ChartMismatchError):
            return NotImplemented
        return (self - o).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def invert(self) -> SuperScalar:
        """Two-sided inverse of an even superfunction with nonzero body.

        f = a + n with n nilpotent, so f^-1 = a^-1 * sum_k (-a^-1 n)^k and the
        series stops once the odd degree exceeds the number of generators.
        """
        p = self.parity()
        if p is not Parity.EVEN:
            raise ParityError("only even superfunctions can be inverted")
        a = self.body()
        if a.is_zero():
            raise NotInvertibleError("superfunction has zero body")
        a_inv = SuperScalar.from_even(self.algebra, a.inverse())
        nil = self - SuperScalar.from_even(self.algebra, a)
        step = -(a_inv * nil)
        total = self.algebra.one()
        power = self.algebra.one()
        while True:
            power = power * step
            if power.is_zero():
                break
            total = total + power
        return total * a_inv

    def derivative(self, coord: str) -> SuperScalar:
        """Left partial derivative along a coordinate."""
        alg = self.algebra
        if coord in alg._odd_index:
            k = alg._odd_index[coord]
            terms: dict[tuple[int, ...], EvenScalar] = {}
            for m, c in self.terms.items():
                if k in m:
                    pos = m.index(k)
                    rest = m[:pos] + m[pos + 1:]
                    terms[rest] = -c if pos & 1 else c
            return SuperScalar(alg, terms)
        if coord in alg.even_coords:
            return SuperScalar(alg, {m: c.derivative(coord) for m, c in self.terms.items()})
        raise UnknownCoordinateError(f"unknown coordinate {coord!r}")

    # -- rendering -----------------------------------------------------------

    def render(self) -> str:
        if not self.terms:
            return "0"
        names = self.algebra.odd_coords
        pieces = []
        for m in sorted(self.terms, key=lambda m: (len(m), m)):
            c = self.terms[m]
            coeff = c.render()
            if not m:
                pieces.append(coeff)
                continue
            mon = "*".join(names[i] for i in m)
            if c.is_one():
                pieces.append(mon)
            elif (-c).is_one():
                pieces.append("-" + mon)
            elif c.den.is_one() and len(c.num) == 1:
                pieces.append(f"{coeff}*{mon}")
            else:
                pieces.append(f"({coeff})*{mon}")
        return _join_terms(pieces)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"SuperScalar({self.render()})"


# -- functional surface ------------------------------------------------------


def _same_chart(a: SuperScalar, b: SuperScalar) -> None:
    if a.algebra is not b.algebra:
        raise ChartMismatchError("superfunctions belong to different charts")


def mul(a: SuperScalar, b: SuperScalar) -> SuperScalar:
    _same_chart(a, b)
    return a * b


def add(a: SuperScalar, b: SuperScalar) -> SuperScalar:
    _same_chart(a, b)
    return a + b


def partial_derivative(f: SuperScalar, coord: str) -> SuperScalar:
    return f.derivative(coord)


def parity_of(f: SuperScalar):
    return f.parity()


def is_zero(f: SuperScalar) -> bool:
    return f.is_zero()


def invert(f: SuperScalar) -> SuperScalar:
    return f.invert()


def body(f: SuperScalar) -> EvenScalar:
    return f.body()
