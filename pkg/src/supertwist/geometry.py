"""Super Riemannian geometry on a coordinate chart, from first principles.

Conventions: a vector field is ``sum_I X^I d_I`` with every coefficient
written to the left of its frame vector; all sign factors below follow from
that choice together with the left-derivative convention of ``graded``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from fractions import Fraction
from itertools import product

from .errors import (
    ChartMismatchError,
    DegenerateMetricError,
    ParityError,
    UndefinedDenominatorError,
    UnknownCoordinateError,
)
from .graded import INHOMOGENEOUS, EvenScalar, Parity, SuperAlgebra, SuperScalar, sign


class Chart:
    """A frame of coordinates inside an algebra.

    Frames are listed evens first, then odds, unless an explicit order is
    given (product charts keep each factor's block together).  A factor of a product is a
    Chart over the product's algebra whose frame is a subset of coordinates;
    the remaining coordinates act as parameters.
    """

    def __init__(
        self,
        algebra: SuperAlgebra,
        even: Iterable[str],
        odd: Iterable[str] = (),
        name: str = "",
        order: Iterable[str] | None = None,
    ):
        self.algebra = algebra
        self.even = tuple(even)
        self.odd = tuple(odd)
        self.name = name
        self._frames = self.even + self.odd if order is None else tuple(order)
        if sorted(self._frames) != sorted(self.even + self.odd):
            raise ValueError("frame order must be a permutation of the chart coordinates")
        for c in self.even:
            if algebra.parity_of_coordinate(c) is not Parity.EVEN:
                raise ValueError(f"{c!r} is not an even coordinate")
        for c in self.odd:
            if algebra.parity_of_coordinate(c) is not Parity.ODD:
                raise ValueError(f"{c!r} is not an odd coordinate")
        if len(set(self.frames)) != len(self.frames):
            raise ValueError("chart coordinates must be unique")

    @classmethod
    def standalone(cls, even: Iterable[str], odd: Iterable[str] = (), symbols=(), name: str = "") -> Chart:
        even, odd = tuple(even), tuple(odd)
        return cls(SuperAlgebra(even, odd, symbols), even, odd, name)

    @property
    def frames(self) -> tuple[str, ...]:
        return self._frames

    @property
    def graded_dimension(self) -> int:
        return len(self.even) - len(self.odd)

    def parity(self, frame: str) -> Parity:
        return self.algebra.parity_of_coordinate(frame)

    def frame(self, name: str) -> VectorField:
        if name not in self.frames:
            raise UnknownCoordinateError(f"{name!r} is not a frame of chart {self.name or self.frames}")
        return VectorField(self.algebra, {name: self.algebra.one()})

    def frame_fields(self) -> list[VectorField]:
        return [self.frame(f) for f in self.frames]

    def __repr__(self) -> str:
        return f"Chart({self.name!r}, even={self.even}, odd={self.odd})"


class VectorField:
    """sum_I X^I d_I with coefficients on the left."""

    __slots__ = ("algebra", "components")

    def __init__(self, algebra: SuperAlgebra, components: Mapping[str, SuperScalar]):
        self.algebra = algebra
        comps = {}
        for name, c in components.items():
            if c.algebra is not algebra:
                raise ChartMismatchError("component from a different chart")
            if not algebra.is_coordinate(name):
                raise UnknownCoordinateError(f"unknown frame {name!r}")
            if not c.is_zero():
                comps[name] = c
        order = {n: i for i, n in enumerate(algebra.coordinates)}
        self.components = dict(sorted(comps.items(), key=lambda kv: order[kv[0]]))

    @classmethod
    def zero(cls, algebra: SuperAlgebra) -> VectorField:
        return cls(algebra, {})

    def _check(self, other: VectorField) -> None:
        if other.algebra is not self.algebra:
            raise ChartMismatchError("vector fields belong to different charts")

    def coefficient(self, frame: str) -> SuperScalar:
        return self.components.get(frame, self.algebra.zero())

    def is_zero(self) -> bool:
        return not self.components

    def parity(self):
        ps = set()
        for name, c in self.components.items():
            cp = c.parity()
            if cp is INHOMOGENEOUS:
                return INHOMOGENEOUS
            ps.add(cp + self.algebra.parity_of_coordinate(name))
        if not ps:
            return Parity.EVEN
        if len(ps) > 1:
            return INHOMOGENEOUS
        return ps.pop()

    def homogeneous_parts(self) -> dict[Parity, VectorField]:
        parts: dict[Parity, dict[str, SuperScalar]] = {}
        for name, c in self.components.items():
            fp = self.algebra.parity_of_coordinate(name)
            for cp, piece in c.split_parity().items():
                slot = parts.setdefault(cp + fp, {})
                slot[name] = piece
        return {p: VectorField(self.algebra, comps) for p, comps in sorted(parts.items())}

    def require_parity(self) -> Parity:
        p = self.parity()
        if p is INHOMOGENEOUS:
            raise ParityError("operation requires a homogeneous vector field")
        return p

    def __add__(self, other: VectorField) -> VectorField:
        self._check(other)
        comps = dict(self.components)
        for name, c in other.components.items():
            comps[name] = comps[name] + c if name in comps else c
        return VectorField(self.algebra, comps)

    def __neg__(self) -> VectorField:
        return VectorField(self.algebra, {n: -c for n, c in self.components.items()})

    def __sub__(self, other: VectorField) -> VectorField:
        return self + (-other)

    def scale(self, f) -> VectorField:
        """Left multiplication f*X."""
        if not isinstance(f, SuperScalar):
            f = self.algebra.const(f) if not isinstance(f, EvenScalar) else SuperScalar.from_even(self.algebra, f)
        return VectorField(self.algebra, {n: f * c for n, c in self.components.items()})

    def __rmul__(self, f) -> VectorField:
        return self.scale(f)

    def times(self, f: SuperScalar) -> VectorField:
        """Right multiplication X*f, moved to the left with the sign rule."""
        comps: dict[str, SuperScalar] = {}
        for name, c in self.components.items():
            fp = self.algebra.parity_of_coordinate(name)
            for p, piece in f.split_parity().items():
                term = c * piece if not (fp & p) else -(c * piece)
                comps[name] = comps[name] + term if name in comps else term
        return VectorField(self.algebra, comps)

    def apply(self, f: SuperScalar) -> SuperScalar:
        """X(f) as a derivation."""
        out = self.algebra.zero()
        for name, c in self.components.items():
            out = out + c * f.derivative(name)
        return out

    def __call__(self, f: SuperScalar) -> SuperScalar:
        return self.apply(f)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def render(self) -> str:
        if not self.components:
            return "0"
        pieces = []
        for name, c in self.components.items():
            frame = f"d_{name}"
            if c == self.algebra.one():
                pieces.append(frame)
            elif c == -self.algebra.one():
                pieces.append(f"-{frame}")
            else:
                pieces.append(f"({c.render()}) {frame}")
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"VectorField({self.render()})"


def frame_coefficient(v: VectorField, frame: str) -> SuperScalar:
    return v.coefficient(frame)


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """Graded commutator [X, Y] = XY - (-1)^{|X||Y|} YX, split over homogeneous parts."""
    x._check(y)
    out = VectorField.zero(x.algebra)
    for px, xp in x.homogeneous_parts().items():
        for py, yp in y.homogeneous_parts().items():
            comps: dict[str, SuperScalar] = {}
            for name in set(xp.components) | set(yp.components):
                val = xp.apply(yp.coefficient(name))
                other = yp.apply(xp.coefficient(name))
                comps[name] = val - other if not (px & py) else val + other
            out = out + VectorField(x.algebra, comps)
    return out


# -- metric -----------------------------------------------------------------


class Metric:
    """Frame-pair matrix g_IJ of an even metric on a chart.

    ``entries`` only needs one of each pair; missing transposes are filled
    by graded symmetry.  Construction does not validate; see validate_metric.
    """

    def __init__(self, chart: Chart, entries: Mapping[tuple[str, str], SuperScalar], fill_symmetric: bool = True):
        self.chart = chart
        alg = chart.algebra
        matrix: dict[tuple[str, str], SuperScalar] = {}
        for (a, b), v in entries.items():
            if a not in chart.frames or b not in chart.frames:
                raise UnknownCoordinateError(f"metric entry ({a}, {b}) outside chart {chart.frames}")
            if v.algebra is not alg:
                raise ChartMismatchError("metric entry from a different chart")
            matrix[(a, b)] = v
        if fill_symmetric:
            for (a, b), v in list(matrix.items()):
                if (b, a) not in matrix:
                    s = sign(chart.parity(a) * chart.parity(b))
                    matrix[(b, a)] = v if s > 0 else -v
        self._matrix = {k: v for k, v in matrix.items() if not v.is_zero()}
        self._inverse: dict[tuple[str, str], SuperScalar] | None = None
        self._connection: ConnectionTable | None = None

    @property
    def algebra(self) -> SuperAlgebra:
        return self.chart.algebra

    def entry(self, a: str, b: str) -> SuperScalar:
        return self._matrix.get((a, b), self.chart.algebra.zero())

    def __getitem__(self, key: tuple[str, str]) -> SuperScalar:
        return self.entry(*key)

    def items(self) -> Iterator[tuple[tuple[str, str], SuperScalar]]:
        for a in self.chart.frames:
            for b in self.chart.frames:
                v = self._matrix.get((a, b))
                if v is not None:
                    yield (a, b), v

    def inverse(self) -> dict[tuple[str, str], SuperScalar]:
        if self._inverse is None:
            self._inverse = inverse_metric(self)
        return self._inverse

    def inverse_entry(self, a: str, b: str) -> SuperScalar:
        return self.inverse().get((a, b), self.chart.algebra.zero())

    @property
    def connection(self) -> ConnectionTable:
        if self._connection is None:
            self._connection = levi_civita(self)
        return self._connection


def metric_apply(g: Metric, x: VectorField, y: VectorField) -> SuperScalar:
    """<X, Y> = sum X^I (-1)^{|I||Y^J|} Y^J g_IJ."""
    alg = g.chart.algebra
    if x.algebra is not alg or y.algebra is not alg:
        raise ChartMismatchError("vector fields and metric belong to different charts")
    out = alg.zero()
    for a, xa in x.components.items():
        pa = alg.parity_of_coordinate(a)
        for b, yb in y.components.items():
            gab = g.entry(a, b)
            if gab.is_zero():
                continue
            for p, piece in yb.split_parity().items():
                term = xa * piece * gab
                out = out + (-term if (pa & p) else term)
    return out


def _body_matrix_inverse(frames: tuple[str, ...], body: dict[tuple[str, str], EvenScalar], alg: SuperAlgebra):
    """Gauss-Jordan over the coefficient field; None if singular."""
    n = len(frames)
    zero = alg.even_const(0)
    rows = [[body.get((frames[i], frames[j]), zero) for j in range(n)] for i in range(n)]
    inv = [[alg.even_const(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not rows[r][col].is_zero()), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        p_inv = rows[col][col].inverse()
        rows[col] = [v * p_inv for v in rows[col]]
        inv[col] = [v * p_inv for v in inv[col]]
        for r in range(n):
            if r == col or rows[r][col].is_zero():
                continue
            f = rows[r][col]
            rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
            inv[r] = [a - f * b for a, b in zip(inv[r], inv[col])]
    return inv


def validate_metric(g: Metric) -> list[str]:
    """Diagnostics for graded symmetry, degree-0 homogeneity and nondegeneracy; empty iff valid."""
    chart = g.chart
    alg = chart.algebra
    problems = []
    for a in chart.frames:
        for b in chart.frames:
            v = g.entry(a, b)
            expected = chart.parity(a) + chart.parity(b)
            p = v.parity()
            if not v.is_zero() and p is not expected:
                problems.append(f"entry ({a}, {b}) has parity {p} but must be {expected}")
            s = sign(chart.parity(a) * chart.parity(b))
            other = g.entry(b, a)
            if not (v - (other if s > 0 else -other)).is_zero():
                problems.append(f"entries ({a}, {b}) and ({b}, {a}) violate graded symmetry")
    body = {k: v.body() for k, v in g.items()}
    if _body_matrix_inverse(chart.frames, body, alg) is None:
        problems.append("metric is degenerate: body matrix is singular")
    return problems


def _matmul(frames, a: Mapping, b: Mapping, alg: SuperAlgebra) -> dict:
    out = {}
    for i in frames:
        for j in frames:
            acc = alg.zero()
            for k in frames:
                x = a.get((i, k))
                y = b.get((k, j))
                if x is not None and y is not None:
                    acc = acc + x * y
            if not acc.is_zero():
                out[(i, j)] = acc
    return out


def inverse_metric(g: Metric) -> dict[tuple[str, str], SuperScalar]:
    """Two-sided inverse: sum_K g_IK g^KJ = delta_I^J.

    Inverts the body over the coefficient field, then sums the finite
    Neumann series in the nilpotent remainder.
    """
    chart = g.chart
    alg = chart.algebra
    frames = chart.frames
    body = {k: v.body() for k, v in g.items()}
    binv = _body_matrix_inverse(frames, body, alg)
    if binv is None:
        raise DegenerateMetricError("metric is degenerate: body matrix is singular")
    b_inv = {}
    for i, a in enumerate(frames):
        for j, b in enumerate(frames):
            if not binv[i][j].is_zero():
                b_inv[(a, b)] = SuperScalar.from_even(alg, binv[i][j])
    nil = {}
    for k, v in g.items():
        rest = v - SuperScalar.from_even(alg, v.body())
        if not rest.is_zero():
            nil[k] = rest
    if not nil:
        return b_inv
    step = {k: -v for k, v in _matmul(frames, b_inv, nil, alg).items()}
    total = {(a, a): alg.one() for a in frames}
    power = dict(total)
    while True:
        power = _matmul(frames, power, step, alg)
        if not power:
            break
        for k, v in power.items():
            total[k] = total[k] + v if k in total else v
    result = _matmul(frames, total, b_inv, alg)
    return result


# -- connection -------------------------------------------------------------


class ConnectionTable:
    """Christoffel data: (I, J) -> nabla_{d_I} d_J, with memoized frame quantities.

    Frame-level curvature and Ricci values are cached on first use; the cache
    only ever stores the value a fresh computation would produce.
    """

    def __init__(self, chart: Chart, table: Mapping[tuple[str, str], VectorField], metric: Metric | None = None):
        self.chart = chart
        self.metric = metric
        self.table = {k: v for k, v in table.items() if not v.is_zero()}
        self._curv: dict[tuple[str, str, str], VectorField] = {}
        self._ric: dict[tuple[str, str], SuperScalar] = {}

    @property
    def algebra(self) -> SuperAlgebra:
        return self.chart.algebra

    def christoffel(self, i: str, j: str) -> VectorField:
        if i not in self.chart.frames or j not in self.chart.frames:
            raise UnknownCoordinateError(f"({i}, {j}) is not a frame pair of {self.chart.frames}")
        return self.table.get((i, j)) or VectorField.zero(self.chart.algebra)

    def frame_curvature(self, i: str, j: str, k: str) -> VectorField:
        key = (i, j, k)
        val = self._curv.get(key)
        if val is None:
            f = self.chart.frame
            val = _curvature_raw(self, f(i), f(j), f(k))
            self._curv[key] = val
        return val

    def frame_ricci(self, i: str, j: str) -> SuperScalar:
        key = (i, j)
        val = self._ric.get(key)
        if val is None:
            val = _ricci_frames(self, i, j)
            self._ric[key] = val
        return val


def levi_civita(g: Metric) -> ConnectionTable:
    """Koszul formula on coordinate frames (all brackets vanish):

    2<nabla_I d_J, d_K> = d_I g_JK + (-1)^{|I|(|J|+|K|)} d_J g_KI - (-1)^{|K|(|I|+|J|)} d_K g_IJ

    and nabla_I d_J = sum_{K,M} c_K g^{KM} d_M with c_K the right side over 2.
    """
    chart = g.chart
    alg = chart.algebra
    frames = chart.frames
    par = {f: chart.parity(f) for f in frames}
    half = Fraction(1, 2)
    ginv = g.inverse()
    table = {}
    for i in frames:
        for j in frames:
            c = {}
            for k in frames:
                t = g.entry(j, k).derivative(i)
                t2 = g.entry(k, i).derivative(j)
                t3 = g.entry(i, j).derivative(k)
                val = t + (t2 if not (par[i] & (par[j] ^ par[k])) else -t2)
                val = val - (t3 if not (par[k] & (par[i] ^ par[j])) else -t3)
                if not val.is_zero():
                    c[k] = val * half
            comps = {}
            for m in frames:
                acc = alg.zero()
                for k, ck in c.items():
                    inv = ginv.get((k, m))
                    if inv is not None:
                        acc = acc + ck * inv
                if not acc.is_zero():
                    comps[m] = acc
            table[(i, j)] = VectorField(alg, comps)
    return ConnectionTable(chart, table, g)


def _check_frames(conn: ConnectionTable, v: VectorField) -> None:
    if v.algebra is not conn.chart.algebra:
        raise ChartMismatchError("vector field and connection belong to different charts")
    for name in v.components:
        if name not in conn.chart.frames:
            raise UnknownCoordinateError(f"vector field has a d_{name} component outside chart {conn.chart.frames}")


def covariant_derivative(conn: ConnectionTable, x: VectorField, y: VectorField) -> VectorField:
    """nabla_X Y = sum_I X^I [d_I(Y^J) d_J + (-1)^{|I||Y^J|} Y^J Gamma_IJ]."""
    _check_frames(conn, x)
    _check_frames(conn, y)
    alg = conn.chart.algebra
    out: dict[str, SuperScalar] = {}

    def acc(name: str, val: SuperScalar) -> None:
        out[name] = out[name] + val if name in out else val

    for i, xi in x.components.items():
        pi = alg.parity_of_coordinate(i)
        for j, yj in y.components.items():
            acc(j, xi * yj.derivative(i))
            gamma = conn.table.get((i, j))
            if gamma is None:
                continue
            for p, piece in yj.split_parity().items():
                coeff = xi * piece
                if pi & p:
                    coeff = -coeff
                for m, gm in gamma.components.items():
                    acc(m, coeff * gm)
    return VectorField(alg, out)


def torsion(conn: ConnectionTable, x: VectorField, y: VectorField) -> VectorField:
    """nabla_X Y - (-1)^{|X||Y|} nabla_Y X - [X, Y], summed over homogeneous parts."""
    out = VectorField.zero(conn.chart.algebra)
    for px, xp in x.homogeneous_parts().items():
        for py, yp in y.homogeneous_parts().items():
            a = covariant_derivative(conn, xp, yp)
            b = covariant_derivative(conn, yp, xp)
            out = out + (a - b if not (px & py) else a + b) - lie_bracket(xp, yp)
    return out


def _curvature_raw(conn: ConnectionTable, x: VectorField, y: VectorField, z: VectorField) -> VectorField:
    out = VectorField.zero(conn.chart.algebra)
    for px, xp in x.homogeneous_parts().items():
        for py, yp in y.homogeneous_parts().items():
            a = covariant_derivative(conn, xp, covariant_derivative(conn, yp, z))
            b = covariant_derivative(conn, yp, covariant_derivative(conn, xp, z))
            br = lie_bracket(xp, yp)
            c = covariant_derivative(conn, br, z) if not br.is_zero() else VectorField.zero(conn.chart.algebra)
            out = out + (a - b if not (px & py) else a + b) - c
    return out


def _frame_name(v: VectorField) -> str | None:
    """Name of the coordinate frame v is, or None."""
    if len(v.components) != 1:
        return None
    (name, c), = v.components.items()
    return name if c == v.algebra.one() else None


def curvature(conn: ConnectionTable, x: VectorField, y: VectorField, z: VectorField) -> VectorField:
    """R(X,Y)Z = nabla_X nabla_Y Z - (-1)^{|X||Y|} nabla_Y nabla_X Z - nabla_[X,Y] Z."""
    names = (_frame_name(x), _frame_name(y), _frame_name(z))
    if all(n is not None and n in conn.chart.frames for n in names):
        return conn.frame_curvature(*names)
    return _curvature_raw(conn, x, y, z)


def _ricci_frames(conn: ConnectionTable, a: str, b: str) -> SuperScalar:
    chart = conn.chart
    alg = chart.algebra
    pa, pb = chart.parity(a), chart.parity(b)
    out = alg.zero()
    for i in chart.frames:
        pi = chart.parity(i)
        t1 = conn.frame_curvature(i, a, b).coefficient(i)
        t2 = conn.frame_curvature(i, b, a).coefficient(i)
        val = t1 + (t2 if not (pa & pb) else -t2)
        if pi & (pi ^ pa ^ pb):
            val = -val
        out = out + val
    return out * Fraction(1, 2)


def ricci(conn: ConnectionTable, x: VectorField, y: VectorField) -> SuperScalar:
    """Ric(X,Y) = sum_I (-1)^{|I|(|I|+|X|+|Y|)} 1/2 [R(d_I,X)Y + (-1)^{|X||Y|} R(d_I,Y)X]^I."""
    nx, ny = _frame_name(x), _frame_name(y)
    if nx in conn.chart.frames and ny in conn.chart.frames:
        return conn.frame_ricci(nx, ny)
    chart = conn.chart
    out = chart.algebra.zero()
    for px, xp in x.homogeneous_parts().items():
        for py, yp in y.homogeneous_parts().items():
            for i in chart.frames:
                pi = chart.parity(i)
                d = chart.frame(i)
                t1 = curvature(conn, d, xp, yp).coefficient(i)
                t2 = curvature(conn, d, yp, xp).coefficient(i)
                val = t1 + (t2 if not (px & py) else -t2)
                if pi & (pi ^ px ^ py):
                    val = -val
                out = out + val
    return out * Fraction(1, 2)


def gradient(g: Metric, f: SuperScalar) -> VectorField:
    """The field with X(f) = <X, grad f> for every X (even metric).

    Solved as <grad f, d_I> = (-1)^{|I||f|} d_I f, i.e.
    (grad f)^M = sum_I (-1)^{|I||f|} (d_I f) g^{IM}.
    """
    chart = g.chart
    alg = chart.algebra
    if f.algebra is not alg:
        raise ChartMismatchError("function and metric belong to different charts")
    pf = f.parity()
    if pf is INHOMOGENEOUS:
        raise ParityError("gradient requires a homogeneous function")
    ginv = g.inverse()
    comps: dict[str, SuperScalar] = {}
    for i in chart.frames:
        di = f.derivative(i)
        if di.is_zero():
            continue
        if chart.parity(i) & pf:
            di = -di
        for m in chart.frames:
            inv = ginv.get((i, m))
            if inv is None:
                continue
            term = di * inv
            comps[m] = comps[m] + term if m in comps else term
    return VectorField(alg, comps)


def divergence(conn: ConnectionTable, x: VectorField) -> SuperScalar:
    """Div(X) = sum_I (-1)^{|I|(|I|+|X|)} (nabla_{d_I} X)^I."""
    chart = conn.chart
    out = chart.algebra.zero()
    for px, xp in x.homogeneous_parts().items():
        for i in chart.frames:
            pi = chart.parity(i)
            val = covariant_derivative(conn, chart.frame(i), xp).coefficient(i)
            out = out + (-val if pi & (pi ^ px) else val)
    return out


def laplacian(g: Metric, f: SuperScalar) -> SuperScalar:
    return divergence(g.connection, gradient(g, f))


def hessian(conn: ConnectionTable, h: SuperScalar, x: VectorField, y: VectorField) -> SuperScalar:
    """H(X,Y) = X(Y(h)) - (nabla_X Y)(h)."""
    return x.apply(y.apply(h)) - covariant_derivative(conn, x, y).apply(h)


def _k_denominator(chart: Chart) -> int:
    d = chart.graded_dimension - 1
    if d == 0:
        raise UndefinedDenominatorError(
            f"K tensor needs graded dimension != 1 (chart {chart.name or chart.frames} has m-n = 1)"
        )
    return d


def k_tensor(g: Metric, x: VectorField, y: VectorField, t: VectorField) -> VectorField:
    """K(X,Y)T = R(X,Y)T - 1/(m-n-1) [X*Ric(Y,T) - (-1)^{|Y||T|} Ric(X,T) Y].

    X*Ric(Y,T) is X multiplied on the right by the function Ric(Y,T).
    """
    denom = _k_denominator(g.chart)
    conn = g.connection
    out = curvature(conn, x, y, t)
    alg = g.chart.algebra
    corr = VectorField.zero(alg)
    for py, yp in y.homogeneous_parts().items():
        for pt, tp in t.homogeneous_parts().items():
            first = x.times(ricci(conn, yp, tp))
            second = ricci(conn, x, tp)
            second_v = yp.scale(second)
            corr = corr + (first - second_v if not (py & pt) else first + second_v)
    return out - corr.scale(alg.const(Fraction(1, denom)))


def w2(g: Metric, x: VectorField, y: VectorField, z: VectorField, t: VectorField) -> SuperScalar:
    """W2(X,Y,Z,T) = g(K(X,Y)T, Z)."""
    return metric_apply(g, k_tensor(g, x, y, t), z)


def frames_of(chart: Chart, count: int) -> Iterator[tuple[str, ...]]:
    return product(chart.frames, repeat=count)
