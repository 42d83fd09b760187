"""Charts and exact scalar expressions.

A ScalarExpr is a truncated (Laurent) power series in the distinguished
boundary-defining coordinate r, with coefficients in Q(x1..x_{d-1}).
Charts without a distinguished coordinate ("rational charts", used for
hypersurface-intrinsic geometry) hold a single order-zero coefficient.
"""

from __future__ import annotations

from fractions import Fraction

from .coeffs import Coeff, CoeffField


class BudgetExhausted(ArithmeticError):
    """Truncation budget of a series was consumed."""


class RestrictionError(ArithmeticError):
    """Boundary restriction of a negative-power (Laurent) expression."""


class Chart:
    """A coordinate chart with an optional distinguished series coordinate.

    For bulk charts the first coordinate is the boundary-defining one and
    expressions are series in it up to the truncation order.  For boundary
    charts (radial=None) every coordinate lives in the coefficient field
    and expressions are exact rational functions.
    """

    __slots__ = ("coords", "radial", "order", "field", "_boundary")

    def __init__(self, coords, radial=None, order=8, field=None):
        coords = tuple(coords)
        if len(set(coords)) != len(coords):
            raise ValueError(f"duplicate coordinates: {coords}")
        if radial is not None:
            if coords[0] != radial:
                raise ValueError("boundary-defining coordinate must come first")
            if len(coords) < 3:
                raise ValueError("bulk charts need dimension >= 3")
            if order < 1:
                raise ValueError("truncation order must be >= 1")
            fieldnames = coords[1:]
        else:
            if len(coords) < 2:
                raise ValueError("rational charts need dimension >= 2")
            fieldnames = coords
        self.coords = coords
        self.radial = radial
        self.order = order
        self.field = field if field is not None else CoeffField(fieldnames)
        self._boundary = None

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def prec_cap(self) -> int:
        return self.order + 1

    def boundary(self) -> "Chart":
        """The rational chart on the boundary coordinates, sharing the field."""
        if self.radial is None:
            raise ValueError("rational chart has no boundary chart")
        if self._boundary is None:
            self._boundary = Chart(self.coords[1:], radial=None,
                                   order=self.order, field=self.field)
        return self._boundary

    def __repr__(self):
        tag = f", radial={self.radial}, order={self.order}" if self.radial else ""
        return f"Chart({','.join(self.coords)}{tag})"

    # -- constructors ------------------------------------------------
    def zero(self) -> "ScalarExpr":
        return ScalarExpr(self, {}, None)

    def one(self) -> "ScalarExpr":
        return ScalarExpr(self, {0: self.field.one}, None)

    def const(self, q) -> "ScalarExpr":
        c = self.field.from_fraction(Fraction(q))
        return ScalarExpr(self, {0: c} if c else {}, None)

    def coord(self, name: str) -> "ScalarExpr":
        if name == self.radial:
            return ScalarExpr(self, {1: self.field.one}, None)
        if name not in self.coords:
            raise KeyError(f"unknown coordinate {name!r}")
        return ScalarExpr(self, {0: self.field.gen(name)}, None)

    def r_power(self, k: int) -> "ScalarExpr":
        if self.radial is None:
            raise ValueError("rational chart has no series coordinate")
        return ScalarExpr(self, {k: self.field.one}, None)

    def from_coeff(self, c: Coeff) -> "ScalarExpr":
        return ScalarExpr(self, {0: c} if c else {}, None)


def _min_prec(pa, pb):
    if pa is None:
        return pb
    if pb is None:
        return pa
    return min(pa, pb)


class ScalarExpr:
    """Sum over e of coeffs[e] * r^e, exact modulo O(r^prec).

    prec=None means no truncation uncertainty (an exact Laurent polynomial
    in r).  Exponents may be negative; max(0, -min exponent) is the Laurent
    offset recording division by powers of r.
    """

    __slots__ = ("chart", "coeffs", "prec")

    def __init__(self, chart, coeffs, prec):
        if prec is not None:
            coeffs = {e: c for e, c in coeffs.items() if e < prec and c}
        else:
            coeffs = {e: c for e, c in coeffs.items() if c}
        self.chart = chart
        self.coeffs = coeffs
        self.prec = prec

    # -- structure ----------------------------------------------------
    def is_zero(self) -> bool:
        """No nonzero stored coefficient (identically zero to available order)."""
        return not self.coeffs

    def is_exact(self) -> bool:
        return self.prec is None

    @property
    def laurent_offset(self) -> int:
        if not self.coeffs:
            return 0
        return max(0, -min(self.coeffs))

    def vanishing_order(self):
        """Smallest exponent with nonzero coefficient, or None (>= prec)."""
        if not self.coeffs:
            return None
        return min(self.coeffs)

    def _van_bound(self) -> int:
        """Certified lower bound on the vanishing order."""
        if self.coeffs:
            return min(self.coeffs)
        if self.prec is not None:
            return self.prec
        return self.chart.prec_cap  # exact zero: treated as very high order

    def coeff(self, e: int) -> Coeff:
        return self.coeffs.get(e, self.chart.field.zero)

    def __bool__(self):
        return bool(self.coeffs)

    def same_series(self, other: "ScalarExpr") -> bool:
        """Equal stored coefficients up to the common precision."""
        return (self - other).is_zero()

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, ScalarExpr):
            return other
        if isinstance(other, Coeff):
            return self.chart.from_coeff(other)
        if isinstance(other, (int, Fraction)):
            return self.chart.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e)
            out[e] = c if s is None else s + c
        return ScalarExpr(self.chart, out, _min_prec(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr(self.chart, {e: -c for e, c in self.coeffs.items()}, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.__add__(other.__neg__())

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other.__add__(self.__neg__())

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not self.coeffs:
            if self.prec is None:
                return self
            return ScalarExpr(self.chart, {}, self.prec + other._van_bound())
        if not other.coeffs:
            if other.prec is None:
                return other
            return ScalarExpr(self.chart, {}, other.prec + self._van_bound())
        prec = None
        if self.prec is not None:
            prec = self.prec + min(other.coeffs)
        if other.prec is not None:
            p2 = other.prec + min(self.coeffs)
            prec = p2 if prec is None else min(prec, p2)
        # exact products are still truncated at the chart budget once the
        # r-degree overruns it; this keeps long pipelines from exploding
        if prec is None:
            cap = self.chart.prec_cap
            if max(self.coeffs) + max(other.coeffs) >= cap:
                prec = cap
        out = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = ea + eb
                if prec is not None and e >= prec:
                    continue
                p = ca * cb
                if p:
                    s = out.get(e)
                    out[e] = p if s is None else s + p
        return ScalarExpr(self.chart, out, prec)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.invert() ** (-n)
        result = self.chart.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def invert(self) -> "ScalarExpr":
        """Series inverse; divisors vanishing at r=0 produce a Laurent offset."""
        if not self.coeffs:
            raise ZeroDivisionError("inverting (truncated) zero expression")
        v = min(self.coeffs)
        u0 = self.coeffs[v]
        u0i = u0.invert()
        if len(self.coeffs) == 1:
            return ScalarExpr(self.chart, {-v: u0i},
                              None if self.prec is None else self.prec - 2 * v)
        # targeted precision of the inverse of the unit part
        cap = self.chart.prec_cap
        pu = cap if self.prec is None else self.prec - v
        pu = min(pu, cap)
        # w = 1 - unit/u0 has vanishing order >= 1
        w = {}
        for e, c in self.coeffs.items():
            if e == v:
                continue
            w[e - v] = -(c * u0i)
        inv_unit = {0: self.chart.field.one}
        term = dict(w)
        guard = 0
        while term and guard <= pu:
            for e, c in term.items():
                s = inv_unit.get(e)
                inv_unit[e] = c if s is None else s + c
            nxt = {}
            for ea, ca in term.items():
                for eb, cb in w.items():
                    e = ea + eb
                    if e >= pu:
                        continue
                    p = ca * cb
                    if p:
                        s = nxt.get(e)
                        nxt[e] = p if s is None else s + p
            term = nxt
            guard += 1
        out = {e - v: c * u0i for e, c in inv_unit.items()}
        return ScalarExpr(self.chart, out, pu - v)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.__mul__(other.invert())

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other.__mul__(self.invert())

    def sqrt(self) -> "ScalarExpr":
        """Exact series square root; the lowest coefficient must be a square."""
        if not self.coeffs:
            if self.prec is None:
                return self
            raise BudgetExhausted("square root of truncated zero")
        v = min(self.coeffs)
        if v % 2:
            raise ArithmeticError("odd vanishing order has no series square root")
        u0 = self.coeffs[v]
        root0 = u0.sqrt()
        if len(self.coeffs) == 1:
            return ScalarExpr(self.chart, {v // 2: root0},
                              None if self.prec is None else self.prec - v // 2)
        cap = self.chart.prec_cap
        pu = cap if self.prec is None else self.prec - v
        pu = min(pu, cap)
        u0i = u0.invert()
        w = {}
        for e, c in self.coeffs.items():
            if e == v:
                continue
            w[e - v] = c * u0i
        # binomial series for sqrt(1 + w)
        out = {0: self.chart.field.one}
        term = {0: self.chart.field.one}
        binom = Fraction(1)
        k = 0
        power = dict(w)
        while power and k < pu:
            binom *= Fraction(1, 2) - k
            k += 1
            binom /= k
            for e, c in power.items():
                p = c * binom
                if p:
                    s = out.get(e)
                    out[e] = p if s is None else s + p
            nxt = {}
            for ea, ca in power.items():
                for eb, cb in w.items():
                    e = ea + eb
                    if e >= pu:
                        continue
                    p = ca * cb
                    if p:
                        s = nxt.get(e)
                        nxt[e] = p if s is None else s + p
            power = nxt
        del term
        res = {e + v // 2: c * root0 for e, c in out.items()}
        return ScalarExpr(self.chart, res, pu + v // 2)

    # -- calculus -----------------------------------------------------
    def derive(self, name: str) -> "ScalarExpr":
        chart = self.chart
        if name == chart.radial:
            if self.prec is not None and self.prec <= 0:
                raise BudgetExhausted("no truncation budget left for d/dr")
            out = {}
            for e, c in self.coeffs.items():
                if e != 0:
                    out[e - 1] = c * e
            return ScalarExpr(chart, out, None if self.prec is None else self.prec - 1)
        if name not in chart.coords:
            raise KeyError(f"unknown coordinate {name!r}")
        return ScalarExpr(chart, {e: c.diff(name) for e, c in self.coeffs.items()}, self.prec)

    def restrict_boundary(self):
        """The r^0 coefficient, as a scalar on the boundary chart."""
        chart = self.chart
        if chart.radial is None:
            return self
        neg = [e for e in self.coeffs if e < 0]
        if neg:
            raise RestrictionError(
                f"negative-power residue at exponents {sorted(neg)}; restriction undefined")
        if self.prec is not None and self.prec <= 0:
            raise BudgetExhausted("no certified r^0 coefficient")
        return ScalarExpr(chart.boundary(), {0: self.coeff(0)} if self.coeff(0) else {}, None)

    def boundary_coeff(self) -> Coeff:
        """restrict_boundary as a raw field element."""
        r = self.restrict_boundary()
        return r.coeff(0)

    def shift(self, k: int) -> "ScalarExpr":
        """Multiply by r^k exactly."""
        return ScalarExpr(self.chart, {e + k: c for e, c in self.coeffs.items()},
                          None if self.prec is None else self.prec + k)

    def truncate(self, p: int) -> "ScalarExpr":
        """Forget coefficients at exponents >= p."""
        return ScalarExpr(self.chart, self.coeffs, _min_prec(self.prec, p))

    def series_coefficient(self, e: int) -> Coeff:
        """Certified coefficient of r^e; raises if e is beyond the budget."""
        if self.prec is not None and e >= self.prec:
            raise BudgetExhausted(f"coefficient of r^{e} not certified (prec {self.prec})")
        return self.coeff(e)

    def evaluate_boundary(self, point: dict) -> Fraction:
        """Evaluate the r^0 coefficient at a rational boundary point."""
        return self.boundary_coeff().evaluate(point) if self.coeff(0) else Fraction(0)

    # -- printing -----------------------------------------------------
    def __str__(self):
        if not self.coeffs:
            return "0"
        r = self.chart.radial or "r"
        parts = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            if e == 0:
                parts.append(str(c))
            elif e > 0:
                parts.append(f"{c}*{r}^{e}" if e > 1 else f"{c}*{r}")
            else:
                parts.append(f"{c}/{r}^{-e}" if e < -1 else f"{c}/{r}")
        return " + ".join(parts)

    __repr__ = __str__
