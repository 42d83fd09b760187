"""Exact scalar coefficients: the field Q(x1..xm) of rational functions.

Elements are fractions num / prod(f_i^e_i) over sparse multivariate
polynomials with rational coefficients.  Denominators are kept factored
over a per-field registry of monic atoms, so addition and multiplication
never need polynomial gcds; reduction is exact trial division by the
atoms.  Zero-testing is therefore decidable by representation (num == 0),
and printing canonicalizes to a fully reduced monic-denominator fraction.
"""

from __future__ import annotations

from fractions import Fraction
import math

from sympy import QQ
from sympy.polys.monomials import monomial_div as _monomial_div
from sympy.polys.rings import ring as _sym_ring


class CoeffError(ArithmeticError):
    pass


def exact_quo(p, f):
    """p / f when f divides p exactly, else None.

    Leading-term long division against a single divisor aborts at the first
    non-divisible leading monomial, so failed attempts cost one comparison
    instead of a full division.
    """
    ring = p.ring
    if f == ring.one:
        return p
    flm, flc = f.LT
    qterms = {}
    rem = p
    while rem:
        rlm, rlc = rem.LT
        m = _monomial_div(rlm, flm)
        if m is None:
            return None
        c = rlc / flc
        qterms[m] = c
        rem = rem - f * ring.from_dict({m: c})
    return ring.from_dict(qterms)


class NotASquareError(CoeffError):
    pass


def _fraction_sqrt(c) -> Fraction:
    num, den = int(c.numerator), int(c.denominator)
    if num < 0:
        raise NotASquareError(f"negative rational {c} has no square root")
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise NotASquareError(f"{c} is not the square of a rational")
    return Fraction(rn, rd)


def poly_sqrt(p):
    """Exact square root of a perfect-square polynomial (leading-term peeling)."""
    if not p:
        return p
    ring = p.ring
    lm, lc = p.LM, p.LC
    if any(e % 2 for e in lm):
        raise NotASquareError(f"odd leading exponents in {p}")
    rc = _fraction_sqrt(lc)
    h = ring.from_dict({tuple(e // 2 for e in lm): QQ(rc.numerator, rc.denominator)})
    rem = p - h * h
    while rem:
        lt_m, lt_c = rem.LT
        den_m, den_c = (h * 2).LT
        exps = tuple(a - b for a, b in zip(lt_m, den_m))
        if any(e < 0 for e in exps):
            raise NotASquareError(f"{p} is not a perfect square")
        t = ring.from_dict({exps: lt_c / den_c})
        h2 = h + t
        rem2 = p - h2 * h2
        if rem2 and rem2.LM >= rem.LM:
            raise NotASquareError(f"{p} is not a perfect square")
        h, rem = h2, rem2
    if h.LC < 0:
        h = -h
    return h


class CoeffField:
    """Q(names) with a shared registry of denominator atoms."""

    def __init__(self, names):
        names = tuple(names)
        if not names:
            raise ValueError("coefficient field needs at least one variable")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names: {names}")
        self.names = names
        self.ring, *gens = _sym_ring(" ".join(names), QQ)
        self.gens = {n: g for n, g in zip(names, gens)}
        self.pone = self.ring.one
        self.pzero = self.ring.zero
        self.zero = Coeff(self, self.pzero, ())
        self.one = Coeff(self, self.pone, ())
        self._atoms = []          # registered monic non-constant factors
        self._atom_index = {}     # poly -> index
        self._pow_cache = {}      # (atom index, exp) -> poly
        self._prod_cache = {}     # den tuple -> poly

    def __repr__(self):
        return f"CoeffField({', '.join(self.names)})"

    # -- constructors ---------------------------------------------------
    def from_int(self, n: int) -> "Coeff":
        if n == 0:
            return self.zero
        return Coeff(self, self.ring(QQ(n)), ())

    def from_fraction(self, q) -> "Coeff":
        q = Fraction(q)
        if q == 0:
            return self.zero
        return Coeff(self, self.ring(QQ(q.numerator, q.denominator)), ())

    def from_poly(self, p) -> "Coeff":
        return Coeff(self, p, ()) if p else self.zero

    def gen(self, name: str) -> "Coeff":
        return Coeff(self, self.gens[name], ())

    # -- denominator machinery --------------------------------------------
    def _register_atom(self, p) -> int:
        idx = self._atom_index.get(p)
        if idx is None:
            idx = len(self._atoms)
            self._atoms.append(p)
            self._atom_index[p] = idx
        return idx

    def atom_pow(self, idx: int, e: int):
        if e == 0:
            return self.pone
        if e == 1:
            return self._atoms[idx]
        key = (idx, e)
        p = self._pow_cache.get(key)
        if p is None:
            p = self._atoms[idx] ** e
            self._pow_cache[key] = p
        return p

    def den_poly(self, den: tuple):
        """The denominator as one polynomial."""
        if not den:
            return self.pone
        p = self._prod_cache.get(den)
        if p is None:
            p = self.pone
            for idx, e in den:
                p = p * self.atom_pow(idx, e)
            self._prod_cache[den] = p
        return p

    def factorize_into_atoms(self, p):
        """Split p into (rational constant, den-tuple) over known atoms plus
        a possibly new atom for the remainder."""
        lc = p.LC
        if lc != 1:
            p = p.quo_ground(lc)
        parts = {}
        if p != self.pone:
            # peel off already-registered atoms (early-abort trial division)
            changed = True
            while changed and p != self.pone:
                changed = False
                for idx, atom in enumerate(self._atoms):
                    if atom.LM > p.LM:
                        continue
                    q = exact_quo(p, atom)
                    while q is not None:
                        parts[idx] = parts.get(idx, 0) + 1
                        p = q
                        changed = True
                        if p == self.pone:
                            break
                        q = exact_quo(p, atom)
                    if p == self.pone:
                        break
            if p != self.pone:
                idx = self._register_atom(p)
                parts[idx] = parts.get(idx, 0) + 1
        return lc, tuple(sorted(parts.items()))

    def make(self, num, den_poly) -> "Coeff":
        """num / den_poly with the denominator split into atoms."""
        if not num:
            return self.zero
        if not den_poly:
            raise ZeroDivisionError("zero denominator")
        if den_poly == self.pone:
            return Coeff(self, num, ())
        lc, den = self.factorize_into_atoms(den_poly)
        if lc != 1:
            num = num.quo_ground(lc)
        return _reduced(self, num, den)

    def atoms_get(self, idx: int):
        return self._atoms[idx]


def _merge_dens(da: tuple, db: tuple) -> tuple:
    if not da:
        return db
    if not db:
        return da
    out = dict(da)
    for k, e in db:
        out[k] = out.get(k, 0) + e
    return tuple(sorted(out.items()))


def _reduced(field: CoeffField, num, den: tuple) -> "Coeff":
    """Cancel atoms that exactly divide the numerator."""
    if not num:
        return field.zero
    if not den or num.is_ground:
        return Coeff(field, num, den)
    out = []
    for idx, e in den:
        atom = field.atoms_get(idx)
        while e > 0:
            if atom.LM > num.LM:
                break
            q = exact_quo(num, atom)
            if q is None or not q:
                break
            num, e = q, e - 1
            if num.is_ground:
                break
        if e > 0:
            out.append((idx, e))
        if num.is_ground:
            # constants cannot contain further atoms; keep the rest as-is
            for j, ee in den:
                if j > idx:
                    out.append((j, ee))
            break
    return Coeff(field, num, tuple(out))


class Coeff:
    """One element of Q(x1..xm): num over a factored denominator."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field, num, den: tuple):
        self.field = field
        self.num = num
        self.den = den

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return not self.den and self.num == self.field.pone

    def is_polynomial(self) -> bool:
        return not self.den

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field.from_int(other)
        if not isinstance(other, Coeff):
            return NotImplemented
        if self.num == other.num and self.den == other.den:
            return True
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.num, self.den))

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Coeff):
            return other
        if isinstance(other, int):
            return self.field.from_int(other)
        if isinstance(other, Fraction):
            return self.field.from_fraction(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        f = self.field
        if not self.num:
            return other
        if not other.num:
            return self
        da, db = self.den, other.den
        if da == db:
            num = self.num + other.num
            if not num:
                return f.zero
            return _reduced(f, num, da) if da else Coeff(f, num, ())
        lcm = {}
        for k, e in da:
            lcm[k] = e
        for k, e in db:
            lcm[k] = max(lcm.get(k, 0), e)
        ma = f.pone
        mb = f.pone
        for k, e in lcm.items():
            ea = dict(da).get(k, 0)
            eb = dict(db).get(k, 0)
            if e > ea:
                ma = ma * f.atom_pow(k, e - ea)
            if e > eb:
                mb = mb * f.atom_pow(k, e - eb)
        num = self.num * ma + other.num * mb
        if not num:
            return f.zero
        return _reduced(f, num, tuple(sorted(lcm.items())))

    __radd__ = __add__

    def __neg__(self):
        if not self.num:
            return self
        return Coeff(self.field, -self.num, self.den)

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
        f = self.field
        if not self.num or not other.num:
            return f.zero
        num = self.num * other.num
        if not self.den and not other.den:
            return Coeff(f, num, ())
        return _reduced(f, num, _merge_dens(self.den, other.den))

    __rmul__ = __mul__

    def invert(self) -> "Coeff":
        if not self.num:
            raise ZeroDivisionError("inverting zero coefficient")
        f = self.field
        num = f.den_poly(self.den)
        if self.num.is_ground:
            c = self.num.LC
            return Coeff(f, num.mul_ground(QQ(1) / c), ())
        lc, den = f.factorize_into_atoms(self.num)
        if lc != 1:
            num = num.mul_ground(QQ(1) / lc)
        return _reduced(f, num, den)

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

    def __pow__(self, n: int):
        if n == 0:
            return self.field.one
        if n < 0:
            return self.invert() ** (-n)
        den = tuple((k, e * n) for k, e in self.den)
        return Coeff(self.field, self.num ** n, den)

    # -- calculus -----------------------------------------------------
    def diff(self, name: str) -> "Coeff":
        f = self.field
        x = f.gens[name]
        if not self.den:
            return f.from_poly(self.num.diff(x))
        # d(num/prod f^e) = [num' prod f - num sum e_i f_i' prod_{j!=i} f_j] / prod f^{e+1}
        fprod = f.pone
        for k, _ in self.den:
            fprod = fprod * f.atoms_get(k)
        term = self.num.diff(x) * fprod
        for k, e in self.den:
            dfk = f.atoms_get(k).diff(x)
            if not dfk:
                continue
            rest = f.pone
            for j, _ in self.den:
                if j != k:
                    rest = rest * f.atoms_get(j)
            term = term - self.num.mul_ground(QQ(e)) * dfk * rest
        if not term:
            return f.zero
        den = tuple((k, e + 1) for k, e in self.den)
        return _reduced(f, term, den)

    def evaluate(self, point: dict) -> Fraction:
        subs = [(self.field.gens[n], QQ(Fraction(v).numerator, Fraction(v).denominator))
                for n, v in point.items()]
        nv = self.num.LC if self.num.is_ground else self.num.evaluate(subs)
        dv = QQ(1)
        for k, e in self.den:
            fv = self.field.atoms_get(k).evaluate(subs)
            if fv == 0:
                raise ZeroDivisionError("denominator vanishes at evaluation point")
            dv *= fv ** e
        q = QQ(nv) / dv
        return Fraction(int(q.numerator), int(q.denominator))

    def sqrt(self) -> "Coeff":
        f = self.field
        num = poly_sqrt(self.num)
        half: tuple = ()
        for k, e in self.den:
            if e % 2 == 0:
                half = _merge_dens(half, ((k, e // 2),))
            else:
                # odd power: the atom itself must be a perfect square
                root = poly_sqrt(f.atoms_get(k))
                _, parts = f.factorize_into_atoms(root)
                scaled = tuple((j, m * e) for j, m in parts)
                half = _merge_dens(half, scaled)
        return Coeff(f, num, half)

    def as_fraction(self) -> Fraction:
        if self.den or self.num.degree() > 0:
            raise CoeffError(f"{self} is not a constant")
        if not self.num:
            return Fraction(0)
        n = self.num.LC
        return Fraction(int(n.numerator), int(n.denominator))

    def canonical(self):
        """(num, den) as a fully reduced pair with monic denominator."""
        f = self.field
        num = self.num
        den = f.den_poly(self.den)
        if den != f.pone:
            g = num.gcd(den)
            if g != f.pone:
                num, den = num.quo(g), den.quo(g)
            lc = den.LC
            if lc != 1:
                num, den = num.quo_ground(lc), den.quo_ground(lc)
        return num, den

    # -- printing -----------------------------------------------------
    def _poly_str(self, p) -> str:
        if not p:
            return "0"
        parts = []
        for mono, c in p.terms():
            factors = []
            cf = Fraction(int(c.numerator), int(c.denominator))
            for name, e in zip(self.field.names, mono):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            if not factors:
                factors.append(_frac_str(cf))
            elif cf != 1:
                factors.insert(0, _frac_str(cf))
            parts.append("*".join(factors))
        return " + ".join(f"({t})" for t in parts)

    def __str__(self):
        num, den = self.canonical()
        ns = self._poly_str(num)
        if den == self.field.pone:
            return f"({ns})"
        return f"(({ns})/({self._poly_str(den)}))"

    __repr__ = __str__


def _frac_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    if q.numerator < 0:
        return f"-{-q.numerator}/{q.denominator}"
    return f"{q.numerator}/{q.denominator}"
