"""Index-aware tensor fields over exact scalar expressions.

Components are stored sparsely (zero components omitted); a tensor-level
precision bound keeps zero-tests honest when truncated-zero components
are dropped.  Valence is a string of 'u'/'d' per slot.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product

from .expr import Chart, ScalarExpr, _min_prec


class ValenceError(ValueError):
    pass


class SymmetryError(ValueError):
    pass


class TensorField:
    __slots__ = ("chart", "valence", "comps", "weight", "prec")

    def __init__(self, chart: Chart, valence: str, comps: dict, weight=0, prec=None):
        self.chart = chart
        self.valence = valence
        self.weight = Fraction(weight)
        cleaned = {}
        for idx, e in comps.items():
            if e.coeffs:
                cleaned[idx] = e
            else:
                prec = _min_prec(prec, e.prec)
        self.comps = cleaned
        self.prec = prec

    # -- basics ---------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.valence)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def get(self, idx) -> ScalarExpr:
        e = self.comps.get(tuple(idx))
        if e is None:
            return ScalarExpr(self.chart, {}, self.prec)
        return e

    def is_zero(self) -> bool:
        return not self.comps

    def zero_order(self):
        """Certified order to which the tensor vanishes (None = exact)."""
        if self.comps:
            raise ValueError("tensor is not zero")
        return self.prec

    def with_weight(self, w) -> "TensorField":
        t = TensorField(self.chart, self.valence, self.comps, w, self.prec)
        return t

    def map_components(self, fn) -> "TensorField":
        return TensorField(self.chart, self.valence,
                           {i: fn(e) for i, e in self.comps.items()},
                           self.weight, self.prec)

    def __repr__(self):
        return (f"TensorField({self.valence or 'scalar'}, {len(self.comps)} "
                f"nonzero of {self.dim ** self.rank}, w={self.weight})")

    # -- linear structure -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TensorField):
            return NotImplemented
        if other.valence != self.valence:
            raise ValenceError(f"valence mismatch {self.valence} vs {other.valence}")
        out = dict(self.comps)
        for i, e in other.comps.items():
            s = out.get(i)
            out[i] = e if s is None else s + e
        return TensorField(self.chart, self.valence, out, self.weight,
                           _min_prec(self.prec, other.prec))

    def __neg__(self):
        return self.map_components(lambda e: -e)

    def __sub__(self, other):
        if not isinstance(other, TensorField):
            return NotImplemented
        return self.__add__(other.__neg__())

    def scale(self, s) -> "TensorField":
        """Multiply every component by a scalar (ScalarExpr, Coeff, int, Fraction)."""
        if isinstance(s, (int, Fraction)):
            if s == 0:
                return TensorField(self.chart, self.valence, {}, self.weight, self.prec)
            return self.map_components(lambda e: e * s)
        out = {i: e * s for i, e in self.comps.items()}
        return TensorField(self.chart, self.valence, out, self.weight, self.prec)

    def __mul__(self, s):
        return self.scale(s)

    __rmul__ = __mul__

    def __truediv__(self, s):
        if isinstance(s, int):
            return self.scale(Fraction(1, s))
        return self.scale(s.invert() if isinstance(s, ScalarExpr) else 1 / s)

    # -- multilinear algebra ----------------------------------------------
    def outer(self, other: "TensorField") -> "TensorField":
        out = {}
        for ia, ea in self.comps.items():
            for ib, eb in other.comps.items():
                p = ea * eb
                if p.coeffs:
                    out[ia + ib] = p
        return TensorField(self.chart, self.valence + other.valence, out,
                           self.weight + other.weight, _min_prec(self.prec, other.prec))

    def permute(self, perm) -> "TensorField":
        """Slot permutation: new slot j carries old slot perm[j]."""
        perm = tuple(perm)
        val = "".join(self.valence[p] for p in perm)
        out = {}
        for idx, e in self.comps.items():
            out[tuple(idx[p] for p in perm)] = e
        return TensorField(self.chart, val, out, self.weight, self.prec)

    def contract(self, i: int, j: int, metric=None) -> "TensorField":
        """Contract slots i and j (Kronecker for opposite valence, else metric)."""
        if i == j:
            raise ValenceError("contraction slots must be distinct")
        if not (0 <= i < self.rank and 0 <= j < self.rank):
            raise ValenceError("contraction slot out of range")
        i, j = min(i, j), max(i, j)
        vi, vj = self.valence[i], self.valence[j]
        val = "".join(v for k, v in enumerate(self.valence) if k not in (i, j))
        out = {}
        prec = self.prec
        if vi != vj:
            for idx, e in self.comps.items():
                if idx[i] != idx[j]:
                    continue
                key = tuple(x for k, x in enumerate(idx) if k not in (i, j))
                s = out.get(key)
                out[key] = e if s is None else s + e
        else:
            if metric is None:
                raise ValenceError("same-valence contraction needs a metric")
            pair = metric.inv if vi == "d" else metric.g
            prec = _min_prec(prec, pair.prec)
            for idx, e in self.comps.items():
                a, b = idx[i], idx[j]
                key = tuple(x for k, x in enumerate(idx) if k not in (i, j))
                gab = pair.get((a, b))
                if not gab.coeffs:
                    continue
                p = e * gab
                if p.coeffs:
                    s = out.get(key)
                    out[key] = p if s is None else s + p
        return TensorField(self.chart, val, out, self.weight, prec)

    def contract_with(self, vec: "TensorField", slot: int) -> "TensorField":
        """Contract one slot against a rank-1 tensor of opposite valence."""
        if vec.rank != 1 or vec.valence[0] == self.valence[slot]:
            raise ValenceError("need a rank-1 tensor of opposite valence")
        val = self.valence[:slot] + self.valence[slot + 1:]
        out = {}
        for idx, e in self.comps.items():
            v = vec.comps.get((idx[slot],))
            if v is None:
                continue
            p = e * v
            if p.coeffs:
                key = idx[:slot] + idx[slot + 1:]
                s = out.get(key)
                out[key] = p if s is None else s + p
        return TensorField(self.chart, val, out, self.weight,
                           _min_prec(self.prec, vec.prec))

    def raise_lower(self, slot: int, metric) -> "TensorField":
        """Flip the valence of one slot with the metric or its inverse."""
        if not 0 <= slot < self.rank:
            raise ValenceError("slot out of range")
        down = self.valence[slot] == "u"
        pair = metric.g if down else metric.inv
        val = self.valence[:slot] + ("d" if down else "u") + self.valence[slot + 1:]
        out = {}
        for idx, e in self.comps.items():
            a = idx[slot]
            for b in range(self.dim):
                gab = pair.get((a, b))
                if not gab.coeffs:
                    continue
                p = e * gab
                if p.coeffs:
                    key = idx[:slot] + (b,) + idx[slot + 1:]
                    s = out.get(key)
                    out[key] = p if s is None else s + p
        return TensorField(self.chart, val, out, self.weight,
                           _min_prec(self.prec, pair.prec))

    def symmetrize(self, slots) -> "TensorField":
        return self._sym(slots, anti=False)

    def antisymmetrize(self, slots) -> "TensorField":
        return self._sym(slots, anti=True)

    def _sym(self, slots, anti: bool) -> "TensorField":
        slots = tuple(slots)
        if len({self.valence[s] for s in slots}) > 1:
            raise ValenceError("cannot (anti)symmetrize mixed-valence slots")
        k = len(slots)
        norm = Fraction(1, 1)
        for m in range(2, k + 1):
            norm /= m
        out = {}
        for perm in permutations(range(k)):
            sign = 1
            if anti:
                sign = _perm_sign(perm)
            for idx, e in self.comps.items():
                lst = list(idx)
                vals = [idx[slots[p]] for p in perm]
                for pos, s in enumerate(slots):
                    lst[s] = vals[pos]
                key = tuple(lst)
                term = e * (norm * sign)
                cur = out.get(key)
                out[key] = term if cur is None else cur + term
        return TensorField(self.chart, self.valence, out, self.weight, self.prec)

    def partial_deriv(self) -> "TensorField":
        """Coordinate derivative, new down slot first."""
        out = {}
        prec = self.prec
        for idx, e in self.comps.items():
            for a, name in enumerate(self.chart.coords):
                de = e.derive(name)
                if de.coeffs:
                    out[(a,) + idx] = de
                prec = _min_prec(prec, de.prec)
        return TensorField(self.chart, "d" + self.valence, out, self.weight, prec)

    # -- verification -----------------------------------------------------
    def check_symmetry(self, slots, anti=False):
        """Verify a declared (anti)symmetry componentwise; raises if violated."""
        sym = self._sym(slots, anti)
        if not (self - sym).is_zero():
            kind = "antisymmetry" if anti else "symmetry"
            raise SymmetryError(f"declared {kind} on slots {slots} does not hold")

    # -- restriction --------------------------------------------------------
    def restrict_tangential(self) -> "TensorField":
        """Tangential block at r=0, as a tensor on the boundary chart."""
        from .expr import BudgetExhausted
        if self.prec is not None and self.prec <= 0:
            raise BudgetExhausted("tensor has no certified r^0 part")
        bchart = self.chart.boundary()
        out = {}
        for idx, e in self.comps.items():
            if 0 in idx:
                continue
            r = e.restrict_boundary()
            if r.coeffs:
                out[tuple(a - 1 for a in idx)] = r
        return TensorField(bchart, self.valence, out, self.weight, None)

    def restrict_sigma(self) -> "TensorField":
        """Restriction to {r=0}, kept in the bulk chart as r-independent scalars."""
        from .expr import BudgetExhausted
        if self.prec is not None and self.prec <= 0:
            raise BudgetExhausted("tensor has no certified r^0 part")
        out = {}
        for idx, e in self.comps.items():
            c = e.restrict_boundary().coeff(0)
            if c:
                out[idx] = ScalarExpr(self.chart, {0: c}, None)
        return TensorField(self.chart, self.valence, out, self.weight, None)

    def min_vanishing_order(self):
        """Smallest vanishing order over components; None if all vanish."""
        orders = [e.vanishing_order() for e in self.comps.values()]
        orders = [v for v in orders if v is not None]
        return min(orders) if orders else None


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def tensor_zero(chart: Chart, valence: str, weight=0, prec=None) -> TensorField:
    return TensorField(chart, valence, {}, weight, prec)


def tensor_from_function(chart: Chart, valence: str, fn, weight=0) -> TensorField:
    d = chart.dim
    comps = {}
    for idx in product(range(d), repeat=len(valence)):
        e = fn(*idx)
        if e is not None and e.coeffs:
            comps[idx] = e
    return TensorField(chart, valence, comps, weight)


def kronecker(chart: Chart) -> TensorField:
    one = chart.one()
    return TensorField(chart, "ud", {(a, a): one for a in range(chart.dim)})


class MetricData:
    """Metric components plus cached exact inverse."""

    __slots__ = ("chart", "g", "inv")

    def __init__(self, g: TensorField, inv: TensorField = None):
        if g.valence != "dd":
            raise ValenceError("metric must have valence dd")
        g.check_symmetry((0, 1))
        self.chart = g.chart
        self.g = g
        self.inv = inv if inv is not None else _series_matrix_inverse(g)

    @property
    def dim(self):
        return self.chart.dim

    def rescale(self, factor: ScalarExpr) -> "MetricData":
        """Conformally related metric factor*g with inverse tracked exactly."""
        inv_factor = factor.invert()
        return MetricData(self.g.scale(factor), self.inv.scale(inv_factor))

    def norm_sq(self, t: TensorField) -> ScalarExpr:
        """|T|^2: contract every slot of T against a copy of itself."""
        out = t.outer(t)
        k = t.rank
        for s in range(k):
            # after each contraction the remaining slots shift down
            out = out.contract(0, k - s, self)
        comps = out.comps
        return comps.get((), ScalarExpr(self.chart, {}, out.prec))


def _series_matrix_inverse(g: TensorField) -> TensorField:
    """Exact inverse of a series metric whose r^0 block is invertible."""
    chart = g.chart
    d = chart.dim
    field = chart.field
    if any(e < 0 for idx, comp in g.comps.items() for e in comp.coeffs):
        raise ValenceError("matrix inverse needs nonnegative powers; use rescale")
    # r^0 block inverse by exact Gauss-Jordan over the coefficient field
    m0 = [[g.get((a, b)).coeff(0) for b in range(d)] for a in range(d)]
    inv0 = _field_matrix_inverse(m0, field)
    x = TensorField(chart, "uu",
                    {(a, b): chart.from_coeff(inv0[a][b])
                     for a in range(d) for b in range(d) if inv0[a][b]})
    # Neumann series: inv = (sum N^k) X with N = I - X g = O(r)
    n_field = {}
    for a in range(d):
        for b in range(d):
            acc = chart.one() if a == b else chart.zero()
            for c in range(d):
                xac = x.get((a, c))
                gcb = g.get((c, b))
                if xac.coeffs and gcb.coeffs:
                    acc = acc - xac * gcb
            if acc.coeffs or acc.prec is not None:
                n_field[(a, b)] = acc
    cap = chart.prec_cap if g.prec is None else min(g.prec, chart.prec_cap)
    total = {(a, b): x.get((a, b)) for a in range(d) for b in range(d)}
    term = {(a, b): x.get((a, b)) for a in range(d) for b in range(d)}
    for _ in range(cap + 1):
        nxt = {}
        nonzero = False
        for a in range(d):
            for b in range(d):
                acc = None
                for c in range(d):
                    nac = n_field.get((a, c))
                    if nac is None or not nac.coeffs:
                        continue
                    tcb = term[(c, b)]
                    if not tcb.coeffs:
                        continue
                    p = nac * tcb
                    acc = p if acc is None else acc + p
                if acc is None:
                    acc = ScalarExpr(chart, {}, cap)
                if acc.coeffs:
                    nonzero = True
                nxt[(a, b)] = acc
        term = nxt
        for key, e in term.items():
            total[key] = total[key] + e
        if not nonzero:
            break
    comps = {k: e for k, e in total.items() if e.coeffs}
    prec = _min_prec(g.prec, cap) if any(n.coeffs for n in n_field.values() if n) else g.prec
    inv = TensorField(chart, "uu", comps, 0, prec)
    return inv


def _field_matrix_inverse(m, field):
    d = len(m)
    aug = [[m[i][j] for j in range(d)] + [field.one if i == j else field.zero
                                          for j in range(d)] for i in range(d)]
    for col in range(d):
        piv = None
        for row in range(col, d):
            if aug[row][col]:
                piv = row
                break
        if piv is None:
            raise ZeroDivisionError("metric r^0 block is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col].invert()
        aug[col] = [c * p for c in aug[col]]
        for row in range(d):
            if row == col or not aug[row][col]:
                continue
            f = aug[row][col]
            aug[row] = [a - f * b for a, b in zip(aug[row], aug[col])]
    return [[aug[i][d + j] for j in range(d)] for i in range(d)]
