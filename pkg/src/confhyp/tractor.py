"""Tractor calculus in a chosen scale.

A rank-k tractor of weight w is stored through its scale-dependent
splitting: every tractor slot ranges over 0 (top), 1..d (middle, carrying
a coordinate one-form index), d+1 (bottom).  All tractor slots are kept in
section form and contracted with the tractor metric pairing

    h(S, T) = top.bot' + bot.top' + g^{ab} mid_a mid'_b,

which is scale-invariant.  Mixed objects may carry additional tensor
slots ('u'/'d') alongside tractor slots ('T').
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .curvature import CurvatureBundle
from .expr import ScalarExpr, _min_prec
from .tensor import MetricData, TensorField


class TractorError(ValueError):
    pass


class TractorField:
    """Mixed tensor-tractor field in a fixed scale."""

    __slots__ = ("scale", "slots", "comps", "weight", "prec")

    def __init__(self, scale: MetricData, slots, comps: dict, weight: int, prec=None):
        self.scale = scale
        self.slots = tuple(slots)
        self.weight = weight
        cleaned = {}
        for idx, e in comps.items():
            if e.coeffs:
                cleaned[idx] = e
            else:
                prec = _min_prec(prec, e.prec)
        self.comps = cleaned
        self.prec = prec

    @property
    def chart(self):
        return self.scale.chart

    @property
    def dim(self):
        return self.scale.chart.dim

    def slot_range(self, s: int) -> int:
        return self.dim + 2 if self.slots[s] == "T" else self.dim

    def get(self, idx) -> ScalarExpr:
        e = self.comps.get(tuple(idx))
        if e is None:
            return ScalarExpr(self.chart, {}, self.prec)
        return e

    def is_zero(self) -> bool:
        return not self.comps

    def __add__(self, other):
        if self.slots != other.slots or self.weight != other.weight:
            raise TractorError("slot/weight mismatch in tractor sum")
        out = dict(self.comps)
        for i, e in other.comps.items():
            s = out.get(i)
            out[i] = e if s is None else s + e
        return TractorField(self.scale, self.slots, out, self.weight,
                            _min_prec(self.prec, other.prec))

    def __neg__(self):
        return TractorField(self.scale, self.slots,
                            {i: -e for i, e in self.comps.items()}, self.weight, self.prec)

    def __sub__(self, other):
        return self.__add__(other.__neg__())

    def scale_by(self, s) -> "TractorField":
        if isinstance(s, (int, Fraction)) and s == 0:
            return TractorField(self.scale, self.slots, {}, self.weight, self.prec)
        return TractorField(self.scale, self.slots,
                            {i: e * s for i, e in self.comps.items()}, self.weight, self.prec)

    def map_components(self, fn) -> "TractorField":
        return TractorField(self.scale, self.slots,
                            {i: fn(e) for i, e in self.comps.items()}, self.weight, self.prec)

    def restrict_sigma(self) -> "TractorField":
        from .expr import BudgetExhausted
        if self.prec is not None and self.prec <= 0:
            raise BudgetExhausted("tractor has no certified r^0 part")
        out = {}
        for idx, e in self.comps.items():
            c = e.restrict_boundary().coeff(0)
            if c:
                out[idx] = ScalarExpr(self.chart, {0: c}, None)
        return TractorField(self.scale, self.slots, out, self.weight, None)

    def min_vanishing_order(self):
        orders = [e.vanishing_order() for e in self.comps.values()]
        orders = [v for v in orders if v is not None]
        return min(orders) if orders else None

    def __repr__(self):
        return (f"TractorField(slots={''.join(self.slots)}, w={self.weight}, "
                f"{len(self.comps)} nonzero)")


class TractorCalculus:
    """Tractor operations over one metric scale (curvature data cached)."""

    def __init__(self, metric: MetricData):
        self.metric = metric
        self.chart = metric.chart
        self.bundle = CurvatureBundle(metric)

    @property
    def dim(self):
        return self.chart.dim

    # -- basic sections -----------------------------------------------------
    def canonical_x(self) -> TractorField:
        """X = (0, 0, 1), weight 1."""
        d = self.dim
        return TractorField(self.metric, ("T",), {(d + 1,): self.chart.one()}, 1)

    def from_triple(self, top: ScalarExpr, mid: TensorField, bot: ScalarExpr,
                    weight: int) -> TractorField:
        d = self.dim
        comps = {}
        if top.coeffs:
            comps[(0,)] = top
        for (a,), e in mid.comps.items():
            comps[(a + 1,)] = e
        if bot.coeffs:
            comps[(d + 1,)] = bot
        prec = _min_prec(_min_prec(top.prec, mid.prec), bot.prec)
        return TractorField(self.metric, ("T",), comps, weight, prec)

    def triple(self, t: TractorField):
        """(top, mid-as-one-form, bot) of a rank-1 tractor."""
        d = self.dim
        mid = {}
        for idx, e in t.comps.items():
            if 1 <= idx[0] <= d:
                mid[(idx[0] - 1,)] = e
        return (t.get((0,)),
                TensorField(self.chart, "d", mid, 0, t.prec),
                t.get((d + 1,)))

    def z_injection(self, omega: TensorField) -> TractorField:
        """Z^A_a omega^a: a one-form into the middle slot (weight from omega)."""
        if omega.valence == "u":
            omega = omega.raise_lower(0, self.metric)
        comps = {(a + 1,): e for (a,), e in omega.comps.items()}
        return TractorField(self.metric, ("T",), comps, 1 + int(omega.weight), omega.prec)

    def scale_tractor(self, s: ScalarExpr) -> TractorField:
        """I = D-hat applied to the weight-1 density s: (s, ds, -(Delta s + J s)/d)."""
        chart = self.chart
        ds = {}
        for a, name in enumerate(chart.coords):
            e = s.derive(name)
            if e.coeffs:
                ds[(a,)] = e
        mid = TensorField(chart, "d", ds, 0, None if s.prec is None else s.prec - 1)
        lap = self.bundle.laplacian(_scalar_tensor(chart, s))
        lap_e = lap.comps.get((), ScalarExpr(chart, {}, lap.prec))
        bot = -(lap_e + self.bundle.schouten_trace * s) * Fraction(1, self.dim)
        return self.from_triple(s, mid, bot, 0)

    def normal_tractor(self, hyp) -> TractorField:
        """N = (0, nhat, -H) along the hypersurface (extended canonically)."""
        return self.from_triple(self.chart.zero(), hyp.nhat,
                                -hyp.mean_curvature, 0)

    # -- pairing ------------------------------------------------------------
    def pair(self, a: TractorField, b: TractorField, sa: int = 0, sb: int = 0) -> TractorField:
        """Contract tractor slot sa of a with slot sb of b via the tractor metric."""
        if a.slots[sa] != "T" or b.slots[sb] != "T":
            raise TractorError("pairing needs tractor slots")
        d = self.dim
        inv = self.metric.inv
        out = {}
        prec = _min_prec(a.prec, b.prec)
        for ia, ea in a.comps.items():
            va = ia[sa]
            ka = ia[:sa] + ia[sa + 1:]
            for ib, eb in b.comps.items():
                vb = ib[sb]
                kb = ib[:sb] + ib[sb + 1:]
                if va == 0 and vb == d + 1:
                    p = ea * eb
                elif va == d + 1 and vb == 0:
                    p = ea * eb
                elif 1 <= va <= d and 1 <= vb <= d:
                    gab = inv.get((va - 1, vb - 1))
                    if not gab.coeffs:
                        continue
                    p = ea * eb * gab
                else:
                    continue
                if p.coeffs:
                    key = ka + kb
                    s = out.get(key)
                    out[key] = p if s is None else s + p
        slots = tuple(a.slots[:sa] + a.slots[sa + 1:] + b.slots[:sb] + b.slots[sb + 1:])
        return TractorField(self.metric, slots, out, a.weight + b.weight, prec)

    def pair_inside(self, t: TractorField, si: int, sj: int) -> TractorField:
        """Contract two tractor slots of the same field via the tractor metric."""
        if t.slots[si] != "T" or t.slots[sj] != "T":
            raise TractorError("pairing needs tractor slots")
        si, sj = min(si, sj), max(si, sj)
        d = self.dim
        inv = self.metric.inv
        out = {}
        for idx, e in t.comps.items():
            vi, vj = idx[si], idx[sj]
            key = tuple(x for k, x in enumerate(idx) if k not in (si, sj))
            if (vi == 0 and vj == d + 1) or (vi == d + 1 and vj == 0):
                p = e
            elif 1 <= vi <= d and 1 <= vj <= d:
                gab = inv.get((vi - 1, vj - 1))
                if not gab.coeffs:
                    continue
                p = e * gab
            else:
                continue
            if p.coeffs:
                s = out.get(key)
                out[key] = p if s is None else s + p
        slots = tuple(x for k, x in enumerate(t.slots) if k not in (si, sj))
        return TractorField(self.metric, slots, out, t.weight, _min_prec(t.prec, inv.prec))

    def norm_sq(self, t: TractorField) -> ScalarExpr:
        out = self.pair(t, t)
        return out.comps.get((), ScalarExpr(self.chart, {}, out.prec))

    def contract_form_slot(self, t: TractorField, slot: int, vec: TensorField) -> TractorField:
        """Contract a 'd' slot with an upper vector (e.g. nhat^a)."""
        if t.slots[slot] != "d" or vec.valence != "u":
            raise TractorError("need a down slot and an upper vector")
        out = {}
        for idx, e in t.comps.items():
            v = vec.comps.get((idx[slot],))
            if v is None:
                continue
            p = e * v
            if p.coeffs:
                key = idx[:slot] + idx[slot + 1:]
                s = out.get(key)
                out[key] = p if s is None else s + p
        slots = t.slots[:slot] + t.slots[slot + 1:]
        return TractorField(self.metric, slots, out, t.weight,
                            _min_prec(t.prec, vec.prec))

    # -- connection ----------------------------------------------------------
    def cov_deriv(self, t: TractorField) -> TractorField:
        """Tractor-and-Levi-Civita coupled derivative; new 'd' slot first."""
        chart = self.chart
        d = self.dim
        gamma = self.bundle.christoffel
        p_low = self.bundle.schouten
        g = self.metric.g
        inv = self.metric.inv
        out = {}

        def accum(key, val, sign=1):
            if not val.coeffs:
                return
            s = out.get(key)
            term = val if sign > 0 else -val
            out[key] = term if s is None else s + term

        # plain derivative
        for idx, e in t.comps.items():
            for a, name in enumerate(chart.coords):
                de = e.derive(name)
                accum((a,) + idx, de)
        # Levi-Civita terms per slot
        for (c, a, b), gam in gamma.comps.items():
            for slot, v in enumerate(t.slots):
                if v == "d":
                    for idx, comp in t.comps.items():
                        if idx[slot] != c:
                            continue
                        accum((a,) + idx[:slot] + (b,) + idx[slot + 1:], gam * comp, -1)
                elif v == "u":
                    for idx, comp in t.comps.items():
                        if idx[slot] != b:
                            continue
                        accum((a,) + idx[:slot] + (c,) + idx[slot + 1:], gam * comp, +1)
                else:  # middle block of a tractor slot carries a one-form index
                    for idx, comp in t.comps.items():
                        if idx[slot] != c + 1:
                            continue
                        accum((a,) + idx[:slot] + (b + 1,) + idx[slot + 1:], gam * comp, -1)
        # tractor coupling per tractor slot
        pinv = {}
        for a in range(d):
            for c in range(d):
                acc = None
                for e in range(d):
                    pe = p_low.comps.get((a, e))
                    ge = inv.get((e, c))
                    if pe is not None and ge.coeffs:
                        v = pe * ge
                        acc = v if acc is None else acc + v
                if acc is not None and acc.coeffs:
                    pinv[(a, c)] = acc
        for slot, v in enumerate(t.slots):
            if v != "T":
                continue
            for idx, comp in t.comps.items():
                val = idx[slot]
                if 1 <= val <= d:
                    # top slot receives -mu_a
                    a = val - 1
                    accum((a,) + idx[:slot] + (0,) + idx[slot + 1:], comp, -1)
                    # bottom slot receives -P_a^c mu_c
                    for aa in range(d):
                        pac = pinv.get((aa, val - 1))
                        if pac is not None:
                            accum((aa,) + idx[:slot] + (d + 1,) + idx[slot + 1:],
                                  pac * comp, -1)
                elif val == 0:
                    # middle slot receives P_ab tau
                    for (aa, bb), pe in p_low.comps.items():
                        accum((aa,) + idx[:slot] + (bb + 1,) + idx[slot + 1:],
                              pe * comp, +1)
                else:  # bottom
                    # middle slot receives g_ab rho
                    for (aa, bb), ge in g.comps.items():
                        accum((aa,) + idx[:slot] + (bb + 1,) + idx[slot + 1:],
                              ge * comp, +1)
        tprec = None if t.prec is None else t.prec - 1
        prec = _min_prec(tprec, _min_prec(gamma.prec, t.prec))
        return TractorField(self.metric, ("d",) + t.slots, out, t.weight, prec)

    def laplacian(self, t: TractorField) -> TractorField:
        dd = self.cov_deriv(self.cov_deriv(t))
        d = self.dim
        inv = self.metric.inv
        out = {}
        for idx, e in dd.comps.items():
            gab = inv.get((idx[0], idx[1]))
            if not gab.coeffs:
                continue
            p = e * gab
            if p.coeffs:
                key = idx[2:]
                s = out.get(key)
                out[key] = p if s is None else s + p
        return TractorField(self.metric, dd.slots[2:], out, t.weight,
                            _min_prec(dd.prec, inv.prec))

    # -- Thomas-D -------------------------------------------------------------
    def thomas_d(self, t: TractorField, normalized=False) -> TractorField:
        """D T = (w(d+2w-2) T, (d+2w-2) grad T, -(Delta + wJ) T), weight w-1."""
        d = self.dim
        w = t.weight
        m = d + 2 * w - 2
        if normalized and m == 0:
            raise TractorError(f"normalized Thomas-D undefined at weight {w}")
        grad = self.cov_deriv(t)
        lap = self.laplacian(t)
        jj = self.bundle.schouten_trace
        out = {}
        for idx, e in t.comps.items():
            v = e * (w * m)
            if v.coeffs:
                out[(0,) + idx] = v
        for idx, e in grad.comps.items():
            v = e * m
            if v.coeffs:
                out[(idx[0] + 1,) + idx[1:]] = v
        bot = lap + t.map_components(lambda e: e * (jj * w))
        for idx, e in bot.comps.items():
            if e.coeffs:
                out[(d + 1,) + idx] = -e
        res = TractorField(self.metric, ("T",) + t.slots, out, w - 1,
                           _min_prec(grad.prec, lap.prec))
        if normalized:
            res = res.scale_by(Fraction(1, m))
        return res

    # -- scale transformation ---------------------------------------------------
    def change_scale(self, t: TractorField, omega: ScalarExpr,
                     new_metric: MetricData = None) -> TractorField:
        """Components of t in the scale Omega^2 g.

        Tractor slots mix by (tau, mu + Ups tau, rho - Ups.mu - Ups^2 tau/2)
        and every component block is re-trivialized with the power of Omega
        carried by its density weight.
        """
        chart = self.chart
        d = self.dim
        if new_metric is None:
            new_metric = self.metric.rescale(omega * omega)
        ups = {}
        inv_om = omega.invert()
        for a, name in enumerate(chart.coords):
            e = omega.derive(name) * inv_om
            if e.coeffs:
                ups[a] = e
        inv = self.metric.inv
        ups_up = {}
        for c in range(d):
            acc = None
            for a, e in ups.items():
                gac = inv.get((a, c))
                if gac.coeffs:
                    v = e * gac
                    acc = v if acc is None else acc + v
            if acc is not None and acc.coeffs:
                ups_up[c] = acc
        ups_sq = None
        for a, e in ups.items():
            u = ups_up.get(a)
            if u is not None:
                v = e * u
                ups_sq = v if ups_sq is None else ups_sq + v
        if ups_sq is None:
            ups_sq = chart.zero()

        cur = t
        for slot, v in enumerate(t.slots):
            if v == "T":
                cur = self._mix_slot(cur, slot, ups, ups_up, ups_sq)
        # density re-trivialization per component block
        powers = {}
        out = {}
        for idx, e in cur.comps.items():
            wtot = t.weight
            for slot, v in enumerate(t.slots):
                if v != "T":
                    continue
                val = idx[slot]
                wtot += -1 if val == d + 1 else 1
            key = wtot
            if key not in powers:
                powers[key] = omega ** key if key >= 0 else inv_om ** (-key)
            p = e * powers[key]
            if p.coeffs:
                out[idx] = p
        return TractorField(new_metric, t.slots, out, t.weight, cur.prec)

    def _mix_slot(self, t: TractorField, slot: int, ups, ups_up, ups_sq) -> TractorField:
        d = self.dim
        out = {}

        def accum(key, val):
            if not val.coeffs:
                return
            s = out.get(key)
            out[key] = val if s is None else s + val

        half = Fraction(1, 2)
        for idx, e in t.comps.items():
            val = idx[slot]
            accum(idx, e)  # identity part
            if val == 0:
                # tau feeds mu + Ups tau and rho - Ups^2 tau/2
                for a, u in ups.items():
                    accum(idx[:slot] + (a + 1,) + idx[slot + 1:], e * u)
                accum(idx[:slot] + (d + 1,) + idx[slot + 1:], -(e * ups_sq * half))
            elif 1 <= val <= d:
                # mu feeds rho - Ups.mu
                u = ups_up.get(val - 1)
                if u is not None:
                    accum(idx[:slot] + (d + 1,) + idx[slot + 1:], -(e * u))
        return TractorField(t.scale, t.slots, out, t.weight, t.prec)

    # -- curvature -----------------------------------------------------------
    def w_tractor(self) -> TractorField:
        """The displayed Weyl/Cotton/Bach packaging, weight -2 (d >= 5)."""
        d = self.dim
        if d < 5:
            raise TractorError("W-tractor normalization needs d >= 5")
        bundle = self.bundle
        w = bundle.weyl
        c = bundle.cotton
        b = bundle.bach
        out = {}

        def put(key, val, sign=1):
            if not val.coeffs:
                return
            s = out.get(key)
            term = val if sign > 0 else -val
            out[key] = term if s is None else s + term

        bot = d + 1
        for (a, bb, cc, dd_), e in w.comps.items():
            put((a + 1, bb + 1, cc + 1, dd_ + 1), e)
        # Cotton blocks sit on both index pairs so that W_ABCD = W_CDAB and
        # Z^A_a Z^B_b W_AB^CD reproduces the tractor curvature exactly
        for (a, bb, cc), e in c.comps.items():
            put((a + 1, bb + 1, cc + 1, bot), e)
            put((a + 1, bb + 1, bot, cc + 1), e, -1)
            put((cc + 1, bot, a + 1, bb + 1), e)
            put((bot, cc + 1, a + 1, bb + 1), e, -1)
        q = Fraction(1, d - 4)
        for (a, cc), e in b.comps.items():
            eq = e * q
            put((a + 1, bot, cc + 1, bot), eq)
            put((a + 1, bot, bot, cc + 1), eq, -1)
            put((bot, a + 1, cc + 1, bot), eq, -1)
            put((bot, a + 1, bot, cc + 1), eq)
        prec = _min_prec(w.prec, _min_prec(c.prec, b.prec))
        return TractorField(self.metric, ("T",) * 4, out, -2, prec)

    def curvature_f(self) -> TractorField:
        """F_ab^{CD} from the displayed Weyl/Cotton blocks; slots (d, d, T, T)."""
        bundle = self.bundle
        w = bundle.weyl
        c = bundle.cotton
        d = self.dim
        bot = d + 1
        out = {}

        def put(key, val, sign=1):
            if not val.coeffs:
                return
            s = out.get(key)
            term = val if sign > 0 else -val
            out[key] = term if s is None else s + term

        for (a, bb, cc, dd_), e in w.comps.items():
            put((a, bb, cc + 1, dd_ + 1), e)
        for (a, bb, cc), e in c.comps.items():
            put((a, bb, cc + 1, bot), e)
            put((a, bb, bot, cc + 1), e, -1)
        return TractorField(self.metric, ("d", "d", "T", "T"), out, 0,
                            _min_prec(w.prec, c.prec))

    def commutator_on(self, v: TractorField) -> TractorField:
        """(grad_a grad_b - grad_b grad_a) v^C for a rank-1 tractor."""
        dd = self.cov_deriv(self.cov_deriv(v))
        swapped = _swap_first_two(dd)
        return dd - swapped

    def apply_f(self, f: TractorField, v: TractorField) -> TractorField:
        """F_ab^C_D v^D: pair the last slot of F with v."""
        return self.pair(f, v, sa=len(f.slots) - 1, sb=0)

    # -- hypersurface operators -------------------------------------------------
    def delta_r(self, t: TractorField, hyp) -> TractorField:
        """Tractor-coupled conformal-Robin operator, restricted to the surface."""
        grad = self.cov_deriv(t)
        dn = self.contract_form_slot(grad, 0, hyp.nhat_up)
        wh = t.map_components(lambda e: e * (hyp.mean_curvature * t.weight))
        out = dn - wh
        res = TractorField(self.metric, t.slots, out.comps, t.weight - 1, out.prec)
        return res.restrict_sigma()

    def delta_k(self, t: TractorField, k: int, s: ScalarExpr) -> TractorField:
        """Normal operators: k Thomas-D's contracted with k scale tractors."""
        if k < 1:
            raise TractorError("delta_k needs k >= 1")
        i_ext = self.scale_tractor(s)
        cur = t
        for _ in range(k):
            cur = self.thomas_d(cur)
        for _ in range(k):
            cur = self.pair(i_ext, cur, sa=0, sb=0)
        return cur.restrict_sigma()

    def tractor_top(self, t: TractorField, n: TractorField) -> TractorField:
        """Project every tractor slot orthogonally to the normal tractor."""
        cur = t
        for slot, v in enumerate(t.slots):
            if v != "T":
                continue
            paired = self.pair(n, cur, sa=0, sb=slot)
            new = dict(cur.comps)
            for pidx, pe in paired.comps.items():
                for nidx, ne in n.comps.items():
                    val = ne * pe
                    if not val.coeffs:
                        continue
                    key = pidx[:slot] + (nidx[0],) + pidx[slot:]
                    cur_v = new.get(key)
                    new[key] = -val if cur_v is None else cur_v - val
            cur = TractorField(self.metric, cur.slots, new, cur.weight,
                               _min_prec(cur.prec, paired.prec))
        return cur

    # -- projecting parts ---------------------------------------------------------
    def q_star_rank4(self, t: TractorField, strict=True) -> TensorField:
        """Extract t_ac from 4 Z^[A X^B] Z^[C X^D] t^{ac} shaped tractors."""
        d = self.dim
        bot = d + 1
        comps = {}
        for (a, b, c, e), val in t.comps.items():
            if 1 <= a <= d and b == bot and 1 <= c <= d and e == bot:
                comps[(a - 1, c - 1)] = val
        extracted = TensorField(self.chart, "dd", comps, t.weight, t.prec)
        if strict:
            self._check_rank4_shape(t, extracted)
        return extracted

    def _check_rank4_shape(self, t: TractorField, extracted: TensorField):
        d = self.dim
        bot = d + 1

        def mid(i):
            return 1 <= i <= d

        for idx, val in t.comps.items():
            a, b, c, e = idx
            if mid(a) and b == bot and mid(c) and e == bot:
                continue
            if a == bot and mid(b) and mid(c) and e == bot:
                expected = -extracted.get((b - 1, c - 1))
            elif mid(a) and b == bot and c == bot and mid(e):
                expected = -extracted.get((a - 1, e - 1))
            elif a == bot and mid(b) and c == bot and mid(e):
                expected = extracted.get((b - 1, e - 1))
            else:
                raise TractorError(f"not of projecting shape: slot {idx} nonzero")
            if not (val - expected).is_zero():
                raise TractorError(f"projecting-shape mismatch at slot {idx}")

    def q_star_rank2(self, t: TractorField, strict=True) -> TensorField:
        """Extract t_b from 2 Z^[A_b X^B] t^b shaped tractors."""
        d = self.dim
        bot = d + 1
        comps = {}
        for (a, b), val in t.comps.items():
            if 1 <= a <= d and b == bot:
                comps[(a - 1,)] = val
        extracted = TensorField(self.chart, "d", comps, t.weight, t.prec)
        if strict:
            for (a, b), val in t.comps.items():
                if 1 <= a <= d and b == bot:
                    continue
                if a == bot and 1 <= b <= d:
                    if not (val + extracted.get((b - 1,))).is_zero():
                        raise TractorError(f"projecting-shape mismatch at {(a, b)}")
                    continue
                raise TractorError(f"not of projecting shape: slot {(a, b)} nonzero")
        return extracted


def _scalar_tensor(chart, e: ScalarExpr) -> TensorField:
    return TensorField(chart, "", {(): e} if e.coeffs else {}, 0, e.prec)


def _swap_first_two(t: TractorField) -> TractorField:
    out = {}
    for idx, e in t.comps.items():
        out[(idx[1], idx[0]) + idx[2:]] = e
    return TractorField(t.scale, (t.slots[1], t.slots[0]) + t.slots[2:], out,
                        t.weight, t.prec)


def _tweak_weight(t: TractorField, w: int) -> TractorField:
    return TractorField(t.scale, t.slots, t.comps, w, t.prec)


class PECheckReport:
    def __init__(self, parallel_order, norm_order, boundary_match, prec):
        self.parallel_order = parallel_order    # None = vanishes to budget
        self.norm_order = norm_order
        self.boundary_match = boundary_match    # None = not checked, else bool
        self.prec = prec

    @property
    def is_pe(self) -> bool:
        return self.parallel_order is None and self.norm_order is None


def pe_check(metric: MetricData, s: ScalarExpr, check_boundary=True) -> PECheckReport:
    """Residuals of grad^T I = 0 and h(I, I) = 1 for the scale tractor of s,
    plus I|_Sigma = (0, nhat, -H) when s is an adapted defining function."""
    calc = TractorCalculus(metric)
    i_tr = calc.scale_tractor(s)
    par = calc.cov_deriv(i_tr)
    nrm = calc.norm_sq(i_tr) - metric.chart.one()
    par_order = par.min_vanishing_order()
    nrm_order = nrm.vanishing_order()
    prec = par.prec
    boundary_match = None
    if check_boundary:
        from .hypersurface import DefiningFunctionError, build_hypersurface
        try:
            hyp = build_hypersurface(metric, s)
        except (DefiningFunctionError, ArithmeticError):
            hyp = None
        if hyp is not None:
            n_tr = calc.normal_tractor(hyp)
            diff = i_tr.restrict_sigma() - n_tr.restrict_sigma()
            boundary_match = diff.is_zero()
    return PECheckReport(par_order, nrm_order, boundary_match, prec)
