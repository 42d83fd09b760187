"""Riemannian curvature of an exact series metric.

Conventions: (grad_a grad_b - grad_b grad_a) z^c = R_ab^c_d z^d, all-lower
Riemann lowers the third slot, Ric_ab = R_ca^c_b, Ric = (d-2)P + gJ,
Delta = grad^a grad_a.  The Einstein normalization used throughout is
Sc = -d(d-1).
"""

from __future__ import annotations

from fractions import Fraction

from .expr import ScalarExpr, _min_prec
from .tensor import MetricData, TensorField, ValenceError, tensor_zero


class CurvatureBundle:
    """All curvature data of one metric, computed lazily and cached."""

    def __init__(self, metric: MetricData):
        self.metric = metric
        self.chart = metric.chart
        self._cache = {}
        if self.chart.dim < 3:
            raise ValenceError("curvature needs dimension >= 3")

    @property
    def dim(self):
        return self.chart.dim

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    # -- connection ------------------------------------------------------
    @property
    def christoffel(self) -> TensorField:
        return self._memo("gamma", self._christoffel)

    def _christoffel(self):
        chart = self.chart
        d = chart.dim
        g, inv = self.metric.g, self.metric.inv
        dg = {}
        for (a, b), e in g.comps.items():
            for c, name in enumerate(chart.coords):
                de = e.derive(name)
                if de.coeffs:
                    dg[(c, a, b)] = de
        half = Fraction(1, 2)
        comps = {}
        for a in range(d):
            for b in range(d):
                for c in range(b, d):
                    acc = None
                    for e in range(d):
                        gae = inv.get((a, e))
                        if not gae.coeffs:
                            continue
                        t1 = dg.get((b, e, c))
                        t2 = dg.get((c, b, e))
                        t3 = dg.get((e, b, c))
                        s = None
                        for t, sign in ((t1, 1), (t2, 1), (t3, -1)):
                            if t is None:
                                continue
                            term = t if sign > 0 else -t
                            s = term if s is None else s + term
                        if s is None or not s.coeffs:
                            continue
                        p = gae * s
                        acc = p if acc is None else acc + p
                    if acc is not None and acc.coeffs:
                        val = acc * half
                        comps[(a, b, c)] = val
                        if c != b:
                            comps[(a, c, b)] = val
        # honest precision: one r-derivative of the metric was consumed
        dprec = None if g.prec is None else g.prec - 1
        return TensorField(chart, "udd", comps, 0, _min_prec(dprec, inv.prec))

    # -- curvature tensors -------------------------------------------------
    @property
    def riemann_mixed(self) -> TensorField:
        """R_ab^c_d with valence ddud."""
        return self._memo("riemann_mixed", self._riemann_mixed)

    def _riemann_mixed(self):
        chart = self.chart
        d = chart.dim
        gamma = self.christoffel
        dgamma = {}
        for (c, b, e), comp in gamma.comps.items():
            for a, name in enumerate(chart.coords):
                de = comp.derive(name)
                if de.coeffs:
                    dgamma[(a, c, b, e)] = de
        # gamma-gamma products grouped as (c,e)x(e,b,d)
        comps = {}
        for a in range(d):
            for b in range(a + 1, d):
                for c in range(d):
                    for e in range(d):
                        acc = None
                        t = dgamma.get((a, c, b, e))
                        if t is not None:
                            acc = t
                        t = dgamma.get((b, c, a, e))
                        if t is not None:
                            acc = -t if acc is None else acc - t
                        for f in range(d):
                            g1 = gamma.comps.get((c, a, f))
                            g2 = gamma.comps.get((f, b, e))
                            if g1 is not None and g2 is not None:
                                p = g1 * g2
                                acc = p if acc is None else acc + p
                            g1 = gamma.comps.get((c, b, f))
                            g2 = gamma.comps.get((f, a, e))
                            if g1 is not None and g2 is not None:
                                p = g1 * g2
                                acc = -p if acc is None else acc - p
                        if acc is not None and acc.coeffs:
                            comps[(a, b, c, e)] = acc
                            comps[(b, a, c, e)] = -acc
        gprec = self.metric.g.prec
        prec = None if gprec is None else gprec - 2
        return TensorField(chart, "ddud", comps, 0, _min_prec(prec, self.metric.inv.prec))

    @property
    def riemann(self) -> TensorField:
        """All-lower R_abcd (third slot lowered)."""
        return self._memo("riemann", lambda: self.riemann_mixed.raise_lower(2, self.metric))

    @property
    def ricci(self) -> TensorField:
        return self._memo("ricci", self._ricci)

    def _ricci(self):
        rm = self.riemann_mixed
        d = self.dim
        comps = {}
        for (c1, a, c2, b), e in rm.comps.items():
            if c1 != c2:
                continue
            key = (a, b)
            s = comps.get(key)
            comps[key] = e if s is None else s + e
        return TensorField(self.chart, "dd", comps, 0, rm.prec)

    @property
    def scalar(self) -> ScalarExpr:
        def mk():
            ric = self.ricci
            acc = ScalarExpr(self.chart, {}, ric.prec)
            for (a, b), e in ric.comps.items():
                gab = self.metric.inv.get((a, b))
                if gab.coeffs:
                    acc = acc + e * gab
            return acc
        return self._memo("scalar", mk)

    @property
    def schouten(self) -> TensorField:
        """P with Ric = (d-2)P + gJ."""
        def mk():
            d = self.dim
            if d < 3:
                raise ValenceError("Schouten tensor needs d >= 3")
            jj = self.schouten_trace
            pg = self.metric.g.scale(jj)
            return (self.ricci - pg).scale(Fraction(1, d - 2))
        return self._memo("schouten", mk)

    @property
    def schouten_trace(self) -> ScalarExpr:
        """J = Sc / (2(d-1))."""
        return self._memo("J", lambda: self.scalar * Fraction(1, 2 * (self.dim - 1)))

    @property
    def weyl(self) -> TensorField:
        """W_abcd = R_abcd - g_ac P_bd + g_ad P_bc + g_bc P_ad - g_bd P_ac."""
        return self._memo("weyl", self._weyl)

    def _weyl(self):
        gp = self.metric.g.outer(self.schouten)  # slots (g1, g2, P1, P2)
        # place (g1,g2,P1,P2) onto (a,b,c,d) for each correction term
        terms = [
            (-1, (0, 2, 1, 3)),  # -g_ac P_bd
            (+1, (0, 2, 3, 1)),  # +g_ad P_bc
            (+1, (2, 0, 1, 3)),  # +g_bc P_ad
            (-1, (2, 0, 3, 1)),  # -g_bd P_ac
        ]
        w = self.riemann
        for sign, perm in terms:
            t = gp.permute(perm)
            w = w + t if sign > 0 else w - t
        return w

    @property
    def cotton(self) -> TensorField:
        """C_abc = grad_a P_bc - grad_b P_ac."""
        def mk():
            dp = self.cov_deriv(self.schouten)
            return dp - dp.permute((1, 0, 2))
        return self._memo("cotton", mk)

    @property
    def bach(self) -> TensorField:
        """B_ab = Delta P_ab - grad^c grad_a P_bc + P^cd W_acbd."""
        return self._memo("bach", self._bach)

    def _bach(self):
        ddp = self.cov_deriv(self.cov_deriv(self.schouten))  # (y, x, b, c)
        lap = ddp.contract(0, 1, self.metric)                # Delta P_bc
        t2 = ddp.contract(0, 3, self.metric)                 # grad^c grad_a P_bc -> (a, b)
        p_up = self.schouten.raise_lower(0, self.metric).raise_lower(1, self.metric)
        w = self.weyl
        # P^cd W_acbd -> contract c and d slots of W against P^cd
        pw = p_up.outer(w)                                   # (c, d, a', c', b', d')
        pw = pw.contract(1, 5)                                # d with last
        pw = pw.contract(0, 2)                                # c with c'
        # remaining slots (a, b)
        return lap - t2 + pw

    @property
    def bach_from_weyl(self) -> TensorField:
        """Cross-check form B_bd = ((1/(d-3)) grad^a grad^c + P^ac) W_abcd."""
        def mk():
            d = self.dim
            w = self.weyl
            dw = self.cov_deriv(w)                   # (c1, a, b, c, d)
            u = dw.contract(0, 3, self.metric)       # grad^c W_abcd -> (a, b, d)
            du = self.cov_deriv(u)                   # (c2, a, b, d)
            t = du.contract(0, 1, self.metric)       # grad^a grad^c W -> (b, d)
            p_up = self.schouten.raise_lower(0, self.metric).raise_lower(1, self.metric)
            pw = p_up.outer(w)                        # (a', c', a, b, c, d)
            pw = pw.contract(1, 4)                    # c' with c
            pw = pw.contract(0, 1)                    # a' with a -> (b, d)
            return t.scale(Fraction(1, d - 3)) + pw
        return self._memo("bach_weyl", mk)

    # -- differential operators ---------------------------------------------
    def cov_deriv(self, t: TensorField) -> TensorField:
        """Levi-Civita covariant derivative; new down slot comes first.

        Weight-w densities differentiate as plain tensors in their own
        scale (the scale's volume trivialization is parallel).
        """
        chart = self.chart
        d = chart.dim
        gamma = self.christoffel
        out = {}
        for idx, e in t.comps.items():
            for a, name in enumerate(chart.coords):
                de = e.derive(name)
                if de.coeffs:
                    key = (a,) + idx
                    s = out.get(key)
                    out[key] = de if s is None else s + de
        for (c, a, b), gam in gamma.comps.items():
            # gamma^c_{a b}
            for slot, v in enumerate(t.valence):
                if v == "d":
                    # -Gamma^e_{a i_s} T[..e..]: e=c pairs with stored comp idx[slot]=c
                    for idx, comp in t.comps.items():
                        if idx[slot] != c:
                            continue
                        key = (a,) + idx[:slot] + (b,) + idx[slot + 1:]
                        p = gam * comp
                        if p.coeffs:
                            s = out.get(key)
                            out[key] = -p if s is None else s - p
                else:
                    # +Gamma^{i_s}_{a e} T[..e..]: i_s=c, e=b
                    for idx, comp in t.comps.items():
                        if idx[slot] != b:
                            continue
                        key = (a,) + idx[:slot] + (c,) + idx[slot + 1:]
                        p = gam * comp
                        if p.coeffs:
                            s = out.get(key)
                            out[key] = p if s is None else s + p
        tprec = None if t.prec is None else t.prec - 1
        prec = _min_prec(_min_prec(tprec, gamma.prec), t.prec)
        return TensorField(chart, "d" + t.valence, out, t.weight, prec)

    def laplacian(self, t: TensorField) -> TensorField:
        dd = self.cov_deriv(self.cov_deriv(t))
        return dd.contract(0, 1, self.metric)

    def normal_power(self, t: TensorField, nhat_up: TensorField, order: int) -> TensorField:
        """Normal-ordered powers: all derivatives first, then contract normals."""
        cur = t
        for _ in range(order):
            cur = self.cov_deriv(cur)
        for _ in range(order):
            cur = cur.contract_with(nhat_up, 0)
        return cur


def trace_free_ricci(bundle: CurvatureBundle) -> TensorField:
    ric = bundle.ricci
    sc = bundle.scalar
    return ric - bundle.metric.g.scale(sc * Fraction(1, bundle.dim))


def ape_order(g: MetricData, s: ScalarExpr):
    """Largest k with Ric(g°)_(ab)o = O(s^k) for g° = s^-2 g.

    Returns (k, certified_bound): k None means the residual vanishes to
    the certified bound.  s must be a defining function of {r=0} in an
    adapted chart (s = r * unit).
    """
    chart = g.chart
    svo = s.vanishing_order()
    if svo != 1 or s.restrict_boundary().coeffs:
        raise ValueError("s is not a defining function for {r=0}")
    ginf = g.rescale((s * s).invert())
    bundle = CurvatureBundle(ginf)
    tf = trace_free_ricci(bundle)
    v = tf.min_vanishing_order()
    cap = tf.prec if tf.prec is not None else chart.prec_cap
    if v is not None and v >= cap:
        v = None  # nonzero only beyond the certified order
    return v, cap


def einstein_tensor_residual(g: MetricData, s: ScalarExpr) -> TensorField:
    """Ric(g°) + (d-1) g° for g° = s^-2 g."""
    ginf = g.rescale((s * s).invert())
    bundle = CurvatureBundle(ginf)
    return bundle.ricci + ginf.g.scale(bundle.dim - 1)
