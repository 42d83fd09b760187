"""Order-by-order solution of the Einstein condition in geodesic normal form.

The compactified metric ansatz is g_r = dr^2 + sum_k g^(k) r^k with g^(0)
the chosen boundary metric, and the singular metric g° = r^-2 g_r must
satisfy Ric(g°) + (d-1) g° = 0 (trace-free Ricci zero at scalar curvature
-d(d-1)).  Each unknown coefficient enters the order-r^(k-2) tangential
equation through a pointwise indicial operator alpha(k) U + beta(k) gbar tr U;
the indicial constants are probed exactly on the flat model once per (d, k).
At the critical order k = d-1 the trace-free block of the operator is
singular: the trace part is still determined and the trace-free part is the
free (Neumann) coefficient.
"""

from __future__ import annotations

from fractions import Fraction

from .curvature import CurvatureBundle, trace_free_ricci
from .expr import Chart, ScalarExpr
from .tensor import MetricData, TensorField


class ObstructionError(ArithmeticError):
    """The order-by-order system is inconsistent at some order."""

    def __init__(self, order, message):
        super().__init__(message)
        self.order = order


class FGExpansion:
    """Solved expansion data: coefficients, assembled metric, residual log."""

    def __init__(self, chart, d, gbar, coefficients, free_order, metric, log):
        self.chart = chart
        self.d = d
        self.gbar = gbar                     # boundary-chart MetricData
        self.coefficients = coefficients     # k -> boundary-chart TensorField
        self.free_order = free_order
        self.metric = metric                 # assembled bulk MetricData
        self.log = log

    def coefficient(self, k: int) -> TensorField:
        bchart = self.chart.boundary()
        t = self.coefficients.get(k)
        if t is None:
            return TensorField(bchart, "dd", {})
        return t

    def lie_coefficient(self, m: int) -> TensorField:
        """(L_{d/dr})^m g_r on the boundary: m! times the m-th coefficient."""
        fact = 1
        for j in range(2, m + 1):
            fact *= j
        return self.coefficient(m).scale(fact)

    def lie_coefficient_covariant(self, m: int) -> TensorField:
        """Same coefficient through m iterated covariant Lie derivatives."""
        bundle = CurvatureBundle(self.metric)
        t = self.metric.g
        for _ in range(m):
            t = _lie_radial(bundle, t)
        return t.restrict_tangential()

    def einstein_residual(self):
        """(order, certified bound) of the trace-free Ricci of g°."""
        from .curvature import ape_order
        return ape_order(self.metric, self.chart.coord(self.chart.radial))


def _lie_radial(bundle: CurvatureBundle, t: TensorField) -> TensorField:
    """Lie derivative of a rank-2 down tensor along d/dr."""
    chart = bundle.chart
    dt = bundle.cov_deriv(t)
    x = TensorField(chart, "u", {(0,): chart.one()})
    out = dt.contract_with(x, 0)
    gamma = bundle.christoffel
    # (grad_a x^c) = Gamma^c_{a r}
    dx = TensorField(chart, "du",
                     {(a, c): gamma.comps[(c, a, 0)]
                      for c in range(chart.dim) for a in range(chart.dim)
                      if (c, a, 0) in gamma.comps}, 0, gamma.prec)
    t1 = dx.outer(t).contract(1, 2)          # (a, b) <- dx_a^c t_cb
    t2 = dx.outer(t).contract(1, 3)          # dx_b^c t_ac -> slots (b, a)
    return out + t1 + t2.permute((1, 0))


def _lift_boundary_tensor(chart: Chart, t: TensorField) -> dict:
    """Boundary-chart rank-2 components as r-independent bulk scalars."""
    out = {}
    for (i, j), e in t.comps.items():
        out[(i + 1, j + 1)] = ScalarExpr(chart, dict(e.coeffs), None)
    return out


_INDICIAL_CACHE = {}


def _indicial_constants(chart: Chart, k: int):
    """Indicial constants of the order-r^(k-2) equations.

    Tangential block: alpha U + beta gbar tr U; rr block: gamma tr U (per
    unit trace).  gamma backs up the trace solve where alpha + n beta = 0.
    """
    d = chart.dim
    key = (d, k)
    if key in _INDICIAL_CACHE:
        return _INDICIAL_CACHE[key]
    one = chart.one()
    base = {(a, a): one for a in range(d)}

    def probe(ucomps):
        comps = dict(base)
        rk = chart.r_power(k)
        for idx, c in ucomps.items():
            comps[idx] = comps.get(idx, chart.zero()) + rk * c
        g = MetricData(TensorField(chart, "dd",
                                   {i: e.truncate(k + 1) for i, e in comps.items()}))
        return _einstein_expr(g)

    # trace-free probe: diag(+1, -1) in the first two tangential slots
    e1 = probe({(1, 1): one, (2, 2): -one})
    alpha = e1.get((1, 1)).series_coefficient(k - 2).as_fraction()
    if e1.get((0, 0)).series_coefficient(k - 2):
        raise ObstructionError(k, "rr indicial block unexpectedly sees trace-free data")
    # pure-trace probe: tangential identity
    e2 = probe({(i, i): one for i in range(1, d)})
    diag = e2.get((1, 1)).series_coefficient(k - 2).as_fraction()
    beta = Fraction(diag - alpha, d - 1)
    gamma = Fraction(e2.get((0, 0)).series_coefficient(k - 2).as_fraction(), d - 1)
    _INDICIAL_CACHE[key] = (alpha, beta, gamma)
    return alpha, beta, gamma


def _einstein_expr(g: MetricData) -> TensorField:
    """Ric(g°) + (d-1) g° for g° = r^-2 g."""
    chart = g.chart
    r = chart.coord(chart.radial)
    ginf = g.rescale((r * r).invert())
    bundle = CurvatureBundle(ginf)
    return bundle.ricci + ginf.g.scale(chart.dim - 1)


def fg_expand(gbar: MetricData, d: int, order: int, free_coeff: TensorField = None,
              chart: Chart = None) -> FGExpansion:
    """Solve the expansion through r^order on the given boundary metric.

    free_coeff, when given, must be symmetric and gbar-trace-free; it is
    consumed at the critical order d-1.  An inconsistent trace-free block
    anywhere else raises ObstructionError with the obstructed order.
    """
    bchart = gbar.chart
    if chart is None:
        chart = Chart(("r",) + bchart.coords, radial="r",
                      order=max(order + 2, d + 2), field=bchart.field)
        chart._boundary = bchart
    if chart.dim != d:
        raise ValueError(f"chart dimension {chart.dim} != d={d}")
    if order > chart.order:
        raise ValueError("requested order exceeds the chart truncation budget")
    if free_coeff is not None:
        free_coeff.check_symmetry((0, 1))
        tr = free_coeff.contract(0, 1, gbar)
        trv = tr.comps.get(())
        if trv is not None and trv.coeffs:
            raise ObstructionError(d - 1, "free coefficient must be trace-free")

    one = chart.one()
    comps = {(0, 0): one}
    comps.update(_lift_boundary_tensor(chart, gbar.g))
    coefficients = {0: gbar.g}
    log = []
    used_free = False

    for k in range(2, order + 1):
        cur = MetricData(TensorField(
            chart, "dd", {i: e.truncate(k + 1) for i, e in comps.items()}))
        e_tensor = _einstein_expr(cur)
        # the tangential equation at orders below k-2 must already hold
        for (i, j), comp in e_tensor.comps.items():
            if i == 0 or j == 0:
                continue
            v = comp.vanishing_order()
            if v is not None and v < k - 2:
                raise ObstructionError(k, f"unsolved tangential residual at order r^{v}")
        rhs = {}
        for i in range(1, d):
            for j in range(1, d):
                c = e_tensor.get((i, j)).series_coefficient(k - 2)
                if c:
                    rhs[(i - 1, j - 1)] = -c
        rhs_t = TensorField(bchart, "dd", {i: bchart.from_coeff(c) for i, c in rhs.items()})
        alpha, beta, gamma = _indicial_constants(chart, k)
        n = d - 1
        # split the equation alpha U + beta gbar tr U = RHS
        tr_rhs = rhs_t.contract(0, 1, gbar)
        tr_rhs_e = tr_rhs.comps.get((), bchart.zero())
        denom = alpha + n * beta
        if denom != 0:
            tr_u = tr_rhs_e * Fraction(1, denom)
        elif gamma != 0:
            # tangential trace equation singular: use the rr equation
            rr = -e_tensor.get((0, 0)).series_coefficient(k - 2)
            tr_u = bchart.from_coeff(rr) * Fraction(1, gamma)
            if tr_rhs_e.coeffs:
                raise ObstructionError(k, "tangential trace equation inconsistent")
        else:
            if tr_rhs_e.coeffs:
                raise ObstructionError(k, "trace equation inconsistent")
            tr_u = bchart.zero()
        trace_part = gbar.g.scale(tr_u * Fraction(1, n))
        rhs_tf = rhs_t - gbar.g.scale(tr_rhs_e * Fraction(1, n))
        if alpha == 0:
            if not rhs_tf.is_zero():
                raise ObstructionError(
                    k, "trace-free block obstructed (no smooth solution)")
            u_tf = free_coeff if (free_coeff is not None and k == d - 1) else None
            if u_tf is not None:
                used_free = True
            u = trace_part if u_tf is None else u_tf + trace_part
            log.append((k, "critical order: free coefficient "
                        + ("consumed" if u_tf is not None else "absent (zero)")))
        else:
            u = rhs_tf.scale(Fraction(1, alpha)) + trace_part
            log.append((k, f"determined (alpha={alpha}, beta={beta})"))
        if not u.is_zero():
            coefficients[k] = u
            rk = chart.r_power(k)
            for (i, j), e in u.comps.items():
                lifted = ScalarExpr(chart, dict(e.coeffs), None) * rk
                key = (i + 1, j + 1)
                comps[key] = comps.get(key, chart.zero()) + lifted

    if free_coeff is not None and not used_free:
        raise ObstructionError(d - 1, "free coefficient was provided but never consumed")
    metric = MetricData(TensorField(chart, "dd", comps))
    return FGExpansion(chart, d, gbar, coefficients, d - 1, metric, log)
