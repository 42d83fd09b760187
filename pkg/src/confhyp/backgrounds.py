"""Sample geometries shared by the command line tasks and the test suite.

Random boundary metrics are built unimodular ((I+U)^T (I+U) with strictly
triangular polynomial U) so that their inverses stay polynomial and the
expansion solver runs entirely in the polynomial ring; free Neumann
coefficients on curved boundaries are produced transverse-trace-free by an
exact nullspace solve over a polynomial ansatz.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .expr import Chart, ScalarExpr
from .fg import FGExpansion, fg_expand
from .hypersurface import HypersurfaceData, build_hypersurface
from .linalg import nullspace, solve_homogeneous_sample
from .parser import parse_expr
from .tensor import MetricData, TensorField


def boundary_chart(n: int, order: int = 8, prefix="x") -> Chart:
    return Chart(tuple(f"{prefix}{i}" for i in range(1, n + 1)), radial=None, order=order)


def flat_boundary(n: int, order: int = 8) -> MetricData:
    ch = boundary_chart(n, order)
    one = ch.one()
    return MetricData(TensorField(ch, "dd", {(i, i): one for i in range(n)}))


def flat_bulk(d: int, order: int = 6) -> MetricData:
    ch = Chart(("r",) + tuple(f"x{i}" for i in range(1, d)), radial="r", order=order)
    one = ch.one()
    return MetricData(TensorField(ch, "dd", {(a, a): one for a in range(d)}))


# -- Poincare ball -------------------------------------------------------------

def poincare_ball_flat_chart(d: int, order: int = 6):
    """Flat metric with s = (1 - |x|^2)/2 in a chart whose first coordinate
    plays the series role; bulk identities only (the zero locus of s is not
    a coordinate surface here)."""
    gm = flat_bulk(d, order)
    ch = gm.chart
    terms = " - ".join(f"{c}^2" for c in ch.coords)
    s = parse_expr(f"(1 - {terms})/2", ch)
    return gm, s


def poincare_ball_inversion_chart(d: int, order: int = 6):
    """Rational adapted chart for the ball: g = du^2 + (1-u)^2 h(y) with h
    the stereographic round metric; s = u(2-u)/2 defines the boundary sphere."""
    ch = Chart(("u",) + tuple(f"y{i}" for i in range(1, d)), radial="u", order=order)
    one = ch.one()
    u = ch.coord("u")
    norm = " + ".join(f"y{i}^2" for i in range(1, d))
    conf = parse_expr(f"4/((1 + {norm})^2)", ch)
    fac = (one - u) * (one - u)
    comps = {(0, 0): one}
    for i in range(1, d):
        comps[(i, i)] = fac * conf
    gm = MetricData(TensorField(ch, "dd", comps))
    s = u * (ch.const(2) - u) * Fraction(1, 2)
    return gm, s


# -- random boundary data --------------------------------------------------------

def unimodular_boundary(n: int, seed: int, order: int = 8, degree: int = 2,
                        entries: int = 2, scale=Fraction(1, 3)) -> MetricData:
    """Curved polynomial boundary metric with determinant one."""
    ch = boundary_chart(n, order)
    rng = random.Random(seed)
    one = ch.one()
    uc = {}
    for _ in range(entries):
        i = rng.randrange(n - 1)
        j = rng.randrange(i + 1, n)
        m = ch.const(Fraction(rng.randint(1, 2)) * scale * rng.choice((1, -1)))
        for _ in range(rng.randint(1, degree)):
            m = m * ch.coord(rng.choice(ch.coords))
        uc[(i, j)] = uc.get((i, j), ch.zero()) + m
    a = {(i, i): one for i in range(n)}
    for (i, j), e in uc.items():
        a[(i, j)] = a.get((i, j), ch.zero()) + e
    # g = A^T A (unimodular since A is unitriangular)
    comps = {}
    for i in range(n):
        for j in range(i, n):
            acc = None
            for k in range(n):
                aki = a.get((k, i))
                akj = a.get((k, j))
                if aki is None or akj is None:
                    continue
                p = aki * akj
                acc = p if acc is None else acc + p
            if acc is not None and acc.coeffs:
                comps[(i, j)] = acc
                if i != j:
                    comps[(j, i)] = acc
    return MetricData(TensorField(ch, "dd", comps))


def conformally_flat_boundary(n: int, seed: int, order: int = 8) -> MetricData:
    """omega^2 delta with a sparse linear omega."""
    ch = boundary_chart(n, order)
    rng = random.Random(seed)
    om = ch.one() + ch.coord(rng.choice(ch.coords)) * Fraction(1, rng.randint(2, 4))
    om2 = om * om
    return MetricData(TensorField(ch, "dd", {(i, i): om2 for i in range(n)}))


def constant_tt_tensor(gbar: MetricData, seed: int) -> TensorField:
    """Constant symmetric trace-free tensor (TT for a flat boundary metric)."""
    ch = gbar.chart
    n = ch.dim
    rng = random.Random(seed)
    comps = {}
    diag = [Fraction(rng.randint(-3, 3)) for _ in range(n)]
    diag[-1] = -sum(diag[:-1])
    for i in range(n):
        if diag[i]:
            comps[(i, i)] = ch.const(diag[i])
    for _ in range(2):
        i = rng.randrange(n - 1)
        j = rng.randrange(i + 1, n)
        v = Fraction(rng.randint(1, 3), rng.randint(1, 2)) * rng.choice((1, -1))
        comps[(i, j)] = ch.const(v)
        comps[(j, i)] = comps[(i, j)]
    t = TensorField(ch, "dd", comps)
    if t.is_zero():
        return constant_tt_tensor(gbar, seed + 17)
    return t


def tt_tensor(gbar: MetricData, seed: int, degree: int = 1) -> TensorField:
    """Random symmetric, trace-free, divergence-free tensor on (Sigma, gbar),
    from an exact nullspace solve over a polynomial ansatz."""
    from .curvature import CurvatureBundle
    ch = gbar.chart
    n = ch.dim
    rng = random.Random(seed)
    monos = _monomials(ch, degree)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    unknowns = [(p, m) for p in pairs for m in range(len(monos))]

    def build(vec):
        comps = {}
        for ((i, j), mi), c in zip(unknowns, vec):
            if c == 0:
                continue
            term = monos[mi] * c
            comps[(i, j)] = comps.get((i, j), ch.zero()) + term
            if i != j:
                comps[(j, i)] = comps.get((j, i), ch.zero()) + term
        return TensorField(ch, "dd", comps)

    bundle = CurvatureBundle(gbar)
    rows = []

    def add_constraint_rows(target_fn):
        # evaluate the linear map on unit vectors; expand exactly in monomials
        cols = []
        for uidx in range(len(unknowns)):
            vec = [Fraction(0)] * len(unknowns)
            vec[uidx] = Fraction(1)
            expanded = {}
            for idx, e in target_fn(build(vec)).comps.items():
                c = e.coeff(0)
                if c.den:
                    raise ValueError("ansatz produced a non-polynomial constraint")
                for mono, cc in c.num.terms():
                    expanded[(idx, mono)] = Fraction(int(cc.numerator), int(cc.denominator))
            cols.append(expanded)
        keys = sorted(set().union(*[set(c) for c in cols])) if cols else []
        for key in keys:
            rows.append([col.get(key, Fraction(0)) for col in cols])

    def trace_map(t):
        tr = t.contract(0, 1, gbar)
        e = tr.comps.get(())
        return TensorField(ch, "", {(): e} if e is not None else {})

    def div_map(t):
        dt = bundle.cov_deriv(t)
        return dt.contract(0, 1, gbar)

    add_constraint_rows(trace_map)
    add_constraint_rows(div_map)
    basis = nullspace(rows, len(unknowns))
    # prefer sparse solutions: they keep the expansion coefficients small
    basis.sort(key=lambda v: sum(1 for c in v if c != 0))
    for vec in basis:
        t = build(vec)
        if not t.is_zero():
            return t
    for _ in range(40):
        vec = solve_homogeneous_sample(rows, len(unknowns), rng)
        t = build(vec)
        if not t.is_zero():
            return t
    raise ValueError("no nonzero transverse-trace-free tensor in the ansatz")


def _monomials(ch: Chart, degree: int):
    out = [ch.one()]
    if degree >= 1:
        out.extend(ch.coord(c) for c in ch.coords)
    if degree >= 2:
        coords = list(ch.coords)
        for i, ci in enumerate(coords):
            for cj in coords[i:]:
                out.append(ch.coord(ci) * ch.coord(cj))
    return out


# -- assembled backgrounds ---------------------------------------------------------

class Background:
    """An expansion background with its hypersurface data."""

    def __init__(self, exp: FGExpansion, hyp: HypersurfaceData, free: TensorField):
        self.exp = exp
        self.hyp = hyp
        self.free = free

    @property
    def metric(self) -> MetricData:
        return self.exp.metric

    @property
    def s(self) -> ScalarExpr:
        return self.exp.chart.coord(self.exp.chart.radial)


def fg_background(d: int, order: int, gbar: MetricData = None, seed: int = 0,
                  free: TensorField = None, with_free=True) -> Background:
    """Solve the expansion and wrap it with hypersurface data.

    Default data: flat boundary with a constant trace-free free coefficient
    (transverse-trace-free automatically), which keeps all series
    coefficients rational constants.
    """
    if gbar is None:
        gbar = flat_boundary(d - 1, order=order)
    if free is None and with_free:
        free = constant_tt_tensor(gbar, seed)
    exp = fg_expand(gbar, d, order, free_coeff=free)
    hyp = build_hypersurface(exp.metric, exp.chart.coord("r"))
    return Background(exp, hyp, free)
