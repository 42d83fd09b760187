"""Conformal rescaling, weight bookkeeping, and transverse-order probes.

Quantities are tested against finite polynomial conformal factors with
nonzero constant term: exact series arithmetic makes the finite check
complete, and several independent samples guard against unlucky factors.
A weight-w quantity must obey q(Omega^2 g, Omega s) = Omega_bar^w q(g, s)
on the surface, with components trivialized in each scale.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .expr import ScalarExpr
from .tensor import MetricData, TensorField


class WeightedQuantity:
    """A named hypersurface quantity builder with declared conformal weight.

    builder(metric, s) must return a boundary-chart TensorField (or a
    boundary scalar wrapped rank-0).
    """

    def __init__(self, name, builder, weight):
        self.name = name
        self.builder = builder
        self.weight = int(weight)

    def __call__(self, metric: MetricData, s: ScalarExpr):
        return self.builder(metric, s)


def rescale_pair(metric: MetricData, s: ScalarExpr, omega: ScalarExpr):
    """(Omega^2 g, Omega s); Omega must not vanish at r^0."""
    r0 = omega.restrict_boundary()
    if not r0.coeffs:
        raise ValueError("conformal factor vanishes at r^0")
    return metric.rescale(omega * omega), omega * s


def dlog(omega: ScalarExpr) -> TensorField:
    """Upsilon_a = (d Omega)_a / Omega, exact."""
    chart = omega.chart
    inv = omega.invert()
    comps = {}
    for a, name in enumerate(chart.coords):
        e = omega.derive(name) * inv
        if e.coeffs:
            comps[(a,)] = e
    return TensorField(chart, "d", comps)


def omega_power(omega_bar: ScalarExpr, w: int) -> ScalarExpr:
    if w >= 0:
        return omega_bar ** w
    return omega_bar.invert() ** (-w)


class InvarianceReport:
    def __init__(self, name, weight):
        self.name = name
        self.weight = weight
        self.conformal_residuals = []     # (label, is_zero, order)
        self.defining_residuals = []

    @property
    def passed(self) -> bool:
        return (all(ok for _, ok, _ in self.conformal_residuals)
                and all(ok for _, ok, _ in self.defining_residuals))

    def rows(self):
        for label, ok, order in self.conformal_residuals + self.defining_residuals:
            yield label, ok, order


def invariance_check(q: WeightedQuantity, metric: MetricData, s: ScalarExpr,
                     omegas, lambdas=()) -> InvarianceReport:
    """Residuals q(Omega^2 g, Omega s) - Omega_bar^w q(g, s) on the boundary,
    plus defining-function independence q(g, lambda s) = q(g, s)."""
    report = InvarianceReport(q.name, q.weight)
    base = q(metric, s)
    for i, omega in enumerate(omegas):
        gm2, s2 = rescale_pair(metric, s, omega)
        other = q(gm2, s2)
        ob = omega.restrict_boundary()
        scaled = base.scale(omega_power(ob, q.weight))
        resid = other - scaled
        ok = resid.is_zero()
        report.conformal_residuals.append(
            (f"omega[{i}]", ok, None if ok else resid.min_vanishing_order()))
    for i, lam in enumerate(lambdas):
        other = q(metric, lam * s)
        resid = other - base
        ok = resid.is_zero()
        report.defining_residuals.append(
            (f"lambda[{i}]", ok, None if ok else resid.min_vanishing_order()))
    return report


# -- random data -----------------------------------------------------------

def random_symmetric_perturbation(chart, rng, degree=1, terms=2, radial_soften=False):
    """Sparse random symmetric rank-2 down tensor with polynomial entries.

    radial_soften multiplies every component touching the radial direction
    by r, keeping the r^0 block in normal form (unit-conormal square roots
    stay rational).
    """
    d = chart.dim
    comps = {}

    def rnd_expr():
        e = chart.const(Fraction(rng.randint(1, 3), rng.randint(1, 3)) * rng.choice((1, -1)))
        for _ in range(rng.randint(0, degree)):
            e = e * chart.coord(rng.choice(chart.coords))
        return e

    pairs = {(a, b) for a in range(d) for b in range(a, d)}
    chosen = rng.sample(sorted(pairs), min(terms + 2, len(pairs)))
    for a, b in chosen:
        e = rnd_expr()
        if radial_soften and (a == 0 or b == 0):
            e = e * chart.coord(chart.radial)
        comps[(a, b)] = comps.get((a, b), chart.zero()) + e
        if a != b:
            comps[(b, a)] = comps[(a, b)]
    t = TensorField(chart, "dd", comps)
    if t.is_zero():
        return random_symmetric_perturbation(chart, rng, degree, terms, radial_soften)
    return t


def random_omega(chart, rng, degree=1):
    """1 + small sparse polynomial, nonvanishing at r^0 by construction."""
    e = chart.one()
    for _ in range(rng.randint(1, 2)):
        m = chart.const(Fraction(rng.randint(1, 2), rng.randint(2, 5)) * rng.choice((1, -1)))
        for _ in range(rng.randint(1, max(1, degree))):
            m = m * chart.coord(rng.choice(chart.coords))
        e = e + m
    if not e.restrict_boundary().coeffs:
        return random_omega(chart, rng, degree)
    return e


def perturbed_metric(metric: MetricData, s: ScalarExpr, k: int, h: TensorField) -> MetricData:
    """g + s^k h, re-rolled by the caller if degenerate at r^0."""
    sk = s ** k if k > 0 else metric.chart.one()
    return MetricData(metric.g + h.scale(sk))


def transverse_order_probe(q: WeightedQuantity, metric: MetricData, s: ScalarExpr,
                           kmax: int, seeds=(0, 1, 2), degree=1, kmin=0):
    """Largest k in [kmin, kmax] with q(g + s^k h, s) != q(g, s) on the surface.

    Checks that all samples above the detected order leave the quantity
    unchanged; several seeds guard against non-generic perturbations.
    """
    base = q(metric, s)
    chart = metric.chart

    def differs(k):
        for seed in seeds:
            rng = random.Random((seed + 1) * 7919 + k)
            for _ in range(4):
                h = random_symmetric_perturbation(chart, rng, degree=degree,
                                                  radial_soften=(k == 0))
                try:
                    gm2 = perturbed_metric(metric, s, k, h)
                except ZeroDivisionError:
                    continue
                if not (q(gm2, s) - base).is_zero():
                    return True
                break
        return False

    order = None
    for k in range(kmin, kmax + 1):
        if differs(k):
            order = k
    if order is not None and order < kmax and differs(order + 1):
        raise ArithmeticError("probe is not stable: sensitivity above detected order")
    return order


# -- curvature linearization checks -----------------------------------------

def riemann_linearization_residual(metric, s, nhat, q: int, h: TensorField):
    """Leading coefficient of R(g + s^q h) - R(g) against the displayed
    -q(q-1)/2 s^(q-2) (nhat nhat h - ...) structure; returns the residual."""
    from .curvature import CurvatureBundle
    base = CurvatureBundle(metric).riemann
    pert = CurvatureBundle(perturbed_metric(metric, s, q, h)).riemann
    diff = pert - base
    coeff_t = _coefficient_tensor(diff, q - 2)
    nn = nhat.outer(nhat)
    nnh = nn.outer(h)  # (n1, n2, h1, h2)
    struct = (nnh.permute((0, 2, 1, 3)) - nnh.permute((2, 0, 1, 3))
              - nnh.permute((0, 2, 3, 1)) + nnh.permute((2, 0, 3, 1)))
    struct = _coefficient_tensor(struct, 0).scale(Fraction(-q * (q - 1), 2))
    return coeff_t - struct


def bach_linearization_residual(metric, s, hyp, ell: int, h: TensorField):
    """B(g+s^ell h) - B(g) leading term against
    -ell(ell-1)(ell-2)(ell-3)/(2(d-2)) s^(ell-4) h_ringtop."""
    from .curvature import CurvatureBundle
    d = metric.chart.dim
    base = CurvatureBundle(metric).bach
    pert = CurvatureBundle(perturbed_metric(metric, s, ell, h)).bach
    diff = pert - base
    coeff_t = _coefficient_tensor(diff, ell - 4)
    hr = hyp.project_ringtop(h)
    struct = _coefficient_tensor(hr, 0).scale(
        Fraction(-ell * (ell - 1) * (ell - 2) * (ell - 3), 2 * (d - 2)))
    return coeff_t - struct


def weyl_linearization_residual(metric, s, hyp, ell: int, h: TensorField):
    """W(g+s^ell h) - W(g) leading term against the displayed
    -ell(ell-1)/(2(d-2)) [(d-3) nhat nhat - gbar] h_ringtop structure."""
    from .curvature import CurvatureBundle
    d = metric.chart.dim
    base = CurvatureBundle(metric).weyl
    pert = CurvatureBundle(perturbed_metric(metric, s, ell, h)).weyl
    diff = pert - base
    coeff_t = _coefficient_tensor(diff, ell - 2)
    nhat = hyp.nhat
    gbar_ext = hyp.projector_dd
    hr = hyp.project_ringtop(h)
    block = nhat.outer(nhat).scale(Fraction(d - 3)) - gbar_ext  # (a, c)-type block
    bh = block.outer(hr)  # (b1, b2, h1, h2)
    struct = (bh.permute((0, 2, 1, 3)) - bh.permute((2, 0, 1, 3))
              - bh.permute((0, 2, 3, 1)) + bh.permute((2, 0, 3, 1)))
    struct = _coefficient_tensor(struct, 0).scale(Fraction(-ell * (ell - 1), 2 * (d - 2)))
    return coeff_t - struct


def _coefficient_tensor(t: TensorField, e: int) -> TensorField:
    """The r^e coefficient of every component, as an r-independent tensor."""
    chart = t.chart
    out = {}
    for idx, comp in t.comps.items():
        c = comp.series_coefficient(e)
        if c:
            out[idx] = ScalarExpr(chart, {0: c}, None)
    return TensorField(chart, t.valence, out, t.weight, None)
