"""Curvature suite: model anchors, commutator oracles, identities."""

import random
from fractions import Fraction

import pytest

from confhyp.curvature import CurvatureBundle, ape_order, trace_free_ricci
from confhyp.expr import Chart
from confhyp.parser import parse_expr
from confhyp.tensor import MetricData, TensorField, tensor_from_function
from conftest import cached_background, random_metric


@pytest.fixture(scope="module")
def ball4(chart4, flat4):
    s = parse_expr("(1 - r^2 - x1^2 - x2^2 - x3^2)/2", chart4)
    return flat4.rescale((s * s).invert())


class TestModelAnchors:
    def test_flat_curvature_vanishes(self, flat4):
        b = CurvatureBundle(flat4)
        assert b.riemann.is_zero()
        assert b.ricci.is_zero()
        assert b.scalar.is_zero()
        assert b.weyl.is_zero()

    def test_poincare_ball_scalar_curvature(self, ball4, chart4):
        b = CurvatureBundle(ball4)
        assert (b.scalar - chart4.const(-12)).is_zero()

    def test_poincare_ball_schouten(self, ball4):
        # Ric = -(d-1)g forces P = -g/2 and J = -d/2 through Ric = (d-2)P + gJ
        b = CurvatureBundle(ball4)
        ric = b.ricci
        assert (ric + ball4.g.scale(3)).is_zero()
        assert (b.schouten + ball4.g.scale(Fraction(1, 2))).is_zero()
        assert (b.schouten_trace + ball4.chart.const(2)).is_zero()

    def test_riemann_symmetries(self, chart4):
        gm = random_metric(chart4, 21)
        b = CurvatureBundle(gm)
        riem = b.riemann
        assert (riem + riem.permute((1, 0, 2, 3))).is_zero()
        assert (riem + riem.permute((0, 1, 3, 2))).is_zero()
        assert (riem - riem.permute((2, 3, 0, 1))).is_zero()


class TestCovariantDerivative:
    def test_metricity(self, chart4):
        gm = random_metric(chart4, 22)
        b = CurvatureBundle(gm)
        assert b.cov_deriv(gm.g).is_zero()

    def test_torsion_free_on_scalars(self, chart4):
        gm = random_metric(chart4, 23)
        b = CurvatureBundle(gm)
        f = chart4.coord("x1") * chart4.coord("x2") + chart4.coord("r") ** 2
        ft = TensorField(chart4, "", {(): f})
        hess = b.cov_deriv(b.cov_deriv(ft))
        assert (hess - hess.permute((1, 0))).is_zero()

    def test_ricci_identity_oracle(self, chart4):
        # (grad_a grad_b - grad_b grad_a) v^c = R_ab^c_d v^d
        gm = random_metric(chart4, 24)
        b = CurvatureBundle(gm)
        rng = random.Random(4)
        comps = {}
        for a in range(4):
            if rng.random() < 0.8:
                comps[(a,)] = chart4.const(rng.randint(1, 3)) * chart4.coord(
                    rng.choice(chart4.coords))
        v = TensorField(chart4, "u", comps)
        dd = b.cov_deriv(b.cov_deriv(v))
        lhs = dd - dd.permute((1, 0, 2))
        rhs = b.riemann_mixed.outer(v).contract(3, 4)
        assert (lhs - rhs).is_zero()


class TestNormalPower:
    def test_zeroth_power_identity(self, chart4):
        gm = random_metric(chart4, 25)
        b = CurvatureBundle(gm)
        from confhyp.hypersurface import build_hypersurface
        hyp = build_hypersurface(gm, chart4.coord("r"))
        t = gm.g
        assert (b.normal_power(t, hyp.nhat_up, 0) - t).is_zero()

    def test_normal_ordering_differs_from_iterated(self, chart4):
        # :grad_n^2: f != grad_n(grad_n f) for curved metrics: witnessed
        gm = random_metric(chart4, 26)
        b = CurvatureBundle(gm)
        from confhyp.hypersurface import build_hypersurface
        hyp = build_hypersurface(gm, chart4.coord("r"))
        f = chart4.coord("x1") ** 2 + chart4.coord("r") * chart4.coord("x2")
        ft = TensorField(chart4, "", {(): f})
        ordered = b.normal_power(ft, hyp.nhat_up, 2)
        once = b.cov_deriv(ft).contract_with(hyp.nhat_up, 0)
        twice = b.cov_deriv(once).contract_with(hyp.nhat_up, 0)
        assert not (ordered - twice).is_zero()

    def test_power_rule_drops_one_order(self, chart4, flat4):
        from confhyp.hypersurface import build_hypersurface
        b = CurvatureBundle(flat4)
        hyp = build_hypersurface(flat4, chart4.coord("r"))
        k = 3
        f = chart4.coord("r") ** k * chart4.coord("x1")
        ft = TensorField(chart4, "", {(): f})
        out = b.normal_power(ft, hyp.nhat_up, 1)
        assert out.comps[()].vanishing_order() == k - 1


class TestApeOrder:
    def test_hyperbolic_is_exact(self, chart4, flat4):
        v, cap = ape_order(flat4, chart4.coord("r"))
        assert v is None and cap >= chart4.order

    def test_curved_product_is_order_zero(self, chart4):
        one = chart4.one()
        comps = {(a, a): one for a in range(4)}
        comps[(1, 1)] = one + chart4.coord("x2") ** 2 * Fraction(1, 2)
        gm = MetricData(TensorField(chart4, "dd", comps))
        v, _ = ape_order(gm, chart4.coord("r"))
        assert v == 0

    def test_truncated_solution_order(self):
        # dropping everything above r^2 in a d=6 expansion leaves order 2
        from confhyp.backgrounds import unimodular_boundary
        from confhyp.fg import fg_expand
        gbar = unimodular_boundary(5, seed=4, order=6, degree=1, entries=1)
        exp = fg_expand(gbar, 6, 2)
        v, _ = ape_order(exp.metric, exp.chart.coord("r"))
        assert v == 2


class TestIdentities:
    def test_schouten_divergence(self, chart4):
        gm = random_metric(chart4, 27)
        b = CurvatureBundle(gm)
        divp = b.cov_deriv(b.schouten).contract(0, 1, gm)
        dj = {}
        for a, name in enumerate(chart4.coords):
            e = b.schouten_trace.derive(name)
            if e.coeffs:
                dj[(a,)] = e
        djt = TensorField(chart4, "d", dj, 0, divp.prec)
        assert (divp - djt).is_zero()

    def test_weyl_divergence_is_cotton(self, chart4):
        gm = random_metric(chart4, 28)
        b = CurvatureBundle(gm)
        divw = b.cov_deriv(b.weyl).contract(0, 3, gm)
        assert (divw - b.cotton.scale(1)).is_zero()  # d - 3 = 1 here

    def test_bach_divergence_vanishes_d4(self, chart4):
        gm = random_metric(chart4, 29, order_terms=3, degree=1)
        b = CurvatureBundle(gm)
        divb = b.cov_deriv(b.bach).contract(0, 1, gm)
        assert divb.is_zero()

    def test_weyl_totally_tracefree(self, chart4):
        gm = random_metric(chart4, 30)
        b = CurvatureBundle(gm)
        w = b.weyl
        for (i, j) in ((0, 2), (0, 3), (1, 2)):
            assert w.contract(i, j, gm).is_zero()
