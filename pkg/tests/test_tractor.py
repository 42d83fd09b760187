"""Tractor calculus: splittings, connection, Thomas-D, scale covariance."""

import random
from fractions import Fraction

import pytest

from confhyp.backgrounds import (poincare_ball_flat_chart,
                                 poincare_ball_inversion_chart)
from confhyp.conformal import random_omega
from confhyp.hypersurface import build_hypersurface
from confhyp.tensor import TensorField
from confhyp.tractor import TractorCalculus, TractorError, TractorField, pe_check
from conftest import random_metric


@pytest.fixture(scope="module")
def calc5(chart5):
    gm = random_metric(chart5, 51, order_terms=3, degree=1)
    return TractorCalculus(gm)


def rnd_tractor(calc, seed, weight=0):
    rng = random.Random(seed)
    ch = calc.chart
    comps = {}
    for i in range(calc.dim + 2):
        if rng.random() < 0.7:
            comps[(i,)] = ch.const(Fraction(rng.randint(-2, 2), rng.randint(1, 2)))
    comps[(rng.randint(0, calc.dim + 1),)] = ch.coord("x1") + ch.coord("r") * Fraction(1, 2)
    return TractorField(calc.metric, ("T",), comps, weight)


class TestAlgebra:
    def test_canonical_tractor_null(self, calc5):
        x = calc5.canonical_x()
        assert calc5.norm_sq(x).is_zero()

    def test_injector_pairings(self, calc5):
        ch = calc5.chart
        om = TensorField(ch, "d", {(1,): ch.one(), (3,): ch.coord("x2")})
        z = calc5.z_injection(om)
        assert calc5.pair(calc5.canonical_x(), z).comps.get((), ch.zero()).is_zero()
        n2 = calc5.norm_sq(z)
        expect = calc5.metric.norm_sq(om.raise_lower(0, calc5.metric))
        assert (n2 - expect).is_zero()

    def test_z_is_derivative_of_x(self, calc5):
        # tau_g grad (tau_g^-1 X) has the pure middle-slot g_ab components
        x = calc5.canonical_x()
        dx = calc5.cov_deriv(x)
        d = calc5.dim
        for (a, i), e in dx.comps.items():
            assert 1 <= i <= d
            assert (e - calc5.metric.g.get((a, i - 1))).is_zero()

    def test_metric_parallel(self, calc5):
        a = rnd_tractor(calc5, 1)
        b = rnd_tractor(calc5, 2)
        pairing = calc5.pair(a, b).comps.get((), calc5.chart.zero())
        grad = TensorField(calc5.chart, "d",
                           {(i,): pairing.derive(n) for i, n in enumerate(calc5.chart.coords)
                            if pairing.derive(n).coeffs})
        da, db = calc5.cov_deriv(a), calc5.cov_deriv(b)
        t1 = calc5.pair(da, b, sa=1, sb=0)
        t2 = calc5.pair(db, a, sa=1, sb=0)
        rhs = (TensorField(calc5.chart, "d", dict(t1.comps), 0, t1.prec)
               + TensorField(calc5.chart, "d", dict(t2.comps), 0, t2.prec))
        assert (grad - rhs).is_zero()


class TestThomasD:
    def test_normalized_excluded_weight(self, calc5):
        bad = TractorField(calc5.metric, (), {(): calc5.chart.one()},
                           Fraction(2 - calc5.dim, 2))
        with pytest.raises(TractorError):
            calc5.thomas_d(bad, normalized=True)

    def test_hx_pairing_recovers_density(self, calc5):
        ch = calc5.chart
        sig = ch.one() + ch.coord("r") * ch.coord("x1") * Fraction(1, 3)
        sig_tr = TractorField(calc5.metric, (), {(): sig}, 1)
        d_tr = calc5.thomas_d(sig_tr, normalized=True)
        hx = calc5.pair(calc5.canonical_x(), d_tr).comps.get((), ch.zero())
        assert (hx - sig).is_zero()

    def test_on_constant_weight_zero_scalar(self, calc5):
        ch = calc5.chart
        const = TractorField(calc5.metric, (), {(): ch.const(5)}, 0)
        out = calc5.thomas_d(const)
        d = calc5.dim
        # only the bottom slot can survive, and it vanishes for a constant
        assert all(idx[0] == d + 1 for idx in out.comps) and out.is_zero()


class TestCurvature:
    def test_commutator_matches_display(self, calc5):
        v = rnd_tractor(calc5, 4)
        comm = calc5.commutator_on(v)
        fv = calc5.apply_f(calc5.curvature_f(), v)
        assert (comm - fv).is_zero()

    def test_w_tractor_projects_to_curvature(self, calc5):
        d = calc5.dim
        w4 = calc5.w_tractor()
        comps = {}
        for (a, b, c, e), val in w4.comps.items():
            if 1 <= a <= d and 1 <= b <= d:
                comps[(a - 1, b - 1, c, e)] = val
        zzw = TractorField(calc5.metric, ("d", "d", "T", "T"), comps, 0, w4.prec)
        assert (zzw - calc5.curvature_f()).is_zero()

    def test_w_tractor_pair_symmetry(self, calc5):
        w4 = calc5.w_tractor()
        swapped = {}
        for (a, b, c, e), val in w4.comps.items():
            swapped[(c, e, a, b)] = val
        sw = TractorField(calc5.metric, ("T",) * 4, swapped, -2, w4.prec)
        assert (w4 - sw).is_zero()

    def test_w_tractor_needs_d5(self, chart4):
        gm = random_metric(chart4, 52)
        with pytest.raises(TractorError):
            TractorCalculus(gm).w_tractor()

    def test_conformally_flat_kills_w_tractor(self, chart5):
        from confhyp.parser import parse_expr
        ch = chart5
        om = ch.one() + ch.coord("x1") * Fraction(1, 2)
        comps = {(a, a): om * om for a in range(5)}
        from confhyp.tensor import MetricData
        gm = MetricData(TensorField(ch, "dd", comps))
        calc = TractorCalculus(gm)
        assert calc.w_tractor().is_zero()
        assert calc.curvature_f().is_zero()


class TestScaleChange:
    def test_scale_tractor_covariance(self, calc5):
        rng = random.Random(5)
        om = random_omega(calc5.chart, rng)
        r = calc5.chart.coord("r")
        i1 = calc5.scale_tractor(r)
        gm2 = calc5.metric.rescale(om * om)
        calc2 = TractorCalculus(gm2)
        i2 = calc2.scale_tractor(om * r)
        assert (i2 - calc5.change_scale(i1, om, gm2)).is_zero()

    def test_norms_scale_invariant(self, calc5):
        rng = random.Random(6)
        om = random_omega(calc5.chart, rng)
        t = rnd_tractor(calc5, 7, weight=0)
        gm2 = calc5.metric.rescale(om * om)
        calc2 = TractorCalculus(gm2)
        t2 = calc5.change_scale(t, om, gm2)
        n1 = calc5.norm_sq(t)
        n2 = calc2.norm_sq(t2)
        assert (n2 - n1).is_zero()

    def test_w_tractor_scale_covariance(self, calc5):
        rng = random.Random(8)
        om = random_omega(calc5.chart, rng)
        gm2 = calc5.metric.rescale(om * om)
        calc2 = TractorCalculus(gm2)
        w1 = calc5.w_tractor()
        w2 = calc2.w_tractor()
        assert (w2 - calc5.change_scale(w1, om, gm2)).is_zero()


class TestPECheck:
    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_poincare_ball_flat_chart(self, d):
        gm, s = poincare_ball_flat_chart(d, order=5)
        rep = pe_check(gm, s, check_boundary=False)
        assert rep.is_pe

    def test_poincare_ball_boundary_tractor(self):
        gm, s = poincare_ball_inversion_chart(4, order=5)
        rep = pe_check(gm, s)
        assert rep.is_pe and rep.boundary_match

    def test_half_space(self, chart4, flat4):
        rep = pe_check(flat4, chart4.coord("r"))
        assert rep.is_pe and rep.boundary_match

    def test_uncorrected_product_is_not_pe(self, chart4):
        from confhyp.tensor import MetricData
        one = chart4.one()
        comps = {(a, a): one for a in range(4)}
        comps[(1, 1)] = one + chart4.coord("x2") ** 2 * Fraction(1, 2)
        gm = MetricData(TensorField(chart4, "dd", comps))
        rep = pe_check(gm, chart4.coord("r"))
        assert not rep.is_pe


class TestProjectingParts:
    def test_rank4_round_trip(self, calc5):
        ch = calc5.chart
        d = calc5.dim
        rng = random.Random(9)
        t = {}
        for i in range(d):
            for j in range(d):
                if rng.random() < 0.6:
                    t[(i, j)] = ch.const(Fraction(rng.randint(-2, 2), rng.randint(1, 2)))
        bot = d + 1
        comps = {}
        for (i, j), e in t.items():
            comps[(i + 1, bot, j + 1, bot)] = e
            comps[(bot, i + 1, j + 1, bot)] = -e
            comps[(i + 1, bot, bot, j + 1)] = -e
            comps[(bot, i + 1, bot, j + 1)] = e
        tr = TractorField(calc5.metric, ("T",) * 4, comps, -2)
        got = calc5.q_star_rank4(tr)
        expect = TensorField(ch, "dd", {k: v for k, v in t.items() if v}, -2)
        assert (got - expect).is_zero()

    def test_rank2_round_trip(self, calc5):
        ch = calc5.chart
        d = calc5.dim
        bot = d + 1
        comps = {(2, bot): ch.coord("x1"), (bot, 2): -ch.coord("x1")}
        tr = TractorField(calc5.metric, ("T", "T"), comps, 0)
        got = calc5.q_star_rank2(tr)
        assert (got.get((1,)) - ch.coord("x1")).is_zero()

    def test_shape_violation_reported(self, calc5):
        ch = calc5.chart
        comps = {(0, 0, 0, 0): ch.one()}
        tr = TractorField(calc5.metric, ("T",) * 4, comps, 0)
        with pytest.raises(TractorError):
            calc5.q_star_rank4(tr)


class TestNormalOperators:
    def test_delta_r_weight_zero_is_normal_derivative(self, calc5):
        ch = calc5.chart
        hyp = build_hypersurface(calc5.metric, ch.coord("r"))
        f = ch.coord("x1") ** 2 + ch.coord("r") * ch.coord("x2")
        ft = TractorField(calc5.metric, (), {(): f}, 0)
        out = calc5.delta_r(ft, hyp)
        direct = hyp.normal_deriv(f).restrict_boundary()
        got = out.comps.get((), ch.zero()).restrict_boundary()
        assert (got - direct).is_zero()

    def test_delta_1_is_multiple_of_robin(self, calc5):
        # N^A D_A = (d + 2w - 2)(grad_nhat - wH) on densities
        ch = calc5.chart
        d = calc5.dim
        w = 2
        hyp = build_hypersurface(calc5.metric, ch.coord("r"))
        f = ch.coord("x1") + ch.coord("r") * ch.coord("x2") * Fraction(1, 2)
        ft = TractorField(calc5.metric, (), {(): f}, w)
        out = calc5.delta_k(ft, 1, ch.coord("r")).comps.get((), ch.zero())
        robin = calc5.delta_r(ft, hyp).comps.get((), ch.zero())
        factor = d + 2 * w - 2
        assert (out.restrict_boundary() - robin.restrict_boundary() * factor).is_zero()


class TestNormalTractor:
    def test_unit_norm_on_surface(self, calc5):
        hyp = build_hypersurface(calc5.metric, calc5.chart.coord("r"))
        n = calc5.normal_tractor(hyp).restrict_sigma()
        n2 = calc5.norm_sq(n).restrict_boundary()
        assert (n2 - calc5.chart.boundary().one()).is_zero()
