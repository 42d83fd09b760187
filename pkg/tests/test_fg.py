"""Expansion solver: model cases, closed forms, constraints, obstructions."""

from fractions import Fraction

import pytest

from confhyp.backgrounds import (conformally_flat_boundary, constant_tt_tensor,
                                 flat_boundary, tt_tensor, unimodular_boundary)
from confhyp.curvature import CurvatureBundle
from confhyp.fg import ObstructionError, fg_expand
from confhyp.hypersurface import build_hypersurface
from confhyp.tensor import MetricData, TensorField
from confhyp.tractor import pe_check
from conftest import cached_background


class TestModelCases:
    def test_flat_boundary_gives_hyperbolic(self):
        gbar = flat_boundary(3, order=6)
        exp = fg_expand(gbar, 4, 6)
        assert all(k == 0 for k in exp.coefficients)
        v, cap = exp.einstein_residual()
        assert v is None and cap >= 6

    def test_determined_coefficients_conformally_flat_d7(self):
        gbar = conformally_flat_boundary(6, seed=2, order=7)
        exp = fg_expand(gbar, 7, 5)
        b = CurvatureBundle(gbar)
        p = b.schouten
        assert (exp.coefficient(2) + p).is_zero()
        assert exp.coefficient(3).is_zero()
        p2 = p.outer(p).contract(1, 2, gbar)
        assert (exp.coefficient(4) - p2.scale(Fraction(1, 4))).is_zero()
        assert exp.coefficient(5).is_zero()

    def test_first_coefficient_always_vanishes(self):
        gbar = unimodular_boundary(3, seed=3, order=6)
        exp = fg_expand(gbar, 4, 5)
        assert exp.coefficient(1).is_zero()
        assert (exp.coefficient(2) + CurvatureBundle(gbar).schouten).is_zero()


class TestFreeCoefficient:
    def test_free_slot_consumed_and_lie_readout(self):
        bg = cached_background(5, 8, seed=2)
        x = bg.free
        lie = bg.exp.lie_coefficient(4)
        assert (lie - x.scale(24)).is_zero()
        assert bg.exp.lie_coefficient(1).is_zero()

    def test_lie_coefficient_covariant_cross_check(self):
        bg = cached_background(4, 7, seed=2)
        for m in (1, 2, 3):
            direct = bg.exp.lie_coefficient(m)
            cov = bg.exp.lie_coefficient_covariant(m)
            assert (direct - cov).is_zero()

    def test_trace_full_coefficient_rejected(self):
        gbar = flat_boundary(3, order=6)
        one = gbar.chart.one()
        bad = TensorField(gbar.chart, "dd", {(0, 0): one})
        with pytest.raises(ObstructionError):
            fg_expand(gbar, 4, 6, free_coeff=bad)

    def test_curved_boundary_with_tt_coefficient(self):
        gbar = unimodular_boundary(3, seed=5, order=7, degree=1, entries=1)
        x = tt_tensor(gbar, seed=6, degree=1)
        exp = fg_expand(gbar, 4, 6, free_coeff=x)
        v, cap = exp.einstein_residual()
        assert v is None or v >= 4
        assert (exp.lie_coefficient(3) - x.scale(6)).is_zero()


class TestObstructions:
    def test_odd_dimension_curved_boundary_obstructed(self):
        # d=5 with a non-conformally-flat boundary obstructs at order 4
        gbar = unimodular_boundary(4, seed=7, order=7, degree=2, entries=2)
        wbar = CurvatureBundle(gbar).weyl
        assert not wbar.is_zero()
        with pytest.raises(ObstructionError) as exc:
            fg_expand(gbar, 5, 6)
        assert exc.value.order == 4

    def test_unconsumed_free_coefficient_rejected(self):
        gbar = flat_boundary(3, order=6)
        x = constant_tt_tensor(gbar, 1)
        with pytest.raises(ObstructionError):
            fg_expand(gbar, 4, 2, free_coeff=x)


class TestConstraints:
    def test_umbilic(self):
        bg = cached_background(6, 7, seed=1)
        assert bg.hyp.trace_free_second_fundamental.restrict_sigma().is_zero()

    def test_unit_scale_tractor_norm(self):
        # n^2 + 2 rho sigma = 1 in the scale [g_r; r]
        bg = cached_background(5, 8, seed=2)
        rep = pe_check(bg.metric, bg.s, check_boundary=False)
        assert rep.norm_order is None

    def test_livingsanstrace_chain(self):
        # on the unsolved ansatz dr^2 + delta + r^{d-1} X(trace-full), the
        # radial divergence and the trace term expose tr X / 2 at r^{d-2}
        d = 5
        gbar = flat_boundary(d - 1, order=8)
        ch = gbar.chart
        one = ch.one()
        x = TensorField(ch, "dd", {(0, 0): one, (1, 1): one})  # tr X = 2
        from confhyp.fg import _lift_boundary_tensor
        from confhyp.expr import Chart
        chart = Chart(("r",) + ch.coords, radial="r", order=8, field=ch.field)
        comps = {(0, 0): chart.one()}
        for i in range(1, d):
            comps[(i, i)] = chart.one()
        rk = chart.r_power(d - 1)
        for (i, j), e in x.comps.items():
            from confhyp.expr import ScalarExpr
            comps[(i + 1, j + 1)] = comps.get((i + 1, j + 1), chart.zero()) + \
                ScalarExpr(chart, dict(e.coeffs), None) * rk
        gm = MetricData(TensorField(chart, "dd", comps))
        bundle = CurvatureBundle(gm)
        r = chart.coord("r")
        # div n = grad^a n_a for n = dr
        n = TensorField(chart, "d", {(0,): chart.one()})
        divn = bundle.cov_deriv(n).contract(0, 1, gm)
        divn_e = divn.comps.get((), chart.zero())
        rj = r * bundle.schouten_trace
        trx = Fraction(2)
        # leading orders of each piece and their sum
        assert divn_e.series_coefficient(d - 2).as_fraction() == Fraction(d - 1, 2) * trx
        assert rj.series_coefficient(d - 2).as_fraction() == -Fraction(d - 2, 2) * trx
        total = divn_e + rj
        assert total.series_coefficient(d - 2).as_fraction() == trx / 2
