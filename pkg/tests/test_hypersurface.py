"""Hypersurface geometry: models, projections, Gauss-Codazzi, Fialkow."""

from fractions import Fraction

import pytest

from confhyp.backgrounds import poincare_ball_inversion_chart
from confhyp.expr import Chart
from confhyp.hypersurface import (DefiningFunctionError, build_hypersurface,
                                  reconstruct_rnanb, rnanb_direct)
from confhyp.tensor import MetricData, TensorField
from conftest import cached_background, random_metric


@pytest.fixture(scope="module")
def flat_slice(chart4, flat4):
    return build_hypersurface(flat4, chart4.coord("r"))


@pytest.fixture(scope="module")
def sphere4():
    gm, s = poincare_ball_inversion_chart(4)
    return build_hypersurface(gm, s)


@pytest.fixture(scope="module")
def random_hyp(chart5):
    gm = random_metric(chart5, 31, order_terms=4, degree=1)
    return build_hypersurface(gm, chart5.coord("r"))


class TestModels:
    def test_flat_slice_totally_geodesic(self, flat_slice, chart4):
        one = chart4.one()
        assert (flat_slice.nhat - TensorField(chart4, "d", {(0,): one})).is_zero()
        assert flat_slice.second_fundamental.is_zero()
        assert flat_slice.mean_curvature.is_zero()

    def test_sphere_umbilic_inward_mean_curvature(self, sphere4):
        assert sphere4.trace_free_second_fundamental.restrict_sigma().is_zero()
        h0 = sphere4.mean_curvature.restrict_boundary()
        assert (h0 + h0.chart.one()).is_zero()  # H = -1 for the inward conormal

    def test_fg_background_umbilic(self):
        bg = cached_background(4, 7, seed=1)
        iio = bg.hyp.trace_free_second_fundamental
        assert iio.restrict_sigma().is_zero()

    def test_non_defining_function_rejected(self, chart4, flat4):
        with pytest.raises(DefiningFunctionError):
            build_hypersurface(flat4, chart4.one() + chart4.coord("r"))
        with pytest.raises(DefiningFunctionError):
            build_hypersurface(flat4, chart4.coord("x1") * chart4.coord("r") ** 2)


class TestProjections:
    def test_projector_kills_conormal(self, random_hyp):
        proj_n = random_hyp.project_top(random_hyp.nhat)
        assert proj_n.is_zero()

    def test_ringtop_kills_induced_metric(self, random_hyp):
        out = random_hyp.project_ringtop(random_hyp.projector_dd)
        assert out.restrict_sigma().is_zero()

    def test_top_of_metric_is_induced(self, random_hyp):
        top_g = random_hyp.project_top(random_hyp.metric.g)
        assert (top_g.restrict_tangential() - random_hyp.induced_metric.g).is_zero()

    def test_ringtop_idempotent(self, random_hyp):
        t = random_hyp.bundle.ricci
        once = random_hyp.project_ringtop(t)
        twice = random_hyp.project_ringtop(once)
        assert (once - twice).restrict_sigma().is_zero()


class TestGaussCodazzi:
    def test_flat_slice(self, flat_slice):
        gauss, cod = flat_slice.gauss_codazzi_residuals()
        assert gauss.is_zero() and cod.is_zero()

    def test_round_sphere(self, sphere4):
        gauss, cod = sphere4.gauss_codazzi_residuals()
        assert gauss.is_zero() and cod.is_zero()

    def test_random_embedding(self, random_hyp):
        gauss, cod = random_hyp.gauss_codazzi_residuals()
        assert gauss.is_zero() and cod.is_zero()


class TestFialkow:
    def test_totally_geodesic_flat(self, flat_slice):
        assert flat_slice.fialkow.is_zero()
        assert flat_slice.t2_curvature.is_zero()

    def test_two_formulas_agree(self, random_hyp):
        assert (random_hyp.fialkow - random_hyp.fialkow_from_weyl).is_zero()

    def test_trace_identity(self, random_hyp):
        d = random_hyp.dim
        tr = random_hyp.fialkow.contract(0, 1, random_hyp.induced_metric)
        tr_e = tr.comps.get((), random_hyp.induced_metric.chart.zero())
        n2 = random_hyp.metric.norm_sq(
            random_hyp.trace_free_second_fundamental).restrict_boundary()
        assert (tr_e - n2 * Fraction(1, 2 * (d - 2))).is_zero()

    def test_rnanb_reconstruction(self, random_hyp):
        assert (reconstruct_rnanb(random_hyp) - rnanb_direct(random_hyp)).is_zero()

    def test_fg_tracefree_fialkow_vanishes(self):
        bg = cached_background(4, 7, seed=1)
        f = bg.hyp.fialkow
        gbar = bg.hyp.induced_metric
        tr = f.contract(0, 1, gbar)
        tr_e = tr.comps.get((), gbar.chart.zero())
        stf = f.symmetrize((0, 1)) - gbar.g.scale(tr_e * Fraction(1, gbar.dim))
        assert stf.is_zero()
