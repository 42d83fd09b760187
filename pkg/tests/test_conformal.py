"""Conformal rescaling, invariance checks, linearizations, probes."""

import random
from fractions import Fraction

import pytest

from confhyp.conformal import (WeightedQuantity, bach_linearization_residual, dlog,
                               invariance_check, omega_power, perturbed_metric,
                               random_omega, rescale_pair,
                               riemann_linearization_residual,
                               transverse_order_probe, weyl_linearization_residual,
                               random_symmetric_perturbation)
from confhyp.hypersurface import build_hypersurface
from confhyp.tensor import TensorField
from conftest import random_metric


@pytest.fixture(scope="module")
def setup5(chart5):
    gm = random_metric(chart5, 41, order_terms=3, degree=1)
    hyp = build_hypersurface(gm, chart5.coord("r"))
    return gm, chart5.coord("r"), hyp


class TestRescalePair:
    def test_identity_factor(self, setup5, chart5):
        gm, s, _ = setup5
        gm2, s2 = rescale_pair(gm, s, chart5.one())
        assert (gm2.g - gm.g).is_zero() and (s2 - s).is_zero()

    def test_constant_factor_preserves_mixed_weyl(self, setup5, chart5):
        from confhyp.curvature import CurvatureBundle
        gm, s, _ = setup5
        gm2, _ = rescale_pair(gm, s, chart5.const(3))
        w1 = CurvatureBundle(gm).weyl.raise_lower(2, gm)
        w2 = CurvatureBundle(gm2).weyl.raise_lower(2, gm2)
        # W_ab^c_d has weight zero: unchanged under constant rescalings
        assert (w2 - w1).is_zero()

    def test_vanishing_factor_rejected(self, setup5, chart5):
        gm, s, _ = setup5
        with pytest.raises(ValueError):
            rescale_pair(gm, s, chart5.coord("r"))

    def test_conormal_rescaling(self, setup5, chart5):
        gm, s, hyp = setup5
        rng = random.Random(2)
        om = random_omega(chart5, rng)
        gm2, s2 = rescale_pair(gm, s, om)
        hyp2 = build_hypersurface(gm2, s2)
        resid = hyp2.nhat.restrict_sigma() - hyp.nhat.scale(om).restrict_sigma()
        assert resid.is_zero()


class TestInvarianceCheck:
    def test_trace_free_second_form_weight_one(self, setup5):
        gm, s, _ = setup5
        rng = random.Random(3)
        omegas = [random_omega(gm.chart, rng) for _ in range(3)]
        lams = [random_omega(gm.chart, rng)]
        q = WeightedQuantity(
            "IIo", lambda g, ss: build_hypersurface(g, ss)
            .trace_free_second_fundamental.restrict_tangential(), 1)
        rep = invariance_check(q, gm, s, omegas, lams)
        assert rep.passed

    def test_mean_curvature_fails_with_robin_residual(self, setup5):
        gm, s, hyp = setup5
        rng = random.Random(4)
        om = random_omega(gm.chart, rng)
        q = WeightedQuantity(
            "H", lambda g, ss: _scalar0(build_hypersurface(g, ss)
                                        .mean_curvature.restrict_boundary()), -1)
        rep = invariance_check(q, gm, s, [om])
        assert not rep.passed
        # residual = Omega_bar^-1 grad_nhat log(Omega) on the surface
        gm2, s2 = rescale_pair(gm, s, om)
        h2 = build_hypersurface(gm2, s2).mean_curvature.restrict_boundary()
        h1 = hyp.mean_curvature.restrict_boundary()
        ups = dlog(om)
        dn_log = ups.contract_with(hyp.nhat_up, 0).comps.get((), gm.chart.zero())
        ob = om.restrict_boundary()
        resid = h2 - ob.invert() * (h1 + dn_log.restrict_boundary())
        assert resid.is_zero()


def _scalar0(e):
    return TensorField(e.chart, "", {(): e} if e.coeffs else {})


class TestLinearizations:
    def test_riemann_leading_coefficient(self, setup5):
        gm, s, hyp = setup5
        rng = random.Random(5)
        h = random_symmetric_perturbation(gm.chart, rng, degree=1, radial_soften=True)
        for q in (2, 3):
            assert riemann_linearization_residual(gm, s, hyp.nhat, q, h).is_zero()

    def test_weyl_leading_structure(self, setup5):
        gm, s, hyp = setup5
        rng = random.Random(6)
        h = random_symmetric_perturbation(gm.chart, rng, degree=1, radial_soften=True)
        assert weyl_linearization_residual(gm, s, hyp, 3, h).is_zero()

    def test_bach_leading_coefficient(self, setup5):
        gm, s, hyp = setup5
        rng = random.Random(7)
        h = random_symmetric_perturbation(gm.chart, rng, degree=1, radial_soften=True)
        assert bach_linearization_residual(gm, s, hyp, 4, h).is_zero()


class TestTransverseOrderProbe:
    def test_induced_metric_order_zero(self, setup5):
        gm, s, _ = setup5
        q = WeightedQuantity(
            "gbar", lambda g, ss: build_hypersurface(g, ss)
            .induced_metric.g, 2)
        assert transverse_order_probe(q, gm, s, kmax=1, seeds=(0, 1)) == 0

    def test_riemann_nn_probe_order(self, setup5):
        # X^(l) = nhat nhat :grad^l: R has transverse order l + 2
        gm, s, _ = setup5
        ell = 1

        def builder(g, ss):
            hyp = build_hypersurface(g, ss)
            riem = hyp.bundle.normal_power(hyp.bundle.riemann, hyp.nhat_up, ell)
            riem = riem.contract_with(hyp.nhat_up, 0).contract_with(hyp.nhat_up, 1)
            return hyp.to_boundary(hyp.project_top(riem))

        q = WeightedQuantity("X_l", builder, 0)
        order = transverse_order_probe(q, gm, s, kmax=ell + 3, kmin=ell + 1, seeds=(0,))
        assert order == ell + 2

    def test_probe_seed_independence(self, setup5):
        gm, s, _ = setup5
        q = WeightedQuantity(
            "H", lambda g, ss: _scalar0(build_hypersurface(g, ss)
                                        .mean_curvature.restrict_boundary()), -1)
        orders = {transverse_order_probe(q, gm, s, kmax=2, seeds=(sd,))
                  for sd in (0, 1, 2)}
        assert orders == {1}
