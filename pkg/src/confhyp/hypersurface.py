"""Geometry of the hypersurface {r = 0} inside an exact bulk metric.

Adapted charts only: the defining function must vanish on {r=0} with an
invertible radial derivative there, and the unit conormal is the canonical
extension ds/|ds| (requiring |ds|^2 to have a square root in the series
ring, which every boundary-normal-form metric provides).
"""

from __future__ import annotations

from fractions import Fraction

from .curvature import CurvatureBundle
from .expr import ScalarExpr
from .tensor import MetricData, TensorField, tensor_zero


class DefiningFunctionError(ValueError):
    pass


class HypersurfaceData:
    """Conormal, fundamental forms and intrinsic geometry of {r = 0}."""

    def __init__(self, metric: MetricData, s: ScalarExpr):
        self.metric = metric
        self.chart = metric.chart
        self.s = s
        self._check_defining()
        self._cache = {}

    def _check_defining(self):
        s = self.s
        if s.restrict_boundary().coeffs:
            raise DefiningFunctionError("s does not vanish on {r=0}")
        ds0 = s.derive(self.chart.radial).restrict_boundary()
        if not ds0.coeffs:
            raise DefiningFunctionError("ds has no radial component on {r=0}")

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def dim(self):
        return self.chart.dim

    @property
    def bundle(self) -> CurvatureBundle:
        return self._memo("bundle", lambda: CurvatureBundle(self.metric))

    # -- conormal ---------------------------------------------------------
    @property
    def ds(self) -> TensorField:
        def mk():
            comps = {}
            for a, name in enumerate(self.chart.coords):
                e = self.s.derive(name)
                if e.coeffs:
                    comps[(a,)] = e
            return TensorField(self.chart, "d", comps)
        return self._memo("ds", mk)

    @property
    def ds_norm(self) -> ScalarExpr:
        """|ds| = sqrt(g^{ab} ds_a ds_b), canonical extension off the surface."""
        return self._memo("ds_norm", lambda: self.metric.norm_sq(self.ds).sqrt())

    @property
    def nhat(self) -> TensorField:
        """Unit conormal ds/|ds| (lower index), inward for s > 0 inside."""
        return self._memo("nhat", lambda: self.ds.scale(self.ds_norm.invert()))

    @property
    def nhat_up(self) -> TensorField:
        return self._memo("nhat_up", lambda: self.nhat.raise_lower(0, self.metric))

    @property
    def projector(self) -> TensorField:
        """top_a^b = delta_a^b - nhat_a nhat^b (mixed, valence du)."""
        def mk():
            d = self.dim
            one = self.chart.one()
            delta = TensorField(self.chart, "du", {(a, a): one for a in range(d)})
            return delta - self.nhat.outer(self.nhat_up)
        return self._memo("projector", mk)

    @property
    def projector_dd(self) -> TensorField:
        """Sigma-metric extension: g_ab - nhat_a nhat_b."""
        return self._memo("proj_dd",
                          lambda: self.metric.g - self.nhat.outer(self.nhat))

    def project_top(self, t: TensorField) -> TensorField:
        """Apply (Id - nhat nhat) to every slot."""
        out = t
        proj = self.projector
        proj_T = proj.permute((1, 0))  # valence ud
        for slot, v in enumerate(t.valence):
            if v == "d":
                # T'..a.. = top_a^b T..b..
                out = _apply_slot(out, proj, slot, down=True)
            else:
                out = _apply_slot(out, proj_T, slot, down=False)
        return out

    def project_ringtop(self, t: TensorField) -> TensorField:
        """Trace-free tangential part of a rank-2 down tensor."""
        if t.valence != "dd":
            raise ValueError("ring-top projection needs a rank-2 down tensor")
        top = self.project_top(t.symmetrize((0, 1)))
        pd = self.projector_dd
        tr = self._top_trace(top)
        return top - pd.scale(tr * Fraction(1, self.dim - 1))

    def _top_trace(self, t: TensorField) -> ScalarExpr:
        """Trace of a tangentially projected rank-2 tensor with the surface metric."""
        # for top-projected t, the g-trace equals the gbar-trace
        tr = t.contract(0, 1, self.metric)
        return tr.comps.get((), ScalarExpr(self.chart, {}, tr.prec))

    # -- fundamental forms ---------------------------------------------------
    @property
    def second_fundamental(self) -> TensorField:
        """II_ab = top(grad nhat)."""
        def mk():
            dn = self.bundle.cov_deriv(self.nhat)
            return self.project_top(dn)
        return self._memo("II", mk)

    @property
    def mean_curvature(self) -> ScalarExpr:
        """H = II_a^a / (d-1)."""
        def mk():
            return self._top_trace(self.second_fundamental) * Fraction(1, self.dim - 1)
        return self._memo("H", mk)

    @property
    def trace_free_second_fundamental(self) -> TensorField:
        def mk():
            return self.second_fundamental - self.projector_dd.scale(self.mean_curvature)
        return self._memo("IIo", mk)

    # -- intrinsic geometry ---------------------------------------------------
    @property
    def induced_metric(self) -> MetricData:
        """gbar on the boundary chart (tangential block of g at r=0)."""
        def mk():
            tang = self.metric.g.restrict_tangential()
            return MetricData(tang)
        return self._memo("gbar", mk)

    @property
    def intrinsic(self) -> CurvatureBundle:
        return self._memo("intrinsic", lambda: CurvatureBundle(self.induced_metric))

    def to_boundary(self, t: TensorField) -> TensorField:
        """Restrict a (projected) bulk tensor to a boundary-chart tensor."""
        return t.restrict_tangential()

    def normal_deriv(self, t) -> "TensorField | ScalarExpr":
        """grad_nhat = nhat^a grad_a, on tensors or scalars."""
        if isinstance(t, ScalarExpr):
            comps = {}
            for a, name in enumerate(self.chart.coords):
                e = t.derive(name)
                if e.coeffs:
                    comps[(a,)] = e
            dt = TensorField(self.chart, "d", comps, 0,
                             None if t.prec is None else t.prec - 1)
            out = dt.contract_with(self.nhat_up, 0)
        else:
            out = self.bundle.cov_deriv(t).contract_with(self.nhat_up, 0)
        if isinstance(out, TensorField) and out.rank == 0:
            return out.comps.get((), ScalarExpr(self.chart, {}, out.prec))
        return out

    # -- derived curvatures ---------------------------------------------------
    @property
    def fialkow(self) -> TensorField:
        """F_ab = P^top - Pbar + H IIo + (1/2) gbar H^2, on the boundary chart."""
        def mk():
            p_top = self.to_boundary(self.project_top(self.bundle.schouten))
            pbar = self.intrinsic.schouten
            iio = self.to_boundary(self.trace_free_second_fundamental)
            h0 = self.mean_curvature.restrict_boundary()
            gbar = self.induced_metric.g
            return (p_top - pbar + iio.scale(h0)
                    + gbar.scale(h0 * h0 * Fraction(1, 2)))
        return self._memo("fialkow", mk)

    @property
    def fialkow_from_weyl(self) -> TensorField:
        """(W_nanb + IIo^2 - gbar |IIo|^2 / (2(d-2))) / (d-3), on the boundary."""
        def mk():
            d = self.dim
            w = self.bundle.weyl
            wn = w.contract_with(self.nhat_up, 0).contract_with(self.nhat_up, 1)
            wn = self.to_boundary(self.project_top(wn))
            iio = self.trace_free_second_fundamental
            ii2 = iio.outer(iio).contract(1, 2, self.metric)  # IIo_ac IIo^c_b
            ii2 = self.to_boundary(self.project_top(ii2))
            n2 = self.metric.norm_sq(iio).restrict_boundary()
            gbar = self.induced_metric.g
            out = wn + ii2 - gbar.scale(n2 * Fraction(1, 2 * (d - 2)))
            return out.scale(Fraction(1, d - 3))
        return self._memo("fialkow_weyl", mk)

    @property
    def t2_curvature(self) -> ScalarExpr:
        """T2 = P_nn - H^2/2 - Jbar/(d-3), a boundary scalar."""
        def mk():
            p = self.bundle.schouten
            pnn = p.contract_with(self.nhat_up, 0).contract_with(self.nhat_up, 0)
            pnn = pnn.comps.get((), ScalarExpr(self.chart, {}, p.prec))
            h0 = self.mean_curvature.restrict_boundary()
            jbar = self.intrinsic.schouten_trace
            return (pnn.restrict_boundary() - h0 * h0 * Fraction(1, 2)
                    - jbar * Fraction(1, self.dim - 3))
        return self._memo("t2", mk)

    def gauss_codazzi_residuals(self):
        """LHS - RHS of the Gauss and Codazzi relations on the boundary."""
        riem = self.bundle.riemann
        # Codazzi: top(R_abc n) = nabla-bar_a II_bc - nabla-bar_b II_ac on Sigma
        rn = riem.contract_with(self.nhat_up, 3)
        rn = self.to_boundary(self.project_top(rn))
        ii = self.to_boundary(self.second_fundamental)
        dii = self.intrinsic.cov_deriv(ii)          # (c, a, b) = grad-bar_c II_ab
        cod_rhs = dii - dii.permute((1, 0, 2))
        codazzi = rn - cod_rhs
        # Gauss: top(R_abcd) = Rbar_abcd - II_ac II_bd + II_ad II_bc on Sigma
        rtop = self.to_boundary(self.project_top(riem))
        rbar = self.intrinsic.riemann
        ii_ii = ii.outer(ii)                        # (a, c', b, d')
        term1 = ii_ii.permute((0, 2, 1, 3))         # II_ac II_bd
        term2 = ii_ii.permute((0, 2, 3, 1))         # II_ad II_bc
        gauss = rtop - (rbar - term1 + term2)
        return gauss, codazzi


def _apply_slot(t: TensorField, proj: TensorField, slot: int, down: bool) -> TensorField:
    """Contract a projector into one slot, keeping the slot order."""
    out = {}
    for idx, e in t.comps.items():
        b = idx[slot]
        for a in range(t.dim):
            p = proj.comps.get((a, b) if down else (b, a))
            if p is None:
                continue
            v = e * p
            if v.coeffs:
                key = idx[:slot] + ((a if down else a),) + idx[slot + 1:]
                s = out.get(key)
                out[key] = v if s is None else s + v
    from .expr import _min_prec
    return TensorField(t.chart, t.valence, out, t.weight, _min_prec(t.prec, proj.prec))


def build_hypersurface(metric: MetricData, s: ScalarExpr) -> HypersurfaceData:
    return HypersurfaceData(metric, s)


def reconstruct_rnanb(h: HypersurfaceData) -> TensorField:
    """top(R_nanb) from Pbar, Jbar, Fialkow, IIo, H and T2, on the boundary.

    R_nanb^top = Pbar + gbar Jbar/(d-3) + (d-2) F - IIo.IIo
                 + gbar |IIo|^2/(2(d-2)) - H IIo + gbar T2.

    The Jbar term enters with a plus: eliminating P_nn through T2 from the
    projected Weyl decomposition fixes its sign, and the identity holds for
    every embedding only this way.
    """
    d = h.dim
    gbar = h.induced_metric.g
    pbar = h.intrinsic.schouten
    jbar = h.intrinsic.schouten_trace
    f = h.fialkow
    iio_b = h.to_boundary(h.trace_free_second_fundamental)
    iio2 = h.to_boundary(h.project_top(
        h.trace_free_second_fundamental.outer(h.trace_free_second_fundamental)
        .contract(1, 2, h.metric)))
    n2 = h.metric.norm_sq(h.trace_free_second_fundamental).restrict_boundary()
    h0 = h.mean_curvature.restrict_boundary()
    t2 = h.t2_curvature
    return (pbar + gbar.scale(jbar * Fraction(1, d - 3)) + f.scale(d - 2)
            - iio2 + gbar.scale(n2 * Fraction(1, 2 * (d - 2)))
            - iio_b.scale(h0) + gbar.scale(t2))


def rnanb_direct(h: HypersurfaceData) -> TensorField:
    """top(nhat^c nhat^d R_cadb) restricted to the boundary."""
    riem = h.bundle.riemann
    rn = riem.contract_with(h.nhat_up, 0).contract_with(h.nhat_up, 1)
    # slots left: (a, b) from R_{c a d b} wait: contract slot0 (c) then the
    # remaining slot 1 is a; contracting original slot 2 (d) is new slot 1
    return h.to_boundary(h.project_top(rn))
