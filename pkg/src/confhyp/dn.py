"""Dirichlet-to-Neumann tensors of Poincare-Einstein fillings, d = 4..8.

Every result is a symmetric trace-free boundary tensor of weight 3-d.
Formula-based evaluations are cross-checked against the critical
expansion coefficient; proportionality constants between methods are
sample-independent and pinned by the regression suite.
"""

from __future__ import annotations

from fractions import Fraction

from .curvature import CurvatureBundle
from .hypersurface import HypersurfaceData
from .tensor import MetricData, TensorField
from .tractor import TractorCalculus


class DNResult:
    """A DN tensor with its method tag and weight annotation."""

    def __init__(self, d: int, method: str, tensor: TensorField):
        self.d = d
        self.method = method
        self.tensor = tensor.with_weight(3 - d)

    @property
    def weight(self) -> int:
        return 3 - self.d

    def __repr__(self):
        return f"DNResult(d={self.d}, {self.method}, {len(self.tensor.comps)} comps)"


def _ringtop_restrict(hyp: HypersurfaceData, t: TensorField) -> TensorField:
    """ring-top projection and boundary restriction of a rank-2 tensor."""
    proj = hyp.project_ringtop(t)
    out = hyp.to_boundary(proj)
    return out.symmetrize((0, 1))


def _sym_tracefree_boundary(hyp: HypersurfaceData, t: TensorField) -> TensorField:
    gbar = hyp.induced_metric
    sym = t.symmetrize((0, 1))
    tr = sym.contract(0, 1, gbar)
    tr_e = tr.comps.get((), t.chart.zero())
    n = gbar.dim
    return sym - gbar.g.scale(tr_e * Fraction(1, n))


def check_dn_shape(res: DNResult, hyp: HypersurfaceData):
    """Exact symmetry and gbar-trace-freeness of a DN tensor."""
    t = res.tensor
    sym_res = t - t.permute((1, 0))
    tr = t.contract(0, 1, hyp.induced_metric)
    tr_e = tr.comps.get(())
    return sym_res.is_zero() and (tr_e is None or not tr_e.coeffs)


# -- dimension 4 --------------------------------------------------------------

def dn4(hyp: HypersurfaceData) -> DNResult:
    """ring-top C_{nhat (ab)} on the boundary (the order-3 coefficient carrier)."""
    if hyp.dim != 4:
        raise ValueError("dn4 needs bulk dimension 4")
    c = hyp.bundle.cotton
    cn = c.contract_with(hyp.nhat_up, 0)
    return DNResult(4, "formula-d4", _ringtop_restrict(hyp, cn.symmetrize((0, 1))))


def fourth_fundamental_form(hyp: HypersurfaceData) -> TensorField:
    """IVo_ab = C^top_{nhat(ab)} - grad-bar^c W^top_{c(ab)nhat} + H W_{nhat a b nhat}."""
    bundle = hyp.bundle
    c = bundle.cotton
    w = bundle.weyl
    t1 = hyp.to_boundary(hyp.project_top(
        c.contract_with(hyp.nhat_up, 0).symmetrize((0, 1))))
    wn = w.contract_with(hyp.nhat_up, 3)          # (c, a, b)
    wn = hyp.to_boundary(hyp.project_top(wn))
    dwn = hyp.intrinsic.cov_deriv(wn)             # (e, c, a, b)
    t2 = dwn.contract(0, 1, hyp.induced_metric).symmetrize((0, 1))
    wnn = w.contract_with(hyp.nhat_up, 0).contract_with(hyp.nhat_up, 2)
    t3 = hyp.to_boundary(hyp.project_top(wnn))
    h0 = hyp.mean_curvature.restrict_boundary()
    return t1 - t2 + t3.scale(h0)


# -- dimension 5 --------------------------------------------------------------

def dn5(hyp: HypersurfaceData, require_flat_boundary=True) -> DNResult:
    """B^top_(ab)o on the boundary."""
    if hyp.dim != 5:
        raise ValueError("dn5 needs bulk dimension 5")
    if require_flat_boundary:
        intseq = hyp.intrinsic
        if not (intseq.weyl.is_zero() and intseq.cotton.is_zero()):
            raise ValueError("dn5 needs a conformally flat boundary")
    b = hyp.bundle.bach
    bt = hyp.to_boundary(hyp.project_top(b))
    return DNResult(5, "formula-d5", _sym_tracefree_boundary(hyp, bt))


# -- dimension 6 --------------------------------------------------------------

def dn6_riemannian(hyp: HypersurfaceData) -> DNResult:
    """ring-top((grad_nhat + 2H) B) - 4 Cbar_{c(ab)} grad-bar^c H."""
    if hyp.dim != 6:
        raise ValueError("dn6 needs bulk dimension 6")
    bundle = hyp.bundle
    b = bundle.bach
    dnb = bundle.cov_deriv(b).contract_with(hyp.nhat_up, 0)
    term1 = _ringtop_restrict(hyp, dnb + b.scale(hyp.mean_curvature * 2))
    term2 = _cotton_gradh_term(hyp)
    return DNResult(6, "formula-d6-riemannian", term1 - term2.scale(4))


def dn6_appendix_form(hyp: HypersurfaceData) -> DNResult:
    """ring-top grad_nhat B - 4 Cbar_{c(ab)} grad-bar^c H + 4 H Bbar."""
    if hyp.dim != 6:
        raise ValueError("dn6 needs bulk dimension 6")
    bundle = hyp.bundle
    dnb = bundle.cov_deriv(bundle.bach).contract_with(hyp.nhat_up, 0)
    term1 = _ringtop_restrict(hyp, dnb)
    term2 = _cotton_gradh_term(hyp)
    h0 = hyp.mean_curvature.restrict_boundary()
    bbar = _sym_tracefree_boundary(hyp, hyp.intrinsic.bach)
    out = term1 - term2.scale(4) + bbar.scale(h0 * 4)
    return DNResult(6, "formula-d6-appendix", out)


def _cotton_gradh_term(hyp: HypersurfaceData) -> TensorField:
    """Sym-tracefree Cbar_{c(ab)} grad-bar^c H on the boundary."""
    cbar = hyp.intrinsic.cotton
    h0 = hyp.mean_curvature.restrict_boundary()
    bchart = h0.chart
    gradh = {}
    for i, name in enumerate(bchart.coords):
        e = h0.derive(name)
        if e.coeffs:
            gradh[(i,)] = e
    gh = TensorField(bchart, "d", gradh).raise_lower(0, hyp.induced_metric)
    term = cbar.contract_with(gh, 0)
    return _sym_tracefree_boundary(hyp, term)


def dn6_tractor(hyp: HypersurfaceData) -> DNResult:
    """q-star ring-top delta_R W at tractor weight -2."""
    if hyp.dim != 6:
        raise ValueError("dn6 needs bulk dimension 6")
    calc = TractorCalculus(hyp.metric)
    w4 = calc.w_tractor()
    drw = calc.delta_r(w4, hyp)
    n_tr = calc.normal_tractor(hyp).restrict_sigma()
    projected = calc.tractor_top(drw, n_tr)
    extracted = calc.q_star_rank4(projected, strict=False)
    out = _sym_tracefree_boundary(hyp, extracted.restrict_tangential())
    return DNResult(6, "formula-d6-tractor", out)


# -- even d >= 6: leading term -------------------------------------------------

def dn_even_leading(hyp: HypersurfaceData, d: int) -> DNResult:
    """ring-top :grad_nhat^{d-5}: B on the boundary (leading transverse term)."""
    if d % 2 or d < 6:
        raise ValueError("leading-term formula needs even d >= 6")
    if hyp.dim != d:
        raise ValueError(f"hypersurface dimension {hyp.dim} != {d}")
    bundle = hyp.bundle
    t = bundle.normal_power(bundle.bach, hyp.nhat_up, d - 5)
    return DNResult(d, "leading-even", _ringtop_restrict(hyp, t))


# -- odd d >= 7: tractor formula -------------------------------------------------

def dn_odd_tractor(hyp: HypersurfaceData, d: int, require_flat_boundary=True) -> DNResult:
    """ring-top q-star( nhat^a :grad_nhat^{d-4}: F_ab^A_B ) on the boundary."""
    if d % 2 == 0 or d < 7:
        raise ValueError("odd tractor formula needs odd d >= 7")
    if hyp.dim != d:
        raise ValueError(f"hypersurface dimension {hyp.dim} != {d}")
    if require_flat_boundary:
        intseq = hyp.intrinsic
        if not (intseq.weyl.is_zero() and intseq.cotton.is_zero()):
            raise ValueError("odd-d formula needs a conformally flat boundary")
    calc = TractorCalculus(hyp.metric)
    f = calc.curvature_f()                    # slots (d, d, T, T)
    cur = f
    for _ in range(d - 4):
        cur = calc.cov_deriv(cur)
    for _ in range(d - 4):
        cur = calc.contract_form_slot(cur, 0, hyp.nhat_up)
    cur = calc.contract_form_slot(cur, 0, hyp.nhat_up)   # nhat^a on the first slot
    cur = cur.restrict_sigma()                # slots (d, T, T) at Sigma
    extracted = _q_star_rank2_with_form(calc, cur)
    out = _sym_tracefree_boundary(hyp, extracted.restrict_tangential())
    return DNResult(d, "tractor-odd", out)


def _q_star_rank2_with_form(calc: TractorCalculus, t) -> TensorField:
    """Extract t_{b c} from a (d, T, T) field of 2 Z^[A X^B] shape per form slot."""
    from .tractor import TractorError
    d = calc.dim
    bot = d + 1
    comps = {}
    for (b, A_, B_), val in t.comps.items():
        if 1 <= A_ <= d and B_ == bot:
            comps[(b, A_ - 1)] = val
    extracted = TensorField(calc.chart, "dd", comps, t.weight, t.prec)
    for (b, A_, B_), val in t.comps.items():
        if 1 <= A_ <= d and B_ == bot:
            continue
        if A_ == bot and 1 <= B_ <= d:
            if not (val + extracted.get((b, B_ - 1))).is_zero():
                raise TractorError(f"projecting-shape mismatch at {(b, A_, B_)}")
            continue
        raise TractorError(f"not of projecting shape: slot {(b, A_, B_)} nonzero")
    return extracted


# -- FG-coefficient route and checks -------------------------------------------

def dn_from_expansion(exp, d: int) -> DNResult:
    """(L_{d/dr})^{d-1} g_r on the boundary, as the operational DN tensor."""
    return DNResult(d, "fg-coefficient", exp.lie_coefficient(d - 1))


def divergence_check(res: DNResult, hyp: HypersurfaceData) -> TensorField:
    """Intrinsic divergence of a DN tensor (rank-1 residual)."""
    dt = hyp.intrinsic.cov_deriv(res.tensor)
    return dt.contract(0, 1, hyp.induced_metric)


def proportionality_constant(a: TensorField, b: TensorField):
    """The constant c with a = c*b exactly, or None if no such c (b nonzero)."""
    if b.is_zero():
        return None
    c = None
    for idx, eb in b.comps.items():
        ea = a.comps.get(idx)
        if ea is None:
            continue
        c = _scalar_ratio(ea, eb)
        if c is not None:
            break
    if c is None:
        return None
    if not (a - b.scale(c)).is_zero():
        return None
    return c


def _scalar_ratio(ea, eb):
    """ea/eb as a rational constant, or None."""
    if not eb.coeffs:
        return None
    q = ea * eb.invert()
    vals = list(q.coeffs.items())
    if len(vals) != 1 or vals[0][0] != 0:
        return None
    try:
        return vals[0][1].as_fraction()
    except Exception:
        return None
