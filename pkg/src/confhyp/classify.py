"""Exhaustion engine for natural conformal hypersurface invariants.

Words in the hypersurface letters (inverse metric, conormal, mean
curvature, intrinsic and bulk derivatives, curvature) are enumerated by
their weight under constant rescalings; concrete candidate tensors built
from the reduced letter set are evaluated on sampled expansion
backgrounds, and exact conformal variation of a general combination is
solved as a nullspace problem over the rationals.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .conformal import omega_power, random_omega, rescale_pair
from .hypersurface import HypersurfaceData, build_hypersurface
from .linalg import nullspace, rank
from .tensor import MetricData, TensorField

# weight under constant metric rescalings g -> t^2 g
LETTER_WEIGHTS = {
    "ginv": -2,   # g^{ab}
    "nhat": 1,    # unit conormal (lower index)
    "H": -1,      # mean curvature
    "dbar": 0,    # intrinsic derivative
    "dbulk": 0,   # ambient derivative
    "R": 2,       # Riemann tensor (all indices down)
}

# free lower-index count contributed by one copy of each letter
LETTER_RANKS = {"ginv": -2, "nhat": 1, "H": 0, "dbar": 1, "dbulk": 1, "R": 4}


class Word(tuple):
    """Multiset of letters as a sorted tuple of (letter, count) pairs."""

    def __new__(cls, counts: dict):
        return super().__new__(cls, tuple(sorted((k, v) for k, v in counts.items() if v)))

    def weight(self):
        return sum(LETTER_WEIGHTS[k] * v for k, v in self)

    def rank(self):
        return sum(LETTER_RANKS[k] * v for k, v in self)

    def __repr__(self):
        return " ".join(f"{k}^{v}" if v > 1 else k for k, v in self)


def enumerate_words(target_weight: int, target_rank: int,
                    letters=tuple(LETTER_WEIGHTS), allow_free_normals=False,
                    max_each: int = 12):
    """All letter multisets of the given weight and free rank.

    Structural constraints: undifferentiated conormals are contracted into
    curvatures, at most two in total (further pairs are re-expressed
    through nhat nhat = g - gbar) unless free normals are allowed; ambient
    derivatives act on curvature, intrinsic derivatives act on
    mean-curvature factors.
    """
    span = target_rank - target_weight
    if span < 0:
        return []
    out = []
    mmax = span // 2 if "R" in letters else 0
    for m in range(mmax + 1):
        for c in range(0, span - 2 * m + 1 if "H" in letters else 1):
            for e in range(0, span - 2 * m - c + 1 if "dbar" in letters else 1):
                f = span - 2 * m - c - e
                if f < 0 or ("dbulk" not in letters and f > 0):
                    continue
                if f > 0 and m == 0:
                    continue
                if e > 0 and c == 0:
                    continue
                bcap = min(2 * m, 2) + (target_rank if allow_free_normals else 0)
                if "nhat" not in letters:
                    bcap = 0
                for b in range(bcap + 1):
                    num = -target_weight + b - c + 2 * m
                    if num < 0 or num % 2:
                        continue
                    a = num // 2
                    if "ginv" not in letters and a > 0:
                        continue
                    if max(a, b, c, e, f, m) > max_each:
                        continue
                    if -2 * a + b + e + f + 4 * m != target_rank:
                        continue
                    out.append(Word({"ginv": a, "nhat": b, "H": c,
                                     "dbar": e, "dbulk": f, "R": m}))
    return sorted(set(out))


# -- the reduced d=6 candidate basis -----------------------------------------

# Of the three full Weyl-squared contractions in the raw letter list, only
# one is linearly independent (the crossed routings satisfy exact
# first-Bianchi identities, verified in the test suite); the two degenerate
# entries are replaced by inequivalent candidates built from the same
# reduced letters so that the 24 candidates are genuinely independent.
D6_BASIS_NAMES = (
    "ringtop_dn_B",
    "Pbar_dnJ",
    "DDbar_dnJ",
    "dH_dJ",
    "H_J_Pbar",
    "H_DDbar_J",
    "Wbar_DDH",
    "Cbar_dH",
    "H_Bbar",
    "H_WW",
    "dPbar_dH",
    "J_DDH",
    "H_PbarPbar",
    "H_Pbar_Wbar",
    "H_Jbar_Pbar",
    "H3_Pbar",
    "Jbar_DDH",
    "dH_dJbar",
    "H_DDbar_Jbar",
    "DDbar_LapH",
    "Pbar_DDH",
    "H2_DDH",
    "H_dH_dH",
    "Pbar_LapH",
)


def _stf(hyp: HypersurfaceData, t: TensorField) -> TensorField:
    gbar = hyp.induced_metric
    sym = t.symmetrize((0, 1))
    tr = sym.contract(0, 1, gbar)
    tr_e = tr.comps.get((), t.chart.zero())
    return sym - gbar.g.scale(tr_e * Fraction(1, gbar.dim))


def _grad(hyp, scalar) -> TensorField:
    bchart = hyp.induced_metric.chart
    comps = {}
    for i, name in enumerate(bchart.coords):
        e = scalar.derive(name)
        if e.coeffs:
            comps[(i,)] = e
    return TensorField(bchart, "d", comps)


def _hessian(hyp, scalar) -> TensorField:
    ib = hyp.intrinsic
    return ib.cov_deriv(_grad(hyp, scalar))


def d6_candidates(hyp: HypersurfaceData):
    """The 24 symmetrized trace-free weight -3 candidates, in frozen order."""
    if hyp.dim != 6:
        raise ValueError("the frozen candidate basis is for bulk dimension 6")
    bb = hyp.bundle
    ib = hyp.intrinsic
    gbar = hyp.induced_metric
    h0 = hyp.mean_curvature.restrict_boundary()
    j_bulk = hyp.normal_deriv(bb.schouten_trace)
    dn_j = j_bulk.restrict_boundary()
    j_sigma = bb.schouten_trace.restrict_boundary()
    pbar = ib.schouten
    jbar = ib.schouten_trace
    wbar = ib.weyl
    cbar = ib.cotton
    bbar = ib.bach
    hess_h = _hessian(hyp, h0)
    grad_h = _grad(hyp, h0)

    out = {}

    dnb = bb.cov_deriv(bb.bach).contract_with(hyp.nhat_up, 0)
    out["ringtop_dn_B"] = _stf(hyp, hyp.to_boundary(hyp.project_ringtop(dnb)))
    out["Pbar_dnJ"] = _stf(hyp, pbar.scale(dn_j))
    out["DDbar_dnJ"] = _stf(hyp, _hessian(hyp, dn_j))
    out["dH_dJ"] = _stf(hyp, grad_h.outer(_grad(hyp, j_sigma)))
    out["H_J_Pbar"] = _stf(hyp, pbar.scale(h0 * j_sigma))
    out["H_DDbar_J"] = _stf(hyp, _hessian(hyp, j_sigma).scale(h0))

    wu = wbar.raise_lower(0, gbar).raise_lower(3, gbar)   # W^a_{cd}^b
    t7 = wu.outer(hess_h)            # (a, c, d, b, x, y)
    t7 = t7.contract(0, 4).contract(2, 3)                  # a-x then b-y
    out["Wbar_DDH"] = _stf(hyp, t7)

    ghu = grad_h.raise_lower(0, gbar)
    out["Cbar_dH"] = _stf(hyp, cbar.contract_with(ghu, 0))
    out["H_Bbar"] = _stf(hyp, bbar.scale(h0))

    w_uuu = wbar.raise_lower(1, gbar).raise_lower(2, gbar).raise_lower(3, gbar)
    # W_c^{abe} W_{dabe}: the one independent full Weyl-squared contraction
    t = w_uuu.outer(wbar)        # (0 c, 1 a, 2 b, 3 e, 4 d, 5 a', 6 b', 7 e')
    t = t.contract(3, 7).contract(2, 5).contract(1, 3)
    out["H_WW"] = _stf(hyp, t.scale(h0))
    # (grad-bar_a Pbar_cd)(grad-bar^a H)
    dp = ib.cov_deriv(pbar)                       # (a, c, d)
    out["dPbar_dH"] = _stf(hyp, dp.contract_with(ghu, 0))
    # ambient Schouten trace against the mean-curvature Hessian
    out["J_DDH"] = _stf(hyp, hess_h.scale(j_sigma))

    p2 = pbar.outer(pbar).contract(1, 2, gbar)
    out["H_PbarPbar"] = _stf(hyp, p2.scale(h0))
    pu = pbar.raise_lower(0, gbar).raise_lower(1, gbar)
    pw = pu.outer(wbar).contract(1, 5).contract(0, 1)
    out["H_Pbar_Wbar"] = _stf(hyp, pw.scale(h0))
    out["H_Jbar_Pbar"] = _stf(hyp, pbar.scale(h0 * jbar))
    out["H3_Pbar"] = _stf(hyp, pbar.scale(h0 * h0 * h0))
    out["Jbar_DDH"] = _stf(hyp, hess_h.scale(jbar))
    out["dH_dJbar"] = _stf(hyp, grad_h.outer(_grad(hyp, jbar)))
    out["H_DDbar_Jbar"] = _stf(hyp, _hessian(hyp, jbar).scale(h0))

    lap_h_t = _hessian(hyp, h0).contract(0, 1, gbar)
    lap_h = lap_h_t.comps.get((), h0.chart.zero())
    out["DDbar_LapH"] = _stf(hyp, _hessian(hyp, lap_h))

    p_mixed = pbar.raise_lower(0, gbar)          # P^a{}_c
    phess = p_mixed.outer(hess_h).contract(0, 2)  # P^a_c DDH_{a d} -> (c, d)
    out["Pbar_DDH"] = _stf(hyp, phess)
    out["H2_DDH"] = _stf(hyp, hess_h.scale(h0 * h0))
    out["H_dH_dH"] = _stf(hyp, grad_h.outer(grad_h).scale(h0))
    out["Pbar_LapH"] = _stf(hyp, pbar.scale(lap_h))

    return [out[name] for name in D6_BASIS_NAMES]


# -- variation system ----------------------------------------------------------

class ClassifierRun:
    def __init__(self, names, null_vectors, value_rank, stable, rows):
        self.names = names
        self.null_vectors = null_vectors
        self.value_rank = value_rank
        self.stable = stable
        self.rows = rows

    @property
    def normalized_vector(self):
        if len(self.null_vectors) != 1:
            return None
        v = self.null_vectors[0]
        lead = next((c for c in v if c != 0), None)
        if lead is None:
            return None
        return [c / lead for c in v]


def _evaluation_points(chart, rng, count):
    pts = []
    for _ in range(count):
        pts.append({name: Fraction(rng.randint(-3, 3), rng.randint(2, 5))
                    for name in chart.coords})
    return pts


def classifier_omega(chart, rng, degree: int = 1):
    """Conformal factor with transverse and tangential jets: the variation
    system needs both, or mean-curvature candidates never light up."""
    r = chart.coord(chart.radial)
    xs = [c for c in chart.coords if c != chart.radial]

    def small():
        return Fraction(rng.randint(1, 2), rng.randint(2, 5)) * rng.choice((1, -1))

    om = chart.one() + r * small()
    om = om + r * chart.coord(rng.choice(xs)) * small()
    tang = chart.coord(rng.choice(xs))
    for _ in range(degree - 1):
        tang = tang * chart.coord(rng.choice(xs))
    return om + tang * small()


def truncate_metric(metric: MetricData, prec: int) -> MetricData:
    """Forget series data above a precision the candidates cannot see."""
    g = metric.g
    gt = TensorField(g.chart, "dd", {i: e.truncate(prec) for i, e in g.comps.items()},
                     0, prec)
    inv = metric.inv
    it = TensorField(inv.chart, "uu", {i: e.truncate(prec) for i, e in inv.comps.items()},
                     0, prec)
    return MetricData(gt, it)


def invariant_nullspace(candidate_fn, backgrounds, weight: int,
                        omegas_per_bg: int = 3, points_per_sample: int = 2,
                        seed: int = 0, omega_degree: int = 1):
    """Exact nullspace of the conformal-variation system of a candidate list.

    candidate_fn(metric, s) -> list of boundary tensors (frozen order).
    Rows are residual components of q_i(Omega^2 g, Omega s) -
    Omega_bar^w q_i(g, s), evaluated at rational points; stacked over
    backgrounds and conformal factors.
    """
    rng = random.Random(seed)
    rows = []
    value_rows = []
    block_sizes = []
    names = None
    for metric, s in backgrounds:
        base = candidate_fn(metric, s)
        if names is None:
            names = list(range(len(base)))
        _collect_value_rows(value_rows, base, metric.chart.boundary(), rng,
                            points_per_sample)
        block_rows = 0
        for _ in range(omegas_per_bg):
            om = classifier_omega(metric.chart, rng, degree=omega_degree)
            gm2, s2 = rescale_pair(metric, s, om)
            other = candidate_fn(gm2, s2)
            ob = omega_power(om.restrict_boundary(), weight)
            residuals = [o - b.scale(ob) for o, b in zip(other, base)]
            _collect_value_rows(value_rows, other, metric.chart.boundary(), rng,
                                points_per_sample)
            added = _collect_residual_rows(rows, residuals, metric.chart.boundary(),
                                           rng, points_per_sample)
            block_rows += added
        block_sizes.append(block_rows)
    # stability: dropping the last block must not change the nullspace size
    basis_full = nullspace(rows, len(names))
    if block_sizes and block_sizes[-1] and len(rows) > block_sizes[-1]:
        basis_part = nullspace(rows[:-block_sizes[-1]], len(names))
        stable = len(basis_part) == len(basis_full)
    else:
        stable = False
    vrank = rank(value_rows) if value_rows else 0
    return ClassifierRun(names, basis_full, vrank, stable, len(rows))


def _collect_residual_rows(rows, residuals, bchart, rng, npoints):
    added = 0
    idxset = sorted({idx for t in residuals for idx in t.comps})
    pts = _evaluation_points(bchart, rng, npoints)
    for pt in pts:
        for idx in idxset:
            row = []
            try:
                for t in residuals:
                    e = t.comps.get(idx)
                    row.append(Fraction(0) if e is None else e.coeff(0).evaluate(pt))
            except ZeroDivisionError:
                continue
            if any(row):
                rows.append(row)
                added += 1
    return added


def _collect_value_rows(rows, values, bchart, rng, npoints):
    idxset = sorted({idx for t in values for idx in t.comps})
    pts = _evaluation_points(bchart, rng, npoints)
    for pt in pts:
        for idx in idxset:
            row = []
            try:
                for t in values:
                    e = t.comps.get(idx)
                    row.append(Fraction(0) if e is None else e.coeff(0).evaluate(pt))
            except ZeroDivisionError:
                continue
            if any(row):
                rows.append(row)
