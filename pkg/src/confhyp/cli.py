"""Command-line entry point and machine-readable run reports.

Spec files are JSON: a bulk metric block (component expression strings)
or a boundary metric block with an optional free Neumann coefficient, a
truncation order, a seed, and a task selector.  Reports are deterministic
given (spec, seed); every verdict is an exact zero-test, and exit codes
are 0 (pass), 1 (check failed), 2 (bad input).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import backgrounds as bgs
from .classify import D6_BASIS_NAMES, d6_candidates, invariant_nullspace
from .conformal import WeightedQuantity, invariance_check, random_omega, transverse_order_probe
from .curvature import CurvatureBundle, ape_order
from .dn import (DNResult, check_dn_shape, divergence_check, dn4, dn5, dn6_appendix_form,
                 dn6_riemannian, dn6_tractor, dn_even_leading, dn_from_expansion,
                 dn_odd_tractor, fourth_fundamental_form, proportionality_constant)
from .expr import BudgetExhausted, Chart
from .fg import ObstructionError, fg_expand
from .hypersurface import DefiningFunctionError, build_hypersurface
from .parser import ParseError, parse_expr, print_expr
from .tensor import MetricData, TensorField
from .tractor import pe_check

SCHEMA_VERSION = "1"

TASKS = ("curvature", "hypersurface", "pe-check", "fg-expand", "dn", "classify",
         "verify-all")


class SpecError(ValueError):
    pass


def _build_chart(spec) -> Chart:
    coords = spec.get("coordinates")
    if not coords:
        raise SpecError("spec needs 'coordinates'")
    radial = spec.get("boundary_coordinate")
    order = int(spec.get("order", 8))
    try:
        return Chart(tuple(coords), radial=radial, order=order)
    except ValueError as exc:
        raise SpecError(str(exc))


def _parse_matrix(chart, rows, label) -> TensorField:
    d = len(rows)
    comps = {}
    for i, row in enumerate(rows):
        if len(row) != d:
            raise SpecError(f"{label} matrix is not square")
        for j, text in enumerate(row):
            try:
                e = parse_expr(text, chart)
            except ParseError as exc:
                raise SpecError(f"{label}[{i}][{j}]: {exc}")
            if e.coeffs:
                comps[(i, j)] = e
    t = TensorField(chart, "dd", comps)
    sym = t - t.permute((1, 0))
    if not sym.is_zero():
        raise SpecError(f"{label} matrix is not symmetric")
    return t


def _metric_from_spec(spec) -> MetricData:
    chart = _build_chart(spec)
    rows = spec.get("metric")
    if rows is None:
        raise SpecError("task needs a 'metric' block")
    if len(rows) != chart.dim:
        raise SpecError("metric size does not match the chart dimension")
    return MetricData(_parse_matrix(chart, rows, "metric"))


def _boundary_data_from_spec(spec):
    d = int(spec.get("dimension", 0))
    if d < 3:
        raise SpecError("spec needs 'dimension' >= 3")
    order = int(spec.get("order", d + 3))
    seed = int(spec.get("seed", 0))
    bm = spec.get("boundary_metric")
    if bm is None:
        gbar = bgs.flat_boundary(d - 1, order=order)
    elif bm == "flat":
        gbar = bgs.flat_boundary(d - 1, order=order)
    elif bm == "unimodular-random":
        gbar = bgs.unimodular_boundary(d - 1, seed=seed, order=order)
    elif bm == "conformally-flat-random":
        gbar = bgs.conformally_flat_boundary(d - 1, seed=seed, order=order)
    else:
        chart = bgs.boundary_chart(d - 1, order=order)
        gbar = MetricData(_parse_matrix(chart, bm, "boundary_metric"))
    free = None
    fc = spec.get("free_coefficient")
    if fc == "random":
        free = bgs.constant_tt_tensor(gbar, seed)
    elif fc == "random-tt":
        free = bgs.tt_tensor(gbar, seed)
    elif isinstance(fc, dict):
        k = int(fc.get("order", d - 1))
        if k != d - 1:
            raise SpecError(f"free coefficient must sit at order {d - 1}")
        free = _parse_matrix(gbar.chart, fc["components"], "free_coefficient")
    return d, order, seed, gbar, free


def _expression_defining_function(spec, metric):
    text = spec.get("defining_function")
    if text is None:
        if metric.chart.radial is None:
            raise SpecError("spec needs a 'defining_function' or a radial chart")
        return metric.chart.coord(metric.chart.radial)
    return parse_expr(text, metric.chart)


class Report:
    def __init__(self, task, spec):
        self.data = {
            "schema_version": SCHEMA_VERSION,
            "task": task,
            "inputs": {k: v for k, v in spec.items() if k != "metric_data"},
            "checks": [],
            "results": {},
        }
        self._t0 = time.time()

    def check(self, name, passed, detail=None):
        entry = {"name": name, "passed": bool(passed)}
        if detail is not None:
            entry["detail"] = detail
        self.data["checks"].append(entry)
        return passed

    def result(self, key, value):
        self.data["results"][key] = value

    def finish(self):
        self.data["elapsed_seconds"] = round(time.time() - self._t0, 3)
        self.data["passed"] = all(c["passed"] for c in self.data["checks"])
        return self.data


def _tensor_strings(t: TensorField):
    out = {}
    for idx, e in sorted(t.comps.items()):
        out[",".join(map(str, idx))] = print_expr(e)
    return out


def _order_str(v, cap):
    return f">={cap}" if v is None else str(v)


# -- tasks ------------------------------------------------------------------

def task_curvature(spec, args):
    rep = Report("curvature", spec)
    gm = _metric_from_spec(spec)
    b = CurvatureBundle(gm)
    d = gm.dim
    rep.result("scalar_curvature", print_expr(b.scalar))
    divp = b.cov_deriv(b.schouten).contract(0, 1, gm)
    dj_comps = {}
    for a, name in enumerate(gm.chart.coords):
        e = b.schouten_trace.derive(name)
        if e.coeffs:
            dj_comps[(a,)] = e
    dj = TensorField(gm.chart, "d", dj_comps, 0, divp.prec)
    rep.check("schouten_divergence_is_dJ", (divp - dj).is_zero())
    divw = b.cov_deriv(b.weyl).contract(0, 3, gm)
    rep.check("weyl_divergence_is_cotton", (divw - b.cotton.scale(d - 3)).is_zero())
    if d >= 4:
        rep.check("bach_forms_agree", (b.bach - b.bach_from_weyl).is_zero())
    return rep.finish()


def task_hypersurface(spec, args):
    rep = Report("hypersurface", spec)
    gm = _metric_from_spec(spec)
    s = _expression_defining_function(spec, gm)
    hyp = build_hypersurface(gm, s)
    rep.result("mean_curvature", print_expr(hyp.mean_curvature.restrict_boundary()))
    gauss, cod = hyp.gauss_codazzi_residuals()
    rep.check("gauss_residual_zero", gauss.is_zero())
    rep.check("codazzi_residual_zero", cod.is_zero())
    if gm.dim >= 4:
        rep.check("fialkow_forms_agree", (hyp.fialkow - hyp.fialkow_from_weyl).is_zero())
        tr = hyp.fialkow.contract(0, 1, hyp.induced_metric).comps.get(())
        n2 = gm.norm_sq(hyp.trace_free_second_fundamental).restrict_boundary()
        lhs = tr if tr is not None else n2.chart.zero()
        rep.check("fialkow_trace_identity",
                  (lhs - n2 * Fraction(1, 2 * (gm.dim - 2))).is_zero())
    return rep.finish()


def task_pe_check(spec, args):
    rep = Report("pe-check", spec)
    gm = _metric_from_spec(spec)
    s = _expression_defining_function(spec, gm)
    out = pe_check(gm, s)
    rep.check("scale_tractor_parallel", out.parallel_order is None,
              {"residual_order": _order_str(out.parallel_order, out.prec)})
    rep.check("scale_tractor_unit_norm", out.norm_order is None)
    if out.boundary_match is not None:
        rep.check("normal_tractor_matches", out.boundary_match)
    rep.result("certified_order", out.prec)
    return rep.finish()


def task_fg_expand(spec, args):
    rep = Report("fg-expand", spec)
    d, order, seed, gbar, free = _boundary_data_from_spec(spec)
    exp = fg_expand(gbar, d, order, free_coeff=free)
    for k in sorted(exp.coefficients):
        if k:
            rep.result(f"coefficient_r{k}", _tensor_strings(exp.coefficients[k]))
    res, cap = exp.einstein_residual()
    rep.result("einstein_residual_order", _order_str(res, cap))
    rep.check("residual_reaches_solved_order", res is None or res >= order - 2,
              {"order": _order_str(res, cap)})
    hyp = build_hypersurface(exp.metric, exp.chart.coord("r"))
    rep.check("umbilic", hyp.trace_free_second_fundamental.restrict_sigma().is_zero())
    # n^2 + 2 rho sigma = 1 in the scale [g_r; r]
    out = pe_check(exp.metric, exp.chart.coord("r"), check_boundary=False)
    rep.check("scale_tractor_unit_norm", out.norm_order is None or out.norm_order >= order - 2,
              {"order": _order_str(out.norm_order, out.prec)})
    return rep.finish()


def task_dn(spec, args):
    rep = Report("dn", spec)
    d, order, seed, gbar, free = _boundary_data_from_spec(spec)
    if free is None:
        free = bgs.constant_tt_tensor(gbar, seed)
    exp = fg_expand(gbar, d, order, free_coeff=free)
    hyp = build_hypersurface(exp.metric, exp.chart.coord("r"))
    lie = exp.lie_coefficient(d - 1)
    if d == 4:
        res = dn4(hyp)
        rep.check("lie3_equals_minus4_dn", (lie + res.tensor.scale(4)).is_zero())
        iv = fourth_fundamental_form(hyp)
        rep.check("fourth_form_equals_dn", (iv - res.tensor).is_zero())
    elif d == 5:
        res = dn5(hyp)
        c = proportionality_constant(res.tensor, lie)
        rep.check("proportional_to_lie4", c is not None, {"constant": str(c)})
        rep.result("constant_vs_lie", str(c))
    elif d == 6:
        res = dn6_riemannian(hyp)
        r2 = dn6_appendix_form(hyp)
        rep.check("appendix_form_agrees", (res.tensor - r2.tensor).is_zero())
        c = proportionality_constant(res.tensor, lie)
        rep.check("proportional_to_lie5", c is not None, {"constant": str(c)})
        rt = dn6_tractor(hyp)
        ct = proportionality_constant(rt.tensor, res.tensor)
        rep.check("tractor_proportional", ct is not None and ct != 0,
                  {"constant": str(ct)})
        rep.result("tractor_constant", str(ct))
    elif d == 7:
        res = dn_odd_tractor(hyp, 7)
        c = proportionality_constant(res.tensor, lie)
        rep.check("proportional_to_lie6", c is not None and c != 0, {"constant": str(c)})
        rep.result("constant_vs_lie", str(c))
    elif d == 8:
        res = dn_even_leading(hyp, 8)
        c = proportionality_constant(res.tensor, lie)
        rep.check("leading_term_proportional_to_lie7", c is not None and c != 0,
                  {"constant": str(c)})
        rep.result("constant_vs_lie", str(c))
    else:
        raise SpecError(f"dn task supports dimensions 4..8, got {d}")
    rep.check("dn_shape", check_dn_shape(res, hyp))
    rep.check("divergence_free", divergence_check(res, hyp).is_zero())
    rep.result("dn_tensor", _tensor_strings(res.tensor))
    if spec.get("probe"):
        builders = {
            4: lambda g, s: dn4(build_hypersurface(g, s)).tensor,
            5: lambda g, s: dn5(build_hypersurface(g, s),
                                require_flat_boundary=False).tensor,
            6: lambda g, s: dn6_riemannian(build_hypersurface(g, s)).tensor,
        }
        if d in builders:
            q = WeightedQuantity(f"dn{d}", builders[d], 3 - d)
            order_found = transverse_order_probe(
                q, exp.metric, exp.chart.coord("r"),
                kmax=d, kmin=d - 1, seeds=(0, 1))
            rep.result("transverse_order", order_found)
            rep.check("transverse_order_is_dminus1", order_found == d - 1)
            # sensitivity within the expansion class: varying the free slot
            other = fg_expand(gbar, d, order,
                              free_coeff=bgs.constant_tt_tensor(gbar, seed + 101))
            res2 = builders[d](other.metric, other.chart.coord("r"))
            rep.check("sensitive_to_free_coefficient",
                      not (res2 - res.tensor).is_zero())
    return rep.finish()


def task_classify(spec, args):
    rep = Report("classify", spec)
    d = int(spec.get("dimension", 6))
    if d != 6:
        raise SpecError("the frozen classifier basis is for dimension 6")
    order = int(spec.get("order", 7))
    seed = int(spec.get("seed", 0))
    samples = int(getattr(args, "samples", None) or spec.get("samples", 3))
    omega_degree = int(getattr(args, "omega_degree", None) or spec.get("omega_degree", 1))
    backgrounds = []
    for i in range(max(2, samples - 1)):
        gbar = bgs.unimodular_boundary(5, seed=seed + i, order=order + 1,
                                       degree=2, entries=2)
        bg = bgs.fg_background(6, order, gbar=gbar, seed=seed + i, with_free=False)
        backgrounds.append((bg.metric, bg.s))
    bgf = bgs.fg_background(6, order, seed=seed + 91)
    backgrounds.append((bgf.metric, bgf.s))

    from .classify import truncate_metric

    def cand_fn(metric, s):
        # the candidates only see low series orders; trim before the suite
        return d6_candidates(build_hypersurface(truncate_metric(metric, 6), s))

    run = invariant_nullspace(cand_fn, backgrounds, weight=-3,
                              omegas_per_bg=2, points_per_sample=2,
                              seed=seed, omega_degree=omega_degree)
    rep.result("basis", list(D6_BASIS_NAMES))
    rep.result("nullspace_dimension", len(run.null_vectors))
    rep.result("value_matrix_rank", run.value_rank)
    rep.result("rows", run.rows)
    rep.check("nullspace_is_one_dimensional", len(run.null_vectors) == 1)
    rep.check("rank_stable", run.stable)
    v = run.normalized_vector
    if v is not None:
        rep.result("normalized_vector", [str(c) for c in v])
        expected = {0: Fraction(1), 7: Fraction(-4), 8: Fraction(4)}
        ok = all(c == expected.get(i, 0) for i, c in enumerate(v))
        rep.check("vector_is_1_m4_4", ok)
    rep.check("candidates_linearly_independent", run.value_rank == len(D6_BASIS_NAMES))
    return rep.finish()


def _battery_metric(d, seed, order, terms=3, degree=1):
    """Seeded boundary-normal-form metric for the property battery."""
    import random as _random
    from .expr import Chart, ScalarExpr
    chart = Chart(("r",) + tuple(f"x{i}" for i in range(1, d)), radial="r", order=order)
    rng = _random.Random(seed)
    one = chart.one()
    r = chart.coord("r")

    def mono():
        m = chart.const(Fraction(rng.randint(1, 2), rng.randint(1, 3))
                        * rng.choice((1, -1)))
        for _ in range(rng.randint(1, degree)):
            m = m * chart.coord(rng.choice(chart.coords))
        return m

    comps = {(a, a): one for a in range(d)}
    for _ in range(terms):
        a = rng.randrange(d)
        b = rng.randrange(d)
        p = mono() * r
        comps[(a, b)] = comps.get((a, b), chart.zero()) + p
        if a != b:
            comps[(b, a)] = comps.get((b, a), chart.zero()) + p
    comps[(1, 1)] = comps[(1, 1)] + mono()
    return MetricData(_parse_or_keep(chart, comps))


def _parse_or_keep(chart, comps):
    return TensorField(chart, "dd", comps)


def _check_identities(rep, d, seed, order):
    from .hypersurface import reconstruct_rnanb, rnanb_direct
    gm = _battery_metric(d, seed, order)
    b = CurvatureBundle(gm)
    divp = b.cov_deriv(b.schouten).contract(0, 1, gm)
    dj = {}
    for a, name in enumerate(gm.chart.coords):
        e = b.schouten_trace.derive(name)
        if e.coeffs:
            dj[(a,)] = e
    djt = TensorField(gm.chart, "d", dj, 0, divp.prec)
    rep.check(f"d{d}:schouten_divergence_is_dJ", (divp - djt).is_zero())
    divw = b.cov_deriv(b.weyl).contract(0, 3, gm)
    rep.check(f"d{d}:weyl_divergence_is_cotton",
              (divw - b.cotton.scale(d - 3)).is_zero())
    divb = b.cov_deriv(b.bach).contract(0, 1, gm)
    p_up = b.schouten.raise_lower(0, gm).raise_lower(1, gm)
    pc = p_up.outer(b.cotton).contract(1, 4).contract(0, 2).scale(d - 4)
    rep.check(f"d{d}:bach_divergence", (divb - pc).is_zero())
    if d == 5:
        rep.check(f"d{d}:bach_forms_agree", (b.bach - b.bach_from_weyl).is_zero())
    hyp = build_hypersurface(gm, gm.chart.coord("r"))
    gauss, cod = hyp.gauss_codazzi_residuals()
    rep.check(f"d{d}:gauss_residual_zero", gauss.is_zero())
    rep.check(f"d{d}:codazzi_residual_zero", cod.is_zero())
    rep.check(f"d{d}:fialkow_forms_agree",
              (hyp.fialkow - hyp.fialkow_from_weyl).is_zero())
    rep.check(f"d{d}:rnanb_reconstruction",
              (reconstruct_rnanb(hyp) - rnanb_direct(hyp)).is_zero())


def _check_fg_constraints(rep, d, seed, order):
    gbar = bgs.flat_boundary(d - 1, order=order)
    free = bgs.constant_tt_tensor(gbar, seed)
    exp = fg_expand(gbar, d, order, free_coeff=free)
    hyp = build_hypersurface(exp.metric, exp.chart.coord("r"))
    rep.check(f"d{d}:fg_umbilic",
              hyp.trace_free_second_fundamental.restrict_sigma().is_zero())
    out = pe_check(exp.metric, exp.chart.coord("r"), check_boundary=False)
    rep.check(f"d{d}:fg_scale_tractor_norm", out.norm_order is None)
    rep.check(f"d{d}:fg_parallel_to_order",
              out.parallel_order is None or out.parallel_order >= order - 3,
              {"order": _order_str(out.parallel_order, out.prec)})


def _check_linearizations(rep, d, seed, qmax):
    import random as _random
    from .conformal import (bach_linearization_residual,
                            riemann_linearization_residual,
                            random_symmetric_perturbation,
                            weyl_linearization_residual)
    order = max(qmax + 2, 7)
    gm = _battery_metric(d, seed, order, terms=2, degree=1)
    s = gm.chart.coord("r")
    hyp = build_hypersurface(gm, s)
    rng = _random.Random(seed + 1)
    h = random_symmetric_perturbation(gm.chart, rng, degree=1, radial_soften=True)
    for q in range(2, qmax + 1):
        ok = riemann_linearization_residual(gm, s, hyp.nhat, q, h).is_zero()
        rep.check(f"d{d}:riemann_linearization_q{q}", ok)
    rep.check(f"d{d}:weyl_linearization_q4",
              weyl_linearization_residual(gm, s, hyp, 4, h).is_zero())
    for ell in range(4, qmax + 1):
        ok = bach_linearization_residual(gm, s, hyp, ell, h).is_zero()
        rep.check(f"d{d}:bach_linearization_q{ell}", ok)


def _check_delta_orders(rep, d, seed, kmax=3):
    import random as _random
    from .tractor import TractorCalculus, TractorField
    gm = _battery_metric(d, seed, order=2 * kmax + 3, terms=2, degree=1)
    chart = gm.chart
    calc = TractorCalculus(gm)
    r = chart.coord("r")
    rng = _random.Random(seed)

    def density(w, van):
        e = chart.one() + chart.coord(rng.choice(chart.coords[1:])) * Fraction(1, 2)
        return TractorField(gm, (), {(): e * r ** van if van else e}, w)

    wgen = kmax  # generic: outside every excluded list for k <= kmax
    for k in range(1, kmax + 1):
        hit = calc.delta_k(density(wgen, k), k, r)
        miss = calc.delta_k(density(wgen, k + 1), k, r)
        rep.check(f"d{d}:delta_{k}_transverse_order",
                  (not hit.is_zero()) and miss.is_zero())
    # excluded weight: delta_1 at w = (2-d)/2 drops order (d even only here)
    if d % 2 == 0:
        wex = (2 - d) // 2
        dropped = calc.delta_k(density(wex, 1), 1, r)
        rep.check(f"d{d}:delta_1_drops_at_excluded_weight", dropped.is_zero())
    return rep


def task_verify_all(spec, args):
    rep = Report("verify-all", spec)
    checks = spec.get("checks", ["smoke"])
    seed = int(spec.get("seed", 0))
    d = int(spec.get("dimension", 4))
    order = int(spec.get("order", 5))
    for selector in checks:
        if selector == "identities":
            _check_identities(rep, d, seed, order)
        elif selector == "fg-constraints":
            _check_fg_constraints(rep, d, seed, max(order, d + 2))
        elif selector == "linearizations":
            _check_linearizations(rep, d, seed, int(spec.get("max_order", 5)))
        elif selector == "delta-orders":
            _check_delta_orders(rep, d, seed)
        elif selector == "smoke":
            for base in (
                {"task": "pe-check", "coordinates": ["r", "x1", "x2", "x3"],
                 "boundary_coordinate": "r", "order": 5,
                 "metric": _flat_matrix(4),
                 "defining_function": "(1 - r^2 - x1^2 - x2^2 - x3^2)/2"},
                {"task": "dn", "dimension": 4, "order": 7, "seed": seed},
            ):
                out = run_task(base, args)
                rep.check(f"sub:{base['task']}", out["passed"])
        else:
            raise SpecError(f"unknown verify-all selector {selector!r}")
    return rep.finish()


def _flat_matrix(d):
    return [["1" if i == j else "0" for j in range(d)] for i in range(d)]


_TASKS = {
    "curvature": task_curvature,
    "hypersurface": task_hypersurface,
    "pe-check": task_pe_check,
    "fg-expand": task_fg_expand,
    "dn": task_dn,
    "classify": task_classify,
    "verify-all": task_verify_all,
}


def run_task(spec: dict, args=None):
    task = spec.get("task")
    if task not in _TASKS:
        raise SpecError(f"unknown task {task!r} (expected one of {TASKS})")
    if args is None:
        args = argparse.Namespace(samples=None, omega_degree=None)
    return _TASKS[task](spec, args)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="confhyp",
        description="Exact conformal-hypersurface and expansion engine")
    ap.add_argument("specfile", help="JSON spec file (see README for the format)")
    ap.add_argument("--task", help="override the task selector in the spec")
    ap.add_argument("--order", type=int, help="override the truncation order")
    ap.add_argument("--seed", type=int, help="override the seed")
    ap.add_argument("--samples", type=int, help="sample count for classify")
    ap.add_argument("--omega-degree", dest="omega_degree", type=int,
                    help="polynomial degree of conformal factors")
    ap.add_argument("--out", help="also write the JSON report to this path")
    args = ap.parse_args(argv)
    try:
        with open(args.specfile) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": f"cannot read spec: {exc}"}), file=sys.stderr)
        return 2
    for key in ("task", "order", "seed"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    try:
        report = run_task(spec, args)
    except (SpecError, ParseError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}, indent=2))
        return 2
    except (ObstructionError, BudgetExhausted, DefiningFunctionError) as exc:
        print(json.dumps({"error": str(exc), "kind": type(exc).__name__}, indent=2))
        return 2
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
