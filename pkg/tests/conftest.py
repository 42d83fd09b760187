import random
from fractions import Fraction

import pytest

from confhyp.backgrounds import fg_background
from confhyp.expr import Chart
from confhyp.tensor import MetricData, TensorField


@pytest.fixture(scope="session")
def chart4():
    return Chart(("r", "x1", "x2", "x3"), radial="r", order=6)


@pytest.fixture(scope="session")
def chart5():
    return Chart(("r", "x1", "x2", "x3", "x4"), radial="r", order=5)


@pytest.fixture(scope="session")
def flat4(chart4):
    one = chart4.one()
    return MetricData(TensorField(chart4, "dd", {(a, a): one for a in range(4)}))


def random_metric(chart, seed, order_terms=5, degree=2, rr_square=True):
    """Boundary-normal-form metric: r^0 block split as (omega^2, tangential),
    generic polynomial corrections at order r."""
    rng = random.Random(seed)
    d = chart.dim
    one = chart.one()
    r = chart.coord(chart.radial)

    def mono(maxdeg=degree):
        m = chart.const(Fraction(rng.randint(1, 2), rng.randint(1, 3)) * rng.choice((1, -1)))
        for _ in range(rng.randint(1, maxdeg)):
            m = m * chart.coord(rng.choice(chart.coords))
        return m

    comps = {(a, a): one for a in range(d)}
    if rr_square:
        om0 = one + chart.coord(chart.coords[1]) * chart.coord(chart.coords[2]) * Fraction(1, 3)
        comps[(0, 0)] = om0 * om0
    for _ in range(order_terms):
        a = rng.randrange(d)
        b = rng.randrange(d)
        p = mono() * r
        comps[(a, b)] = comps.get((a, b), chart.zero()) + p
        if a != b:
            comps[(b, a)] = comps.get((b, a), chart.zero()) + p
    for i in (1, 2):
        comps[(i, i)] = comps[(i, i)] + mono()
    return MetricData(TensorField(chart, "dd", comps))


_BG_CACHE = {}


def cached_background(d, order, seed=0, **kw):
    key = (d, order, seed, tuple(sorted(kw)))
    if key not in _BG_CACHE:
        _BG_CACHE[key] = fg_background(d, order, seed=seed, **kw)
    return _BG_CACHE[key]
