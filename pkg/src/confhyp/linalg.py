"""Exact linear algebra over the rationals: RREF, rank, nullspace."""

from __future__ import annotations

from fractions import Fraction


def rref(rows):
    """Reduced row echelon form (in place on copies); returns (rref, pivots)."""
    m = [list(map(Fraction, row)) for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[0])


def nullspace(rows, ncols=None):
    """Basis of the right nullspace, as lists of Fractions."""
    if not rows:
        if ncols is None:
            raise ValueError("need ncols for an empty system")
        basis = []
        for j in range(ncols):
            v = [Fraction(0)] * ncols
            v[j] = Fraction(1)
            basis.append(v)
        return basis
    ncols = len(rows[0])
    red, pivots = rref(rows)
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for rrow, pc in zip(red, pivots):
            v[pc] = -rrow[fc]
        basis.append(v)
    return basis


def solve_homogeneous_sample(rows, ncols, rng):
    """A random rational element of the nullspace (zero vector if trivial)."""
    basis = nullspace(rows, ncols)
    if not basis:
        return [Fraction(0)] * ncols
    out = [Fraction(0)] * ncols
    for v in basis:
        c = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        out = [a + c * b for a, b in zip(out, v)]
    return out
