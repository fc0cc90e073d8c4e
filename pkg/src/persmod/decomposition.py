"""Interval decomposition of grid modules.

Multiplicities come from ranks of composite maps by inclusion-exclusion.
``interval_basis`` additionally produces explicit bases realising the
decomposition, which interleaving certificates need.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .modules import Barcode, GridModule, Interval
from .scalars import INF, NEG_INF, Matrix, complement_basis, rank, solve

END_INF = None  # marker for an index interval that never dies


@dataclass(frozen=True, order=True)
class IndexInterval:
    """Half-open run [start, end) of grid indices; end None means forever."""

    start: int
    end: int | None

    def __post_init__(self):
        if self.start < 0 or (self.end is not None and self.end <= self.start):
            raise ValueError(f"bad index interval [{self.start}, {self.end})")

    def contains(self, i: int) -> bool:
        return self.start <= i and (self.end is None or i < self.end)


def rank_table(m: GridModule) -> np.ndarray:
    """r[x, y] = rank of the composite x -> y, for x <= y (zero below the diagonal)."""
    n = m.size
    r = np.zeros((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(x, n):
            r[x, y] = rank(m.composite(x, y)) if m.dims[x] and m.dims[y] else 0
    return r


def index_decompose(m: GridModule) -> Counter:
    """Multiset of IndexInterval as a Counter."""
    n = m.size
    top = n - 1
    r = rank_table(m)

    def rk(x, y):
        return 0 if x < 0 else int(r[x, y])

    out: Counter = Counter()
    for i in range(n):
        for j in range(i + 1, n):
            mult = rk(i, j - 1) - rk(i - 1, j - 1) - rk(i, j) + rk(i - 1, j)
            if mult < 0:
                raise ArithmeticError(f"negative multiplicity for [{i}, {j})")
            if mult:
                out[IndexInterval(i, j)] = mult
        mult = rk(i, top) - rk(i - 1, top)
        if mult < 0:
            raise ArithmeticError(f"negative multiplicity for [{i}, inf)")
        if mult:
            out[IndexInterval(i, END_INF)] = mult
    return out


def realize_endpoints(ii: IndexInterval, grid) -> Interval:
    """Turn an index run into a real interval on an alternating grid.

    An odd start index is a critical value the interval contains; an even one
    means it is born just after the preceding critical value (or at -inf for
    index 0).  Symmetrically for the end.  In the case where both indices are
    even the right end is a_{end/2}, closed; the formula with (end+1)/2 would
    not be an integer index.
    """
    crit = grid[1::2]
    k, l = ii.start, ii.end
    if k == 0:
        lo, lo_closed = NEG_INF, False
    elif k % 2:
        lo, lo_closed = crit[(k + 1) // 2 - 1], True
    else:
        lo, lo_closed = crit[k // 2 - 1], False
    if l is None:
        hi, hi_closed = INF, False
    elif l % 2:
        hi, hi_closed = crit[(l + 1) // 2 - 1], False
    else:
        hi, hi_closed = crit[l // 2 - 1], True
    return Interval(lo, hi, lo_closed, hi_closed)


def decompose(m: GridModule, degree: int = 0) -> Barcode:
    parts = index_decompose(m)
    return Barcode((degree, realize_endpoints(ii, m.grid), mult) for ii, mult in parts.items())


# explicit bases -----------------------------------------------------------

@dataclass
class IntervalBasis:
    """Bases of a grid module adapted to an interval decomposition.

    ``runs[k]`` is the index run of summand k; ``bases[i]`` has one column
    per summand alive at index i, ordered by summand number, and the module's
    transitions send each column to the next column of the same summand (or
    to zero when the summand dies).
    """

    runs: list[IndexInterval]
    bases: list[Matrix]

    def alive(self, i: int) -> list[int]:
        return [k for k, run in enumerate(self.runs) if run.contains(i)]


def interval_basis(m: GridModule) -> IntervalBasis:
    """Compute summand generators by a left-to-right elder-rule sweep."""
    p = m.p
    n = m.size
    # generator vector and birth index per summand; end filled on death
    gens: list[np.ndarray] = []
    births: list[int] = []
    ends: list[int | None] = []

    def vec_at(k: int, i: int) -> np.ndarray:
        v = Matrix._wrap(gens[k].reshape(-1, 1), p)
        return m.composite(births[k], i).__matmul__(v).array[:, 0]

    def new_births(i: int, survivors: list[int]):
        d = m.dims[i]
        if survivors:
            span = Matrix._wrap(np.stack([vec_at(k, i) for k in survivors], axis=1), p)
        else:
            span = Matrix.zeros(d, 0, p)
        comp = complement_basis(span)
        for c in range(comp.cols):
            gens.append(comp.array[:, c].copy())
            births.append(i)
            ends.append(None)

    new_births(0, [])
    for i in range(n - 1):
        alive = sorted((k for k in range(len(gens)) if ends[k] is None), key=lambda k: (births[k], k))
        t = m.transitions[i]
        kept: list[int] = []
        for k in alive:
            img = t @ Matrix._wrap(vec_at(k, i).reshape(-1, 1), p)
            if kept:
                kept_imgs = t @ Matrix._wrap(np.stack([vec_at(j, i) for j in kept], axis=1), p)
                coeffs = solve(kept_imgs, img)
            else:
                coeffs = None if not img.is_zero() else Matrix.zeros(0, 1, p)
            if coeffs is None:
                kept.append(k)
                continue
            # dies: subtract the older survivors so its image is exactly zero
            g = gens[k].copy()
            for c, j in enumerate(kept):
                coef = int(coeffs.array[c, 0])
                if coef:
                    back = Matrix._wrap(vec_at(j, births[k]).reshape(-1, 1), p).array[:, 0]
                    g = (g - coef * back) % p
            gens[k] = g
            ends[k] = i + 1
        new_births(i + 1, kept)
    runs = [IndexInterval(b, e) for b, e in zip(births, ends)]
    bases = []
    for i in range(n):
        cols = [vec_at(k, i) for k in range(len(gens)) if runs[k].contains(i)]
        if cols:
            bases.append(Matrix._wrap(np.stack(cols, axis=1), p))
        else:
            bases.append(Matrix.zeros(m.dims[i], 0, p))
    return IntervalBasis(runs, bases)
