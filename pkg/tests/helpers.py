"""Random generators and slow reference oracles shared by the tests."""

from __future__ import annotations

import bisect
import copy
import random
from fractions import Fraction

import numpy as np

from persmod.distances import interval_distance, interval_interleaving_feasible
from persmod.modules import Barcode, GridModule, Interval, alternating_grid
from persmod.scalars import INF, NEG_INF, Matrix, ext, rank, solve


def rand_value(rng: random.Random, lo: int = 0, hi: int = 6) -> Fraction:
    d = rng.choice((1, 2, 3))
    return Fraction(rng.randint(lo * d, hi * d), d)


def rand_interval(rng: random.Random, allow_infinite: bool = True, allow_empty: bool = True) -> Interval:
    roll = rng.random()
    if allow_empty and roll < 0.05:
        return Interval.empty()
    a, b = sorted((rand_value(rng), rand_value(rng)))
    lo_c, hi_c = rng.random() < 0.5, rng.random() < 0.5
    if a == b:
        lo_c = hi_c = True
    lo, hi = ext(a), ext(b)
    if allow_infinite:
        if roll < 0.15:
            lo, lo_c = NEG_INF, False
        elif roll < 0.3:
            hi, hi_c = INF, False
        elif roll < 0.35:
            return Interval.real_line()
    return Interval(lo, hi, lo_c, hi_c)


def rand_barcode(rng: random.Random, max_bars: int = 5, allow_infinite: bool = True, degree: int = 0) -> Barcode:
    n = rng.randint(0, max_bars)
    return Barcode((degree, rand_interval(rng, allow_infinite, allow_empty=False)) for _ in range(n))


def rand_matrix(rng: random.Random, rows: int, cols: int, p: int) -> Matrix:
    return Matrix([[rng.randrange(p) for _ in range(cols)] for _ in range(rows)], p, shape=(rows, cols))


def rand_invertible(rng: random.Random, n: int, p: int) -> Matrix:
    while True:
        m = rand_matrix(rng, n, n, p)
        if rank(m) == n:
            return m


def rand_grid_module(rng: random.Random, p: int, n_crit: int | None = None, max_dim: int = 3) -> GridModule:
    """Arbitrary representation of an alternating grid: any matrices are allowed."""
    n_crit = rng.randint(0, 4) if n_crit is None else n_crit
    crit = sorted({rand_value(rng, 0, 10) for _ in range(n_crit)})
    grid = alternating_grid(crit)
    dims = [rng.randint(0, max_dim) for _ in grid]
    trans = [rand_matrix(rng, dims[i + 1], dims[i], p) for i in range(len(grid) - 1)]
    return GridModule(grid, dims, trans, p)


def conjugate(m: GridModule, rng: random.Random) -> GridModule:
    ps = [rand_invertible(rng, d, m.p) for d in m.dims]
    inv = [solve(q, Matrix.identity(q.rows, m.p)) for q in ps]
    trans = [ps[i + 1] @ t @ inv[i] for i, t in enumerate(m.transitions)]
    return GridModule(m.grid, m.dims, trans, m.p)


# oracles -------------------------------------------------------------------

def distance_candidates(a: Interval, b: Interval) -> list[Fraction]:
    ends = [e.fraction() for iv in (a, b) if not iv.is_empty for e in (iv.lo, iv.hi) if e.is_finite]
    vals = {Fraction(0)}
    for x in ends:
        for y in ends:
            vals.add(abs(x - y))
            vals.add(abs(x - y) / 2)
    return sorted(vals)


def feasibility_profile(a: Interval, b: Interval) -> list[tuple[Fraction, bool]]:
    """Feasibility at every candidate and at one point of each open cell between them."""
    cands = distance_candidates(a, b)
    probes = []
    for k, c in enumerate(cands):
        nxt = cands[k + 1] if k + 1 < len(cands) else c + 1
        probes += [c, (c + nxt) / 2]
    return [(e, interval_interleaving_feasible(a, b, e)) for e in probes]


def oracle_interval_distance(a: Interval, b: Interval, profile=None):
    """Infimum of feasible eps: the first candidate feasible at itself or just above."""
    profile = profile or feasibility_profile(a, b)
    for k in range(0, len(profile), 2):
        if profile[k][1] or profile[k + 1][1]:
            return ext(profile[k][0])
    return INF


def brute_bottleneck(a: list[Interval], b: list[Interval]):
    """Minimum cost over every partial matching, by exhaustive recursion."""
    cost = [[interval_distance(x, y) for y in b] for x in a]
    half_a = [x.half_length for x in a]
    half_b = [y.half_length for y in b]
    best = [None]

    def go(i, used, worst):
        if i == len(a):
            total = max([worst] + [half_b[j] for j in range(len(b)) if j not in used])
            if best[0] is None or total < best[0]:
                best[0] = total
            return
        go(i + 1, used, max(worst, half_a[i]))
        for j in range(len(b)):
            if j not in used:
                go(i + 1, used | {j}, max(worst, cost[i][j]))

    go(0, frozenset(), ext(0))
    return best[0]


def _lookup(grid, x):
    """Index of x on an alternating grid, by direct comparison with its points."""
    crit = [grid[i] for i in range(1, len(grid), 2)]
    k = bisect.bisect_right(crit, x)
    if k and crit[k - 1] == x:
        return 2 * k - 1
    return 2 * k


def slow_verify(c, f: GridModule, g: GridModule) -> bool:
    """Reference interleaving check: naturality over all ordered pairs of sample points."""
    eps = c.epsilon.fraction()
    cuts = set()
    for grid in (c.phi_grid, c.psi_grid, f.grid, g.grid):
        for x in grid[1::2]:
            for k in (0, 1, 2, 3):
                cuts.add(x.fraction() - k * eps)
    pts = [ext(x) for x in alternating_grid(sorted(cuts))]

    def phi(x):
        return c.phi[_lookup(c.phi_grid, x)]

    def psi(x):
        return c.psi[_lookup(c.psi_grid, x)]

    for dom, cod, mp in ((f, g, phi), (g, f, psi)):
        for x in pts:
            m = mp(x)
            if m.shape != (cod.dim_at(x + eps), dom.dim_at(x)):
                return False
        for i, x in enumerate(pts):
            for y in pts[i:]:
                lhs = cod.map_between(x + eps, y + eps) @ mp(x)
                rhs = mp(y) @ dom.map_between(x, y)
                if lhs != rhs:
                    return False
    for x in pts:
        if psi(x + eps) @ phi(x) != f.map_between(x, x + 2 * eps):
            return False
        if phi(x + eps) @ psi(x) != g.map_between(x, x + 2 * eps):
            return False
    return True


def corrupt(c, rng: random.Random):
    """Copy of a certificate with one matrix entry changed, or None if it has no entries."""
    slots = [(name, k) for name in ("phi", "psi") for k, m in enumerate(getattr(c, name)) if m.rows and m.cols]
    if not slots:
        return None
    name, k = rng.choice(slots)
    m = getattr(c, name)[k]
    a = np.array(m.array)
    r, s = rng.randrange(m.rows), rng.randrange(m.cols)
    a[r, s] = (a[r, s] + rng.randrange(1, m.p)) % m.p
    out = copy.copy(c)
    maps = list(getattr(c, name))
    maps[k] = Matrix(a.tolist(), m.p, shape=m.shape)
    setattr(out, name, maps)
    return out
