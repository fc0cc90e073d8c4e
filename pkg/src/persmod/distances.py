"""Interleaving and bottleneck distances.

All thresholds are exact rationals.  Interval distances come from closed
formulas; ``interval_interleaving_feasible`` decides directly whether two
interval modules are eps-interleaved and serves as an independent check on
those formulas.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .decomposition import decompose, interval_basis, realize_endpoints
from .modules import Barcode, GridModule, Interval, alternating_grid
from .scalars import INF, ExtendedRational, Matrix, ext, solve


# interval pairs -----------------------------------------------------------

def interval_distance(a: Interval, b: Interval) -> ExtendedRational:
    """Interleaving distance between two interval modules.

    Endpoint flags are ignored: the value depends only on the endpoints.
    """
    if a.is_finite and b.is_finite:
        if a.is_empty and b.is_empty:
            return ext(0)
        if b.is_empty:
            return a.half_length
        if a.is_empty:
            return b.half_length
        shift = max(abs(a.lo - b.lo), abs(a.hi - b.hi))
        return min(shift, max(a.half_length, b.half_length))
    if a.is_empty or b.is_empty:
        return INF
    down_a, down_b = not a.lo.is_finite, not b.lo.is_finite
    up_a, up_b = not a.hi.is_finite, not b.hi.is_finite
    if down_a and down_b and up_a and up_b:
        return ext(0)
    if down_a and down_b and not up_a and not up_b:
        return abs(a.hi - b.hi)
    if up_a and up_b and not down_a and not down_b:
        return abs(a.lo - b.lo)
    return INF


def _sample_points(values: set) -> list[int]:
    """One point per cell of the partition of the line cut at even integers ``values``."""
    crit = sorted(values)
    if not crit:
        return [0]
    pts = [crit[0] - 1]
    for k, c in enumerate(crit):
        pts.append(c)
        pts.append((c + crit[k + 1]) // 2 if k + 1 < len(crit) else c + 1)
    return pts


def _member(iv: Interval, scale: int):
    """Membership on integers scaled by ``scale``; infinite ends become float infinities."""
    if iv.is_empty:
        return lambda x: False
    lo = int(iv.lo.fraction() * scale) if iv.lo.is_finite else -math.inf
    hi = int(iv.hi.fraction() * scale) if iv.hi.is_finite else math.inf
    lc, hc = iv.lo_closed, iv.hi_closed
    return lambda x: (lo < x or (lc and x == lo)) and (x < hi or (hc and x == hi))


def _hom_nonzero(i_in: list[bool], j_in: list[bool]) -> bool:
    """Is 'identity on the overlap' a morphism chi_I -> chi_J?

    Checked over ordered sample points: the overlap must be non-empty, closed
    downward inside I and closed upward inside J.
    """
    both = [x and y for x, y in zip(i_in, j_in)]
    if not any(both):
        return False
    seen_both = False
    for x, y, z in zip(i_in, j_in, both):
        if seen_both and y and not x:
            return False
        seen_both = seen_both or z
    seen_i_only = False
    for x, y, z in zip(i_in, j_in, both):
        if z and seen_i_only:
            return False
        seen_i_only = seen_i_only or (x and not y)
    return True


def interleaving_witness(a: Interval, b: Interval, eps) -> tuple[bool, bool] | None:
    """Scalars (phi nonzero, psi nonzero) of an eps-interleaving, or None.

    Morphisms between interval modules are multiples of the identity on the
    overlap, so up to rescaling the only candidates are 0 and 1.
    """
    eps = ext(eps)
    if not eps.is_finite or eps < 0:
        raise ValueError(f"eps must be a finite non-negative rational, got {eps}")
    ends = {x.fraction() for iv in (a, b) if not iv.is_empty for x in (iv.lo, iv.hi) if x.is_finite}
    # scale so every cut is an even integer and midpoints stay integral
    scale = 2 * math.lcm(eps.fraction().denominator, *(x.denominator for x in ends))
    e = int(eps.fraction() * scale)
    pts = _sample_points({int(x * scale) - k * e for x in ends for k in (0, 1, 2)})
    in_a, in_b = _member(a, scale), _member(b, scale)
    a_in = [in_a(x) for x in pts]
    b_in = [in_b(x) for x in pts]
    b_sh = [in_b(x + e) for x in pts]      # x in b - eps
    a_sh = [in_a(x + e) for x in pts]      # x in a - eps
    a_sh2 = [in_a(x + 2 * e) for x in pts]
    b_sh2 = [in_b(x + 2 * e) for x in pts]
    phi_ok = _hom_nonzero(a_in, b_sh)
    psi_ok = _hom_nonzero(b_in, a_sh)
    for phi in (False, True):
        if phi and not phi_ok:
            continue
        for psi in (False, True):
            if psi and not psi_ok:
                continue
            good = True
            for k in range(len(pts)):
                if a_in[k] and a_sh2[k] and not (phi and psi and b_sh[k]):
                    good = False
                    break
                if b_in[k] and b_sh2[k] and not (phi and psi and a_sh[k]):
                    good = False
                    break
            if good:
                return phi, psi
    return None


def interval_interleaving_feasible(a: Interval, b: Interval, eps) -> bool:
    return interleaving_witness(a, b, eps) is not None


# bottleneck -------------------------------------------------------------

@dataclass
class PartialMatching:
    pairs: list[tuple[Interval, Interval]] = field(default_factory=list)
    unmatched_a: list[Interval] = field(default_factory=list)
    unmatched_b: list[Interval] = field(default_factory=list)

    def cost(self) -> ExtendedRational:
        costs = [interval_distance(x, y) for x, y in self.pairs]
        costs += [x.half_length for x in self.unmatched_a + self.unmatched_b]
        return max(costs, default=ext(0))


def _perfect_matching(n_left: int, n_right: int, adj: list[list[int]]) -> list[int] | None:
    """Augmenting-path matching; returns match_of_left or None if not perfect."""
    match_r = [-1] * n_right
    match_l = [-1] * n_left

    def augment(u, seen):
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_r[v] == -1 or augment(match_r[v], seen):
                match_r[v] = u
                match_l[u] = v
                return True
        return False

    for u in range(n_left):
        if not augment(u, [False] * n_right):
            return None
    return match_l


def _match(a: Sequence[Interval], b: Sequence[Interval],
           pair_ok: Callable[[int, int], bool], a_free: Callable[[int], bool],
           b_free: Callable[[int], bool]) -> PartialMatching | None:
    n, m = len(a), len(b)
    # left: a items then one empty slot per b item; right: b items then one per a item
    adj: list[list[int]] = []
    for i in range(n):
        row = [j for j in range(m) if pair_ok(i, j)]
        if a_free(i):
            row.append(m + i)
        adj.append(row)
    for j in range(m):
        row = [j] if b_free(j) else []
        row += [m + i for i in range(n)]
        adj.append(row)
    got = _perfect_matching(n + m, n + m, adj)
    if got is None:
        return None
    out = PartialMatching()
    for i in range(n):
        v = got[i]
        if v < m:
            out.pairs.append((a[i], b[v]))
        else:
            out.unmatched_a.append(a[i])
    for j in range(m):
        if got[n + j] == j:
            out.unmatched_b.append(b[j])
    return out


def _intervals(x, degree):
    if isinstance(x, Barcode):
        return x.intervals(degree)
    return list(x)


def bottleneck_candidates(a: Sequence[Interval], b: Sequence[Interval]) -> list[ExtendedRational]:
    vals = {ext(0)}
    vals.update(interval_distance(x, y) for x in a for y in b)
    vals.update(x.half_length for x in list(a) + list(b))
    return sorted(v for v in vals if v.is_finite)


def bottleneck(a, b, degree: int = 0) -> tuple[ExtendedRational, PartialMatching]:
    """Exact bottleneck distance in one degree, with an optimal matching."""
    a, b = _intervals(a, degree), _intervals(b, degree)
    cost = [[interval_distance(x, y) for y in b] for x in a]
    ha = [x.half_length for x in a]
    hb = [y.half_length for y in b]

    def attempt(t):
        return _match(a, b, lambda i, j: cost[i][j] <= t, lambda i: ha[i] <= t, lambda j: hb[j] <= t)

    cands = bottleneck_candidates(a, b)
    lo, hi = 0, len(cands) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        got = attempt(cands[mid])
        if got is not None:
            best = (cands[mid], got)
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:
        return INF, attempt(INF)
    return best


def module_distance(f: GridModule, g: GridModule, degree: int = 0) -> ExtendedRational:
    """Interleaving distance of two grid modules, via their barcodes."""
    return bottleneck(decompose(f, degree), decompose(g, degree), degree)[0]


# certificates -------------------------------------------------------------

@dataclass
class InterleavingCertificate:
    """An eps-interleaving of two grid modules.

    ``phi[i]`` maps F(x) to G(x + eps) for every x resolving to index i of
    ``phi_grid``; ``psi`` likewise maps G into F shifted by eps.  Both grids
    are alternating, so the maps are given on points and on the open cells
    between them.
    """

    epsilon: ExtendedRational
    source: GridModule
    target: GridModule
    phi_grid: tuple
    phi: list[Matrix]
    psi_grid: tuple
    psi: list[Matrix]


class MalformedCertificate(ValueError):
    pass


def _resolve(grid: tuple, value) -> int:
    crit = grid[1::2]
    k = bisect.bisect_left(crit, value)
    if k < len(crit) and crit[k] == value:
        return 2 * k + 1
    return 2 * k


def _check_shapes(maps, grid, dom: GridModule, cod: GridModule, eps, name):
    if len(maps) != len(grid):
        raise MalformedCertificate(f"{name}: {len(maps)} maps for {len(grid)} grid values")
    for g, mat in zip(grid, maps):
        want = (cod.dim_at(g + eps), dom.dim_at(g))
        if mat.shape != want:
            raise MalformedCertificate(f"{name} at {g}: shape {mat.shape}, expected {want}")


def _natural(maps, grid, dom: GridModule, cod: GridModule, eps) -> bool:
    cuts = set(grid[1::2]) | set(dom.critical_values) | {c - eps for c in cod.critical_values}
    pts = alternating_grid(cuts)
    prev = None
    for x in pts:
        mat = maps[_resolve(grid, x)]
        if mat.shape != (cod.dim_at(x + eps), dom.dim_at(x)):
            return False
        if prev is not None:
            px, pmat = prev
            if cod.map_between(px + eps, x + eps) @ pmat != mat @ dom.map_between(px, x):
                return False
        prev = (x, mat)
    return True


def _triangle(first, first_grid, second, second_grid, dom: GridModule, eps) -> bool:
    """second(x + eps) @ first(x) == dom(x <= x + 2 eps) for all x."""
    two = eps + eps
    cuts = (set(first_grid[1::2]) | {c - eps for c in second_grid[1::2]}
            | set(dom.critical_values) | {c - two for c in dom.critical_values})
    for x in alternating_grid(cuts):
        a = first[_resolve(first_grid, x)]
        b = second[_resolve(second_grid, x + eps)]
        if a.rows != b.cols:
            return False
        if b @ a != dom.map_between(x, x + two):
            return False
    return True


def verify_certificate(c: InterleavingCertificate, f: GridModule, g: GridModule) -> bool:
    """Check naturality of both maps and both triangle identities exactly."""
    eps = ext(c.epsilon)
    if not eps.is_finite or eps < 0:
        raise MalformedCertificate("epsilon must be finite and non-negative")
    if f.p != g.p or any(m.p != f.p for m in list(c.phi) + list(c.psi)):
        raise MalformedCertificate("field mismatch")
    _check_shapes(c.phi, c.phi_grid, f, g, eps, "phi")
    _check_shapes(c.psi, c.psi_grid, g, f, eps, "psi")
    return (_natural(c.phi, c.phi_grid, f, g, eps)
            and _natural(c.psi, c.psi_grid, g, f, eps)
            and _triangle(c.phi, c.phi_grid, c.psi, c.psi_grid, f, eps)
            and _triangle(c.psi, c.psi_grid, c.phi, c.phi_grid, g, eps))


def _block_maps(grid, dom: GridModule, cod: GridModule, eps, dom_basis, cod_basis, links) -> list[Matrix]:
    """Maps dom(x) -> cod(x + eps) that send summand k to summand links[k]."""
    p = dom.p
    out = []
    for x in grid:
        i, j = dom.index_of(x), cod.index_of(x + eps)
        cols = dom_basis.alive(i)
        rows = cod_basis.alive(j)
        rpos = {k: r for r, k in enumerate(rows)}
        mid = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for c, k in enumerate(cols):
            t = links.get(k)
            if t is not None and t in rpos:
                mid[rpos[t], c] = 1
        inv = solve(dom_basis.bases[i], Matrix.identity(dom.dims[i], p))
        out.append(cod_basis.bases[j] @ Matrix._wrap(mid, p) @ inv)
    return out


def construct_certificate(f: GridModule, g: GridModule, eps) -> InterleavingCertificate | None:
    """Build an eps-interleaving from a matching of the summands, if one exists."""
    eps = ext(eps)
    if f.p != g.p:
        raise ValueError("modules over different fields")
    fb, gb = interval_basis(f), interval_basis(g)
    fi = [realize_endpoints(r, f.grid) for r in fb.runs]
    gi = [realize_endpoints(r, g.grid) for r in gb.runs]
    wit = {}

    def pair_ok(i, j):
        if (i, j) not in wit:
            wit[(i, j)] = interleaving_witness(fi[i], gi[j], eps)
        return wit[(i, j)] is not None

    empty = Interval.empty()
    matching = _match(list(range(len(fi))), list(range(len(gi))), pair_ok,
                      lambda i: interval_interleaving_feasible(fi[i], empty, eps),
                      lambda j: interval_interleaving_feasible(gi[j], empty, eps))
    if matching is None:
        return None
    phi_links, psi_links = {}, {}
    for i, j in matching.pairs:
        phi_on, psi_on = wit[(i, j)]
        if phi_on:
            phi_links[i] = j
        if psi_on:
            psi_links[j] = i
    phi_grid = alternating_grid(set(f.critical_values) | {c - eps for c in g.critical_values})
    psi_grid = alternating_grid(set(g.critical_values) | {c - eps for c in f.critical_values})
    phi = _block_maps(phi_grid, f, g, eps, fb, gb, phi_links)
    psi = _block_maps(psi_grid, g, f, eps, gb, fb, psi_links)
    return InterleavingCertificate(eps, f, g, phi_grid, phi, psi_grid, psi)


def _promote(maps, grid, cod: GridModule, eps, new_eps):
    cuts = set(grid[1::2]) | {c - eps for c in cod.critical_values} | {c - new_eps for c in cod.critical_values}
    new_grid = alternating_grid(cuts)
    out = [cod.map_between(x + eps, x + new_eps) @ maps[_resolve(grid, x)] for x in new_grid]
    return new_grid, out


def promote_certificate(c: InterleavingCertificate, new_eps) -> InterleavingCertificate:
    """Post-compose with the target's internal shift maps to get an eps'-interleaving."""
    new_eps = ext(new_eps)
    if new_eps < c.epsilon:
        raise ValueError(f"cannot promote from {c.epsilon} down to {new_eps}")
    if new_eps == c.epsilon:
        return c
    phi_grid, phi = _promote(c.phi, c.phi_grid, c.target, c.epsilon, new_eps)
    psi_grid, psi = _promote(c.psi, c.psi_grid, c.source, c.epsilon, new_eps)
    return InterleavingCertificate(new_eps, c.source, c.target, phi_grid, phi, psi_grid, psi)


def certificate_to_text(c: InterleavingCertificate) -> str:
    """Plain-text dump for auditing."""
    lines = [f"epsilon {c.epsilon}", f"field {c.source.p}"]
    for name, grid, maps in (("phi", c.phi_grid, c.phi), ("psi", c.psi_grid, c.psi)):
        lines.append(f"{name} {len(grid)}")
        for x, m in zip(grid, maps):
            body = " ".join(str(v) for v in m.array.ravel())
            lines.append(f"  at {x} shape {m.rows}x{m.cols}: {body}".rstrip())
    return "\n".join(lines) + "\n"
