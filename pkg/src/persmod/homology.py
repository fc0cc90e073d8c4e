"""Simplicial homology over F_p applied stage by stage to filtrations.

Every stage is a pair (S, A) of subcomplexes of one total complex, with
A = empty for absolute homology.  Relative chains are the simplices of S not
in A; deleting A's rows and columns from the boundary matrix gives the
quotient complex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import (
    FilteredComplex,
    FiltrationError,
    PairFiltration,
    SimplicialComplex,
    SimplicialMap,
    boundary_array,
    chain_map_entries,
    check_map_compatibility,
)
from .modules import GridModule, GridMorphism, alternating_grid
from .scalars import Matrix, ext, image_basis, kernel_basis, rref, solve


@dataclass(frozen=True)
class HomologyStage:
    """A basis of H_k of one stage, given by cycle representatives.

    ``simplices`` is the chain basis (sorted), ``cycle_basis`` has one column
    per homology class, and ``boundaries`` spans the boundary subspace.
    """

    degree: int
    simplices: tuple
    cycle_basis: Matrix
    boundaries: Matrix

    @property
    def dimension(self) -> int:
        return self.cycle_basis.cols

    def coordinates(self, chains: Matrix) -> Matrix:
        """Homology coordinates of cycles given as columns over ``simplices``."""
        full = self.cycle_basis.hstack(self.boundaries)
        x = solve(full, chains)
        if x is None:
            raise ArithmeticError("chain is not a cycle of this stage")
        return x.submatrix(range(self.dimension), range(x.cols))


class ChainComplex:
    """Boundary matrices of a total complex, restricted on demand to stages."""

    def __init__(self, total: SimplicialComplex, p: int = 2):
        self.total = total
        self.p = p
        self._bd = {}

    def _boundary(self, k: int) -> np.ndarray:
        if k not in self._bd:
            self._bd[k] = boundary_array(self.total, k, self.p)
        return self._bd[k]

    def basis(self, stage, k: int) -> tuple:
        sub, rel = stage
        return tuple(s for s in self.total.by_dim.get(k, []) if s in sub and s not in rel)

    def restricted_boundary(self, stage, k: int) -> Matrix:
        cols = self.basis(stage, k)
        rows = self.basis(stage, k - 1) if k >= 1 else ()
        if k < 1 or not cols or not rows:
            return Matrix.zeros(len(rows), len(cols), self.p)
        idx = self.total.index
        full = self._boundary(k)
        a = full[np.ix_([idx[s] for s in rows], [idx[s] for s in cols])]
        return Matrix._wrap(a, self.p)

    def homology(self, stage, k: int) -> HomologyStage:
        simplices = self.basis(stage, k)
        n = len(simplices)
        if n == 0:
            z = Matrix.zeros(0, 0, self.p)
            return HomologyStage(k, simplices, z, z)
        cycles = kernel_basis(self.restricted_boundary(stage, k))
        bnd = image_basis(self.restricted_boundary(stage, k + 1))
        aug = bnd.hstack(cycles)
        _, pivots = rref(aug)
        reps = [c - bnd.cols for c in pivots if c >= bnd.cols]
        return HomologyStage(k, simplices, cycles.columns(reps), bnd)


def _as_stage(c):
    if isinstance(c, SimplicialComplex):
        return c, c.simplex_set, frozenset()
    sub, rel = c
    sub = sub if isinstance(sub, SimplicialComplex) else SimplicialComplex(sub, close=False)
    rel = rel.simplex_set if isinstance(rel, SimplicialComplex) else frozenset(rel)
    return sub, sub.simplex_set, rel


def homology_basis(c, degree: int, p: int = 2) -> HomologyStage:
    """H_k of a complex, or of a pair (complex, subcomplex)."""
    total, sub, rel = _as_stage(c)
    return ChainComplex(total, p).homology((sub, rel), degree)


def inclusion_chain_map(src: HomologyStage, dst: HomologyStage, p: int) -> Matrix:
    pos = {s: i for i, s in enumerate(dst.simplices)}
    a = np.zeros((len(dst.simplices), len(src.simplices)), dtype=np.int64)
    for j, s in enumerate(src.simplices):
        i = pos.get(s)
        if i is not None:
            a[i, j] = 1
    return Matrix._wrap(a, p)


def induced_map(src: HomologyStage, dst: HomologyStage, chain_map: Matrix) -> Matrix:
    """Matrix of the map on homology, in the two stages' class bases."""
    if chain_map.shape != (len(dst.simplices), len(src.simplices)):
        raise ValueError(f"chain map shape {chain_map.shape} does not fit the stages")
    if src.dimension == 0 or dst.dimension == 0:
        return Matrix.zeros(dst.dimension, src.dimension, chain_map.p)
    return dst.coordinates(chain_map @ src.cycle_basis)


def _module_from_stages(cc: ChainComplex, stages: list, grid, degree: int) -> tuple[GridModule, list[HomologyStage]]:
    cache: dict = {}
    hs = []
    for st in stages:
        if st not in cache:
            cache[st] = cc.homology(st, degree)
        hs.append(cache[st])
    trans = []
    for i in range(len(stages) - 1):
        if stages[i] == stages[i + 1]:
            trans.append(Matrix.identity(hs[i].dimension, cc.p))
        else:
            trans.append(induced_map(hs[i], hs[i + 1], inclusion_chain_map(hs[i], hs[i + 1], cc.p)))
    return GridModule(grid, [h.dimension for h in hs], trans, cc.p), hs


def persistence_module(fc: FilteredComplex, degree: int, p: int = 2, grid=None) -> GridModule:
    """H_k of the sublevel filtration, on the alternating grid of its critical values."""
    return _sublevel(fc, degree, p, grid)[0]


def _sublevel(fc: FilteredComplex, degree: int, p: int, grid=None, cc=None):
    if grid is None:
        grid = alternating_grid(fc.critical_values)
    cc = cc or ChainComplex(fc.complex, p)
    stages = [(fc.sublevel_set(g), frozenset()) for g in grid]
    return _module_from_stages(cc, stages, grid, degree)


def _extended(pf: PairFiltration, degree: int, p: int, grid=None, cc=None):
    if grid is None:
        grid = alternating_grid(pf.critical_values)
    cc = cc or ChainComplex(pf.total, p)
    stages = [pf.stage(g) for g in grid]
    return _module_from_stages(cc, stages, grid, degree)


def extended_module(pf: PairFiltration, degree: int, p: int = 2, grid=None) -> GridModule:
    """Relative homology of the extended (pair) filtration."""
    return _extended(pf, degree, p, grid)[0]


def _map_chain_matrix(h: SimplicialMap, src: HomologyStage, dst: HomologyStage, p: int) -> Matrix:
    pos = {s: i for i, s in enumerate(dst.simplices)}
    a = np.zeros((len(dst.simplices), len(src.simplices)), dtype=np.int64)
    for j, s in enumerate(src.simplices):
        e = chain_map_entries(h, s, p)
        if e is None:
            continue
        i = pos.get(e[0])
        if i is not None:
            a[i, j] = e[1]
    return Matrix._wrap(a, p)


def _check_stage_maps(h: SimplicialMap, src_stages, dst_stages, grid):
    for x, (s_sub, s_rel), (d_sub, d_rel) in zip(grid, src_stages, dst_stages):
        for s in s_sub:
            if h.apply(s) not in d_sub:
                raise FiltrationError(f"map sends {s} outside the target stage at {x}", s)
        for s in s_rel:
            if h.apply(s) not in d_rel:
                raise FiltrationError(f"map sends relative simplex {s} outside the target pair at {x}", s)


def morphism_module(h: SimplicialMap, f: FilteredComplex, g: FilteredComplex, degree: int, p: int = 2,
                    extended: bool = False, spacing=1, upper=None) -> GridMorphism:
    """Map on homology alpha: G -> F induced by h, where g filters h's source and f its target.

    Requires f(h(s)) <= g(s) for every source simplex.  With ``extended`` the
    extended filtrations (common bound ``upper``) are used.
    """
    if h.source != g.complex or h.target != f.complex:
        raise ValueError("filtrations do not live on the map's source and target")
    bad = check_map_compatibility(h, f.filtration, g.filtration)
    if bad is not None:
        raise FiltrationError(f"incompatible filtrations at simplex {bad}: "
                              f"f(h({bad})) = {f.filtration.value(h.apply(bad))} > g({bad}) = {g.filtration.value(bad)}",
                              bad)
    cc_src, cc_dst = ChainComplex(g.complex, p), ChainComplex(f.complex, p)
    if extended:
        from .complexes import build_extended
        tops = [x.max_value for x in (f, g) if len(x.complex)]
        m = ext(upper) if upper is not None else max(tops, default=ext(0))
        pf_t, pf_s = build_extended(f, spacing, m), build_extended(g, spacing, m)
        grid = alternating_grid(set(pf_t.critical_values) | set(pf_s.critical_values))
        src_stages = [pf_s.stage(x) for x in grid]
        dst_stages = [pf_t.stage(x) for x in grid]
        _check_stage_maps(h, src_stages, dst_stages, grid)
        src_mod, src_h = _extended(pf_s, degree, p, grid, cc_src)
        dst_mod, dst_h = _extended(pf_t, degree, p, grid, cc_dst)
    else:
        crit = set(f.critical_values if len(f.complex) else ()) | set(g.critical_values if len(g.complex) else ())
        grid = alternating_grid(crit)
        src_mod, src_h = _sublevel(g, degree, p, grid, cc_src)
        dst_mod, dst_h = _sublevel(f, degree, p, grid, cc_dst)
    comps = [induced_map(a, b, _map_chain_matrix(h, a, b, p)) for a, b in zip(src_h, dst_h)]
    return GridMorphism(src_mod, dst_mod, comps)
