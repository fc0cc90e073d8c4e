"""Randomised stability experiments.

Each trial draws a small flag complex and rational vertex functions, computes
the relevant persistence modules, and checks the sup-norm bound on their
interleaving distances.  Trials are seeded individually so a report is
reproducible trial by trial.
"""

from __future__ import annotations

import csv
import io
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .complexes import FilteredComplex, SimplicialComplex, SimplicialMap, build_extended
from .decomposition import decompose
from .distances import bottleneck
from .homology import extended_module, morphism_module, persistence_module
from .modules import cokernel, image, kernel
from .scalars import INF, ExtendedRational, ext

MODES = ("ordinary", "extended", "kic", "kic-extended")
_DENOMS = (1, 2, 4)


def random_value(rng: random.Random, lo: int = 0, hi: int = 8) -> Fraction:
    d = rng.choice(_DENOMS)
    return Fraction(rng.randint(lo * d, hi * d), d)


def random_flag_complex(rng: random.Random, n_vertices: int, max_dim: int, edge_prob: float = 0.5,
                        allowed=None) -> SimplicialComplex:
    """Clique complex of a random graph, truncated at ``max_dim``.

    ``allowed(u, v)`` restricts which edges may be drawn.
    """
    verts = list(range(n_vertices))
    edges = {(u, v) for u, v in combinations(verts, 2)
             if (allowed is None or allowed(u, v)) and rng.random() < edge_prob}
    simplices = [(v,) for v in verts]
    if max_dim >= 1:
        simplices += list(edges)
    for k in range(3, max_dim + 2):
        for cand in combinations(verts, k):
            if all(e in edges for e in combinations(cand, 2)):
                simplices.append(cand)
    return SimplicialComplex(simplices)


def perturb(rng: random.Random, values: dict, scale: int = 2) -> dict:
    if rng.random() < 0.1:
        return dict(values)
    return {v: x + random_value(rng, -scale, scale) for v, x in values.items()}


@dataclass
class TrialRecord:
    index: int
    seed: str
    field: int
    norm: ExtendedRational
    distances: dict  # (component, degree) -> distance
    ok: bool
    notes: list = field(default_factory=list)


@dataclass
class ExperimentReport:
    mode: str
    trials: list[TrialRecord]

    @property
    def violations(self) -> int:
        return sum(not t.ok for t in self.trials)

    @property
    def max_ratio(self) -> Fraction | ExtendedRational:
        """Largest distance / norm over trials (0/0 counts as 0)."""
        best = Fraction(0)
        for t in self.trials:
            for d in t.distances.values():
                if d == 0:
                    continue
                if t.norm == 0 or not d.is_finite:
                    return INF
                best = max(best, d.fraction() / t.norm.fraction())
        return best

    def summary(self) -> str:
        r = self.max_ratio
        lines = [
            f"mode: {self.mode}",
            f"trials: {len(self.trials)}",
            f"violations: {self.violations}",
            f"max ratio distance/norm: {ext(r) if not isinstance(r, ExtendedRational) else r}",
        ]
        for t in self.trials:
            for note in t.notes:
                lines.append(f"trial {t.index}: {note}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "seed", "field", "norm", "component", "degree", "distance", "bound_ok"])
        for t in self.trials:
            for (comp, deg), d in sorted(t.distances.items()):
                w.writerow([t.index, t.seed, t.field, str(t.norm), comp, deg, str(d), str(d <= t.norm).lower()])
        return buf.getvalue()


def _ordinary(rng, p, n_vertices, max_dim, extended: bool):
    k = random_flag_complex(rng, rng.randint(1, n_vertices), max_dim)
    f = {v: random_value(rng) for v in k.vertices}
    g = perturb(rng, f)
    fc, gc = FilteredComplex.lower_star(k, f), FilteredComplex.lower_star(k, g)
    norm = fc.filtration.sup_distance(gc.filtration, k)
    dists, notes = {}, []
    if extended:
        upper = max(fc.max_value, gc.max_value)
        pf, pg = build_extended(fc, 1, upper), build_extended(gc, 1, upper)
    for deg in range(k.dimension + 1):
        if extended:
            bf = decompose(extended_module(pf, deg, p), deg)
            bg = decompose(extended_module(pg, deg, p), deg)
            for iv in bf.intervals() + bg.intervals():
                if not iv.is_finite:
                    notes.append(f"infinite extended bar {iv} in degree {deg}")
        else:
            bf = decompose(persistence_module(fc, deg, p), deg)
            bg = decompose(persistence_module(gc, deg, p), deg)
        dists[("H", deg)] = bottleneck(bf, bg, deg)[0]
    return norm, dists, notes


def random_compatible_map(rng, n_vertices, max_dim):
    """A simplicial map h: Y -> X between random flag complexes."""
    x = random_flag_complex(rng, rng.randint(1, n_vertices), max_dim)
    xv = x.vertices
    ny = rng.randint(1, n_vertices)
    assign = {v: rng.choice(xv) for v in range(ny)}

    def allowed(u, v):
        a, b = assign[u], assign[v]
        return a == b or (min(a, b), max(a, b)) in x

    y = random_flag_complex(rng, ny, max_dim, allowed=allowed)
    return SimplicialMap(y, x, assign)


def _kic(rng, p, n_vertices, max_dim, extended: bool):
    h = random_compatible_map(rng, n_vertices, max_dim)
    x, y = h.target, h.source
    f = {v: random_value(rng) for v in x.vertices}
    f2 = perturb(rng, f)
    if extended:
        g = {v: f[h.vertex_assignment[v]] for v in y.vertices}
        g2 = {v: f2[h.vertex_assignment[v]] for v in y.vertices}
    else:
        g = {v: f[h.vertex_assignment[v]] + random_value(rng, 0, 2) for v in y.vertices}
        g2 = {v: max(g[v] + random_value(rng, -2, 2) if rng.random() < 0.9 else g[v], f2[h.vertex_assignment[v]])
              for v in y.vertices}
    fx, fx2 = FilteredComplex.lower_star(x, f), FilteredComplex.lower_star(x, f2)
    gy, gy2 = FilteredComplex.lower_star(y, g), FilteredComplex.lower_star(y, g2)
    norm = max(fx.filtration.sup_distance(fx2.filtration, x), gy.filtration.sup_distance(gy2.filtration, y))
    upper = max(fx.max_value, fx2.max_value) if extended else None
    dists, notes = {}, []
    top = max(x.dimension, y.dimension)
    for deg in range(top + 1):
        a = morphism_module(h, fx, gy, deg, p, extended=extended, upper=upper)
        b = morphism_module(h, fx2, gy2, deg, p, extended=extended, upper=upper)
        for mor, tag in ((a, "alpha"), (b, "beta")):
            ker, im, cok = kernel(mor), image(mor), cokernel(mor)
            for i in range(mor.source.size):
                if ker.dims[i] + im.dims[i] != mor.source.dims[i] or cok.dims[i] != mor.target.dims[i] - im.dims[i]:
                    notes.append(f"rank-nullity fails for {tag} at index {i} in degree {deg}")
        for name, op in (("ker", kernel), ("im", image), ("coker", cokernel)):
            ba, bb = decompose(op(a), deg), decompose(op(b), deg)
            dists[(name, deg)] = bottleneck(ba, bb, deg)[0]
    return norm, dists, notes


def run_trial(mode: str, index: int, seed, p: int, n_vertices: int, max_dim: int) -> TrialRecord:
    tag = f"{seed}:{index}"
    rng = random.Random(tag)
    if mode in ("ordinary", "extended"):
        norm, dists, notes = _ordinary(rng, p, n_vertices, max_dim, mode == "extended")
    elif mode in ("kic", "kic-extended"):
        norm, dists, notes = _kic(rng, p, n_vertices, max_dim, mode == "kic-extended")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ok = not notes and all(d <= norm for d in dists.values())
    return TrialRecord(index, tag, p, norm, dists, ok, notes)


def _run_star(args):
    return run_trial(*args)


def run_stability(mode: str, trials: int, seed=0, n_vertices: int = 8, max_dim: int = 3,
                  fields=(2, 3), jobs: int = 1) -> ExperimentReport:
    if trials < 1:
        raise ValueError("need at least one trial")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    fields = list(fields)
    tasks = [(mode, i, seed, fields[i % len(fields)], n_vertices, max_dim) for i in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_star, tasks, chunksize=4))
    else:
        records = [run_trial(*t) for t in tasks]
    return ExperimentReport(mode, records)
