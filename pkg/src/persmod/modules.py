"""Persistence modules on finite alternating grids.

A ``GridModule`` stores a module at the values b_0 < a_1 < b_1 < ... < a_n < b_n
(critical values a_k at odd indices, samples b_k at even ones) and is
constant below b_0 and above b_n.  Any real value is resolved to a grid
index, so a grid module is a genuine (R, <=)-indexed diagram.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .scalars import (
    INF,
    NEG_INF,
    DimensionError,
    ExtendedRational,
    Matrix,
    complement_basis,
    compose,
    ext,
    image_basis,
    is_prime,
    kernel_basis,
    solve,
)


# intervals --------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """An interval of the real line with open/closed ends.

    Use ``Interval.empty()`` for the empty interval; other degenerate flag
    combinations are rejected.
    """

    lo: ExtendedRational
    hi: ExtendedRational
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", ext(self.lo))
        object.__setattr__(self, "hi", ext(self.hi))
        if self._is_empty_marker():
            return
        if not self.lo.is_finite and self.lo_closed or not self.hi.is_finite and self.hi_closed:
            raise ValueError("infinite ends must be open")
        if self.lo == INF or self.hi == NEG_INF:
            raise ValueError(f"degenerate interval {self}")
        if self.lo > self.hi:
            raise ValueError(f"lo > hi in interval ({self.lo}, {self.hi})")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError("use Interval.empty() for an empty interval")

    def _is_empty_marker(self):
        return self.lo == 0 and self.hi == 0 and not self.lo_closed and not self.hi_closed

    @classmethod
    def empty(cls) -> "Interval":
        return _EMPTY

    @classmethod
    def make(cls, lo, hi, lo_closed: bool = True, hi_closed: bool = True) -> "Interval":
        """Like the constructor, but returns the empty interval when the set is empty."""
        lo, hi = ext(lo), ext(hi)
        lo_closed = lo_closed and lo.is_finite
        hi_closed = hi_closed and hi.is_finite
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return _EMPTY
        return cls(lo, hi, lo_closed, hi_closed)

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls.make(lo, hi, True, True)

    @classmethod
    def closed_open(cls, lo, hi) -> "Interval":
        return cls.make(lo, hi, True, False)

    @classmethod
    def real_line(cls) -> "Interval":
        return cls(NEG_INF, INF, False, False)

    @property
    def is_empty(self) -> bool:
        return self is _EMPTY or self._is_empty_marker()

    @property
    def is_finite(self) -> bool:
        return self.is_empty or (self.lo.is_finite and self.hi.is_finite)

    def __contains__(self, x) -> bool:
        if self.is_empty:
            return False
        x = ext(x)
        above = x > self.lo or (x == self.lo and self.lo_closed)
        below = x < self.hi or (x == self.hi and self.hi_closed)
        return above and below

    @property
    def length(self) -> ExtendedRational:
        return ext(0) if self.is_empty else self.hi - self.lo

    @property
    def half_length(self) -> ExtendedRational:
        return self.length.half()

    def shift(self, t) -> "Interval":
        if self.is_empty:
            return self
        t = ext(t)
        return Interval(self.lo + t, self.hi + t, self.lo_closed, self.hi_closed)

    def sort_key(self):
        if self.is_empty:
            return (0, NEG_INF, NEG_INF, False, False)
        return (1, self.lo, self.hi, not self.lo_closed, self.hi_closed)

    def __lt__(self, other: "Interval"):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"Interval({self})"

    def __str__(self):
        if self.is_empty:
            return "{}"
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


_EMPTY = object.__new__(Interval)
object.__setattr__(_EMPTY, "lo", ext(0))
object.__setattr__(_EMPTY, "hi", ext(0))
object.__setattr__(_EMPTY, "lo_closed", False)
object.__setattr__(_EMPTY, "hi_closed", False)


# barcodes ---------------------------------------------------------------

class Barcode:
    """Multiset of (degree, interval) pairs kept in canonical sorted form."""

    __slots__ = ("entries",)

    def __init__(self, items: Iterable = ()):
        counts: dict[tuple[int, Interval], int] = {}
        for item in items:
            if len(item) == 2:
                degree, interval = item
                mult = 1
            else:
                degree, interval, mult = item
            if mult < 0:
                raise ValueError("negative multiplicity")
            if mult == 0 or interval.is_empty:
                continue
            key = (int(degree), interval)
            counts[key] = counts.get(key, 0) + mult
        self.entries = tuple(
            (d, i, m) for (d, i), m in sorted(counts.items(), key=lambda kv: (kv[0][0], kv[0][1].sort_key()))
        )

    def degrees(self) -> list[int]:
        return sorted({d for d, _, _ in self.entries})

    def intervals(self, degree: int | None = None) -> list[Interval]:
        """Intervals of one degree (all degrees if None), repeated by multiplicity."""
        return [i for d, i, m in self.entries if degree is None or d == degree for _ in range(m)]

    def restrict(self, degree: int) -> "Barcode":
        return Barcode(e for e in self.entries if e[0] == degree)

    def __add__(self, other: "Barcode") -> "Barcode":
        return Barcode(self.entries + other.entries)

    def __len__(self):
        return sum(m for _, _, m in self.entries)

    def __eq__(self, other):
        return isinstance(other, Barcode) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        body = ", ".join(f"H{d} {i}" + (f" x{m}" if m > 1 else "") for d, i, m in self.entries)
        return f"Barcode({body})"


CSV_HEADER = ["degree", "lo", "hi", "lo_closed", "hi_closed", "multiplicity"]


def barcode_to_csv(b: Barcode) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for d, i, m in b.entries:
        w.writerow([d, str(i.lo), str(i.hi), str(i.lo_closed).lower(), str(i.hi_closed).lower(), m])
    return buf.getvalue()


def _parse_bool(s: str) -> bool:
    s = s.strip().lower()
    if s in ("true", "1"):
        return True
    if s in ("false", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def barcode_from_csv(text: str) -> Barcode:
    """Read the barcode CSV format; '#' lines are ignored."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        return Barcode()
    rows = list(csv.reader(lines))
    if [c.strip() for c in rows[0]] != CSV_HEADER:
        raise ValueError(f"bad header {rows[0]}")
    items = []
    for n, row in enumerate(rows[1:], 2):
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"row {n}: expected {len(CSV_HEADER)} fields")
        try:
            interval = Interval(ext(row[1]), ext(row[2]), _parse_bool(row[3]), _parse_bool(row[4]))
            items.append((int(row[0]), interval, int(row[5])))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"row {n}: {exc}") from None
    return Barcode(items)


# grids ------------------------------------------------------------------

def alternating_grid(critical_values: Iterable) -> tuple[ExtendedRational, ...]:
    """b_0 < a_1 < b_1 < ... < a_n < b_n from sorted distinct critical values.

    Samples are midpoints between neighbours, least - 1 and greatest + 1.
    """
    crit = sorted({ext(c) for c in critical_values})
    for c in crit:
        if not c.is_finite:
            raise ValueError("critical values must be finite")
    if not crit:
        return (ext(0),)
    grid = [crit[0] - 1]
    for k, c in enumerate(crit):
        grid.append(c)
        grid.append(ExtendedRational.mean(c, crit[k + 1]) if k + 1 < len(crit) else c + 1)
    return tuple(grid)


class GridModule:
    """A tame persistence module sampled on an alternating grid."""

    def __init__(self, grid: Sequence, dims: Sequence[int], transitions: Sequence[Matrix], p: int = 2):
        self.grid = tuple(ext(g) for g in grid)
        self.dims = tuple(int(d) for d in dims)
        self.transitions = tuple(transitions)
        if not is_prime(p):
            raise ValueError(f"field characteristic must be prime, got {p}")
        self.p = p
        n = len(self.grid)
        if n % 2 != 1:
            raise ValueError("grid must have odd length 2n+1")
        if any(self.grid[i] >= self.grid[i + 1] for i in range(n - 1)):
            raise ValueError("grid must be strictly increasing")
        if any(not g.is_finite for g in self.grid):
            raise ValueError("grid values must be finite")
        if len(self.dims) != n or len(self.transitions) != n - 1:
            raise DimensionError("dims/transitions do not match the grid")
        for i, t in enumerate(self.transitions):
            if t.shape != (self.dims[i + 1], self.dims[i]):
                raise DimensionError(f"transition {i} has shape {t.shape}, expected {(self.dims[i + 1], self.dims[i])}")
            if t.p != p:
                raise ValueError("transition over a different field")
        self._composites: dict[tuple[int, int], Matrix] = {}

    @property
    def critical_values(self) -> tuple[ExtendedRational, ...]:
        return self.grid[1::2]

    @property
    def size(self) -> int:
        return len(self.grid)

    def index_of(self, value) -> int:
        """Grid index representing ``value`` (odd if it is a critical value)."""
        value = ext(value)
        crit = self.critical_values
        k = bisect.bisect_left(crit, value)
        if k < len(crit) and crit[k] == value:
            return 2 * k + 1
        return 2 * k

    def dim_at(self, value) -> int:
        return self.dims[self.index_of(value)]

    def composite(self, i: int, j: int) -> Matrix:
        """Map from index i to index j >= i."""
        if i > j:
            raise ValueError("composite needs i <= j")
        key = (i, j)
        if key not in self._composites:
            if i == j:
                out = Matrix.identity(self.dims[i], self.p)
            else:
                out = self.transitions[j - 1] @ self.composite(i, j - 1)
            self._composites[key] = out
        return self._composites[key]

    def map_between(self, a, b) -> Matrix:
        """The module's map F(a <= b) for real values a <= b."""
        return self.composite(self.index_of(a), self.index_of(b))

    def is_zero(self) -> bool:
        return not any(self.dims)

    def __eq__(self, other):
        return (isinstance(other, GridModule) and self.grid == other.grid and self.dims == other.dims
                and self.p == other.p and self.transitions == other.transitions)

    def __repr__(self):
        return f"GridModule(grid={[str(g) for g in self.grid]}, dims={self.dims}, p={self.p})"

    @classmethod
    def zero(cls, grid=(0,), p: int = 2) -> "GridModule":
        grid = tuple(grid)
        return cls(grid, [0] * len(grid), [Matrix.zeros(0, 0, p)] * (len(grid) - 1), p)


def chi(interval: Interval, grid: Sequence, p: int = 2) -> GridModule:
    """Interval module on a grid: the field on the interval, zero elsewhere."""
    grid = tuple(ext(g) for g in grid)
    inside = [g in interval for g in grid]
    dims = [1 if x else 0 for x in inside]
    trans = []
    for i in range(len(grid) - 1):
        if inside[i] and inside[i + 1]:
            trans.append(Matrix.identity(1, p))
        else:
            trans.append(Matrix.zeros(dims[i + 1], dims[i], p))
    return GridModule(grid, dims, trans, p)


def _sum_of_intervals(intervals: Sequence[Interval], grid, p: int) -> GridModule:
    alive = [[k for k, iv in enumerate(intervals) if g in iv] for g in grid]
    dims = [len(a) for a in alive]
    trans = []
    for i in range(len(grid) - 1):
        t = np.zeros((dims[i + 1], dims[i]), dtype=np.int64)
        pos = {k: r for r, k in enumerate(alive[i + 1])}
        for c, k in enumerate(alive[i]):
            if k in pos:
                t[pos[k], c] = 1
        trans.append(Matrix._wrap(t, p))
    return GridModule(grid, dims, trans, p)


def synthesize(b: Barcode, degree: int = 0, p: int = 2, grid=None) -> GridModule:
    """Direct sum of interval modules of one degree of a barcode."""
    intervals = b.intervals(degree)
    if grid is None:
        ends = {e for iv in intervals for e in (iv.lo, iv.hi) if e.is_finite}
        grid = alternating_grid(ends)
    return _sum_of_intervals(intervals, tuple(ext(g) for g in grid), p)


def discretize(m: GridModule, critical_values=None, grid=None) -> GridModule:
    """Restrict ``m`` to the alternating grid around ``critical_values``.

    Lossless when every value at which ``m`` changes is among the critical
    values.  An explicit ``grid`` may be given instead.
    """
    if grid is None:
        grid = alternating_grid(critical_values)
    grid = tuple(ext(g) for g in grid)
    idx = [m.index_of(g) for g in grid]
    dims = [m.dims[i] for i in idx]
    trans = [m.composite(idx[k], idx[k + 1]) for k in range(len(idx) - 1)]
    return GridModule(grid, dims, trans, m.p)


def common_grid(*modules: GridModule) -> tuple[ExtendedRational, ...]:
    return alternating_grid({c for m in modules for c in m.critical_values})


def align(*modules: GridModule) -> list[GridModule]:
    """Bring modules onto one grid (unchanged if they already share one)."""
    if all(m.grid == modules[0].grid for m in modules):
        return list(modules)
    grid = common_grid(*modules)
    return [discretize(m, grid=grid) for m in modules]


def _block_diag(a: Matrix, b: Matrix) -> Matrix:
    out = np.zeros((a.rows + b.rows, a.cols + b.cols), dtype=np.int64)
    out[:a.rows, :a.cols] = a.array
    out[a.rows:, a.cols:] = b.array
    return Matrix._wrap(out, a.p)


def direct_sum(x: GridModule, y: GridModule) -> GridModule:
    if x.p != y.p:
        raise ValueError("modules over different fields")
    x, y = align(x, y)
    dims = [a + b for a, b in zip(x.dims, y.dims)]
    trans = [_block_diag(a, b) for a, b in zip(x.transitions, y.transitions)]
    return GridModule(x.grid, dims, trans, x.p)


# morphisms --------------------------------------------------------------

class NaturalityError(ValueError):
    pass


class GridMorphism:
    """Natural transformation between two modules on the same grid."""

    def __init__(self, source: GridModule, target: GridModule, components: Sequence[Matrix], check: bool = True):
        if source.grid != target.grid:
            raise ValueError("source and target must share a grid")
        if len(components) != source.size:
            raise DimensionError("one component per grid index")
        for i, c in enumerate(components):
            if c.shape != (target.dims[i], source.dims[i]):
                raise DimensionError(f"component {i} has shape {c.shape}")
        self.source, self.target = source, target
        self.components = tuple(components)
        if check:
            bad = self.failing_square()
            if bad is not None:
                raise NaturalityError(f"naturality square {bad} -> {bad + 1} does not commute")

    def failing_square(self):
        for i in range(self.source.size - 1):
            left = self.components[i + 1] @ self.source.transitions[i]
            right = self.target.transitions[i] @ self.components[i]
            if left != right:
                return i
        return None

    @classmethod
    def identity(cls, m: GridModule) -> "GridMorphism":
        return cls(m, m, [Matrix.identity(d, m.p) for d in m.dims])

    @classmethod
    def zero(cls, source: GridModule, target: GridModule) -> "GridMorphism":
        return cls(source, target, [Matrix.zeros(t, s, source.p) for s, t in zip(source.dims, target.dims)])


def _induced(bases: list[Matrix], maps: list[Matrix], p: int) -> list[Matrix]:
    """Express maps[i] @ bases[i] in the columns of bases[i + 1]."""
    out = []
    for i, t in enumerate(maps):
        x = solve(bases[i + 1], t @ bases[i])
        if x is None:
            raise ArithmeticError(f"induced transition {i} does not exist")
        out.append(x)
    return out


def kernel(m: GridMorphism) -> GridModule:
    src = m.source
    bases = [kernel_basis(c) for c in m.components]
    trans = _induced(bases, list(src.transitions), src.p)
    return GridModule(src.grid, [b.cols for b in bases], trans, src.p)


def image(m: GridMorphism) -> GridModule:
    tgt = m.target
    bases = [image_basis(c) for c in m.components]
    trans = _induced(bases, list(tgt.transitions), tgt.p)
    return GridModule(tgt.grid, [b.cols for b in bases], trans, tgt.p)


def cokernel(m: GridMorphism) -> GridModule:
    tgt = m.target
    p = tgt.p
    imgs = [image_basis(c) for c in m.components]
    comps = [complement_basis(b) for b in imgs]
    trans = []
    for i, t in enumerate(tgt.transitions):
        full = imgs[i + 1].hstack(comps[i + 1])
        x = solve(full, t @ comps[i])
        if x is None:
            raise ArithmeticError("complement does not span")
        trans.append(x.submatrix(range(imgs[i + 1].cols, full.cols), range(x.cols)))
    return GridModule(tgt.grid, [c.cols for c in comps], trans, p)
