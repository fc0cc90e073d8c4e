"""Finite simplicial complexes, filtrations and simplicial maps.

Simplices are tuples of vertex ids sorted ascending.  Filtration values are
``ExtendedRational``; in vertex mode a simplex takes the max of its vertex
values (lower star).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .scalars import ExtendedRational, Matrix, NEG_INF, ext

Simplex = tuple


class ComplexError(ValueError):
    """Malformed complex, filtration or map."""


class FiltrationError(ValueError):
    """A filtration or map violates a monotonicity requirement.

    ``simplex`` names the offending simplex.
    """

    def __init__(self, message: str, simplex=None):
        super().__init__(message)
        self.simplex = simplex


def _faces(s: Simplex):
    for k in range(1, len(s)):
        yield from combinations(s, k)


class SimplicialComplex:
    """A finite abstract simplicial complex closed under faces."""

    def __init__(self, simplices: Iterable[Iterable[int]] = (), close: bool = True):
        found: set[Simplex] = set()
        for s in simplices:
            s = [int(v) for v in s]
            t = tuple(sorted(set(s)))
            if not t:
                continue
            if len(t) != len(s):
                raise ComplexError(f"repeated vertex in simplex {s}")
            found.add(t)
        if close:
            for t in list(found):
                found.update(_faces(t))
        else:
            for t in found:
                for face in _faces(t):
                    if face not in found:
                        raise ComplexError(f"face {face} of {t} missing")
        self._simplices = frozenset(found)

    @cached_property
    def by_dim(self) -> dict[int, list[Simplex]]:
        out: dict[int, list[Simplex]] = {}
        for s in self._simplices:
            out.setdefault(len(s) - 1, []).append(s)
        for lst in out.values():
            lst.sort()
        return out

    @cached_property
    def index(self) -> dict[Simplex, int]:
        """Position of each simplex within its dimension's sorted list."""
        return {s: i for lst in self.by_dim.values() for i, s in enumerate(lst)}

    @property
    def vertices(self) -> list[int]:
        return [s[0] for s in self.by_dim.get(0, [])]

    @property
    def dimension(self) -> int:
        return max(self.by_dim, default=-1)

    def simplices(self, dim: int | None = None) -> list[Simplex]:
        if dim is None:
            return sorted(self._simplices, key=lambda s: (len(s), s))
        return list(self.by_dim.get(dim, []))

    def __contains__(self, s) -> bool:
        return tuple(sorted(s)) in self._simplices

    def __len__(self):
        return len(self._simplices)

    def __iter__(self):
        return iter(self.simplices())

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and self._simplices == other._simplices

    def __hash__(self):
        return hash(self._simplices)

    def issubset(self, other: "SimplicialComplex") -> bool:
        return self._simplices <= other._simplices

    def subcomplex(self, keep) -> "SimplicialComplex":
        """Subcomplex of simplices satisfying ``keep`` (must be face-closed)."""
        return SimplicialComplex([s for s in self._simplices if keep(s)], close=False)

    @property
    def simplex_set(self) -> frozenset:
        return self._simplices

    def boundary(self, dim: int, p: int) -> Matrix:
        """Boundary matrix from dim-chains to (dim-1)-chains in sorted bases."""
        return Matrix._wrap(boundary_array(self, dim, p), p)

    def __repr__(self):
        return f"SimplicialComplex({self.simplices()})"


def boundary_array(k: SimplicialComplex, dim: int, p: int) -> np.ndarray:
    cols = k.by_dim.get(dim, [])
    rows = k.by_dim.get(dim - 1, []) if dim >= 1 else []
    out = np.zeros((len(rows), len(cols)), dtype=np.int64)
    if dim < 1:
        return out
    idx = k.index
    for j, s in enumerate(cols):
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            out[idx[face], j] = (-1) ** i % p
    return out


@dataclass(frozen=True)
class FiltrationFunction:
    """Real values on a complex: on vertices (lower star) or on every simplex."""

    mode: str
    values: Mapping[Simplex, ExtendedRational]

    @classmethod
    def from_vertices(cls, values: Mapping[int, object]) -> "FiltrationFunction":
        vals = {(int(v),): ext(x) for v, x in values.items()}
        for s, x in vals.items():
            if not x.is_finite:
                raise FiltrationError("filtration values must be finite", s)
        return cls("vertex_function", vals)

    @classmethod
    def explicit(cls, values: Mapping[Iterable[int], object]) -> "FiltrationFunction":
        vals = {tuple(sorted(s)): ext(x) for s, x in values.items()}
        for s, x in vals.items():
            if not x.is_finite:
                raise FiltrationError("filtration values must be finite", s)
        return cls("explicit", vals)

    def value(self, s: Simplex) -> ExtendedRational:
        s = tuple(s)
        if self.mode == "vertex_function":
            return max(self.values[(v,)] for v in s)
        return self.values[s]

    def vertex_value(self, v: int) -> ExtendedRational:
        return self.values[(v,)]

    def validate(self, k: SimplicialComplex) -> None:
        if self.mode == "vertex_function":
            for v in k.vertices:
                if (v,) not in self.values:
                    raise FiltrationError(f"vertex {v} has no value", (v,))
            return
        for s in k.simplex_set:
            if s not in self.values:
                raise FiltrationError(f"simplex {s} has no value", s)
        for s in k.simplex_set:
            for face in _faces(s):
                if self.values[face] > self.values[s]:
                    raise FiltrationError(
                        f"non-monotone filtration: face {face} has value {self.values[face]} "
                        f"above {s} with value {self.values[s]}", s)

    def sup_distance(self, other: "FiltrationFunction", k: SimplicialComplex) -> ExtendedRational:
        """Sup-norm of the difference, over vertices in vertex mode, else simplices."""
        if self.mode == other.mode == "vertex_function":
            keys = [(v,) for v in k.vertices]
        else:
            keys = k.simplices()
        return max((abs(self.value(s) - other.value(s)) for s in keys), default=ext(0))


class FilteredComplex:
    """A complex with a monotone filtration."""

    def __init__(self, complex: SimplicialComplex, filtration: FiltrationFunction):
        filtration.validate(complex)
        self.complex = complex
        self.filtration = filtration
        self._values = {s: filtration.value(s) for s in complex.simplex_set}

    @classmethod
    def lower_star(cls, complex: SimplicialComplex, values: Mapping[int, object]) -> "FilteredComplex":
        return cls(complex, FiltrationFunction.from_vertices(values))

    def value(self, s: Simplex) -> ExtendedRational:
        return self._values[tuple(s)]

    @cached_property
    def critical_values(self) -> tuple[ExtendedRational, ...]:
        return tuple(sorted(set(self._values.values())))

    @property
    def max_value(self) -> ExtendedRational:
        return max(self._values.values())

    @property
    def min_value(self) -> ExtendedRational:
        return min(self._values.values())

    def sublevel_set(self, a) -> frozenset:
        a = ext(a)
        return frozenset(s for s, x in self._values.items() if x <= a)

    def superlevel_set(self, t) -> frozenset:
        """Largest subcomplex on which f >= t: simplices whose vertices all reach t."""
        t = ext(t)
        f = self.filtration
        return frozenset(s for s in self._values if min(f.vertex_value(v) for v in s) >= t)


def sublevel_complex(fc: FilteredComplex, a) -> SimplicialComplex:
    return SimplicialComplex(fc.sublevel_set(a), close=False)


@dataclass(frozen=True)
class PairFiltration:
    """Pair-valued filtration: sublevels, then relative superlevels.

    Below ``upper + spacing`` the stage at c is (K(c), empty); from there on it
    is (K, f >= 2*upper + spacing - c).
    """

    fc: FilteredComplex
    upper: ExtendedRational
    spacing: ExtendedRational

    @property
    def total(self) -> SimplicialComplex:
        return self.fc.complex

    @cached_property
    def critical_values(self) -> tuple[ExtendedRational, ...]:
        vals = set(self.fc.critical_values) if len(self.fc.complex) else set()
        turn = 2 * self.upper.fraction() + self.spacing.fraction()
        return tuple(sorted(vals | {ext(turn) - v for v in vals}))

    def stage(self, c) -> tuple[frozenset, frozenset]:
        c = ext(c)
        if not len(self.fc.complex):
            return frozenset(), frozenset()
        if c < self.upper + self.spacing:
            return self.fc.sublevel_set(c), frozenset()
        t = 2 * self.upper.fraction() + self.spacing.fraction() - c
        return self.fc.complex.simplex_set, self.fc.superlevel_set(t)


def build_extended(fc: FilteredComplex, s, upper=None) -> PairFiltration:
    """Extended-persistence filtration of ``fc`` with spacing ``s``.

    ``upper`` is the common bound M on the function; it defaults to the max
    value and must not be below it.
    """
    s = ext(s)
    if not s.is_finite or s <= 0:
        raise ValueError(f"spacing must be a positive rational, got {s}")
    if not len(fc.complex):
        m = ext(0) if upper is None else ext(upper)
        return PairFiltration(fc, m, s)
    m = fc.max_value if upper is None else ext(upper)
    if m < fc.max_value:
        raise ValueError(f"upper bound {m} below max value {fc.max_value}")
    return PairFiltration(fc, m, s)


@dataclass(frozen=True)
class SimplicialMap:
    source: SimplicialComplex
    target: SimplicialComplex
    vertex_assignment: Mapping[int, int] = field(hash=False)

    def __post_init__(self):
        for v in self.source.vertices:
            if v not in self.vertex_assignment:
                raise ComplexError(f"vertex {v} has no image")
            if (self.vertex_assignment[v],) not in self.target:
                raise ComplexError(f"image of vertex {v} is not a target vertex")
        for s in self.source.simplex_set:
            if self.apply(s) not in self.target:
                raise ComplexError(f"image of {s} is not a simplex of the target")

    def apply(self, s: Simplex) -> Simplex:
        return tuple(sorted({self.vertex_assignment[v] for v in s}))

    @classmethod
    def identity(cls, k: SimplicialComplex) -> "SimplicialMap":
        return cls(k, k, {v: v for v in k.vertices})


def check_map_compatibility(h: SimplicialMap, f: FiltrationFunction, g: FiltrationFunction):
    """First source simplex with f(h(s)) > g(s), or None when compatible."""
    for s in h.source.simplices():
        if f.value(h.apply(s)) > g.value(s):
            return s
    return None


def map_is_compatible(h: SimplicialMap, f: FiltrationFunction, g: FiltrationFunction) -> bool:
    return check_map_compatibility(h, f, g) is None


def _parity(seq) -> int:
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return inv % 2


def chain_map_entries(h: SimplicialMap, s: Simplex, p: int):
    """Image of the oriented simplex s: (target simplex, coefficient) or None."""
    img = [h.vertex_assignment[v] for v in s]
    if len(set(img)) < len(img):
        return None
    return tuple(sorted(img)), (-1 if _parity(img) else 1) % p


def chain_map(h: SimplicialMap, degree: int, p: int = 2) -> Matrix:
    src = h.source.by_dim.get(degree, [])
    tgt = h.target.by_dim.get(degree, [])
    out = np.zeros((len(tgt), len(src)), dtype=np.int64)
    idx = h.target.index
    for j, s in enumerate(src):
        e = chain_map_entries(h, s, p)
        if e is not None:
            out[idx[e[0]], j] = e[1]
    return Matrix._wrap(out, p)


# file formats ----------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def parse_complex(text: str) -> FilteredComplex:
    """Parse the ``v``/``s`` line format into a filtered complex."""
    vertex_vals: dict[int, ExtendedRational] = {}
    simplices: list[tuple[Simplex, ExtendedRational | None, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "v":
                if len(parts) not in (2, 3):
                    raise ParseError("expected 'v <id> [<value>]'", lineno)
                vid = int(parts[1])
                if vid in vertex_vals:
                    raise ParseError(f"duplicate vertex {vid}", lineno)
                vertex_vals[vid] = ext(parts[2]) if len(parts) == 3 else None
            elif parts[0] == "s":
                ids = []
                value = None
                for tok in parts[1:]:
                    if "/" in tok or "." in tok:
                        value = ext(tok)
                    else:
                        ids.append(int(tok))
                simplices.append((tuple(ids), value, lineno))
            else:
                raise ParseError(f"unknown record {parts[0]!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), lineno) from None
    return _assemble(vertex_vals, simplices)


def _assemble(vertex_vals, simplices) -> FilteredComplex:
    explicit_simplices = [s for s in simplices if s[1] is not None]
    if explicit_simplices:
        # explicit mode: every simplex and vertex carries its own value
        if len(explicit_simplices) != len(simplices):
            bad = next(s for s in simplices if s[1] is None)
            raise ParseError("mixing explicit simplex values with lower-star simplices", bad[2])
        values: dict[Simplex, ExtendedRational] = {}
        for vid, x in vertex_vals.items():
            if x is None:
                raise ParseError(f"vertex {vid} needs a value in explicit mode")
            values[(vid,)] = x
        for ids, x, lineno in simplices:
            key = tuple(sorted(ids))
            if len(set(ids)) != len(ids):
                raise ParseError(f"repeated vertex in simplex {ids}", lineno)
            values[key] = x
        k = SimplicialComplex(values.keys(), close=False) if _closed(values) else None
        if k is None:
            missing = _first_missing_face(values)
            raise ParseError(f"face {missing} is not declared")
        return FilteredComplex(k, FiltrationFunction.explicit(values))
    for vid, x in vertex_vals.items():
        if x is None:
            raise ParseError(f"vertex {vid} has no value")
    for ids, _, lineno in simplices:
        if len(set(ids)) != len(ids):
            raise ParseError(f"repeated vertex in simplex {ids}", lineno)
        for v in ids:
            if v not in vertex_vals:
                raise ParseError(f"simplex uses undeclared vertex {v}", lineno)
    k = SimplicialComplex([(v,) for v in vertex_vals] + [ids for ids, _, _ in simplices])
    return FilteredComplex(k, FiltrationFunction.from_vertices(vertex_vals))


def _closed(values) -> bool:
    return _first_missing_face(values) is None


def _first_missing_face(values):
    for s in sorted(values, key=lambda t: (len(t), t)):
        for face in _faces(s):
            if face not in values:
                return face
    return None


def parse_map(text: str) -> dict[int, int]:
    out: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "m" or len(parts) != 3:
            raise ParseError("expected 'm <src-id> <dst-id>'", lineno)
        try:
            src, dst = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError("vertex ids must be integers", lineno) from None
        if src in out:
            raise ParseError(f"vertex {src} mapped twice", lineno)
        out[src] = dst
    return out


def format_complex(fc: FilteredComplex) -> str:
    lines = []
    k = fc.complex
    if fc.filtration.mode == "vertex_function":
        for v in k.vertices:
            lines.append(f"v {v} {fc.value((v,))}")
        for s in k.simplices():
            if len(s) > 1:
                lines.append("s " + " ".join(map(str, s)))
    else:
        for v in k.vertices:
            lines.append(f"v {v} {fc.value((v,))}")
        for s in k.simplices():
            if len(s) > 1:
                lines.append("s " + " ".join(map(str, s)) + f" {_explicit_token(fc.value(s))}")
    return "\n".join(lines) + "\n"


def _explicit_token(x: ExtendedRational) -> str:
    # a bare integer would be read as a vertex id
    q = x.fraction()
    return f"{q.numerator}/{q.denominator}"
