"""Exact scalars and dense matrices over prime fields.

``ExtendedRational`` carries every real-valued quantity (filtration values,
interval endpoints, distances).  ``Matrix`` is a dense matrix over F_p backed
by an int64 numpy array; all reductions are done exactly modulo p.
"""

from __future__ import annotations

import functools
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ExtendedRational",
    "FieldScalar",
    "Matrix",
    "INF",
    "NEG_INF",
    "ext",
    "is_prime",
    "rref",
    "rank",
    "kernel_basis",
    "image_basis",
    "complement_basis",
    "solve",
    "compose",
    "DimensionError",
]


class DimensionError(ValueError):
    """Raised when matrix shapes do not chain."""


_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")


@functools.total_ordering
class ExtendedRational:
    """A rational number, or one of the two infinities.

    Infinities take part in ordering, ``max``/``min``, ``abs`` and addition
    with finite values.  ``inf + (-inf)`` raises.
    """

    __slots__ = ("_sign", "_q")

    def __init__(self, value=0):
        if isinstance(value, ExtendedRational):
            self._sign, self._q = value._sign, value._q
            return
        if isinstance(value, str):
            value = _parse_str(value)
            if isinstance(value, ExtendedRational):
                self._sign, self._q = value._sign, value._q
                return
        if isinstance(value, float):
            if value == float("inf"):
                self._sign, self._q = 1, None
                return
            if value == float("-inf"):
                self._sign, self._q = -1, None
                return
            raise TypeError("floats are not accepted; use Fraction or a string")
        if isinstance(value, bool) or not isinstance(value, (int, Rational)):
            raise TypeError(f"cannot build ExtendedRational from {value!r}")
        self._sign = 0
        self._q = Fraction(value)

    @classmethod
    def pos_inf(cls) -> "ExtendedRational":
        x = cls.__new__(cls)
        x._sign, x._q = 1, None
        return x

    @classmethod
    def neg_inf(cls) -> "ExtendedRational":
        x = cls.__new__(cls)
        x._sign, x._q = -1, None
        return x

    @property
    def kind(self) -> str:
        return {0: "finite", 1: "pos_infinity", -1: "neg_infinity"}[self._sign]

    @property
    def is_finite(self) -> bool:
        return self._sign == 0

    @property
    def numerator(self) -> int:
        self._require_finite()
        return self._q.numerator

    @property
    def denominator(self) -> int:
        self._require_finite()
        return self._q.denominator

    def fraction(self) -> Fraction:
        self._require_finite()
        return self._q

    def _require_finite(self):
        if self._sign:
            raise ValueError("infinite value has no rational representation")

    # ordering -----------------------------------------------------------
    def _key(self):
        return (self._sign, self._q if self._sign == 0 else 0)

    def __eq__(self, other):
        try:
            other = ext(other)
        except TypeError:
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        try:
            other = ext(other)
        except TypeError:
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        if self._sign == 0:
            return hash(self._q)
        return hash(("inf", self._sign))

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        try:
            other = ext(other)
        except TypeError:
            return NotImplemented
        if self._sign == 0 and other._sign == 0:
            return _finite(self._q + other._q)
        if self._sign and other._sign and self._sign != other._sign:
            raise ArithmeticError("inf + (-inf) is undefined")
        return self if self._sign else other

    __radd__ = __add__

    def __neg__(self):
        if self._sign:
            return ExtendedRational.neg_inf() if self._sign > 0 else ExtendedRational.pos_inf()
        return _finite(-self._q)

    def __sub__(self, other):
        try:
            other = ext(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return ext(other) - self

    def __abs__(self):
        if self._sign:
            return ExtendedRational.pos_inf()
        return _finite(abs(self._q))

    def __mul__(self, other):
        # only scaling by finite non-negative rationals is needed
        if isinstance(other, ExtendedRational):
            other = other.fraction()
        other = Fraction(other)
        if self._sign:
            if other > 0:
                return self
            raise ArithmeticError("infinite value scaled by non-positive factor")
        return _finite(self._q * other)

    __rmul__ = __mul__

    def half(self) -> "ExtendedRational":
        return self if self._sign else _finite(self._q / 2)

    @staticmethod
    def mean(a, b) -> "ExtendedRational":
        a, b = ext(a), ext(b)
        if not (a.is_finite and b.is_finite):
            raise ArithmeticError("mean of infinite values")
        return _finite((a._q + b._q) / 2)

    # text ---------------------------------------------------------------
    def __str__(self):
        if self._sign:
            return "inf" if self._sign > 0 else "-inf"
        q = self._q
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

    def __repr__(self):
        return f"ExtendedRational({str(self)!r})"


def _finite(q: Fraction) -> ExtendedRational:
    x = ExtendedRational.__new__(ExtendedRational)
    x._sign, x._q = 0, q
    return x


def _parse_str(text: str):
    s = text.strip().lower()
    if s in ("inf", "+inf", "infinity", "+infinity"):
        return ExtendedRational.pos_inf()
    if s in ("-inf", "-infinity"):
        return ExtendedRational.neg_inf()
    m = _RATIONAL_RE.match(s)
    if m:
        den = int(m.group(2))
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), den)
    try:
        return Fraction(s)  # decimal literals are exact in Fraction
    except ValueError:
        raise ValueError(f"not a rational number: {text!r}") from None


def ext(value) -> ExtendedRational:
    """Coerce ``value`` to an ExtendedRational."""
    if isinstance(value, ExtendedRational):
        return value
    return ExtendedRational(value)


INF = ExtendedRational.pos_inf()
NEG_INF = ExtendedRational.neg_inf()


@functools.lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def _check_modulus(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"modulus must be prime, got {p!r}")
    if p >= 2**31:
        raise ValueError("modulus too large for int64 products")
    return p


class FieldScalar:
    """An element of F_p."""

    __slots__ = ("residue", "modulus")

    def __init__(self, value: int, modulus: int = 2):
        _check_modulus(modulus)
        self.modulus = modulus
        self.residue = int(value) % modulus

    def _coerce(self, other) -> "FieldScalar":
        if isinstance(other, FieldScalar):
            if other.modulus != self.modulus:
                raise ValueError("mixed moduli")
            return other
        if isinstance(other, int):
            return FieldScalar(other, self.modulus)
        raise TypeError(f"cannot combine FieldScalar with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        return FieldScalar(self.residue + o.residue, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldScalar(self.residue - o.residue, self.modulus)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return FieldScalar(-self.residue, self.modulus)

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldScalar(self.residue * o.residue, self.modulus)

    __rmul__ = __mul__

    def inverse(self) -> "FieldScalar":
        if self.residue == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldScalar(pow(self.residue, -1, self.modulus), self.modulus)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __eq__(self, other):
        if isinstance(other, int):
            return self.residue == other % self.modulus
        if isinstance(other, FieldScalar):
            return (self.residue, self.modulus) == (other.residue, other.modulus)
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.modulus))

    def __int__(self):
        return self.residue

    def __repr__(self):
        return f"FieldScalar({self.residue}, p={self.modulus})"


class Matrix:
    """Dense immutable matrix over F_p."""

    __slots__ = ("_a", "p")

    def __init__(self, entries, p: int = 2, shape: tuple[int, int] | None = None):
        _check_modulus(p)
        a = np.array(entries, dtype=np.int64)
        if shape is not None:
            a = a.reshape(shape)
        if a.ndim != 2:
            if a.size == 0 and shape is None:
                raise DimensionError("empty entries need an explicit shape")
            raise DimensionError(f"expected a 2-d array, got shape {a.shape}")
        a = np.mod(a, p)
        a.setflags(write=False)
        self._a = a
        self.p = p

    @classmethod
    def _wrap(cls, a: np.ndarray, p: int) -> "Matrix":
        m = cls.__new__(cls)
        a = np.ascontiguousarray(a, dtype=np.int64)
        a.setflags(write=False)
        m._a, m.p = a, p
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int = 2) -> "Matrix":
        return cls._wrap(np.zeros((rows, cols), dtype=np.int64), _check_modulus(p))

    @classmethod
    def identity(cls, n: int, p: int = 2) -> "Matrix":
        return cls._wrap(np.eye(n, dtype=np.int64), _check_modulus(p))

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the residues."""
        return self._a

    def __getitem__(self, idx):
        i, j = idx
        return FieldScalar(int(self._a[i, j]), self.p)

    def entries(self) -> list[FieldScalar]:
        return [FieldScalar(int(v), self.p) for v in self._a.ravel()]

    def _same_field(self, other: "Matrix"):
        if other.p != self.p:
            raise ValueError(f"mixed moduli {self.p} and {other.p}")

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._same_field(other)
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        return Matrix._wrap((self._a @ other._a) % self.p, self.p)

    def __add__(self, other: "Matrix") -> "Matrix":
        self._same_field(other)
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return Matrix._wrap((self._a + other._a) % self.p, self.p)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._same_field(other)
        if self.shape != other.shape:
            raise DimensionError(f"cannot subtract {self.shape} and {other.shape}")
        return Matrix._wrap((self._a - other._a) % self.p, self.p)

    def __neg__(self):
        return Matrix._wrap((-self._a) % self.p, self.p)

    def scale(self, c: int) -> "Matrix":
        return Matrix._wrap((self._a * (c % self.p)) % self.p, self.p)

    @property
    def T(self) -> "Matrix":
        return Matrix._wrap(self._a.T, self.p)

    def hstack(self, *others: "Matrix") -> "Matrix":
        for o in others:
            self._same_field(o)
            if o.rows != self.rows:
                raise DimensionError("hstack row mismatch")
        return Matrix._wrap(np.hstack([self._a] + [o._a for o in others]), self.p)

    def columns(self, idx: Sequence[int]) -> "Matrix":
        return Matrix._wrap(self._a[:, list(idx)].reshape(self.rows, len(idx)), self.p)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        a = self._a[np.ix_(list(rows), list(cols))] if rows and cols else np.zeros((len(rows), len(cols)), dtype=np.int64)
        return Matrix._wrap(a, self.p)

    def is_zero(self) -> bool:
        return not self._a.any()

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash((self.p, self.shape, self._a.tobytes()))

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def __repr__(self):
        return f"Matrix({self.tolist()}, p={self.p}, shape={self.shape})"


def _inv_table(p: int) -> np.ndarray:
    return _INV_CACHE.setdefault(p, np.array([0] + [pow(k, -1, p) for k in range(1, p)], dtype=np.int64))


_INV_CACHE: dict[int, np.ndarray] = {}


def rref(m: Matrix, pivot_cols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p.

    Pivots are taken leftmost column first, and within a column the
    lowest-index eligible row is used.  Only the first ``pivot_cols`` columns
    are eligible as pivots; row operations still act on every column.
    """
    p = m.p
    a = np.array(m.array, dtype=np.int64)
    nrows, ncols = a.shape
    limit = ncols if pivot_cols is None else pivot_cols
    inv = _inv_table(p)
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * inv[a[r, c]]) % p
        col = a[:, c].copy()
        col[r] = 0
        if col.any():
            a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: Matrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(rref(m)[1])


def kernel_basis(m: Matrix) -> Matrix:
    """Columns form a basis of the null space, one per free column."""
    n = m.cols
    if m.rows == 0:
        return Matrix.identity(n, m.p)
    r, pivots = rref(m)
    free = [c for c in range(n) if c not in set(pivots)]
    out = np.zeros((n, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        out[f, j] = 1
        for i, pc in enumerate(pivots):
            out[pc, j] = (-r[i, f]) % m.p
    return Matrix._wrap(out, m.p)


def image_basis(m: Matrix) -> Matrix:
    """The pivot columns of ``m``: a basis of its column space."""
    if m.rows == 0 or m.cols == 0:
        return Matrix.zeros(m.rows, 0, m.p)
    _, pivots = rref(m)
    return m.columns(pivots)


def complement_basis(b: Matrix) -> Matrix:
    """Standard basis vectors completing the columns of ``b`` to a basis.

    ``b`` must have independent columns.  The chosen vectors are those
    not pivotal for the echelon form of ``b``'s span, so the choice is
    deterministic.
    """
    n, k = b.shape
    aug = b.hstack(Matrix.identity(n, b.p))
    _, pivots = rref(aug)
    if pivots[:k] != list(range(k)):
        raise ValueError("columns are not independent")
    chosen = [c - k for c in pivots[k:]]
    return Matrix.identity(n, b.p).columns(chosen)


def solve(m: Matrix, b: Matrix) -> Matrix | None:
    """One solution ``x`` of ``m @ x == b``, or None.

    Free variables are set to zero, so the answer is deterministic.
    """
    if m.rows != b.rows:
        raise DimensionError(f"solve: {m.shape} vs right-hand side {b.shape}")
    if m.p != b.p:
        raise ValueError("mixed moduli")
    n, k = m.cols, b.cols
    if m.rows == 0:
        return Matrix.zeros(n, k, m.p)
    r, pivots = rref(m.hstack(b), pivot_cols=n)
    rk = len(pivots)
    if r[rk:, n:].any():
        return None
    x = np.zeros((n, k), dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = r[i, n:]
    return Matrix._wrap(x, m.p)


def compose(ms: Iterable[Matrix], dim: int | None = None, p: int | None = None) -> Matrix:
    """Composite of maps listed in diagram order (first map applied first).

    An empty sequence gives the identity on ``dim``.
    """
    ms = list(ms)
    if not ms:
        if dim is None or p is None:
            raise DimensionError("empty composite needs dim and p")
        return Matrix.identity(dim, p)
    out = ms[0]
    for nxt in ms[1:]:
        if nxt.cols != out.rows:
            raise DimensionError(f"cannot chain {out.shape} then {nxt.shape}")
        out = nxt @ out
    return out
