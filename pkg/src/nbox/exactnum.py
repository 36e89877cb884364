"""
Exact rational arithmetic helpers: vectors, symmetric forms, lattice bases.

Numbers are :class:`fractions.Fraction`. Vectors are tuples of fractions, forms are
:class:`SymForm` (an immutable symmetric matrix). Nothing in here ever produces a float;
geometric comparisons are phrased on squared quantities so no square roots are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Vec = tuple  # tuple[Fraction, ...]


class NotPositiveDefinite(ValueError):
    pass


def Q(x) -> Fraction:
    """Coerce ints, fractions and "p/q" strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted, pass a string or Fraction")
    return Fraction(x)


def qstr(x: Fraction) -> str:
    """
    Canonical serialization: "p/q", or "p" when q = 1.

    >>> qstr(Fraction(3, 6)), qstr(Fraction(-4, 2))
    ('1/2', '-2')
    """
    x = Q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def vec(xs: Iterable) -> Vec:
    return tuple(Q(x) for x in xs)


def vadd(a: Sequence, b: Sequence) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence, b: Sequence) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a: Sequence) -> Vec:
    return tuple(c * x for x in a)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def unit(n: int, i: int) -> Vec:
    return tuple(Fraction(int(j == i)) for j in range(n))


@dataclass(frozen=True)
class SymForm:
    """Symmetric bilinear form with rational entries, stored row-major."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(Q(x) for x in row) for row in self.entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("form must be square")
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"form is not symmetric at ({i}, {j})")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def identity(cls, n: int) -> SymForm:
        return cls(tuple(unit(n, i) for i in range(n)))

    @classmethod
    def diagonal(cls, diag: Sequence) -> SymForm:
        n = len(diag)
        return cls(tuple(tuple(Q(diag[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def apply(self, v: Sequence) -> Vec:
        return tuple(dot(row, v) for row in self.entries)

    def inner(self, u: Sequence, v: Sequence) -> Fraction:
        return dot(u, self.apply(v))

    def norm2(self, v: Sequence) -> Fraction:
        return self.inner(v, v)

    def __add__(self, other: SymForm) -> SymForm:
        return SymForm(tuple(vadd(a, b) for a, b in zip(self.entries, other.entries)))

    def scaled(self, c) -> SymForm:
        return SymForm(tuple(vscale(c, row) for row in self.entries))

    def to_json(self) -> list:
        return [[qstr(x) for x in row] for row in self.entries]

    @classmethod
    def from_json(cls, rows) -> SymForm:
        return cls(tuple(tuple(Q(x) for x in row) for row in rows))


def ldl_pivots(g: SymForm | Sequence[Sequence]) -> list[Fraction]:
    """
    Pivots of symmetric Gaussian elimination without pivoting.

    Stops early (returning the pivots so far, last one non-positive) as soon as a pivot
    fails to be positive, since the remaining ones are then meaningless for the PD test.
    """
    rows = g.entries if isinstance(g, SymForm) else g
    a = [[Q(x) for x in row] for row in rows]
    n = len(a)
    pivots = []
    for k in range(n):
        p = a[k][k]
        pivots.append(p)
        if p <= 0:
            break
        for i in range(k + 1, n):
            f = a[i][k] / p
            if f:
                for j in range(k + 1, n):
                    a[i][j] -= f * a[k][j]
    return pivots


def is_positive_definite(g: SymForm | Sequence[Sequence]) -> bool:
    """xᵀgx > 0 for every nonzero x, decided by the signs of the elimination pivots."""
    pivots = ldl_pivots(g)
    n = g.n if isinstance(g, SymForm) else len(g)
    return len(pivots) == n and all(p > 0 for p in pivots)


def det(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction Gaussian elimination with row pivoting."""
    a = [[Q(x) for x in row] for row in m]
    n = len(a)
    sign = 1
    result = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        p = a[k][k]
        result *= p
        for i in range(k + 1, n):
            f = a[i][k] / p
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return sign * result


def inverse(m: Sequence[Sequence]) -> list[list[Fraction]]:
    """Gauss-Jordan inverse; raises ZeroDivisionError on singular input."""
    n = len(m)
    a = [[Q(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[k], a[piv] = a[piv], a[k]
        p = a[k][k]
        a[k] = [x / p for x in a[k]]
        for i in range(n):
            if i != k and a[i][k]:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return [row[n:] for row in a]


@dataclass(frozen=True)
class LatticeBasis:
    """n linearly independent rational vectors, the lattice is their integer span."""

    vectors: tuple

    def __post_init__(self):
        vs = tuple(vec(v) for v in self.vectors)
        if not vs or any(len(v) != len(vs) for v in vs):
            raise ValueError("lattice basis must consist of n vectors of length n")
        if det(vs) == 0:
            raise ValueError("lattice basis vectors are linearly dependent")
        object.__setattr__(self, "vectors", vs)

    @property
    def n(self) -> int:
        return len(self.vectors)

    @classmethod
    def standard(cls, n: int, scale=1) -> LatticeBasis:
        return cls(tuple(vscale(Q(scale), unit(n, i)) for i in range(n)))

    def point(self, coeffs: Sequence[int]) -> Vec:
        out = [Fraction(0)] * self.n
        for c, v in zip(coeffs, self.vectors):
            if c:
                for i, x in enumerate(v):
                    out[i] += c * x
        return tuple(out)

    def gram(self, g: SymForm) -> list[list[Fraction]]:
        """BᵀgB with basis vectors as the columns of B."""
        return [[g.inner(u, v) for v in self.vectors] for u in self.vectors]

    def coords(self, x: Sequence) -> Vec:
        """Coefficients of x in this basis (not necessarily integral)."""
        inv = inverse([[v[i] for v in self.vectors] for i in range(self.n)])
        return tuple(dot(row, x) for row in inv)

    def covolume(self) -> Fraction:
        """Lebesgue covolume |det B|."""
        return abs(det(self.vectors))


def covolume_squared(basis: LatticeBasis, g: SymForm) -> Fraction:
    """Squared g-covolume det(BᵀgB) of the lattice spanned by ``basis``."""
    if not is_positive_definite(g):
        raise NotPositiveDefinite("covolume needs a positive definite form")
    return det(basis.gram(g))


def ortho_complement(coords: Iterable[int], g: SymForm) -> list[Vec]:
    """
    Basis of the g-orthogonal complement of span{e_i : i in coords}.

    For each coordinate j outside ``coords`` the returned vector is e_j corrected by a
    combination of the e_i (i in coords) so that g(e_i, v) = 0; the vectors are scaled to
    have coprime integer entries.
    """
    s = sorted(set(coords))
    n = g.n
    if any(not 0 <= i < n for i in s):
        raise IndexError("coordinate index out of range")
    rest = [j for j in range(n) if j not in s]
    if not s:
        return [unit(n, j) for j in rest]
    gss_inv = inverse([[g[i, k] for k in s] for i in s])
    basis = []
    for j in rest:
        # v = e_j - sum_i a_i e_i with g_SS a = g_Sj
        rhs = [g[i, j] for i in s]
        a = [dot(row, rhs) for row in gss_inv]
        v = [Fraction(0)] * n
        v[j] = Fraction(1)
        for i, ai in zip(s, a):
            v[i] -= ai
        basis.append(primitive(v))
    return basis


def primitive(v: Sequence) -> Vec:
    """Scale a nonzero rational vector to coprime integers with first nonzero entry positive."""
    v = vec(v)
    den = math.lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    gcd = math.gcd(*ints)
    if gcd == 0:
        raise ValueError("zero vector has no primitive form")
    lead = next(x for x in ints if x)
    if lead < 0:
        gcd = -gcd
    return tuple(Fraction(x // gcd) for x in ints)


def hermite_rows(rows: Iterable[Sequence[int]], n: int) -> list[list[int]]:
    """
    Row-style Hermite normal form of the integer row lattice spanned by ``rows``.

    Returns the nonzero rows, upper triangular with positive pivots and entries above each
    pivot reduced into [0, pivot).
    """
    work = [list(r) for r in rows if any(r)]
    basis: list[list[int]] = []
    col = 0
    while work and col < n:
        live = [r for r in work if r[col] != 0]
        if not live:
            col += 1
            continue
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            for r in live[1:]:
                q = r[col] // piv[col]
                for j in range(col, n):
                    r[j] -= q * piv[j]
            live = [piv] + [r for r in live[1:] if r[col] != 0]
        piv = live[0]
        if piv[col] < 0:
            piv[:] = [-x for x in piv]
        work = [r for r in work if r is not piv and any(r)]
        basis.append(piv)
        col += 1
    for k, row in enumerate(basis):
        c = next(j for j, x in enumerate(row) if x)
        for above in basis[:k]:
            q = above[c] // row[c]
            if q:
                for j in range(n):
                    above[j] -= q * row[j]
    return basis


def lattice_from_generators(gens: Iterable[Sequence], n: int) -> LatticeBasis:
    """Basis of the lattice generated by rational vectors (which must span R^n)."""
    gens = [vec(v) for v in gens]
    den = math.lcm(1, *(x.denominator for v in gens for x in v))
    rows = hermite_rows(([int(x * den) for x in v] for v in gens), n)
    if len(rows) != n:
        raise ValueError("generators do not span a full-rank lattice")
    return LatticeBasis(tuple(tuple(Fraction(x, den) for x in r) for r in rows))


def isqrt_floor(x: Fraction) -> int:
    """Largest integer k >= 0 with k*k <= x (x >= 0)."""
    if x < 0:
        raise ValueError("negative radicand")
    return math.isqrt(x.numerator // x.denominator)
