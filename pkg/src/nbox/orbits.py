"""
Isolated fixed points, their orbits, and maximal finite subgroups.

A point is an isolated fixed point of some subgroup iff it is the whole fixed set of its
own stabilizer, i.e. iff every coordinate is flipped by some stabilizer element.  Such a
point has every coordinate equal to t_i / 2 for an integral t_i, so it lives on the
half-integer grid and the sweep over quarter classes {0, 1/2, 1, 3/2}^n mod 2Z^n is
exhaustive.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import TheoremFalsified
from .signcrystal import (
    FREE,
    QUARTER_VALUES,
    GroupSpec,
    act_on_point,
    fixed_set,
    full_mask,
    point_json,
    point_masks,
    stabilizer_masks,
    AffineElement,
)


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def classes(self) -> list[list]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        classes = [sorted(c, key=_point_key) for c in out.values()]
        return sorted(classes, key=lambda c: _point_key(c[0]))


def _point_key(p):
    return tuple(-1 if x is FREE else x for x in p)


def quarter_grid(n: int):
    return itertools.product(QUARTER_VALUES, repeat=n)


def partial_grid(n: int):
    return itertools.product(QUARTER_VALUES + (FREE,), repeat=n)


def orbit_partition(g: GroupSpec, points: Sequence[tuple]) -> list[list[tuple]]:
    """Partition a Γ-invariant set of (partial) points mod 2Z^n into orbits."""
    gens = [(e, g.phi(e)) for e in g.generators]
    uf = UnionFind([tuple(p) for p in points])
    for p in points:
        for e, phi in gens:
            q = act_on_point(e, phi, p)
            if q not in uf.parent:
                raise AssertionError(f"point set is not invariant: {p} -> {q}")
            _union_keyed(uf, p, q)
    return uf.classes()


def _union_keyed(uf: UnionFind, p, q):
    rp, rq = uf.find(p), uf.find(q)
    if rp == rq:
        return
    if _point_key(rq) < _point_key(rp):
        rp, rq = rq, rp
    uf.parent[rq] = rp


# -- extremal points ------------------------------------------------------------------

@dataclass(frozen=True)
class ExtremalSet:
    n: int
    points: tuple
    orbits: tuple

    @property
    def N(self) -> int:
        return len(self.orbits)

    def to_json(self) -> dict:
        return {
            "points": [point_json(p) for p in self.points],
            "orbits": [[point_json(p) for p in orb] for orb in self.orbits],
        }


@dataclass(frozen=True)
class ExtremalityCertificate:
    extremal: bool
    stabilizer: tuple
    sign_sum: tuple
    witness_axis: int | None = None


def sign_sum(stab: Sequence[int], n: int) -> tuple[int, ...]:
    """Diagonal of the sum of the stabilizer's sign matrices."""
    return tuple(sum(-1 if e >> i & 1 else 1 for e in stab) for i in range(n))


def is_extremal(g: GroupSpec, p: Sequence) -> ExtremalityCertificate:
    """
    Decide extremality of the image of a quarter point.

    Both criteria are evaluated and must agree: full support of the stabilizer, and the
    sign-sum of the stabilizer vanishing.  A non-extremal point comes with an axis e_k that
    every stabilizer element fixes; e_k and -e_k are then directions at angle pi.
    """
    p = tuple(p)
    if any(x is FREE for x in p):
        raise ValueError("extremality is decided for fully pinned points only")
    free, half = point_masks(p)
    stab = stabilizer_masks(g, free, half)
    supp = 0
    for e in stab:
        supp |= e
    full = supp == full_mask(g.n)
    sums = sign_sum(stab, g.n)
    zero = not any(sums)
    if full != zero:
        raise AssertionError(f"extremality tests disagree at {p}")
    if full:
        # isolated fixed points are half-integral: each coordinate is pinned by a flip
        for i in range(g.n):
            e = next(e for e in stab if e >> i & 1)
            assert fixed_set(AffineElement.from_masks(e, _translation(e, g.phi(e), p), g.n))[i] == p[i]
        return ExtremalityCertificate(True, tuple(stab), sums)
    axis = next(i for i in range(g.n) if not supp >> i & 1)
    return ExtremalityCertificate(False, tuple(stab), sums, axis)


def _translation(eps: int, phi: int, p: Sequence) -> tuple:
    """The unique translation part t with t = phi mod 2 making x -> eps x + t fix p."""
    t = []
    for i, x in enumerate(p):
        if eps >> i & 1:
            t.append(2 * x)
        else:
            t.append(Fraction(phi >> i & 1))
    return tuple(t)


def extremal_points(g: GroupSpec) -> ExtremalSet:
    """Sweep all 4^n quarter classes; keep the extremal ones and split them into orbits."""
    pts = [p for p in quarter_grid(g.n) if is_extremal(g, p).extremal]
    orbits = orbit_partition(g, pts) if pts else []
    return ExtremalSet(g.n, tuple(sorted(pts)), tuple(tuple(o) for o in orbits))


def count_N(g: GroupSpec) -> int:
    """Number of orbits of isolated fixed points; raises TheoremFalsified if it exceeds 2^n."""
    n_orbits = extremal_points(g).N
    if n_orbits > 2 ** g.n:
        raise TheoremFalsified(f"N = {n_orbits} > 2^{g.n}", witness=g.to_json())
    return n_orbits


# -- maximal finite subgroups ---------------------------------------------------------

@dataclass(frozen=True)
class FiniteSubgroupReport:
    n: int
    representatives: tuple  # ((partial point, stabilizer masks), ...)

    @property
    def m_count(self) -> int:
        return len(self.representatives)

    def to_json(self) -> dict:
        from .signcrystal import sign_str

        return {
            "m_count": self.m_count,
            "representatives": [
                {"locus": point_json(p), "stabilizer": [sign_str(e, self.n) for e in stab]}
                for p, stab in self.representatives
            ],
        }


def _extensions(p: Sequence):
    slots = [QUARTER_VALUES if x is FREE else (x,) for x in p]
    return itertools.product(*slots)


def is_maximal_locus(g: GroupSpec, p: Sequence) -> bool:
    """
    True iff p is the fixed locus of its (nontrivial) stabilizer and that stabilizer is
    maximal among finite subgroups.

    Every finite subgroup fixes a point, and a point of the locus pinned further has a
    stabilizer containing St(p); so St(p) is maximal iff all quarter extensions of p keep
    the same stabilizer.
    """
    free, half = point_masks(p)
    stab = stabilizer_masks(g, free, half)
    if len(stab) == 1:
        return False
    supp = 0
    for e in stab:
        supp |= e
    if supp != full_mask(g.n) & ~free:
        return False
    for q in _extensions(p):
        if len(stabilizer_masks(g, *point_masks(q))) != len(stab):
            return False
    return True


def maximal_finite(g: GroupSpec) -> FiniteSubgroupReport:
    """
    Conjugacy classes of nontrivial maximal finite subgroups, found by sweeping all 5^n
    partial points.  Conjugating a stabilizer moves its fixed locus, so classes are the
    Γ-orbits of maximal loci.
    """
    loci = [p for p in partial_grid(g.n) if is_maximal_locus(g, p)]
    reps = []
    for orb in (orbit_partition(g, loci) if loci else []):
        p = orb[0]
        reps.append((p, tuple(stabilizer_masks(g, *point_masks(p)))))
    return FiniteSubgroupReport(g.n, tuple(reps))


def count_M(g: GroupSpec) -> int:
    return maximal_finite(g).m_count


# -- closed-form counts for sweeps ----------------------------------------------------
#
# The stabilizer of a partial point depends only on (free mask F, half-odd mask h).  For
# fixed (F, h) the 2^(n-|F|) classes differ in the integer bits b of their pinned
# coordinates, and x -> eps x + phi acts on b by b -> b ^ phi(eps) ^ (eps & h), a
# translation of (Z/2)^pinned.  The orbit count is 2^pinned / |image|.

def _orbit_count(table, h: int, pinned: int) -> int:
    image = {(p ^ (e & h)) & pinned for e, p in table}
    return (1 << bin(pinned).count("1")) // len(image)


def fast_counts(table: Sequence[tuple[int, int]], n: int) -> tuple[int, int]:
    """(N, M) for the action with element table ``table`` (pairs of masks)."""
    top = full_mask(n)
    stab_size = [0] * (1 << n)
    stab_supp = [0] * (1 << n)
    for h in range(1 << n):
        s = c = 0
        for e, p in table:
            if p == e & h:
                c += 1
                s |= e
        stab_size[h] = c
        stab_supp[h] = s
    N = 0
    for h in range(1 << n):
        if stab_supp[h] == top:
            N += _orbit_count(table, h, top)
    M = 0
    for free in range(1 << n):
        pinned = top & ~free
        h = pinned
        while True:
            # enumerate h over subsets of the pinned coordinates
            size = supp = 0
            for e, p in table:
                if not e & free and p == e & h:
                    size += 1
                    supp |= e
            if size > 1 and supp == pinned:
                sub = free
                maximal = True
                while True:
                    if stab_size[h | sub] != size:
                        maximal = False
                        break
                    if sub == 0:
                        break
                    sub = (sub - 1) & free
                if maximal:
                    M += _orbit_count(table, h, pinned)
            if h == 0:
                break
            h = (h - 1) & pinned
    return N, M
