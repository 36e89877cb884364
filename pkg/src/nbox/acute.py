"""
Point configurations with no obtuse angles.

An angle x_i x_j x_k is at most pi/2 iff (x_i - x_j) . (x_k - x_j) >= 0, so every test
here is a sign test on exact dot products.  At most 2^n such points fit in R^n, and a set
of exactly 2^n is the vertex set of a right parallelepiped.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import TheoremFalsified
from .exactnum import dot, qstr, vadd, vec, vsub

MAX_RECOGNIZE_DIM = 4


class NotAcuteFree(ValueError):
    pass


class WrongCardinality(ValueError):
    pass


@dataclass(frozen=True)
class PointConfig:
    n: int
    points: tuple

    def __post_init__(self):
        pts = tuple(vec(p) for p in self.points)
        if any(len(p) != self.n for p in pts):
            raise ValueError("point of wrong dimension")
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate points")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, points: Sequence[Sequence]) -> PointConfig:
        points = [vec(p) for p in points]
        return cls(len(points[0]) if points else 0, tuple(points))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class AcuteResult:
    ok: bool
    witness: tuple | None = None  # (i, j, k) with the obtuse angle at j
    dot: Fraction | None = None


def check_acute_free(c: PointConfig) -> AcuteResult:
    """Every angle at most pi/2; otherwise the first violating (i, j, k), angle at j."""
    pts = c.points
    m = len(pts)
    for i, j, k in itertools.permutations(range(m), 3):
        d = dot(vsub(pts[i], pts[j]), vsub(pts[k], pts[j]))
        if d < 0:
            return AcuteResult(False, (i, j, k), d)
    return AcuteResult(True)


@dataclass(frozen=True)
class CardinalityReport:
    m: int
    bound: int
    margin: int
    equality: bool
    falsifies: bool
    parallelepiped: RecognitionResult | None = None

    def to_json(self) -> dict:
        d = {"m": self.m, "bound": self.bound, "margin": self.margin, "equality": self.equality,
             "status": "FALSIFIES_THEOREM" if self.falsifies else "ok"}
        if self.parallelepiped is not None:
            d["right_parallelepiped"] = self.parallelepiped.to_json()
        return d


def cardinality_report(c: PointConfig) -> CardinalityReport:
    """Compare the size of an acute-free set with 2^n; route the equality case to recognition."""
    res = check_acute_free(c)
    if not res.ok:
        raise NotAcuteFree(f"obtuse angle at triple {res.witness}")
    bound = 2 ** c.n
    m = len(c)
    rec = None
    if m == bound and c.n <= MAX_RECOGNIZE_DIM:
        rec = recognize_right_parallelepiped(c)
    return CardinalityReport(m, bound, bound - m, m == bound, m > bound, rec)


def require_bound(report: CardinalityReport, c: PointConfig):
    if report.falsifies:
        raise TheoremFalsified(f"{report.m} acute-free points in R^{c.n}", witness=c.points)


@dataclass(frozen=True)
class RecognitionResult:
    status: str  # "yes", "no", "unsupported"
    base: tuple | None = None
    frame: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.status == "yes"

    def to_json(self) -> dict:
        d = {"status": self.status}
        if self.frame is not None:
            d["base"] = [qstr(x) for x in self.base]
            d["frame"] = [[qstr(x) for x in v] for v in self.frame]
        return d


def _generated(base, frame):
    out = set()
    for mask in range(1 << len(frame)):
        p = base
        for i, u in enumerate(frame):
            if mask >> i & 1:
                p = vadd(p, u)
        out.add(p)
    return out


def _valid_frame(target: set, base, frame) -> bool:
    for u, v in itertools.combinations(frame, 2):
        if dot(u, v) != 0:
            return False
    if any(not any(u) for u in frame):
        return False
    return _generated(base, frame) == target


def recognize_right_parallelepiped(c: PointConfig) -> RecognitionResult:
    """
    Decide whether 2^n points are {p0 + sum_{i in T} u_i} with pairwise orthogonal u_i.

    p0 is the lexicographic minimum (every point of a parallelepiped is a vertex, so it is
    one).  Edge candidates are first restricted to differences that are not a sum of two
    other differences; if that shortlist fails, every n-subset of differences is tried.
    Dimensions above 4 are reported as unsupported instead of guessed.
    """
    n = c.n
    if len(c) != 2 ** n:
        raise WrongCardinality(f"need 2^{n} points, got {len(c)}")
    if n > MAX_RECOGNIZE_DIM:
        return RecognitionResult("unsupported")
    target = set(c.points)
    base = min(c.points)
    diffs = sorted(vsub(p, base) for p in c.points if p != base)
    dset = set(diffs)
    short = [d for d in diffs
             if not any(vsub(d, e) in dset for e in diffs if e != d and vsub(d, e) != e)]
    for pool in (short, diffs):
        for frame in itertools.combinations(pool, n):
            if _valid_frame(target, base, frame):
                return RecognitionResult("yes", base, frame)
    return RecognitionResult("no")
