"""
Enumeration and canonical forms of normalized actions.

Two specs are identified when one is carried to the other by a coordinate permutation
(acting on sign and parity positions alike) combined with conjugation by a half-integer
translation x -> x + c/2, which changes phi by the coboundary eps -> c & eps.

The canonical encoding of a spec is the sorted list of (sign string, parity string) pairs;
the canonical form is the transform minimizing it.  Sign strings compare '+' < '-' and
parity strings '0' < '1', so bit-reversed masks (coordinate 0 most significant) compare
exactly like the strings.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from fractions import Fraction

from .exactnum import lattice_from_generators
from .orbits import extremal_points, fast_counts, maximal_finite
from .signcrystal import GroupSpec, full_mask, parity_str, sign_str, span
from . import moduli

MAX_DIMENSION = 6


class DimensionTooLarge(ValueError):
    pass


class NotABox(ValueError):
    pass


class NonIntegralExponent(AssertionError):
    pass


# -- subgroup / homomorphism enumeration ----------------------------------------------

def subgroups(n: int) -> Iterator[tuple[int, ...]]:
    """
    Every subgroup of {±1}^n, each yielded once as its reduced-echelon basis.

    Pivot of a vector = its lowest set bit.  A reduced basis has increasing pivots and
    each vector is zero at every other vector's pivot, so after fixing the pivot set each
    vector is free exactly on the non-pivot positions above its own pivot.
    """
    for pivots in itertools.chain.from_iterable(
        itertools.combinations(range(n), d) for d in range(n + 1)
    ):
        pset = set(pivots)
        slots = [[j for j in range(p + 1, n) if j not in pset] for p in pivots]
        choices = [range(1 << len(s)) for s in slots]
        for combo in itertools.product(*choices):
            basis = []
            for p, s, bits in zip(pivots, slots, combo):
                v = 1 << p
                for k, j in enumerate(s):
                    if bits >> k & 1:
                        v |= 1 << j
                basis.append(v)
            yield tuple(basis)


def homomorphism_tables(n: int, basis: Sequence[int]) -> Iterator[tuple[tuple[int, int], ...]]:
    """All tables eps -> phi(eps) for homomorphisms from span(basis) to (Z/2)^n."""
    elems = span(basis)
    # express every element in the basis once
    coords = {}
    for combo in range(1 << len(basis)):
        e = 0
        for k, b in enumerate(basis):
            if combo >> k & 1:
                e ^= b
        coords[e] = combo
    order = [(e, coords[e]) for e in elems]
    for images in itertools.product(range(1 << n), repeat=len(basis)):
        table = []
        for e, combo in order:
            p = 0
            for k, img in enumerate(images):
                if combo >> k & 1:
                    p ^= img
            table.append((e, p))
        yield tuple(table)


def all_tables(n: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every (H, phi) in dimension n, as element tables sorted by sign mask."""
    for basis in subgroups(n):
        yield from homomorphism_tables(n, basis)


def count_specs(n: int) -> int:
    """Closed form for the number of (H, phi) pairs: sum over subspaces of 2^(n dim H)."""
    total = 0
    for d in range(n + 1):
        gauss = 1
        for i in range(d):
            gauss = gauss * (2 ** (n - i) - 1) // (2 ** (i + 1) - 1)
        total += gauss * 2 ** (n * d)
    return total


# -- canonical form -------------------------------------------------------------------

@lru_cache(maxsize=None)
def _permutation_tables(n: int):
    """For each permutation, a table mapping masks to permuted, bit-reversed masks."""
    out = []
    for perm in itertools.permutations(range(n)):
        # coordinate i moves to position perm[i]; position k is stored at bit n-1-k
        table = []
        for m in range(1 << n):
            r = 0
            for i in range(n):
                if m >> i & 1:
                    r |= 1 << (n - 1 - perm[i])
            table.append(r)
        out.append((perm, table))
    return out


def _reverse(m: int, n: int) -> int:
    return int(format(m, f"0{n}b")[::-1], 2) if n else 0


def canonical_key(table: Sequence[tuple[int, int]], n: int) -> tuple:
    """
    Minimal encoding over permutations and coboundary shifts, in reversed-mask form.

    For a fixed permutation the encoding's sign column is fixed; walking the sorted rows,
    the coboundary bits on each row's flipped coordinates that are not yet decided can be
    chosen to zero the row's parity there, which is the unique lexicographic optimum.
    """
    best = None
    for _, pt in _permutation_tables(n):
        rows = sorted((pt[e], pt[p]) for e, p in table)
        decided = 0
        c = 0
        enc = []
        for e, p in rows:
            new = e & ~decided
            c |= p & new
            decided |= new
            enc.append((e, p ^ (c & e)))
        enc = tuple(enc)
        if best is None or enc < best:
            best = enc
    return best


def spec_from_key(key: Sequence[tuple[int, int]], n: int) -> GroupSpec:
    return GroupSpec(n, tuple((_reverse(e, n), _reverse(p, n)) for e, p in key))


def canonical_form(g: GroupSpec) -> GroupSpec:
    return spec_from_key(canonical_key(g.table, g.n), g.n)


def encoding(g: GroupSpec) -> str:
    """The concatenated sorted (sign, parity) string pairs of a spec."""
    rows = sorted((sign_str(e, g.n), parity_str(p, g.n)) for e, p in g.table)
    return ";".join(f"{s}:{p}" for s, p in rows)


def catalog_id(g: GroupSpec) -> str:
    """Stable content hash of the canonical encoding."""
    enc = f"n={g.n}|" + encoding(canonical_form(g))
    return hashlib.sha256(enc.encode("ascii")).hexdigest()[:16]


def transform(g: GroupSpec, perm: Sequence[int], c: int) -> GroupSpec:
    """Apply a coordinate permutation (i -> perm[i]) after the coboundary shift by c."""
    def move(m):
        r = 0
        for i in range(g.n):
            if m >> i & 1:
                r |= 1 << perm[i]
        return r

    return GroupSpec(g.n, tuple((move(e), move(p ^ (c & e))) for e, p in g.table))


# -- invariants -----------------------------------------------------------------------

def extremal_lattice_basis(g: GroupSpec):
    """Lattice generated by the differences of isolated fixed points (plus 2Z^n)."""
    ex = extremal_points(g)
    if not ex.points:
        return None
    o = ex.points[0]
    gens = [tuple(a - b for a, b in zip(p, o)) for p in ex.points[1:]]
    gens += [tuple(Fraction(2 * (i == j)) for j in range(g.n)) for i in range(g.n)]
    return lattice_from_generators(gens, g.n)


def gluing_exponent(g: GroupSpec) -> int:
    """
    k with [cube group : Γ] = 2^k, from 2^k |H| covol(L_E) = 2^n.

    The quotient has Lebesgue volume 2^n / |H| and is glued from copies of the box
    spanned by L_E, each of volume covol(L_E); k counts the copies.
    """
    ex = extremal_points(g)
    if ex.N != 2 ** g.n:
        raise NotABox(f"N = {ex.N} != 2^{g.n}")
    covol = extremal_lattice_basis(g).covolume()
    ratio = Fraction(2 ** g.n) / (g.order * covol)
    if ratio.denominator != 1 or ratio.numerator & (ratio.numerator - 1):
        raise NonIntegralExponent(f"2^n / (|H| covol) = {ratio} is not a power of 2")
    k = ratio.numerator.bit_length() - 1
    if not 0 <= k <= g.n - 1:
        raise NonIntegralExponent(f"k = {k} outside 0..{g.n - 1}")
    return k


# -- names for n <= 3 -----------------------------------------------------------------

def _named_specs() -> dict[str, GroupSpec]:
    from .signcrystal import make_group

    def odd(e):
        return bin(e).count("1") % 2

    return {
        "interval": make_group(1, ["-"], {"-": "0"}),
        "square": make_group(2, ["-+", "+-"], {"-+": "00", "+-": "00"}),
        "square_2": make_group(2, ["--"], {"--": "00"}),
        "cube": make_group(3, ["-++", "+-+", "++-"], {"-++": "000", "+-+": "000", "++-": "000"}),
        "cube_2": make_group(3, ["--+", "+--"], {"--+": "000", "+--": "000"}),
        "cube_2'": GroupSpec(3, tuple((e, 4 * odd(e)) for e in range(8))),
        "cube_2''": make_group(3, ["--+", "++-"], {"--+": "000", "++-": "000"}),
        "cube_4": make_group(3, ["---"], {"---": "000"}),
    }


@lru_cache(maxsize=None)
def _name_lookup() -> dict:
    return {(g.n, canonical_key(g.table, g.n)): name for name, g in _named_specs().items()}


def box_name(g: GroupSpec) -> str | None:
    if g.n > 3:
        return None
    return _name_lookup().get((g.n, canonical_key(g.table, g.n)))


# -- catalog --------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    id: str
    spec: GroupSpec
    N: int
    M: int
    k: int | None
    moduli_dim: int
    name: str | None = None
    encoding: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def is_box(self) -> bool:
        return self.N == 2 ** self.n

    def to_json(self) -> dict:
        d = {"id": self.id, **self.spec.to_json(), "N": self.N, "M": self.M, "k": self.k,
             "moduli_dim": self.moduli_dim, "encoding": self.encoding}
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_json(cls, d: dict) -> CatalogEntry:
        spec = GroupSpec.from_json(d)
        return cls(d["id"], spec, d["N"], d["M"], d.get("k"), d["moduli_dim"], d.get("name"),
                   d.get("encoding", ""))


def make_entry(g: GroupSpec) -> CatalogEntry:
    canon = canonical_form(g)
    n_orbits = extremal_points(canon).N
    entry = CatalogEntry(
        id=catalog_id(canon),
        spec=canon,
        N=n_orbits,
        M=maximal_finite(canon).m_count,
        k=gluing_exponent(canon) if n_orbits == 2 ** canon.n else None,
        moduli_dim=moduli.invariant_form_basis(canon).dim,
        name=box_name(canon),
        encoding=encoding(canon),
    )
    if entry.N > entry.M:
        raise AssertionError(f"N > M for {canon.describe()}")
    return entry


def canonical_keys(n: int, boxes_only: bool = False) -> list[tuple]:
    """Distinct canonical keys over all (H, phi) in dimension n."""
    if not 1 <= n <= MAX_DIMENSION:
        raise DimensionTooLarge(f"n = {n} outside 1..{MAX_DIMENSION}")
    seen = set()
    top = full_mask(n)
    for basis in subgroups(n):
        supp = 0
        for b in basis:
            supp |= b
        if boxes_only and supp != top:
            continue
        for table in _coboundary_representatives(n, basis):
            if boxes_only and fast_counts(table, n)[0] != 2 ** n:
                continue
            seen.add(canonical_key(table, n))
    return sorted(seen)


def _coboundary_representatives(n: int, basis: Sequence[int]):
    """
    One table per coset of the coboundaries in Hom(H, (Z/2)^n).

    phi is fixed by its values on the basis, and the coboundary of c moves phi(b) by
    c & b.  For each flipped coordinate j let b(j) be the first basis vector flipping j;
    bit j of c only moves bit j of the phi values, so requiring bit j of phi(b(j)) to
    vanish for every flipped j picks exactly one representative per coset.
    """
    owner = {}
    for b in basis:
        for j in range(n):
            if b >> j & 1 and j not in owner:
                owner[j] = b
    for table in homomorphism_tables(n, basis):
        phi = dict(table)
        if all(not phi[b] >> j & 1 for j, b in owner.items()):
            yield table


def enumerate_actions(n: int, boxes_only: bool = False) -> list[CatalogEntry]:
    """All classes in dimension n (or only the boxes), sorted by id."""
    entries = [make_entry(spec_from_key(k, n)) for k in canonical_keys(n, boxes_only)]
    if boxes_only:
        entries = [e for e in entries if e.is_box]
    ids = {}
    for e in entries:
        if e.id in ids and ids[e.id] != e.encoding:
            raise AssertionError(f"catalog id collision {e.id}")
        ids[e.id] = e.encoding
    return sorted(entries, key=lambda e: e.id)


# -- exhaustive sweeps ----------------------------------------------------------------

@dataclass(frozen=True)
class SweepResult:
    n: int
    specs: int
    max_N: int
    max_M: int
    boxes: int
    n_exceeds: tuple  # tables with N > 2^n
    m_exceeds: tuple  # tables with M > 2^n
    n_above_m: tuple  # tables with N > M

    def to_json(self) -> dict:
        def dump(tables):
            return [GroupSpec(self.n, t).to_json() for t in tables]

        return {
            "n": self.n,
            "specs": self.specs,
            "max_N": self.max_N,
            "max_M": self.max_M,
            "box_specs": self.boxes,
            "N_bound_violations": dump(self.n_exceeds),
            "M_conjecture_counterexamples": dump(self.m_exceeds),
            "N_above_M": dump(self.n_above_m),
        }


def _sweep_subgroup(args) -> tuple:
    n, basis = args
    count = max_n = max_m = boxes = 0
    n_ex, m_ex, n_m = [], [], []
    for table in homomorphism_tables(n, basis):
        N, M = fast_counts(table, n)
        count += 1
        max_n, max_m = max(max_n, N), max(max_m, M)
        boxes += N == 2 ** n
        if N > 2 ** n:
            n_ex.append(table)
        if M > 2 ** n:
            m_ex.append(table)
        if N > M:
            n_m.append(table)
    return count, max_n, max_m, boxes, n_ex, m_ex, n_m


def sweep(n: int, workers: int = 1) -> SweepResult:
    """
    N(Γ) and M(Γ) for every (H, phi) in dimension n, without identifying conjugates.

    Work is split by subgroup; results are merged in subgroup order, so the outcome does
    not depend on the worker count.
    """
    if not 1 <= n <= MAX_DIMENSION:
        raise DimensionTooLarge(f"n = {n} outside 1..{MAX_DIMENSION}")
    tasks = [(n, basis) for basis in subgroups(n)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sweep_subgroup, tasks, chunksize=4))
    else:
        parts = [_sweep_subgroup(t) for t in tasks]
    total = max_n = max_m = boxes = 0
    n_ex, m_ex, n_m = [], [], []
    for c, a, b, bx, x, y, z in parts:
        total += c
        max_n, max_m = max(max_n, a), max(max_m, b)
        boxes += bx
        n_ex += x
        m_ex += y
        n_m += z
    return SweepResult(n, total, max_n, max_m, boxes, tuple(n_ex), tuple(m_ex), tuple(n_m))
