"""
Normalized sign-crystallographic actions.

An action is determined by a subgroup H of the diagonal sign group {±1}^n and a
homomorphism phi: H -> (Z/2)^n.  Its elements are the maps

    x -> eps * x + phi(eps) + 2m,        eps in H, m in Z^n,

so the translation lattice is always 2Z^n.  Internally a sign vector is a bitmask with
bit i set when eps_i = -1, and a parity vector is a bitmask with bit i set when the
i-th translation coordinate is odd.  Under this encoding the product of sign vectors and
the sum of parity vectors are both XOR.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactnum import Q, qstr


class InconsistentParity(ValueError):
    """Two generator words for the same sign vector give different parities."""


HALF = Fraction(1, 2)
QUARTER_VALUES = (Fraction(0), HALF, Fraction(1), Fraction(3, 2))
FREE = None


# -- sign / parity vectors -------------------------------------------------------------

def sign_mask(s: str | Sequence[int] | int, n: int | None = None) -> int:
    """
    Bitmask of a sign vector given as "+-+", (1, -1, 1) or an int mask.

    >>> sign_mask("-++"), sign_mask((1, 1, -1))
    (1, 4)
    """
    if isinstance(s, int):
        return s
    if isinstance(s, str):
        if set(s) - {"+", "-"}:
            raise ValueError(f"bad sign string {s!r}")
        return sum(1 << i for i, c in enumerate(s) if c == "-")
    if any(x not in (1, -1) for x in s):
        raise ValueError(f"bad sign vector {s!r}")
    return sum(1 << i for i, x in enumerate(s) if x == -1)


def parity_mask(s: str | Sequence[int] | int) -> int:
    if isinstance(s, int):
        return s
    if isinstance(s, str):
        if set(s) - {"0", "1"}:
            raise ValueError(f"bad parity string {s!r}")
        return sum(1 << i for i, c in enumerate(s) if c == "1")
    return sum(1 << i for i, x in enumerate(s) if x % 2)


def sign_str(mask: int, n: int) -> str:
    return "".join("-" if mask >> i & 1 else "+" for i in range(n))


def parity_str(mask: int, n: int) -> str:
    return "".join("1" if mask >> i & 1 else "0" for i in range(n))


def signs(mask: int, n: int) -> tuple[int, ...]:
    return tuple(-1 if mask >> i & 1 else 1 for i in range(n))


def full_mask(n: int) -> int:
    return (1 << n) - 1


def span(gens: Iterable[int]) -> list[int]:
    """All XOR combinations of the given masks (a subgroup of {±1}^n), sorted."""
    out = {0}
    for g in gens:
        if g not in out:
            out |= {x ^ g for x in out}
    return sorted(out)


# -- group specs ----------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """
    A normalized action: the element table eps -> phi(eps) for eps in H.

    ``table`` is a tuple of (eps_mask, phi_mask) pairs sorted by eps_mask; it is the
    source of truth.  ``generators`` only records how the spec was written down.
    """

    n: int
    table: tuple
    generators: tuple = field(default=(), compare=False)
    _phi: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        table = tuple(sorted((int(e), int(p)) for e, p in self.table))
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_phi", dict(table))
        if not self.generators:
            object.__setattr__(self, "generators", tuple(minimal_generators([e for e, _ in table])))
        self._validate()

    def _validate(self):
        phi = self._phi
        top = full_mask(self.n)
        if phi.get(0, None) != 0:
            raise InconsistentParity("identity must be present with phi = 0")
        for e, p in phi.items():
            if e & ~top or p & ~top:
                raise ValueError("mask out of range for dimension")
        for e1, p1 in phi.items():
            for e2, p2 in phi.items():
                e = e1 ^ e2
                if e not in phi:
                    raise ValueError("H is not closed under products")
                if phi[e] != p1 ^ p2:
                    raise InconsistentParity(
                        f"phi({sign_str(e, self.n)}) != phi({sign_str(e1, self.n)}) + phi({sign_str(e2, self.n)})"
                    )

    @classmethod
    def from_table(cls, n: int, table: Mapping) -> GroupSpec:
        return cls(n, tuple((sign_mask(e), parity_mask(p)) for e, p in table.items()))

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def elements(self) -> list[int]:
        return [e for e, _ in self.table]

    @property
    def support(self) -> int:
        """Mask of coordinates flipped by some element of H."""
        s = 0
        for e, _ in self.table:
            s |= e
        return s

    def phi(self, eps) -> int:
        return self._phi[sign_mask(eps)]

    def __contains__(self, eps) -> bool:
        return sign_mask(eps) in self._phi

    def affine_elements(self) -> list[AffineElement]:
        """One representative x -> eps x + phi(eps) per point-group element."""
        return [AffineElement.from_masks(e, p, self.n) for e, p in self.table]

    def to_json(self) -> dict:
        gens = list(self.generators)
        return {
            "n": self.n,
            "generators": [sign_str(e, self.n) for e in gens],
            "phi": {sign_str(e, self.n): parity_str(self._phi[e], self.n) for e in gens},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> GroupSpec:
        n = int(data["n"])
        gens = [g for g in data["generators"]]
        for g in gens:
            if len(g) != n:
                raise ValueError(f"generator {g!r} has wrong length for n={n}")
        return make_group(n, gens, {g: data["phi"][g] for g in gens})

    def describe(self) -> str:
        return ", ".join(f"{sign_str(e, self.n)}:{parity_str(p, self.n)}" for e, p in self.table)


def minimal_generators(elements: Iterable[int]) -> list[int]:
    """A basis (over F_2) of the span of ``elements``, greedy in sorted order."""
    basis: list[int] = []
    reduced: list[int] = []
    for e in sorted(elements):
        x = e
        for r in reduced:
            x = min(x, x ^ r)
        if x:
            basis.append(e)
            reduced.append(x)
            reduced.sort(reverse=True)
    return basis


def make_group(n: int, gens: Iterable, phi_on_gens: Mapping) -> GroupSpec:
    """
    Close ``gens`` under products, extending phi multiplicatively.

    Every product word reaching an element must agree on its parity, otherwise
    :class:`InconsistentParity` is raised.

    >>> g = make_group(3, ["--+", "++-"], {"--+": "000", "++-": "001"})
    >>> g.describe()
    '+++:000, --+:000, ++-:001, ---:001'
    """
    gen_pairs = []
    phi_lookup = {sign_mask(k): parity_mask(v) for k, v in phi_on_gens.items()}
    for g in gens:
        m = sign_mask(g)
        if isinstance(g, str) and len(g) != n:
            raise ValueError(f"generator {g!r} has wrong length for n={n}")
        if m >> n:
            raise ValueError(f"generator {g!r} out of range for n={n}")
        if m not in phi_lookup:
            raise KeyError(f"no parity given for generator {sign_str(m, n)}")
        gen_pairs.append((m, phi_lookup[m]))
    table = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for e in frontier:
            for ge, gp in gen_pairs:
                prod, par = e ^ ge, table[e] ^ gp
                if prod in table:
                    if table[prod] != par:
                        raise InconsistentParity(
                            f"phi({sign_str(prod, n)}) is both {parity_str(table[prod], n)} and {parity_str(par, n)}"
                        )
                else:
                    table[prod] = par
                    nxt.append(prod)
        frontier = nxt
    gen_masks = []
    for m, _ in gen_pairs:
        if m not in gen_masks:
            gen_masks.append(m)
    return GroupSpec(n, tuple(table.items()), tuple(gen_masks))


# -- affine elements ------------------------------------------------------------------

@dataclass(frozen=True)
class AffineElement:
    """The map x -> eps * x + t with eps a diagonal sign vector."""

    eps: tuple
    t: tuple

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(int(x) for x in self.eps))
        object.__setattr__(self, "t", tuple(Q(x) for x in self.t))
        if len(self.eps) != len(self.t):
            raise ValueError("sign and translation parts differ in length")
        if any(x not in (1, -1) for x in self.eps):
            raise ValueError("eps must be a sign vector")

    @classmethod
    def from_masks(cls, eps: int, t, n: int) -> AffineElement:
        tt = tuple(Fraction(t >> i & 1) for i in range(n)) if isinstance(t, int) else t
        return cls(signs(eps, n), tt)

    @property
    def n(self) -> int:
        return len(self.eps)

    @property
    def eps_mask(self) -> int:
        return sign_mask(self.eps)

    def __call__(self, x: Sequence) -> tuple:
        return tuple(e * Q(xi) + ti for e, xi, ti in zip(self.eps, x, self.t))

    def is_translation(self) -> bool:
        return all(e == 1 for e in self.eps)

    def belongs_to(self, g: GroupSpec) -> bool:
        if self.n != g.n or self.eps_mask not in g:
            return False
        if any(x.denominator != 1 for x in self.t):
            return False
        return parity_mask([int(x) for x in self.t]) == g.phi(self.eps_mask)


def compose(a: AffineElement, b: AffineElement) -> AffineElement:
    """a after b: x -> eps_a (eps_b x + t_b) + t_a."""
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    return AffineElement(
        tuple(x * y for x, y in zip(a.eps, b.eps)),
        tuple(e * tb + ta for e, tb, ta in zip(a.eps, b.t, a.t)),
    )


# -- partial points -------------------------------------------------------------------

def reduce_mod2(x) -> Fraction:
    x = Q(x)
    return x - 2 * (x // 2)


def partial_point(values: Iterable) -> tuple:
    """
    Normalize a partial point: each entry a quarter value in [0, 2) or FREE (None / "*").

    >>> partial_point(["1/2", "*", 3])
    (Fraction(1, 2), None, Fraction(1, 1))
    """
    out = []
    for v in values:
        if v is None or v == "*":
            out.append(FREE)
            continue
        x = reduce_mod2(v)
        if (2 * x).denominator != 1:
            raise ValueError(f"{v} is not on the half-integer grid")
        out.append(x)
    return tuple(out)


def point_str(p: Sequence) -> str:
    return "(" + ", ".join("*" if x is FREE else qstr(x) for x in p) + ")"


def point_json(p: Sequence) -> list[str]:
    return ["*" if x is FREE else qstr(x) for x in p]


def point_masks(p: Sequence) -> tuple[int, int]:
    """(free mask, half-odd mask) of a partial point; the stabilizer depends only on these."""
    free = half = 0
    for i, x in enumerate(p):
        if x is FREE:
            free |= 1 << i
        elif x.denominator == 2:
            half |= 1 << i
    return free, half


def stabilizer_masks(g: GroupSpec, free: int, half: int) -> list[int]:
    """
    Point-group image of the stabilizer of a (partial) point.

    eps stabilizes iff on every coordinate: eps_i = +1 forces phi_i = 0, and eps_i = -1
    forces the coordinate to be pinned with 2 p_i = phi_i (mod 2).  With bitmasks that is
    ``eps & free == 0 and phi(eps) == eps & half``.
    """
    return [e for e, p in g.table if not e & free and p == e & half]


def stabilizer(g: GroupSpec, p: Sequence) -> GroupSpec:
    """Stabilizer of the partial point p as a sub-spec with the inherited parities."""
    p = partial_point(p)
    if len(p) != g.n:
        raise ValueError("point has wrong dimension")
    free, half = point_masks(p)
    keep = stabilizer_masks(g, free, half)
    return GroupSpec(g.n, tuple((e, g.phi(e)) for e in keep))


def fixed_set(e: AffineElement) -> tuple | None:
    """
    Fixed locus of x -> eps x + t as a partial point, or None when it is empty.

    Flipped coordinates are pinned to t_i / 2 (mod 2); an unflipped coordinate must have
    t_i = 0 (then it is FREE), otherwise the map moves every point along that axis.
    """
    out = []
    for s, t in zip(e.eps, e.t):
        if s == -1:
            out.append(reduce_mod2(t / 2))
        elif t != 0:
            return None
        else:
            out.append(FREE)
    return tuple(out)


def act_on_point(eps: int, phi: int, p: Sequence) -> tuple:
    """Image of a partial point (mod 2Z^n) under x -> eps x + phi; FREE stays FREE."""
    out = []
    for i, x in enumerate(p):
        if x is FREE:
            out.append(FREE)
            continue
        y = -x if eps >> i & 1 else x
        out.append(reduce_mod2(y + (phi >> i & 1)))
    return tuple(out)


# -- named specs used throughout ------------------------------------------------------

def coxeter_cube(n: int) -> GroupSpec:
    """The cube reflection group, normalized: full sign group, phi = 0."""
    return GroupSpec(n, tuple((e, 0) for e in range(1 << n)))


def torus(n: int) -> GroupSpec:
    return GroupSpec(n, ((0, 0),))


def central(n: int, phi: int = 0) -> GroupSpec:
    """H = {±I}."""
    return GroupSpec(n, ((0, 0), (full_mask(n), parity_mask(phi))))
