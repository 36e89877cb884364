"""
Metric checks on the isolated-fixed-point set E of an action, for a chosen invariant
metric g.

E is 2Z^n-periodic, so it is handled as a finite set of classes mod 2 plus lifts.  All
distance comparisons are on squared g-norms of vectors scaled to integer units, so every
tie is an honest equality.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import PropertyViolation
from .exactnum import (
    LatticeBasis,
    SymForm,
    covolume_squared,
    det,
    inverse,
    is_positive_definite,
    isqrt_floor,
    lattice_from_generators,
    ortho_complement,
    qstr,
    vadd,
    vsub,
)
from .moduli import is_invariant, rng
from .orbits import extremal_points, is_extremal, quarter_grid
from .signcrystal import (
    FREE,
    QUARTER_VALUES,
    AffineElement,
    GroupSpec,
    compose,
    point_masks,
    reduce_mod2,
    sign_str,
    stabilizer_masks,
)


class NotALattice(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def _mod2(v: Iterable) -> tuple:
    return tuple(reduce_mod2(x) for x in v)


def _apply_sign(eps: int, v: Sequence) -> tuple:
    return tuple(-x if eps >> i & 1 else x for i, x in enumerate(v))


# -- the lattice of extremal points ---------------------------------------------------

@dataclass(frozen=True)
class ExtremalLattice:
    origin: tuple
    basis: LatticeBasis
    classes: tuple  # E mod 2Z^n
    orbits: tuple
    neighbor_set: tuple = ()

    @property
    def n(self) -> int:
        return self.basis.n


def extremal_lattice(g: GroupSpec, metric: SymForm | None = None) -> ExtremalLattice:
    """
    Check that E is a lattice coset and return origin and basis.

    Because E is 2Z^n-periodic, the fourth-point closure Y + (Z - X) in E and the central
    symmetry 2X - Y in E are checked exactly on classes mod 2.  Then E must coincide with
    origin + L mod 2, where L is generated by all differences and 2Z^n.
    """
    ex = extremal_points(g)
    if not ex.points:
        raise ValueError("no isolated fixed points, E is empty")
    pts = ex.points
    pset = set(pts)
    for x, y, z in itertools.product(pts, repeat=3):
        fourth = _mod2(vadd(y, vsub(z, x)))
        if fourth not in pset:
            raise NotALattice("fourth point missing", witness=(x, y, z))
    for x, y in itertools.product(pts, repeat=2):
        if _mod2(vsub(vadd(x, x), y)) not in pset:
            raise NotALattice("central symmetry fails", witness=(x, y, x))
    origin = pts[0]
    gens = [vsub(p, origin) for p in pts[1:]]
    gens += [tuple(Fraction(2 * (i == j)) for j in range(g.n)) for i in range(g.n)]
    basis = lattice_from_generators(gens, g.n)
    # origin + L has 2^n / covol classes mod 2; all of them must be in E
    if Fraction(2 ** g.n) / basis.covolume() != len(pts):
        raise NotALattice("E is smaller than the coset it generates", witness=(origin, origin, origin))
    lat = ExtremalLattice(origin, basis, pts, ex.orbits)
    if metric is not None:
        lat = ExtremalLattice(origin, basis, pts, ex.orbits, tuple(relevant_vectors(lat, metric)))
    return lat


# -- integer-scaled quadratic forms ---------------------------------------------------

class _IntForm:
    """g scaled to an integer matrix, with the Cauchy-Schwarz data for box bounds."""

    def __init__(self, m: Sequence[Sequence[Fraction]]):
        den = math.lcm(*(x.denominator for row in m for x in row))
        self.m = [[int(x * den) for x in row] for row in m]
        self.n = len(self.m)
        inv = inverse(self.m)
        self.inv_diag = [inv[i][i] for i in range(self.n)]

    def q(self, v: Sequence[int]) -> int:
        m = self.m
        total = 0
        for i, vi in enumerate(v):
            if vi:
                row = m[i]
                total += vi * sum(row[j] * vj for j, vj in enumerate(v) if vj)
        return total

    def bound(self, r2, i: int) -> int:
        """max |v_i| over integer v with q(v) <= r2."""
        return isqrt_floor(Fraction(r2) * self.inv_diag[i])

    def box(self, r2) -> list[range]:
        return [range(-self.bound(r2, i), self.bound(r2, i) + 1) for i in range(self.n)]


def _ceildiv(a: int, b: int) -> int:
    return -(-a // b)


def _coeff_vector(basis: LatticeBasis, c: Sequence[int]) -> tuple:
    return basis.point(c)


def relevant_vectors(lat: ExtremalLattice, g: SymForm) -> list[tuple]:
    """
    Voronoi-relevant vectors of L_E under g: v is relevant iff ±v are the only
    g-shortest vectors of the coset v + 2L.

    Every coset mod 2L has a representative with 0/1 coefficients, so its minimum is at
    most R^2 = max over those representatives; all lattice points with norm <= R^2 lie in
    the Cauchy-Schwarz box enumerated here.
    """
    form = _IntForm(lat.basis.gram(g))
    n = form.n
    r2 = max(form.q(r) for r in itertools.product((0, 1), repeat=n))
    best: dict[tuple, tuple[int, list]] = {}
    for c in itertools.product(*form.box(r2)):
        if not any(c):
            continue
        qc = form.q(c)
        if qc > r2:
            continue
        par = tuple(x & 1 for x in c)
        if not any(par):
            continue
        cur = best.get(par)
        if cur is None or qc < cur[0]:
            best[par] = (qc, [c])
        elif qc == cur[0]:
            cur[1].append(c)
    assert len(best) == 2 ** n - 1
    out = []
    for par, (_, mins) in best.items():
        if len(mins) == 2:
            out.extend(_coeff_vector(lat.basis, c) for c in mins)
    return sorted(out)


def midpoint_unique_vectors(lat: ExtremalLattice, g: SymForm) -> list[tuple]:
    """
    Lattice vectors v whose midpoint v/2 has exactly two nearest lattice points, 0 and v.

    Found by direct search, independently of the coset minimization: candidates are all
    v with |v|^2 <= R^2 (relevant vectors never exceed it), and for each candidate every
    lattice point within |v|/2 of v/2 is examined.
    """
    form = _IntForm(lat.basis.gram(g))
    n = form.n
    r2 = max(form.q(r) for r in itertools.product((0, 1), repeat=n))
    out = []
    for c in itertools.product(*form.box(r2)):
        if not any(c) or form.q(c) > r2:
            continue
        if _midpoint_unique(form, c):
            out.append(_coeff_vector(lat.basis, c))
    return sorted(out)


def _midpoint_unique(form: _IntForm, c: Sequence[int]) -> bool:
    # work with doubled coordinates: |2w - c|^2 vs |c|^2
    qc = form.q(c)
    ranges = []
    for i, ci in enumerate(c):
        b = form.bound(qc, i)
        ranges.append(range(_ceildiv(ci - b, 2), (ci + b) // 2 + 1))
    for w in itertools.product(*ranges):
        if not any(w) or tuple(w) == tuple(c):
            continue
        d = [2 * wi - ci for wi, ci in zip(w, c)]
        if form.q(d) <= qc:
            return False
    return True


# -- codimension-two strata -----------------------------------------------------------

HALF_PLANE = "HALF_PLANE"
QUARTER_PLANE = "QUARTER_PLANE"
CONE_PI = "CONE_PI"


@dataclass(frozen=True)
class StratumReport:
    pinned: tuple  # ((i, value), (j, value))
    cone_type: str
    restriction: tuple  # sign strings on the pinned pair
    normal_basis: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "pinned": [[i, qstr(v)] for i, v in self.pinned],
            "cone_type": self.cone_type,
            "restriction": list(self.restriction),
        }


def _cone_type(restr: set) -> str:
    singles = {"-+", "+-"} & restr
    if len(singles) == 2:
        return QUARTER_PLANE
    if len(singles) == 1:
        return HALF_PLANE
    if restr == {"++", "--"}:
        return CONE_PI
    raise AssertionError(f"unexpected local group {sorted(restr)}")


def classify_codim2_strata(g: GroupSpec, metric: SymForm) -> list[StratumReport]:
    """
    Local models transverse to the strata {x_i = a, x_j = b}.

    The local group on the normal plane is the stabilizer restricted to the pinned pair.
    Every element is an involution, so only the mirror types and the cone of angle pi can
    occur.  The model is confirmed on the g-normal plane: mirrors of a quarter plane are
    g-orthogonal, and the cone-of-angle-pi element acts as -1 there.
    """
    n = g.n
    out = []
    for i, j in itertools.combinations(range(n), 2):
        free_coords = [k for k in range(n) if k not in (i, j)]
        normal = ortho_complement(free_coords, metric)
        for a, b in itertools.product(QUARTER_VALUES, repeat=2):
            p = [FREE] * n
            p[i], p[j] = a, b
            stab = stabilizer_masks(g, *point_masks(p))
            if len(stab) == 1:
                continue
            for e in stab:
                el = AffineElement.from_masks(e, g.phi(e), n)
                assert compose(el, el).is_translation(), "point group element of order > 2"
            restr = {sign_str((e >> i & 1) | (e >> j & 1) << 1, 2) for e in stab}
            kind = _cone_type(restr)
            _check_normal_model(kind, stab, (i, j), normal, free_coords, metric)
            out.append(StratumReport(((i, a), (j, b)), kind, tuple(sorted(restr)), tuple(normal)))
    return out


def _check_normal_model(kind: str, stab: Sequence[int], pair: tuple[int, int],
                        normal: Sequence, free_coords: Sequence[int], metric: SymForm):
    n = metric.n
    axes = [tuple(Fraction(int(k == m)) for m in range(n)) for k in free_coords]
    i, j = pair
    for e in stab:
        for idx, v in zip(pair, normal):
            w = _apply_sign(e, v)
            # the local group preserves the normal plane and acts diagonally on this basis
            if any(metric.inner(w, a) for a in axes):
                raise PropertyViolation("normal plane not preserved", witness=sign_str(e, n))
            expect = tuple(-x for x in v) if e >> idx & 1 else v
            if w != expect:
                raise PropertyViolation("local group is not diagonal on the normal plane",
                                        witness=sign_str(e, n))
    if kind == QUARTER_PLANE and metric.inner(normal[0], normal[1]) != 0:
        # mirrors are the lines through normal[1] and normal[0]; they must meet at pi/2
        raise PropertyViolation("quarter-plane mirrors are not orthogonal", witness=pair)


# -- per-point data -------------------------------------------------------------------

def _stab(g: GroupSpec, p) -> list[int]:
    return stabilizer_masks(g, *point_masks(p))


@dataclass
class Check:
    name: str
    status: str
    detail: str = ""
    witness: object = None

    def to_json(self) -> dict:
        d = {"name": self.name, "status": self.status}
        if self.detail:
            d["detail"] = self.detail
        if self.witness is not None:
            d["witness"] = _jsonable(self.witness)
        return d


def _jsonable(x):
    if isinstance(x, Fraction):
        return qstr(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def _passed(name, detail=""):
    return Check(name, "pass", detail)


def verify_cell_properties(g: GroupSpec, metric: SymForm, strict: bool = True) -> list[Check]:
    """
    Structural checks on the Voronoi cells of E for a box and an invariant metric.

    reflection: the rotational stabilizer of x maps each relevant v only to ±v;
    midpoint: x + v/2 has x and x + v as its only nearest points of E (this is also the
    simple-edge criterion), and the relevant, midpoint-unique sets coincide;
    volume shares: every extremal domain has 2^-n of the quotient volume.
    With ``strict`` the first failure raises PropertyViolation.
    """
    checks: list[Check] = []

    def fail(name, detail, witness):
        if strict:
            raise PropertyViolation(f"{name}: {detail}", witness=witness)
        checks.append(Check(name, "fail", detail, witness))

    if not is_positive_definite(metric) or not is_invariant(g, metric):
        raise ValueError("metric must be positive definite and invariant")
    try:
        lat = extremal_lattice(g, metric)
    except NotALattice as exc:
        fail("lattice", str(exc), exc.witness)
        return checks
    n = g.n
    checks.append(_passed("lattice", f"E = origin + L, {len(lat.classes)} classes mod 2"))

    # orbits are exactly the cosets of 2L inside E
    def parity(p):
        c = lat.basis.coords(vsub(p, lat.origin))
        assert all(x.denominator == 1 for x in c)
        return tuple(int(x) % 2 for x in c)

    bad = [orb for orb in lat.orbits if len({parity(p) for p in orb}) != 1]
    if bad or len(lat.orbits) != len({parity(orb[0]) for orb in lat.orbits}):
        fail("orbit_parity", "orbits differ from cosets of 2L", bad[:1])
    else:
        checks.append(_passed("orbit_parity"))

    rel = list(lat.neighbor_set)
    if set(rel) != {tuple(-x for x in v) for v in rel}:
        fail("relevant_symmetric", "relevant set not centrally symmetric", rel)
    else:
        checks.append(_passed("relevant_symmetric", f"{len(rel)} relevant vectors"))
    reps = [orb[0] for orb in lat.orbits]

    viol = None
    for x in reps:
        for v in rel:
            images = {_apply_sign(e, v) for e in _stab(g, x)}
            if images != {v, tuple(-c for c in v)}:
                viol = (x, v)
                break
        if viol:
            break
    if viol:
        fail("reflection", "stabilizer moves a relevant vector off ±v", viol)
    else:
        checks.append(_passed("reflection", f"{len(reps)} points x {len(rel)} vectors"))

    mids = midpoint_unique_vectors(lat, metric)
    if mids != rel:
        fail("midpoint", "midpoint-unique vectors differ from relevant vectors",
             sorted(set(mids) ^ set(rel))[:1])
    else:
        checks.append(_passed("midpoint", "simple edges = relevant vectors"))

    # volume shares, Lebesgue and metric (squared)
    total = Fraction(2 ** n, g.order)
    covol = lat.basis.covolume()
    c2 = covolume_squared(lat.basis, metric)
    dg = det(metric.entries)
    shares = []
    for x in reps:
        st = len(_stab(g, x))
        share = covol / st
        shares.append(share)
        if share != total / 2 ** n or c2 / st ** 2 != (total / 2 ** n) ** 2 * dg:
            fail("volume_share", f"share {share} != 2^-n * {total}", x)
            break
    else:
        if sum(shares) != total:
            fail("volume_share", f"shares sum to {sum(shares)} not {total}", None)
        else:
            checks.append(_passed("volume_share", f"each 1/{2 ** n} of {qstr(total)}"))

    try:
        strata = classify_codim2_strata(g, metric)
        kinds = sorted({s.cone_type for s in strata})
        checks.append(_passed("cone_types", ",".join(kinds) or "no strata"))
    except (PropertyViolation, AssertionError) as exc:
        fail("cone_types", str(exc), getattr(exc, "witness", None))
    return checks


# -- sampled checks -------------------------------------------------------------------

def _scaled(v: Sequence[Fraction], scale: int) -> tuple[int, ...]:
    out = []
    for x in v:
        y = x * scale
        assert y.denominator == 1
        out.append(int(y))
    return tuple(out)


def _lifts_within(form: _IntForm, classes: Sequence[tuple[int, ...]], period: int,
                  center: Sequence[int], r2: int):
    """All lifts p + period*m of the given integer classes within q-distance r2 of center."""
    bounds = [form.bound(r2, i) for i in range(form.n)]
    for p in classes:
        ranges = [
            range(_ceildiv(c - b - pi, period), (c + b - pi) // period + 1)
            for pi, c, b in zip(p, center, bounds)
        ]
        for m in itertools.product(*ranges):
            y = tuple(pi + period * mi for pi, mi in zip(p, m))
            d = form.q(tuple(yi - ci for yi, ci in zip(y, center)))
            if d <= r2:
                yield y, d


def _nearest_lifts(form: _IntForm, classes, period: int, x: Sequence[int]) -> tuple[int, list]:
    # seed the radius with the lift of the first class in the cell around x
    p = classes[0]
    y0 = tuple(pi + period * ((xi - pi + period // 2) // period) for pi, xi in zip(p, x))
    r2 = form.q(tuple(a - b for a, b in zip(y0, x)))
    found = list(_lifts_within(form, classes, period, x, r2))
    best = min(d for _, d in found)
    return best, sorted(y for y, d in found if d == best)


def sampled_midpoint_check(g: GroupSpec, metric: SymForm, samples: int, seed: int,
                           points: Sequence | None = None) -> dict:
    """
    For random rational x in [0, 2)^n and each extremal orbit, take the lifts e1 of the
    orbit nearest to x (shortest paths in the quotient) and the midpoint z of [e1, x];
    count every point e2 of E with |e2 z| < |e1 z|.  The count must be zero.
    """
    n = g.n
    den = 64
    scale = 2 * den  # units of 1/128: quarter points, samples and midpoints are integral
    form = _IntForm(metric.entries)
    ex = extremal_points(g)
    orbit_classes = [[_scaled(p, scale) for p in orb] for orb in ex.orbits]
    all_classes = [c for orb in orbit_classes for c in orb]
    period = 2 * scale
    if points is None:
        gen = rng(seed, 0x6D6964)
        raw = gen.integers(0, 2 * den, size=(samples, n))
        xs = [tuple(int(v) * 2 for v in row) for row in raw]
    else:
        xs = [_scaled([Fraction(v) for v in p], scale) for p in points]
    violations = []
    checked = 0
    doubled = [tuple(2 * c for c in p) for p in all_classes]
    for x in xs:
        for classes in orbit_classes:
            _, nearest = _nearest_lifts(form, classes, period, x)
            for e1 in nearest:
                z2 = tuple(a + b for a, b in zip(e1, x))  # 2z, exact in these units
                # compare |e2 - z| with |e1 - z| using doubled coordinates
                r2 = form.q(tuple(a - b for a, b in zip(tuple(2 * c for c in e1), z2)))
                for e2, d in _lifts_within(form, doubled, 2 * period, z2, r2):
                    if d < r2:
                        violations.append({"x": x, "e1": e1, "e2": tuple(c // 2 for c in e2)})
                checked += 1
    return {
        "samples": len(xs),
        "paths": checked,
        "violations": len(violations),
        "first_violation": _unscale(violations[0], scale) if violations else None,
    }


def _unscale(v: dict, scale: int) -> dict:
    return {k: [qstr(Fraction(c, scale)) for c in p] for k, p in v.items()}


def sampled_extremality_check(g: GroupSpec, metric: SymForm, pairs: int, seed: int) -> dict:
    """
    Geometric cross-check of the combinatorial extremality test.

    At an extremal point the space of directions has diameter <= pi/2: for any directions
    v, w some stabilizer element eps gives g(v, eps w) >= 0.  At a non-extremal quarter
    point the invariant axis e_k and -e_k are at angle pi, so g(e_k, eps(-e_k)) < 0 for all
    eps.  Pairs are small integer vectors; products stay far below 2^62.
    """
    n = g.n
    den = math.lcm(*(x.denominator for row in metric.entries for x in row))
    gm = np.array([[int(x * den) for x in row] for row in metric.entries], dtype=np.int64)
    assert np.abs(gm).max() < 2 ** 20
    gen = rng(seed, 0x657874)
    bad_extremal = []
    bad_witness = []
    n_ext = n_non = 0
    for p in quarter_grid(n):
        cert = is_extremal(g, p)
        stab = list(cert.stabilizer)
        signs = np.array([[-1 if e >> i & 1 else 1 for i in range(n)] for e in stab], dtype=np.int64)
        if cert.extremal:
            n_ext += 1
            v = gen.integers(-9, 10, size=(pairs, n), dtype=np.int64)
            w = gen.integers(-9, 10, size=(pairs, n), dtype=np.int64)
            gv = v @ gm  # (pairs, n)
            vals = (gv[:, None, :] * signs[None, :, :] * w[:, None, :]).sum(axis=2)
            worst = vals.max(axis=1)
            if (worst < 0).any():
                k = int(np.argmax(worst < 0))
                bad_extremal.append((p, v[k].tolist(), w[k].tolist()))
        else:
            n_non += 1
            k = cert.witness_axis
            e = np.zeros(n, dtype=np.int64)
            e[k] = 1
            vals = np.array([int((e @ gm) @ (s * -e)) for s in signs])
            if not (vals < 0).all():
                bad_witness.append((p, k))
    return {
        "extremal_points": n_ext,
        "non_extremal_points": n_non,
        "pairs_per_point": pairs,
        "extremal_failures": len(bad_extremal),
        "witness_failures": len(bad_witness),
        "first_failure": _jsonable((bad_extremal + bad_witness)[:1]),
    }
