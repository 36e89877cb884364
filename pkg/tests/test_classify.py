from __future__ import annotations

import functools
import hashlib
import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest

from conftest import cube2_prime, cube4, random_spec
from nbox.classify import (
    CatalogEntry,
    DimensionTooLarge,
    NotABox,
    all_tables,
    canonical_form,
    canonical_key,
    canonical_keys,
    catalog_id,
    count_specs,
    encoding,
    enumerate_actions,
    extremal_lattice_basis,
    gluing_exponent,
    make_entry,
    box_name,
    subgroups,
    sweep,
    transform,
)
from nbox.orbits import fast_counts
from nbox.signcrystal import GroupSpec, coxeter_cube, make_group, span, torus

F = Fraction


@functools.lru_cache(maxsize=None)
def catalog(n: int):
    return tuple(enumerate_actions(n))


def gaussian_binomial(n: int, k: int, q: int = 2) -> int:
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def spec_count_oracle(n: int) -> int:
    # a subgroup of dimension d carries 2^(n d) homomorphisms to (Z/2)^n
    return sum(gaussian_binomial(n, d) * 2 ** (n * d) for d in range(n + 1))


def conjugates(n: int, table):
    """All images of a table under coordinate permutations and coboundary shifts."""
    out = set()
    for perm in itertools.permutations(range(n)):
        def move(m):
            return sum(1 << perm[i] for i in range(n) if m >> i & 1)

        for c in range(1 << n):
            out.add(tuple(sorted((move(e), move(p ^ (c & e))) for e, p in table)))
    return out


def class_count_oracle(n: int) -> int:
    seen, classes = set(), 0
    for table in all_tables(n):
        t = tuple(sorted(table))
        if t in seen:
            continue
        classes += 1
        seen |= conjugates(n, t)
    return classes


# -- enumeration ------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_subgroups_are_distinct_and_complete(n):
    spans = [frozenset(span(b)) for b in subgroups(n)]
    assert len(spans) == len(set(spans)) == sum(gaussian_binomial(n, d) for d in range(n + 1))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_spec_counts(n):
    assert count_specs(n) == spec_count_oracle(n)
    if n <= 3:
        tables = [tuple(sorted(t)) for t in all_tables(n)]
        assert len(tables) == len(set(tables)) == spec_count_oracle(n)


def test_small_spec_counts():
    assert [count_specs(n) for n in (1, 2, 3)] == [3, 29, 1017]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_class_counts_against_orbit_oracle(n):
    assert len(canonical_keys(n)) == class_count_oracle(n)


# -- canonical form ---------------------------------------------------------------------

def test_coboundary_removes_parity_in_dimension_one():
    g = make_group(1, ["-"], {"-": "1"})
    c = canonical_form(g)
    assert c.table == ((0, 0), (1, 0))
    assert transform(g, [0], 1) == c


def test_canonical_form_is_idempotent():
    for entry in enumerate_actions(3):
        assert canonical_form(entry.spec) == entry.spec


def test_relabeling_symmetry():
    a = make_group(3, ["+--", "-+-"], {"+--": "000", "-+-": "000"})
    b = transform(a, [1, 0, 2], 0)
    assert canonical_form(a) == canonical_form(b)
    assert catalog_id(a) == catalog_id(b)


def test_canonical_key_invariant_under_1000_random_transforms():
    r = random.Random(13)
    for _ in range(1000):
        n = r.randint(1, 4)
        g = random_spec(r, n)
        h = transform(g, r.sample(range(n), n), r.randrange(1 << n))
        assert canonical_key(g.table, n) == canonical_key(h.table, n)


def test_canonical_key_is_the_minimum_encoding():
    """The canonical encoding is the lexicographically least string encoding among conjugates."""
    r = random.Random(14)
    for _ in range(100):
        n = r.randint(1, 3)
        g = random_spec(r, n)
        best = min(encoding(GroupSpec(n, t)) for t in conjugates(n, g.table))
        assert encoding(canonical_form(g)) == best


# -- catalog ----------------------------------------------------------------------------

def test_box_catalog_sizes():
    assert [len(enumerate_actions(n, boxes_only=True)) for n in (1, 2, 3)] == [1, 2, 5]


def test_box_catalog_names_and_invariants():
    got = {e.name: (e.moduli_dim, e.k, e.spec.order) for n in (1, 2, 3)
           for e in enumerate_actions(n, boxes_only=True)}
    assert got == {
        "interval": (1, 0, 2),
        "square": (2, 0, 4),
        "square_2": (3, 1, 2),
        "cube": (3, 0, 8),
        "cube_2": (3, 1, 4),
        "cube_2'": (3, 1, 8),
        "cube_2''": (4, 1, 4),
        "cube_4": (6, 2, 2),
    }


def test_names():
    assert box_name(coxeter_cube(3)) == "cube"
    even = make_group(3, ["--+", "+--"], {"--+": "000", "+--": "000"})
    assert box_name(even) == "cube_2"
    assert box_name(make_group(2, ["--"], {"--": "00"})) == "square_2"
    assert box_name(torus(3)) is None


def test_gluing_exponent_examples():
    assert gluing_exponent(coxeter_cube(3)) == 0
    assert gluing_exponent(cube4()) == 2
    assert extremal_lattice_basis(cube4()).covolume() == 1
    assert gluing_exponent(cube2_prime()) == 1
    assert extremal_lattice_basis(cube2_prime()).covolume() == F(1, 2)
    with pytest.raises(NotABox):
        gluing_exponent(torus(2))


def test_catalog_ids():
    g = cube2_prime()
    assert catalog_id(g) == catalog_id(GroupSpec(3, g.table))
    h = transform(g, [2, 0, 1], 5)
    assert catalog_id(h) == catalog_id(g)
    expect = hashlib.sha256(f"n=3|{encoding(canonical_form(g))}".encode()).hexdigest()[:16]
    assert catalog_id(g) == expect
    for n in (1, 2, 3, 4):
        entries = catalog(n)
        assert len({e.id for e in entries}) == len({e.encoding for e in entries}) == len(entries)


def test_entry_json_round_trip():
    for e in enumerate_actions(3):
        assert CatalogEntry.from_json(e.to_json()) == e


def test_entries_respect_n_le_m():
    for n in (1, 2, 3):
        for e in enumerate_actions(n):
            assert e.N <= e.M
            assert make_entry(transform(e.spec, list(range(n))[::-1], 1)) == e


def test_n4_boxes_are_classes_with_sixteen_points():
    boxes = enumerate_actions(4, boxes_only=True)
    assert all(e.N == 16 and 0 <= e.k <= 3 for e in boxes)
    assert [e.id for e in boxes] == [e.id for e in catalog(4) if e.N == 16]
    assert Counter(e.k for e in boxes)[0] == 1  # index 1 occurs for the cube alone


def test_dimension_limits():
    with pytest.raises(DimensionTooLarge):
        enumerate_actions(7)
    with pytest.raises(DimensionTooLarge):
        sweep(0)


# -- sweep ------------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_sweep_small(n):
    res = sweep(n)
    assert res.specs == spec_count_oracle(n)
    assert res.max_N == res.max_M == 2 ** n
    assert not res.n_exceeds and not res.m_exceeds and not res.n_above_m


def test_sweep_independent_of_worker_count():
    assert sweep(3, workers=1).to_json() == sweep(3, workers=2).to_json()
