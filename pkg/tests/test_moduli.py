from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from conftest import cube4
from nbox.classify import all_tables, enumerate_actions
from nbox.exactnum import SymForm, is_positive_definite
from nbox.moduli import (
    PRNG_NAME,
    invariant_form_basis,
    is_invariant,
    rng,
    sample_invariant_metric,
)
from nbox.signcrystal import GroupSpec, central, coxeter_cube, make_group, signs, torus

F = Fraction


def rank(rows) -> int:
    rows = [list(r) for r in rows]
    rk, col = 0, 0
    width = len(rows[0]) if rows else 0
    while rk < len(rows) and col < width:
        piv = next((i for i in range(rk, len(rows)) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        for i in range(len(rows)):
            if i != rk and rows[i][col]:
                f = rows[i][col] / rows[rk][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rk])]
        rk += 1
        col += 1
    return rk


def invariant_dim_oracle(g: GroupSpec) -> int:
    """Rank of the group average of every symmetric matrix unit."""
    n = g.n
    mats = [tuple(signs(e, n)) for e in g.elements]
    rows = []
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        avg = [[F(0)] * n for _ in range(n)]
        for s in mats:
            for a, b in ((i, j), (j, i)):
                avg[a][b] += F(s[a] * s[b], len(mats))
        rows.append([x for r in avg for x in r])
    return rank(rows)


def test_examples():
    assert invariant_form_basis(coxeter_cube(3)).dim == 3
    assert invariant_form_basis(cube4()).dim == 6
    for n in (1, 2, 3, 4):
        assert invariant_form_basis(torus(n)).dim == n * (n + 1) // 2
    g = make_group(3, ["--+", "++-"], {"--+": "000", "++-": "000"})
    assert invariant_form_basis(g).dim == 4


def test_box_dimensions():
    dims = {n: sorted(e.moduli_dim for e in enumerate_actions(n, boxes_only=True)) for n in (1, 2, 3)}
    assert dims == {1: [1], 2: [2, 3], 3: [3, 3, 3, 4, 6]}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dimension_matches_group_average_rank(n):
    for table in all_tables(n):
        g = GroupSpec(n, table)
        basis = invariant_form_basis(g)
        assert basis.dim == invariant_dim_oracle(g)
        assert all(is_invariant(g, b) for b in basis.basis)


def test_cube_metric_is_diagonal():
    g = sample_invariant_metric(coxeter_cube(3), 42)
    assert is_positive_definite(g)
    assert all(g[i, j] == 0 for i in range(3) for j in range(3) if i != j)


def test_central_metric_is_full():
    g = sample_invariant_metric(central(2), 7)
    assert is_positive_definite(g) and is_invariant(central(2), g)


def test_sampled_metrics_are_invariant_pd_and_deterministic():
    for n in (1, 2, 3):
        for table in all_tables(n):
            g = GroupSpec(n, table)
            for seed in (1, 2, 3):
                m = sample_invariant_metric(g, seed)
                assert is_positive_definite(m) and is_invariant(g, m)
                assert m == sample_invariant_metric(g, seed)
    assert sample_invariant_metric(cube4(), 1) != sample_invariant_metric(cube4(), 2)


def test_non_invariant_form_detected():
    g = SymForm.from_json([["1", "1/2", "0"], ["1/2", "1", "0"], ["0", "0", "1"]])
    assert not is_invariant(coxeter_cube(3), g)
    assert is_invariant(cube4(), g)


def test_rng_streams():
    a = rng(5, 1).integers(0, 1 << 30, 8).tolist()
    assert a == rng(5, 1).integers(0, 1 << 30, 8).tolist()
    assert a != rng(5, 2).integers(0, 1 << 30, 8).tolist()
    assert "Philox" in PRNG_NAME


def test_repair_weight_is_the_smallest_power_of_two():
    from nbox import moduli

    hits = 0
    for table in all_tables(2):
        g = GroupSpec(2, table)
        for seed in range(40):
            basis = moduli.invariant_form_basis(g)
            gen = moduli.rng(seed, 2)
            coeffs = [F(int(gen.integers(2, 17)), 4) if i == j else F(int(gen.integers(-8, 9)), 4)
                      for i, j in basis.positions]
            raw = basis.combine(coeffs)
            out = sample_invariant_metric(g, seed)
            if is_positive_definite(raw):
                assert out == raw
                continue
            hits += 1
            lam = out[0, 0] - raw[0, 0]
            assert lam > 0 and lam.numerator & (lam.numerator - 1) == 0 and lam.denominator & (lam.denominator - 1) == 0
            assert out == raw + SymForm.identity(2).scaled(lam)
            assert lam == moduli.MIN_REPAIR or not is_positive_definite(
                raw + SymForm.identity(2).scaled(lam / 2))
    assert hits > 0
