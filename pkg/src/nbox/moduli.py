"""
Invariant parallel metrics of a normalized action.

With a diagonal point group, eps^T g eps = g says g_ij = eps_i eps_j g_ij, so entry (i, j)
survives iff eps_i eps_j = +1 for every eps in H.  The invariant forms are spanned by the
surviving entry indicators, and the moduli dimension is their count.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactnum import SymForm, is_positive_definite
from .signcrystal import GroupSpec

PRNG_NAME = "numpy.random.Philox (Philox4x32-10)"
MIN_REPAIR = Fraction(1, 16)


def rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator; ``stream`` keys split one seed into independent streams."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *stream])))


@dataclass(frozen=True)
class ModuliBasis:
    n: int
    positions: tuple  # surviving (i, j) with i <= j

    @property
    def dim(self) -> int:
        return len(self.positions)

    @property
    def basis(self) -> list[SymForm]:
        out = []
        for i, j in self.positions:
            m = [[Fraction(0)] * self.n for _ in range(self.n)]
            m[i][j] = m[j][i] = Fraction(1)
            out.append(SymForm(tuple(tuple(r) for r in m)))
        return out

    def combine(self, coeffs) -> SymForm:
        m = [[Fraction(0)] * self.n for _ in range(self.n)]
        for (i, j), c in zip(self.positions, coeffs):
            m[i][j] = m[j][i] = Fraction(c)
        return SymForm(tuple(tuple(r) for r in m))


def invariant_form_basis(g: GroupSpec) -> ModuliBasis:
    positions = []
    for i in range(g.n):
        for j in range(i, g.n):
            # eps_i eps_j = -1 exactly when the two bits differ
            if all(not ((e >> i) ^ (e >> j)) & 1 for e in g.elements):
                positions.append((i, j))
    return ModuliBasis(g.n, tuple(positions))


def is_invariant(g: GroupSpec, form: SymForm) -> bool:
    for e in g.elements:
        s = [-1 if e >> i & 1 else 1 for i in range(g.n)]
        for i in range(g.n):
            for j in range(g.n):
                if s[i] * s[j] * form[i, j] != form[i, j]:
                    return False
    return True


def sample_invariant_metric(g: GroupSpec, seed: int) -> SymForm:
    """
    A pseudo-random invariant positive definite form with small dyadic entries.

    Coefficients are drawn on the moduli basis (diagonal in [1/2, 4], off-diagonal in
    [-2, 2], quarter steps).  If the draw is not positive definite, the identity (always
    invariant) is added with the smallest power-of-two weight, but at least 1/16, that
    repairs it.  The repairing weights form a half-line, so doubling up and then halving
    down finds it; the floor matters for singular semidefinite draws.
    """
    basis = invariant_form_basis(g)
    gen = rng(seed, g.n)
    coeffs = []
    for i, j in basis.positions:
        if i == j:
            coeffs.append(Fraction(int(gen.integers(2, 17)), 4))
        else:
            coeffs.append(Fraction(int(gen.integers(-8, 9)), 4))
    form = basis.combine(coeffs)
    if is_positive_definite(form):
        return form
    eye = SymForm.identity(g.n)
    lam = Fraction(1)
    while not is_positive_definite(form + eye.scaled(lam)):
        lam *= 2
    while lam > MIN_REPAIR and is_positive_definite(form + eye.scaled(lam / 2)):
        lam /= 2
    return form + eye.scaled(lam)
