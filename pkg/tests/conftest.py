from __future__ import annotations

import random
from fractions import Fraction

import pytest

from nbox.signcrystal import GroupSpec, central, coxeter_cube, make_group, torus

_CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str):
    _CRITERIA[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, detail = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


# -- shared specs ---------------------------------------------------------------------

def odd(e: int) -> int:
    return bin(e).count("1") % 2


def cube2_prime() -> GroupSpec:
    """Full sign group, phi(eps) = (0,0,1) exactly for the odd sign vectors."""
    return GroupSpec(3, tuple((e, 4 * odd(e)) for e in range(8)))


def klein_pillow() -> GroupSpec:
    return make_group(2, ["-+", "+-"], {"-+": "01", "+-": "00"})


def cube4() -> GroupSpec:
    return central(3)


NAMED = {
    "cube3": lambda: coxeter_cube(3),
    "cube2_prime": cube2_prime,
    "klein": klein_pillow,
    "cube4": cube4,
    "torus3": lambda: torus(3),
}


def random_spec(r: random.Random, n: int) -> GroupSpec:
    """A random normalized action: random generators, random parities on a basis."""
    basis: list[int] = []
    span = {0}
    for _ in range(r.randint(0, n)):
        e = r.randrange(1, 1 << n)
        if e not in span:
            basis.append(e)
            span |= {x ^ e for x in span}
    phi = {0: 0}
    for b in basis:
        pb = r.randrange(1 << n)
        phi.update({x ^ b: p ^ pb for x, p in list(phi.items())})
    return GroupSpec(n, tuple(phi.items()))


def random_rational(r: random.Random, lo=-3, hi=3, dens=(1, 2, 3, 4)) -> Fraction:
    return Fraction(r.randint(lo * 4, hi * 4), r.choice(dens))


@pytest.fixture
def rnd():
    return random.Random(20240611)
