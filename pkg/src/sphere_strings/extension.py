"""Extension algebras A + B built from an algebra, a bimodule and a pairing.

Elements of ``A + B`` are graded elements whose A-part is tagged with the loop
space ``L`` and whose B-part is tagged with the path space ``P``.  The product
is

    (a, x)(b, y) = (ab + x.y, a *_l y + x *_r b)

and it is associative as soon as the pairing is adapted (four identities,
see :func:`check_adapted`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .graded import (
    LOOP, PATH, CoefficientRing, Generator, GradedElement, bilinear,
)

GenMul = Callable[[Generator, Generator], GradedElement]


@dataclass(frozen=True)
class AlgebraSpec:
    multiply: GenMul
    unit: Generator
    basis: Callable[[int], list]
    ring: CoefficientRing
    name: str = "algebra"

    def mul(self, x: GradedElement, y: GradedElement) -> GradedElement:
        return bilinear(self.multiply, x, y, self.ring)

    def elem(self, g: Generator, c=1) -> GradedElement:
        return GradedElement.of(g, c, self.ring)

    def one(self) -> GradedElement:
        return self.elem(self.unit)


@dataclass(frozen=True)
class BimoduleSpec:
    left_action: GenMul
    right_action: GenMul
    basis: Callable[[int], list]


@dataclass(frozen=True)
class PairingSpec:
    pair: GenMul


def build_extension(a: AlgebraSpec, b: BimoduleSpec, p: PairingSpec,
                    name: str = "extension") -> AlgebraSpec:
    def multiply(x: Generator, y: Generator) -> GradedElement:
        if x.space == LOOP and y.space == LOOP:
            return a.multiply(x, y)
        if x.space == PATH and y.space == PATH:
            return p.pair(x, y)
        if x.space == LOOP:
            return b.left_action(x, y)
        return b.right_action(x, y)

    def basis(cutoff: int) -> list:
        return sorted(set(a.basis(cutoff)) | set(b.basis(cutoff)))

    return AlgebraSpec(multiply, a.unit, basis, a.ring, name)


def trivial_parts(a: AlgebraSpec, copy: Callable | None = None,
                  uncopy: Callable | None = None):
    """Bimodule and pairing of the trivial extension A + A.

    ``copy`` sends an A-generator to its twin in the B-summand (default: the
    same generator retagged with the path space) and ``uncopy`` inverts it.
    """
    if copy is None:
        copy = lambda g: replace(g, space=PATH)        # noqa: E731
        uncopy = lambda g: replace(g, space=LOOP)      # noqa: E731
    r = a.ring

    def to_b(e: GradedElement) -> GradedElement:
        return GradedElement([(copy(g), c) for g, c in e.items()], r)

    def left(x, y):
        return to_b(a.multiply(x, uncopy(y)))

    def right(x, y):
        return to_b(a.multiply(uncopy(x), y))

    def pair(x, y):
        return a.multiply(uncopy(x), uncopy(y))

    def basis(cutoff):
        return [copy(g) for g in a.basis(cutoff)]

    return BimoduleSpec(left, right, basis), PairingSpec(pair)


def build_trivial_extension(a: AlgebraSpec, copy: Callable | None = None,
                            uncopy: Callable | None = None) -> AlgebraSpec:
    b, p = trivial_parts(a, copy, uncopy)
    return build_extension(a, b, p, name=f"trivial extension of {a.name}")


def _witness(*gs) -> list:
    return [repr(g) for g in gs]


def check_adapted(a: AlgebraSpec, b: BimoduleSpec, p: PairingSpec, cutoff: int = 12) -> list[dict]:
    """Evaluate the four adaptedness identities on all generator triples."""
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    r = a.ring
    E = lambda g: GradedElement.of(g, 1, r)           # noqa: E731
    A = a.basis(cutoff)
    B = b.basis(cutoff)

    def lmul(x, y):
        return bilinear(b.left_action, x, y, r)

    def rmul(x, y):
        return bilinear(b.right_action, x, y, r)

    def pmul(x, y):
        return bilinear(p.pair, x, y, r)

    report = []

    def note(name, gs, lhs, rhs):
        if lhs != rhs:
            report.append({"identity": name, "witness": _witness(*gs),
                           "lhs": lhs.text(), "rhs": rhs.text()})

    for g, y, z in itertools.product(A, B, B):
        note("a(y.z) = (a*_l y).z", (g, y, z),
             a.mul(E(g), p.pair(y, z)), pmul(b.left_action(g, y), E(z)))
        note("(y.z)a = y.(z*_r a)", (y, z, g),
             a.mul(p.pair(y, z), E(g)), pmul(E(y), b.right_action(z, g)))
    for x, g, z in itertools.product(B, A, B):
        note("(x*_r a).z = x.(a*_l z)", (x, g, z),
             pmul(b.right_action(x, g), E(z)), pmul(E(x), b.left_action(g, z)))
    for x, y, z in itertools.product(B, B, B):
        note("(x.y)*_l z = x*_r(y.z)", (x, y, z),
             lmul(p.pair(x, y), E(z)), rmul(E(x), p.pair(y, z)))
    return report


def check_associative(alg: AlgebraSpec, cutoff: int = 8) -> list[dict]:
    gens = alg.basis(cutoff)
    r = alg.ring
    E = lambda g: GradedElement.of(g, 1, r)           # noqa: E731
    report = []
    for x, y, z in itertools.product(gens, repeat=3):
        lhs = alg.mul(alg.multiply(x, y), E(z))
        rhs = alg.mul(E(x), alg.multiply(y, z))
        if lhs != rhs:
            report.append({"identity": "associativity", "witness": _witness(x, y, z),
                           "lhs": lhs.text(), "rhs": rhs.text()})
    return report


def check_unit(alg: AlgebraSpec, cutoff: int = 8) -> list[dict]:
    report = []
    for g in alg.basis(cutoff):
        e = GradedElement.of(g, 1, alg.ring)
        for lhs in (alg.multiply(alg.unit, g), alg.multiply(g, alg.unit)):
            if lhs != e:
                report.append({"identity": "unit", "witness": _witness(g),
                               "lhs": lhs.text(), "rhs": e.text()})
    return report


def find_degree0_involutions(alg: AlgebraSpec, cutoff: int, bound: int = 2,
                             chunk: int = 200_000) -> list[GradedElement]:
    """All c = sum c_i g_i over degree-0 generators, |c_i| <= bound, with c^2 = 1, c != +-1.

    Degree means the shifted degree |g| - n, so the unit has degree 0.  The
    search is exhaustive over the box of coefficients and is a semidecision
    for the full ring: absence here only rules out small witnesses.
    """
    gens = [g for g in alg.basis(cutoff) if g.degree == g.n]
    m = len(gens)
    if m == 0:
        return []
    prods = {}
    targets = {alg.unit: 0}
    for i, x in enumerate(gens):
        for j, y in enumerate(gens):
            e = alg.multiply(x, y)
            prods[i, j] = e
            for g, _ in e.items():
                targets.setdefault(g, len(targets))
    T = len(targets)
    C = np.zeros((m, m, T))
    for (i, j), e in prods.items():
        for g, c in e.items():
            if getattr(c, "denominator", 1) != 1:
                raise ValueError("structure constants must be integral for this search")
            C[i, j, targets[g]] = float(c)
    unit = np.zeros(T)
    unit[0] = 1.0
    Cflat = C.reshape(m, m * T)
    base = 2 * bound + 1
    total = base ** m
    powers = base ** np.arange(m, dtype=np.int64)
    found = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        c = ((idx[:, None] // powers) % base - bound).astype(float)
        sq = np.einsum("ni,nik->nk", c, (c @ Cflat).reshape(-1, m, T))
        hit = np.all(sq == unit, axis=1)
        for row in c[hit]:
            found.append(tuple(int(v) for v in row))
    out = []
    for row in found:
        e = GradedElement([(g, v) for g, v in zip(gens, row)], alg.ring)
        one = alg.one()
        if e == one or e == -one:
            continue
        out.append(e)
    return sorted(out, key=lambda e: e.text())


# ---- concrete algebras ----------------------------------------------

def polynomial_algebra(n: int, ring: CoefficientRing = CoefficientRing.ZZ,
                       letter: str = "U") -> AlgebraSpec:
    """R[U] with U[k] = U^k, tagged as loop space classes."""
    def multiply(x, y):
        return GradedElement.of(Generator(LOOP, letter, x.index + y.index, n), 1, ring)

    def basis(cutoff):
        return [Generator(LOOP, letter, k, n) for k in range(cutoff + 1)]

    return AlgebraSpec(multiply, Generator(LOOP, letter, 0, n), basis, ring, f"{ring.value}[{letter}]")


def table_parts(t):
    """Split a sphere table into its loop algebra, bimodule and pairing."""
    pg = t.product_gen

    def loops(cutoff):
        return t.generators(cutoff, LOOP)

    def paths(cutoff):
        return t.generators(cutoff, PATH)

    a = AlgebraSpec(pg, t.unit, loops, t.ring, f"Chas-Sullivan ring of S^{t.n}")
    return a, BimoduleSpec(pg, pg, paths), PairingSpec(pg)


def table_algebra(t) -> AlgebraSpec:
    a, b, p = table_parts(t)
    return build_extension(a, b, p, name=f"extended ring of S^{t.n}")
