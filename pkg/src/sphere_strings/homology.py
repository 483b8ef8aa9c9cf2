"""Morse-Bott assembly of H(P_a S^n) and H(LS^n) from critical strata.

The energy functional on both spaces is perfect for the round metric, so the
homology in degree i is the direct sum over critical strata of the homology of
the critical manifold shifted by the stratum index.  Critical manifolds are
the constant loops (a copy of S^n) and copies of the unit tangent bundle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .graded import LOOP, PATH, AbelianGroupSummary, CoefficientRing, ZERO_GROUP

CONSTANT_LOOPS = "ConstantLoops"
UNIT_TANGENT = "UnitTangentBundle"
Z = AbelianGroupSummary(1)
Z2 = AbelianGroupSummary(0, (2,))


def sphere_homology(n: int, i: int) -> AbelianGroupSummary:
    return Z if i in (0, n) else ZERO_GROUP


def unit_tangent_homology(n: int, i: int) -> AbelianGroupSummary:
    """Integral homology of the unit tangent bundle of S^n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if n % 2 == 0:
        if i in (0, 2 * n - 1):
            return Z
        return Z2 if i == n - 1 else ZERO_GROUP
    return Z if i in (0, n - 1, n, 2 * n - 1) else ZERO_GROUP


def manifold_dim(manifold: str, n: int) -> int:
    return n if manifold == CONSTANT_LOOPS else 2 * n - 1


def manifold_homology(manifold: str, n: int, i: int) -> AbelianGroupSummary:
    if i < 0:
        return ZERO_GROUP
    if manifold == CONSTANT_LOOPS:
        return sphere_homology(n, i)
    return unit_tangent_homology(n, i)


@dataclass(frozen=True)
class CriticalStratum:
    space: str
    multiplicity: int
    length_pi: Fraction       # length as a multiple of pi
    index: int
    nullity: int
    manifold: str

    @property
    def length(self) -> float:
        return float(self.length_pi) * math.pi

    @property
    def energy(self) -> float:
        return self.length ** 2

    def label(self) -> str:
        if self.length_pi == 0:
            return "0"
        k = self.length_pi
        return "(pi)^2" if k == 1 else f"({k}pi)^2"

    def to_dict(self) -> dict:
        return {"space": self.space, "multiplicity": self.multiplicity,
                "length": self.length, "length_over_pi": str(self.length_pi),
                "energy": self.energy, "index": self.index, "nullity": self.nullity,
                "manifold": self.manifold}


def _space(space: str) -> str:
    s = space.strip().lower()
    if s in ("p", "path", "antipodalpath", "antipodal", "pa"):
        return PATH
    if s in ("l", "loop", "lambda", "loopspace"):
        return LOOP
    raise ValueError(f"unknown space {space!r}")


def stratum(space: str, n: int, m: int) -> CriticalStratum:
    space = _space(space)
    if space == PATH:
        return CriticalStratum(PATH, m, Fraction(2 * m + 1), 2 * m * (n - 1), 2 * n - 1, UNIT_TANGENT)
    if m == 0:
        return CriticalStratum(LOOP, 0, Fraction(0), 0, n, CONSTANT_LOOPS)
    # the loop index (2m-1)(n-1) is read off the stacked diagram
    return CriticalStratum(LOOP, m, Fraction(2 * m), (2 * m - 1) * (n - 1), 2 * n - 1, UNIT_TANGENT)


def critical_spectrum(space: str, n: int, max_length: float) -> list[CriticalStratum]:
    """Strata with length <= max_length (lengths compared in units of pi)."""
    if max_length <= 0:
        raise ValueError("max_length must be positive")
    out, m = [], 0
    bound = max_length / math.pi + 1e-12
    while True:
        s = stratum(space, n, m)
        if float(s.length_pi) > bound:
            return out
        out.append(s)
        m += 1


def strata_below_degree(space: str, n: int, i: int) -> list[CriticalStratum]:
    """All strata whose index is at most i (the ones that can contribute to H_i)."""
    out, m = [], 0
    while True:
        s = stratum(space, n, m)
        if s.index > i:
            return out
        out.append(s)
        m += 1


def _reduce(g_i: AbelianGroupSummary, g_im1: AbelianGroupSummary,
            ring: CoefficientRing) -> AbelianGroupSummary:
    """Universal coefficients: H_i(X; F) = H_i (x) F + Tor(H_{i-1}, F)."""
    if ring is CoefficientRing.ZZ:
        return g_i
    if ring is CoefficientRing.QQ:
        return AbelianGroupSummary(g_i.free_rank)
    even = lambda g: sum(1 for t in g.torsion if t % 2 == 0)   # noqa: E731
    return AbelianGroupSummary(g_i.free_rank + even(g_i) + even(g_im1))


def assemble_homology(space: str, n: int, ring: CoefficientRing, i: int) -> AbelianGroupSummary:
    if n < 2:
        raise ValueError("n must be at least 2")
    if i < 0:
        return ZERO_GROUP
    total = ZERO_GROUP
    for s in strata_below_degree(space, n, i):
        here = manifold_homology(s.manifold, n, i - s.index)
        below = manifold_homology(s.manifold, n, i - 1 - s.index)
        total = total + _reduce(here, below, ring)
    return total


def homology_table(space: str, n: int, ring: CoefficientRing, max_degree: int) -> list[dict]:
    rows = []
    for i in range(max_degree + 1):
        g = assemble_homology(space, n, ring, i)
        contrib = [s.multiplicity for s in strata_below_degree(space, n, i)
                   if not manifold_homology(s.manifold, n, i - s.index).is_zero()]
        rows.append({"degree": i, "group": g.text(), "free_rank": g.free_rank,
                     "torsion": list(g.torsion), "strata": contrib})
    return rows


def odd_double_decomposition(n: int, max_degree: int) -> list[int]:
    """Degrees where the path space and loop space assemblies disagree (odd n)."""
    if n % 2 == 0:
        raise ValueError("n must be odd")
    return [i for i in range(max_degree + 1)
            if assemble_homology(PATH, n, CoefficientRing.ZZ, i)
            != assemble_homology(LOOP, n, CoefficientRing.ZZ, i)]


def reduced_sum_rank(n: int, i: int) -> int:
    """Rational rank of reduced H(LS^n) plus H(P_a S^n) in degree i."""
    q = CoefficientRing.QQ
    loop = assemble_homology(LOOP, n, q, i).free_rank - (1 if i == 0 else 0)
    return loop + assemble_homology(PATH, n, q, i).free_rank


def reduced_sum_expected(n: int, i: int) -> int:
    """Number of ways to write i as m(n-1) or m(n-1) + n with m >= 0."""
    c = 0
    if i % (n - 1) == 0:
        c += 1
    if i >= n and (i - n) % (n - 1) == 0:
        c += 1
    return c


def check_reduced_sum(n: int, max_degree: int) -> list[dict]:
    """Even n only: odd spheres double every rank and fail the count."""
    if n % 2:
        raise ValueError("the reduced-sum count holds for even n")
    out = []
    for i in range(max_degree + 1):
        got, want = reduced_sum_rank(n, i), reduced_sum_expected(n, i)
        if got != want:
            out.append({"degree": i, "rank": got, "expected": want})
    return out


def check_generator_accounting(table, max_degree: int) -> list[dict]:
    """Compare assembled ranks with the number of table generators per degree."""
    n = table.n
    ring = CoefficientRing.QQ if n % 2 == 0 else CoefficientRing.ZZ
    gens = table.generators(max_degree + 2)
    out = []
    for space in (LOOP, PATH):
        for i in range(max_degree + 1):
            count = sum(1 for g in gens if g.space == space and g.degree == i)
            rank = assemble_homology(space, n, ring, i).free_rank
            if count != rank:
                out.append({"space": space, "degree": i, "generators": count, "rank": rank})
    return out


def completing_manifold_betti(n: int, l: int, i: int) -> int:
    """Rational Betti number of the l-th completing manifold.

    Its cohomology is exterior on one class of degree 2n-1 and l classes of
    degree n-1, so b_i counts square-free monomials of degree i.
    """
    if n % 2 or n < 2:
        raise ValueError("n must be even")
    if l < 0:
        raise ValueError("l must be nonnegative")
    total = 0
    for a in (0, 1):
        rest = i - a * (2 * n - 1)
        if rest >= 0 and rest % (n - 1) == 0:
            total += comb(l, rest // (n - 1))
    return total


def cap_a(x: str, y: str) -> tuple[int, str] | None:
    """The twisted intersection product on H(US^n), n even.

    Classes are ``"p0"`` (point) and ``"U"`` (fundamental class).  Returns
    ``(sign, class)`` or ``None`` for zero.
    """
    table = {("p0", "p0"): None, ("p0", "U"): (1, "p0"), ("U", "p0"): (-1, "p0"),
             ("U", "U"): (1, "U")}
    key = (_cls(x), _cls(y))
    return table[key]


def _cls(x: str) -> str:
    s = x.strip().strip("[]")
    if s in ("p0", "p_0", "pt"):
        return "p0"
    if s in ("U", "US^n", "fund", "USn"):
        return "U"
    raise ValueError(f"unsupported class {x!r}")


def diagram_boxes(space: str, n: int, levels: int) -> list[dict]:
    if levels < 1:
        raise ValueError("levels must be at least 1")
    boxes = []
    for m in range(levels):
        s = stratum(space, n, m)
        boxes.append({"label": s.label(), "bottom": s.index,
                      "top": s.index + manifold_dim(s.manifold, n), "manifold": s.manifold})
    return boxes


def emit_stacked_diagram(space: str, n: int, levels: int, width: int = 9) -> str:
    """Text grid: one column per critical level, degree on the vertical axis.

    A cell is ``#`` when the degree lies in [index, index + dim(manifold)].
    """
    boxes = diagram_boxes(space, n, levels)
    top = max(b["top"] for b in boxes)
    lw = max(3, len(str(top)))
    lines = []
    for d in range(top, -1, -1):
        cells = "".join(("#" if b["bottom"] <= d <= b["top"] else ".").center(width) for b in boxes)
        lines.append(f"{d:>{lw}} |{cells}")
    lines.append(" " * lw + " +" + "-" * (width * len(boxes)))
    lines.append(" " * lw + "  " + "".join(b["label"].center(width) for b in boxes))
    return "\n".join(lines)
