"""Extended Chas-Sullivan product tables for spheres.

Three regimes are supported:

* ``CIRCLE`` (n = 1): classes g/G in the antipodal path space with
  half-integer index, g'/G' in the loop space with integer index.
* ``ODD`` (n = 3 mod 4): the trivial extension of Z[A,U]/(A^2).
* ``EVEN`` (n even, rational coefficients): the tables of the even sphere.

The product of two generators is always ``0`` or ``±`` a single generator, so
the tables are stored as functions returning ``(sign, generator)`` or ``None``.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
import json
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

from .graded import (
    LOOP, PATH, CoefficientRing, Generator, GradedElement, IllegalGenerator,
    RingMismatch, bilinear,
)

Mono = Optional[tuple]   # (sign, Generator) or None


class Regime(enum.Enum):
    CIRCLE = "circle"
    ODD = "odd"
    EVEN = "even"


class UnsupportedSphere(ValueError):
    pass


def regime_for(n: int) -> Regime:
    if n < 1:
        raise UnsupportedSphere("n must be positive")
    if n == 1:
        return Regime.CIRCLE
    if n % 2 == 0:
        return Regime.EVEN
    if n % 4 == 3:
        return Regime.ODD
    raise UnsupportedSphere(
        f"n = {n} is 1 mod 4: whether the extension is trivial is an open case; "
        "no product table is available")


class SphereAlgebraTable:
    """Product tables for ``H(LS^n) + H(P_a S^n)`` in one regime."""

    def __init__(self, n: int, ring: CoefficientRing | None = None):
        self.n = n
        self.regime = regime_for(n)
        if ring is None:
            ring = CoefficientRing.QQ if self.regime is Regime.EVEN else CoefficientRing.ZZ
        if self.regime is Regime.EVEN and ring is not CoefficientRing.QQ:
            raise UnsupportedSphere("the even-sphere tables are rational")
        self.ring = ring
        self._mul = lru_cache(maxsize=None)(self._mul_uncached)

    def __repr__(self):
        return f"SphereAlgebraTable(n={self.n}, {self.regime.value}, {self.ring.value})"

    # ---- generators -------------------------------------------------
    def gen(self, family: str, index=0) -> Generator:
        space = PATH if family in ("A", "B", "E", "g", "G") else LOOP
        return Generator(space, family, Fraction(index), self.n)

    def elem(self, family: str, index=0, c=1) -> GradedElement:
        return GradedElement.of(self.gen(family, index), c, self.ring)

    @property
    def unit(self) -> Generator:
        return self.gen("G'", 0) if self.regime is Regime.CIRCLE else self.gen("fund")

    def generators(self, cutoff: int, space: str | None = None) -> list[Generator]:
        """All legal generators with |index| <= cutoff, in display order."""
        out = []
        if self.regime is Regime.CIRCLE:
            for k2 in range(-2 * cutoff, 2 * cutoff + 1):
                k = Fraction(k2, 2)
                fams = ("g", "G") if k2 % 2 else ("g'", "G'")
                out += [self.gen(f, k) for f in fams]
        else:
            out += [self.gen("pt"), self.gen("fund")]
            if self.regime is Regime.ODD:
                out.append(self.gen("E"))
            for k in range(cutoff + 1):
                for fam in ("A", "B", "A'", "B'"):
                    try:
                        out.append(self.gen(fam, k))
                    except IllegalGenerator:
                        pass
        if space is not None:
            out = [g for g in out if g.space == space]
        return sorted(out)

    def check_legal(self, g: Generator) -> None:
        if g.n != self.n:
            raise IllegalGenerator(f"{g!r} belongs to n = {g.n}, table has n = {self.n}")
        if g.family in ("U", "V"):
            raise IllegalGenerator(f"{g!r} is not a basis class of this table")
        if self.regime is not Regime.ODD and g.family == "E":
            raise IllegalGenerator("E only exists in the odd regime")

    # ---- products ---------------------------------------------------
    def mul_gen(self, x: Generator, y: Generator) -> Mono:
        """Product of two generators as ``(sign, generator)`` or ``None``."""
        self.check_legal(x)
        self.check_legal(y)
        return self._mul(x, y)

    def _mul_uncached(self, x: Generator, y: Generator) -> Mono:
        if self.regime is Regime.EVEN:
            return _even_mul(x, y)
        if self.regime is Regime.ODD:
            return _odd_mul(x, y)
        return _circle_mul(x, y)

    def product_gen(self, x: Generator, y: Generator) -> GradedElement:
        hit = self.mul_gen(x, y)
        if hit is None:
            return GradedElement.zero(self.ring)
        return GradedElement.of(hit[1], hit[0], self.ring)

    def product(self, X: GradedElement, Y: GradedElement) -> GradedElement:
        if X.ring is not self.ring or Y.ring is not self.ring:
            raise RingMismatch(f"table is over {self.ring.value}")
        return bilinear(self.product_gen, X, Y, self.ring)

    def provenance(self) -> dict:
        """Product table on low generators; hashed for the CLI banner."""
        gens = self.generators(4)
        rows = []
        for x in gens:
            for y in gens:
                hit = self._mul(x, y)
                rows.append([repr(x), repr(y), None if hit is None else [hit[0], repr(hit[1])]])
        return {"n": self.n, "regime": self.regime.value, "ring": self.ring.value, "rows": rows}

    def table_hash(self) -> str:
        blob = json.dumps(self.provenance(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def extended_product(t: SphereAlgebraTable, X: GradedElement, Y: GradedElement) -> GradedElement:
    return t.product(X, Y)


# ---- even spheres --------------------------------------------------

def _g(space, fam, k, n) -> Generator:
    return Generator(space, fam, Fraction(k), n)


def _even_mul(x: Generator, y: Generator) -> Mono:
    n = x.n
    if x.family == "fund":
        return (1, y)
    if y.family == "fund":
        return (1, x)
    if x.family == "pt" or y.family == "pt":
        return None
    fx, fy = x.family, y.family
    k, l = int(x.index), int(y.index)
    s = k + l + 1
    if x.space == PATH and y.space == PATH:
        # antipodal pairing, lands in the loop space
        table = {("A", "A"): None, ("A", "B"): (1, "A'"), ("B", "A"): (-1, "A'"),
                 ("B", "B"): (1, "B'")}
        hit = table[(fx, fy)]
        return None if hit is None else (hit[0], _g(LOOP, hit[1], s, n))
    if x.space == LOOP and y.space == PATH:
        table = {("A'", "A"): None, ("A'", "B"): (1, "A"), ("B'", "A"): (1, "A"),
                 ("B'", "B"): (1, "B")}
        hit = table[(fx, fy)]
        return None if hit is None else (hit[0], _g(PATH, hit[1], s, n))
    if x.space == PATH and y.space == LOOP:
        table = {("A", "A'"): None, ("A", "B'"): (1, "A"), ("B", "A'"): (-1, "A"),
                 ("B", "B'"): (1, "B")}
        hit = table[(fx, fy)]
        return None if hit is None else (hit[0], _g(PATH, hit[1], s, n))
    table = {("A'", "A'"): None, ("A'", "B'"): (1, "A'"), ("B'", "A'"): (1, "A'"),
             ("B'", "B'"): (1, "B'")}
    hit = table[(fx, fy)]
    return None if hit is None else (hit[0], _g(LOOP, hit[1], s, n))


# ---- odd spheres, n = 3 mod 4 -------------------------------------

def _odd_cs(x: Generator, y: Generator) -> Mono:
    """Chas-Sullivan ring Z[A,U]/(A^2): pt = A, A'_k = AU^k, B'_k = U^(k+1)."""
    n = x.n
    if x.family == "fund":
        return (1, y)
    if y.family == "fund":
        return (1, x)

    def split(g):  # (A-exponent, U-exponent)
        if g.family == "pt":
            return 1, 0
        if g.family == "A'":
            return 1, int(g.index)
        return 0, int(g.index) + 1

    ax, ux = split(x)
    ay, uy = split(y)
    a, u = ax + ay, ux + uy
    if a > 1:
        return None
    if a == 1:
        return (1, _g(LOOP, "pt", 0, n) if u == 0 else _g(LOOP, "A'", u, n))
    return (1, _g(LOOP, "B'", u - 1, n))


def odd_copy(g: Generator) -> Generator:
    """The identification of H(P_a S^n) with H(LS^n) used by the trivial extension."""
    n = g.n
    if g.space == LOOP:
        raise ValueError("odd_copy expects a path space class")
    if g.family == "E":
        return _g(LOOP, "fund", 0, n)
    if g.family == "A":
        return _g(LOOP, "pt", 0, n) if g.index == 0 else _g(LOOP, "A'", g.index, n)
    return _g(LOOP, "B'", g.index, n)


def odd_uncopy(g: Generator) -> Generator:
    n = g.n
    if g.family == "fund":
        return _g(PATH, "E", 0, n)
    if g.family == "pt":
        return _g(PATH, "A", 0, n)
    if g.family == "A'":
        return _g(PATH, "A", g.index, n)
    return _g(PATH, "B", g.index, n)


def _odd_mul(x: Generator, y: Generator) -> Mono:
    if x.space == LOOP and y.space == LOOP:
        return _odd_cs(x, y)
    if x.space == PATH and y.space == PATH:
        return _odd_cs(odd_copy(x), odd_copy(y))
    if x.space == LOOP:
        hit = _odd_cs(x, odd_copy(y))
    else:
        hit = _odd_cs(odd_copy(x), y)
    return None if hit is None else (hit[0], odd_uncopy(hit[1]))


# ---- the circle ----------------------------------------------------

def _circle_mul(x: Generator, y: Generator) -> Mono:
    small_x = x.family in ("g", "g'")
    small_y = y.family in ("g", "g'")
    if small_x and small_y:
        return None
    space = LOOP if x.space == y.space else PATH
    k = x.index + y.index
    if small_x or small_y:
        fam = "g'" if space == LOOP else "g"
    else:
        fam = "G'" if space == LOOP else "G"
    return (1, Generator(space, fam, k, 1))


# ---- presentations -------------------------------------------------

class Presentation:
    """A presentation with a normal form for words, used as an oracle.

    ``letters`` maps letter -> generator; ``normal`` sends a word (string)
    to ``(sign, normal monomial)`` or ``None``; ``mono`` sends a generator to
    its normal monomial and ``word`` writes a normal monomial as a word.
    """

    def __init__(self, name, letters, relations, normal, mono, word, size):
        self.name = name
        self.letters = letters
        self.relations = relations
        self.normal = normal
        self.mono = mono
        self.word = word
        self.size = size


def _even_presentation(t: SphereAlgebraTable) -> Presentation:
    letters = {"A": t.gen("A", 0), "U": t.gen("B", 0), "B": t.gen("pt")}
    relations = [("A^2", [(1, "AA")]), ("AU+UA", [(1, "AU"), (1, "UA")]),
                 ("B^2", [(1, "BB")]), ("BA", [(1, "BA")]), ("AB", [(1, "AB")]),
                 ("BU", [(1, "BU")]), ("UB", [(1, "UB")])]

    def normal(w: str):
        # rewrite system: kill AA and anything touching B unless alone,
        # then move every A to the front with a sign per U it passes
        if "B" in w:
            return (1, (0, 0, 1)) if w == "B" else None
        sign, seen_u, a = 1, 0, 0
        for ch in w:
            if ch == "A":
                a += 1
                if a > 1:
                    return None
                if seen_u % 2:
                    sign = -sign
            else:
                seen_u += 1
        return sign, (a, seen_u, 0)

    def mono(g: Generator):
        f, k = g.family, int(g.index)
        return {"fund": (0, 0, 0), "pt": (0, 0, 1)}.get(f) or (
            (1, k, 0) if f in ("A", "A'") else (0, k + 1, 0))

    def word(m):
        a, u, b = m
        return "B" if b else "A" * a + "U" * u

    def size(m):
        return m[1]

    return Presentation("Q<A,U,B>/(A^2, AU+UA, B^2, BA, AB, BU, UB)",
                        letters, relations, normal, mono, word, size)


def _odd_presentation(t: SphereAlgebraTable) -> Presentation:
    letters = {"A": t.gen("pt"), "U": t.gen("B'", 0), "E": t.gen("E"),
               "B": t.gen("A", 0), "V": t.gen("B", 0)}
    relations = [("A^2", [(1, "AA")]), ("B^2", [(1, "BB")]),
                 ("BV-AU", [(1, "BV"), (-1, "AU")]), ("V^2-U^2", [(1, "VV"), (-1, "UU")]),
                 ("EB-A", [(1, "EB"), (-1, "A")]), ("EV-U", [(1, "EV"), (-1, "U")]),
                 ("E^2-1", [(1, "EE"), (-1, "")])]

    def normal(w: str):
        # commutative; B = EA and V = EU follow from EB = A, EV = U, E^2 = 1
        e = w.count("E") + w.count("B") + w.count("V")
        a = w.count("A") + w.count("B")
        u = w.count("U") + w.count("V")
        if a > 1:
            return None
        return 1, (e % 2, a, u)

    def mono(g: Generator):
        f, k = g.family, int(g.index)
        if f == "fund":
            return (0, 0, 0)
        if f == "pt":
            return (0, 1, 0)
        if f == "E":
            return (1, 0, 0)
        e = 1 if g.space == PATH else 0
        return (e, 1, k) if f in ("A", "A'") else (e, 0, k + 1)

    def word(m):
        e, a, u = m
        return "E" * e + "A" * a + "U" * u

    return Presentation("Z[A,U,E,B,V]/(A^2, B^2, BV-AU, V^2-U^2, EB-A, EV-U, E^2-1)",
                        letters, relations, normal, mono, word, lambda m: m[2])


def _circle_presentation(t: SphereAlgebraTable) -> Presentation:
    half = Fraction(1, 2)
    letters = {"a": t.gen("g'", 0), "t": t.gen("G", half), "s": t.gen("G", -half)}
    relations = [("a^2", [(1, "aa")]), ("t*t^-1 - 1", [(1, "ts"), (-1, "")]),
                 ("t^-1*t - 1", [(1, "st"), (-1, "")]), ("at-ta", [(1, "at"), (-1, "ta")])]

    def normal(w: str):
        a = w.count("a")
        if a > 1:
            return None
        return 1, (a, w.count("t") - w.count("s"))

    def mono(g: Generator):
        return (1 if g.family in ("g", "g'") else 0, int(2 * g.index))

    def word(m):
        a, e = m
        return "a" * a + ("t" * e if e >= 0 else "s" * (-e))

    return Presentation("Lambda[a] (x) Z[t,t^-1]", letters, relations, normal, mono, word,
                        lambda m: abs(m[1]))


def presentation(t: SphereAlgebraTable) -> Presentation:
    if t.regime is Regime.EVEN:
        return _even_presentation(t)
    if t.regime is Regime.ODD:
        return _odd_presentation(t)
    return _circle_presentation(t)


def monomial_isomorphism(t: SphereAlgebraTable, g: Generator) -> str:
    """The word in the presentation letters that corresponds to ``g``."""
    if t.regime is Regime.CIRCLE:
        raise UnsupportedSphere("the circle presentation is checked directly, not by words")
    t.check_legal(g)
    p = presentation(t)
    return pretty_word(p.word(p.mono(g)))


def pretty_word(w: str) -> str:
    if not w:
        return "1"
    out, i = [], 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        out.append(w[i] if j - i == 1 else f"{w[i]}^{j - i}")
        i = j
    return "".join(out)


def eval_word(t: SphereAlgebraTable, word: str, letters: dict, right: bool = False) -> GradedElement:
    """Evaluate a word by iterated table products (left or right bracketing)."""
    if not word:
        return GradedElement.of(t.unit, 1, t.ring)
    elems = [GradedElement.of(letters[ch], 1, t.ring) for ch in word]
    if right:
        acc = elems[-1]
        for e in reversed(elems[:-1]):
            acc = t.product(e, acc)
        return acc
    acc = elems[0]
    for e in elems[1:]:
        acc = t.product(acc, e)
    return acc


def _finding(check, witness, lhs, rhs) -> dict:
    return {"check": check, "witness": witness,
            "lhs": lhs.text() if hasattr(lhs, "text") else str(lhs),
            "rhs": rhs.text() if hasattr(rhs, "text") else str(rhs)}


def verify_presentation(t: SphereAlgebraTable, cutoff: int = 10) -> list[dict]:
    """Check the tables against the presentation; returns the list of failures."""
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    p = presentation(t)
    report: list[dict] = []
    zero = GradedElement.zero(t.ring)

    for name, terms in p.relations:
        val = zero
        for c, w in terms:
            val = val + eval_word(t, w, p.letters).scale(c)
        if not val.is_zero():
            report.append(_finding("relation", name, val, zero))

    gens = t.generators(cutoff)
    seen = {}
    for g in gens:
        m = p.mono(g)
        if m in seen:
            report.append(_finding("injective", repr(g), repr(seen[m]), repr(g)))
        seen[m] = g
        w = p.word(m)
        want = GradedElement.of(g, 1, t.ring)
        for right in (False, True):
            got = eval_word(t, w, p.letters, right=right)
            if got != want:
                report.append(_finding("word" + ("-right" if right else ""),
                                       f"{g.text()} = {pretty_word(w)}", got, want))

    inv = {p.mono(g): g for g in t.generators(2 * cutoff + 2)}
    for x in gens:
        for y in gens:
            got = t.product_gen(x, y)
            hit = p.normal(p.word(p.mono(x)) + p.word(p.mono(y)))
            if hit is None:
                want = zero
            else:
                if hit[1] not in inv:
                    report.append(_finding("surjective", f"{x.text()}*{y.text()}", got, str(hit)))
                    continue
                want = GradedElement.of(inv[hit[1]], hit[0], t.ring)
            if got != want:
                report.append(_finding("multiplicative", f"{x.text()}*{y.text()}", got, want))

    report += _subalgebra_checks(t, p, cutoff)
    return report


def _subalgebra_checks(t: SphereAlgebraTable, p: Presentation, cutoff: int) -> list[dict]:
    report = []
    gens = t.generators(cutoff)
    loops = [g for g in gens if g.space == LOOP]
    for x in loops:
        for y in loops:
            hit = t.mul_gen(x, y)
            if hit is not None and hit[1].space != LOOP:
                report.append(_finding("loop-subalgebra", f"{x.text()}*{y.text()}", repr(hit[1]), "L"))

    if t.regime is Regime.CIRCLE:
        # the Chas-Sullivan ring is Lambda[a] (x) Z[t^2, t^-2]
        for g in gens:
            even = p.mono(g)[1] % 2 == 0
            if even != (g.space == LOOP):
                report.append(_finding("t-parity", repr(g), str(p.mono(g)), g.space))
    elif t.regime is Regime.EVEN:
        # reduced form: dropping pt leaves Q<A,U>/(A^2, AU+UA)
        reduced = [g for g in gens if g.family != "pt"]
        for x in reduced:
            for y in reduced:
                hit = t.mul_gen(x, y)
                if hit is not None and hit[1].family == "pt":
                    report.append(_finding("reduced-closure", f"{x.text()}*{y.text()}", "pt", "no pt"))
        letters = {"A": p.letters["A"], "U": p.letters["U"]}
        for name, w in (("A^2", "AA"), ("AU+UA", None)):
            if w is not None:
                val = eval_word(t, w, letters)
            else:
                val = eval_word(t, "AU", letters) + eval_word(t, "UA", letters)
            if not val.is_zero():
                report.append(_finding("reduced-relation", name, val, "0"))
        # the reduced basis is exactly {A^a U^u}
        monos = {p.mono(g) for g in reduced}
        want = {(1, u, 0) for u in range(cutoff + 1)} | {(0, u, 0) for u in range(cutoff + 2)}
        if monos != want:
            report.append(_finding("reduced-basis", sorted(monos ^ want), "basis", "A^a U^u"))
    else:
        # the subalgebra generated by B and V is again Z[A', U']/(A'^2)
        letters = p.letters
        bb = eval_word(t, "BB", letters)
        if not bb.is_zero():
            report.append(_finding("BV-subalgebra", "B^2", bb, "0"))
        seen = set()
        for a in (0, 1):
            for j in range(cutoff + 1):
                w = "B" * a + "V" * j
                val = eval_word(t, w, letters)
                if len(val) != 1:
                    report.append(_finding("BV-subalgebra", pretty_word(w), val, "single class"))
                    continue
                g = val.keys()[0]
                if g in seen:
                    report.append(_finding("BV-subalgebra", pretty_word(w), val, "new class"))
                seen.add(g)
    return report


def check_associativity(t: SphereAlgebraTable, cutoff: int = 8) -> list[dict]:
    gens = t.generators(cutoff)
    mul = t._mul
    report = []
    for x, y, z in itertools.product(gens, repeat=3):
        xy = mul(x, y)
        lhs = None if xy is None else mul(xy[1], z)
        lhs = None if lhs is None else (lhs[0] * xy[0], lhs[1])
        yz = mul(y, z)
        rhs = None if yz is None else mul(x, yz[1])
        rhs = None if rhs is None else (rhs[0] * yz[0], rhs[1])
        if lhs != rhs:
            report.append({"check": "associativity", "witness": [repr(x), repr(y), repr(z)],
                           "lhs": str(lhs), "rhs": str(rhs)})
    return report


def check_unit(t: SphereAlgebraTable, cutoff: int = 8) -> list[dict]:
    u = t.unit
    report = []
    for g in t.generators(cutoff):
        for hit in (t.mul_gen(u, g), t.mul_gen(g, u)):
            if hit != (1, g):
                report.append({"check": "unit", "witness": repr(g), "lhs": str(hit), "rhs": repr(g)})
    return report


def check_degree_law(t: SphereAlgebraTable, cutoff: int = 12) -> list[dict]:
    report = []
    gens = t.generators(cutoff)
    for x in gens:
        for y in gens:
            hit = t.mul_gen(x, y)
            if hit is not None and hit[1].degree != x.degree + y.degree - t.n:
                report.append({"check": "degree", "witness": [repr(x), repr(y)],
                               "lhs": hit[1].degree, "rhs": x.degree + y.degree - t.n})
    return report


def antipodal_degree(n: int) -> int:
    """Degree of the antipodal map of S^n."""
    return (-1) ** (n + 1)


def sign_commutator_check(t: SphereAlgebraTable, x: Generator, y: Generator) -> bool:
    """Signed commutation of the antipodal pairing on two path space classes."""
    if x.space != PATH or y.space != PATH:
        raise ValueError("both classes must live in the antipodal path space")
    n = t.n
    sign = antipodal_degree(n) * _parity((x.degree - n) * (y.degree - n))
    return t.product_gen(x, y) == t.product_gen(y, x).scale(sign)


def check_sign_commutation(t: SphereAlgebraTable, cutoff: int = 8) -> list[dict]:
    paths = t.generators(cutoff, PATH)
    return [{"check": "signed-commutation", "witness": [repr(x), repr(y)],
             "lhs": t.product_gen(x, y).text(), "rhs": t.product_gen(y, x).text()}
            for x in paths for y in paths if not sign_commutator_check(t, x, y)]


def module_commutation_status(t: SphereAlgebraTable, cutoff: int = 6,
                              loop_map: Callable[[Generator], GradedElement] | None = None) -> dict:
    """Report (never assert) X *_l A versus the signed A *_r (La)_* X.

    The action of the antipodal map on the loop space classes is not known in
    general, so it is a parameter; the default is the identity.
    """
    n = t.n
    label = "identity" if loop_map is None else "custom"
    if loop_map is None:
        loop_map = lambda g: GradedElement.of(g, 1, t.ring)   # noqa: E731
    failures = []
    total = 0
    for x in t.generators(cutoff, LOOP):
        for a in t.generators(cutoff, PATH):
            total += 1
            sign = antipodal_degree(n) * _parity((x.degree - n) * (a.degree - n))
            lhs = t.product_gen(x, a)
            rhs = t.product(GradedElement.of(a, 1, t.ring), loop_map(x)).scale(sign)
            if lhs != rhs:
                failures.append({"witness": [repr(x), repr(a)], "lhs": lhs.text(), "rhs": rhs.text()})
    return {"pairs": total, "mismatches": len(failures), "examples": failures[:5],
            "loop_map": label}


def _parity(e: int) -> int:
    return -1 if e % 2 else 1
