import itertools
from fractions import Fraction

import pytest

from sphere_strings.graded import LOOP, PATH, CoefficientRing, Generator, GradedElement, IllegalGenerator
from sphere_strings.sphere_algebra import (
    Regime, SphereAlgebraTable, UnsupportedSphere, antipodal_degree, check_associativity,
    check_degree_law, check_sign_commutation, check_unit, module_commutation_status,
    monomial_isomorphism, regime_for, sign_commutator_check, verify_presentation,
)

H = Fraction(1, 2)


def table(n):
    return SphereAlgebraTable(n)


# ---- independent oracles ----------------------------------------------------

def even_rules(x, y):
    """The even-sphere rule list, transcribed family by family."""
    if x.family == "fund":
        return 1, (y.space, y.family, y.index)
    if y.family == "fund":
        return 1, (x.space, x.family, x.index)
    if "pt" in (x.family, y.family):
        if x.space == PATH or y.space == PATH:
            return None
        return "skip"
    s = x.index + y.index + 1
    rules = {
        ("A", "A"): None, ("A", "B"): (1, LOOP, "A'"), ("B", "A"): (-1, LOOP, "A'"),
        ("B", "B"): (1, LOOP, "B'"),
        ("A'", "A"): None, ("A'", "B"): (1, PATH, "A"), ("B'", "A"): (1, PATH, "A"),
        ("B'", "B"): (1, PATH, "B"),
        ("A", "A'"): None, ("A", "B'"): (1, PATH, "A"), ("B", "A'"): (-1, PATH, "A"),
        ("B", "B'"): (1, PATH, "B"),
    }
    key = (x.family, y.family)
    if key not in rules:
        return "skip"
    r = rules[key]
    return None if r is None else (r[0], (r[1], r[2], s))


def even_monomial(x, y):
    """Multiply through A_k = A U^k, B_k = U^(k+1), pt = B with UA = -AU."""
    def word(g):
        if g.family == "fund":
            return ""
        if g.family == "pt":
            return "B"
        k = int(g.index)
        return "A" + "U" * k if g.family in ("A", "A'") else "U" * (k + 1)

    w = word(x) + word(y)
    if "B" in w:
        return (1, (LOOP, "pt", 0)) if w == "B" else None
    if w.count("A") > 1:
        return None
    sign = 1
    if "A" in w:
        sign = (-1) ** w.index("A")
        j = w.count("U")
        return sign, ((PATH, "A", j) if j % 2 == 0 else (LOOP, "A'", j))
    j = len(w)
    if j == 0:
        return 1, (LOOP, "fund", 0)
    return 1, ((PATH, "B", j - 1) if (j - 1) % 2 == 0 else (LOOP, "B'", j - 1))


def odd_monomial(x, y):
    """n = 3 mod 4: commutative monomials E^e A^a U^u with E^2 = 1, A^2 = 0."""
    def mono(g):
        k = int(g.index)
        return {"fund": (0, 0, 0), "pt": (0, 1, 0), "E": (1, 0, 0),
                "A'": (0, 1, k), "B'": (0, 0, k + 1),
                "A": (1, 1, k), "B": (1, 0, k + 1)}[g.family]

    (e1, a1, u1), (e2, a2, u2) = mono(x), mono(y)
    e, a, u = (e1 + e2) % 2, a1 + a2, u1 + u2
    if a > 1:
        return None
    space = PATH if e else LOOP
    if a:
        if e:
            return 1, (space, "A", u) if u else (space, "A", 0)
        return 1, (space, "pt", 0) if u == 0 else (space, "A'", u)
    if u == 0:
        return 1, (space, "E", 0) if e else (space, "fund", 0)
    return 1, (space, "B" if e else "B'", u - 1)


def circle_monomial(x, y):
    """n = 1: a^eps t^m, with g, g' carrying a and G, G' not; a^2 = 0."""
    ex = x.family in ("g", "g'")
    ey = y.family in ("g", "g'")
    if ex and ey:
        return None
    k = x.index + y.index
    space = LOOP if x.space == y.space else PATH
    fam = ("g" if ex or ey else "G") + ("'" if space == LOOP else "")
    return 1, (space, fam, k)


def as_key(hit):
    if hit is None:
        return None
    s, g = hit
    return s, (g.space, g.family, g.index)


# ---- table against oracles ----------------------------------------------------

@pytest.mark.parametrize("n", [2, 4, 6])
def test_even_table_matches_rule_list(n):
    t = table(n)
    seen = 0
    for x, y in itertools.product(t.generators(8), repeat=2):
        want = even_rules(x, y)
        if want == "skip":
            continue
        seen += 1
        assert as_key(t.mul_gen(x, y)) == want, (x, y)
    assert seen > 300


@pytest.mark.parametrize("n", [2, 4])
def test_even_table_matches_monomial_model(n):
    t = table(n)
    for x, y in itertools.product(t.generators(8), repeat=2):
        assert as_key(t.mul_gen(x, y)) == even_monomial(x, y), (x, y)


@pytest.mark.parametrize("n", [3, 7, 11])
def test_odd_table_matches_monomial_model(n):
    t = table(n)
    for x, y in itertools.product(t.generators(8), repeat=2):
        assert as_key(t.mul_gen(x, y)) == odd_monomial(x, y), (x, y)


def test_circle_table_matches_laurent_model():
    t = table(1)
    for x, y in itertools.product(t.generators(3), repeat=2):
        assert as_key(t.mul_gen(x, y)) == circle_monomial(x, y), (x, y)


# ---- examples -----------------------------------------------------------------

def test_product_examples():
    t2 = table(2)
    assert t2.product_gen(t2.gen("B", 0), t2.gen("A", 0)) == -t2.elem("A'", 1)
    assert t2.product_gen(t2.gen("fund"), t2.gen("B", 2)) == t2.elem("B", 2)
    assert t2.product_gen(t2.gen("pt"), t2.gen("B", 2)).is_zero()
    t1 = table(1)
    assert t1.product_gen(t1.gen("g", H), t1.gen("G", -H)) == t1.elem("g'", 0)
    t3 = table(3)
    assert t3.product_gen(t3.gen("E"), t3.gen("E")) == GradedElement.of(t3.unit, 1, t3.ring)


def test_odd_relations():
    t = table(3)
    E, B, V = t.gen("E"), t.gen("A", 0), t.gen("B", 0)
    assert t.product_gen(E, B) == t.elem("pt")          # EB = A
    assert t.product_gen(E, V) == t.elem("B'", 0)       # EV = U


def test_bilinear_product():
    t = table(2)
    X = t.elem("A", 0) + t.elem("B", 0, 2)
    Y = t.elem("B", 0)
    assert t.product(X, Y) == t.elem("A'", 1) + t.elem("B'", 1, 2)


def test_regimes():
    assert regime_for(1) is Regime.CIRCLE
    assert regime_for(2) is Regime.EVEN
    assert regime_for(7) is Regime.ODD
    assert table(2).ring is CoefficientRing.QQ
    assert table(3).ring is CoefficientRing.ZZ
    for n in (5, 9, 13):
        with pytest.raises(UnsupportedSphere):
            SphereAlgebraTable(n)
    with pytest.raises(UnsupportedSphere):
        SphereAlgebraTable(2, CoefficientRing.ZZ)


def test_illegal_generators_rejected():
    t = table(2)
    with pytest.raises(IllegalGenerator):
        t.mul_gen(Generator(PATH, "A", 0, 4), t.gen("A", 0))
    with pytest.raises(IllegalGenerator):
        t.gen("A", 1)


def test_monomial_isomorphism():
    t = table(2)
    assert monomial_isomorphism(t, t.gen("B", 4)) == "U^5"
    assert monomial_isomorphism(t, t.gen("A", 0)) == "A"
    assert monomial_isomorphism(t, t.gen("fund")) == "1"
    with pytest.raises(ValueError):
        monomial_isomorphism(table(1), table(1).gen("g", H))


@pytest.mark.parametrize("n,cutoff", [(2, 10), (4, 10), (7, 10), (3, 8), (1, 6)])
def test_presentation_holds(n, cutoff):
    assert verify_presentation(table(n), cutoff) == []


def test_presentation_catches_corruption():
    t = table(2)
    base = t._mul

    def bad(x, y):
        hit = base(x, y)
        if x == t.gen("B", 0) and y == t.gen("A", 0):
            return (1, hit[1])
        return hit

    t._mul = bad
    rep = verify_presentation(t, 4)
    assert rep and any("B[0]*A[0]" in str(f["witness"]) for f in rep)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
def test_associativity_unit_degree(n):
    t = table(n)
    cutoff = 4 if n == 1 else 8
    assert check_associativity(t, cutoff) == []
    assert check_unit(t, cutoff) == []
    assert check_degree_law(t, 12 if n > 1 else 4) == []


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
def test_signed_commutation(n):
    t = table(n)
    assert check_sign_commutation(t, 4 if n == 1 else 8) == []


def test_sign_commutator_examples():
    t2, t1 = table(2), table(1)
    assert antipodal_degree(2) == -1
    assert antipodal_degree(1) == 1
    assert sign_commutator_check(t2, t2.gen("A", 0), t2.gen("B", 0))
    assert sign_commutator_check(t2, t2.gen("B", 0), t2.gen("B", 2))
    assert sign_commutator_check(t1, t1.gen("g", H), t1.gen("G", H))
    with pytest.raises(ValueError):
        sign_commutator_check(t2, t2.gen("fund"), t2.gen("B", 0))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
def test_loop_closure_and_parity(n):
    t = table(n)
    loops = t.generators(4 if n == 1 else 8, LOOP)
    for x, y in itertools.product(loops, repeat=2):
        hit = t.mul_gen(x, y)
        assert hit is None or hit[1].space == LOOP


def test_module_commutation_is_reported():
    even = module_commutation_status(table(2), 6)
    assert even["loop_map"] == "identity"
    assert even["mismatches"] > 0
    assert module_commutation_status(table(3), 6)["mismatches"] == 0
    assert module_commutation_status(table(1), 2)["mismatches"] == 0


def test_table_hash_is_stable():
    assert table(2).table_hash() == table(2).table_hash()
    assert table(2).table_hash() != table(4).table_hash()
