"""Copairing, comodule maps and the dual cohomology product for even spheres.

Homology classes are the even-sphere generators of :mod:`sphere_algebra`.
Cohomology classes ``a[i]`` / ``b[i]`` are dual to ``A_i`` / ``B_i`` for even
``i`` (path space) and to ``A'_i`` / ``B'_i`` for odd ``i`` (loop space rel
constant loops).  The product of two cohomology classes is defined by
dualizing the coproduct that lands in the matching tensor product:

    P x P  <- copairing          (loop space class)
    L x P  <- left comodule      (path space class)
    P x L  <- right comodule     (path space class)
    L x L  <- loop coproduct     (loop space class)

Kronecker convention: <phi (x) psi, x (x) y> = (-1)^(|psi||x|) <phi,x><psi,y>.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .graded import (
    LOOP, PATH, CoefficientRing, FormalSum, Generator, GradedElement, render_sum,
)

QQ = CoefficientRing.QQ

COPAIRING_NOTE = (
    "copairing sums are taken over l = 0..m (A_{2l} x A_{2(m-l)}); the bounds "
    "l = 1..m would miss the degree |X| + 1 - n by 2(n-1)")


class UnsupportedGenerator(ValueError):
    pass


class TensorElement(FormalSum):
    """Formal sum of ordered pairs of generators."""

    __slots__ = ()

    def __init__(self, terms=(), ring: CoefficientRing = QQ):
        super().__init__(terms, ring)

    @classmethod
    def zero(cls, ring=QQ):
        return cls._raw({}, ring)

    def bidegrees(self) -> set:
        return {(x.degree, y.degree) for x, y in self._terms}

    def total_degree(self):
        degs = {x.degree + y.degree for x, y in self._terms}
        return degs.pop() if len(degs) == 1 else None

    def text(self) -> str:
        return render_sum(self.items(), lambda k: f"{k[0].text()} x {k[1].text()}")

    def to_json(self) -> dict:
        return {"terms": [{"left": repr(x), "right": repr(y), "coeff": str(c)}
                          for (x, y), c in self.items()]}

    def __repr__(self):
        return f"TensorElement({self.text()})"


def _need_even(n: int):
    if n < 2 or n % 2:
        raise UnsupportedGenerator("the coproduct tables are for even spheres")


@functools.lru_cache(maxsize=None)
def _G(space, fam, k, n):
    return Generator(space, fam, Fraction(k), n)


def _A(k, n):
    return _G(PATH, "A", k, n)


def _B(k, n):
    return _G(PATH, "B", k, n)


def _Ap(k, n):
    return _G(LOOP, "A'", k, n)


def _Bp(k, n):
    return _G(LOOP, "B'", k, n)


def _tensor(terms) -> TensorElement:
    return TensorElement([((x, y), c) for c, x, y in terms], QQ)


@functools.lru_cache(maxsize=None)
def copairing_gen(g: Generator) -> TensorElement:
    n = g.n
    _need_even(n)
    if g.family not in ("A'", "B'"):
        raise UnsupportedGenerator(f"the copairing is defined on A'/B' classes, not {g!r}")
    m = (int(g.index) - 1) // 2
    terms = []
    for l in range(m + 1):
        i, j = 2 * l, 2 * (m - l)
        if g.family == "A'":
            terms.append((1, _A(i, n), _A(j, n)))
        else:
            terms.append((1, _A(i, n), _B(j, n)))
            terms.append((1, _B(i, n), _A(j, n)))
    return _tensor(terms)


@functools.lru_cache(maxsize=None)
def comodule_left_gen(g: Generator) -> TensorElement:
    n = g.n
    _need_even(n)
    if g.family not in ("A", "B"):
        raise UnsupportedGenerator(f"the comodule maps act on A/B classes, not {g!r}")
    m = int(g.index) // 2
    terms = []
    for i in range(1, m + 1):
        k = 2 * m - (2 * i - 1)
        if g.family == "A":
            terms.append((1, _Ap(k, n), _A(2 * i - 2, n)))
        else:
            terms.append((-1, _Bp(k, n), _A(2 * i - 2, n)))
            terms.append((1, _Ap(k, n), _B(2 * i - 2, n)))
    return _tensor(terms)


@functools.lru_cache(maxsize=None)
def comodule_right_gen(g: Generator) -> TensorElement:
    n = g.n
    _need_even(n)
    if g.family not in ("A", "B"):
        raise UnsupportedGenerator(f"the comodule maps act on A/B classes, not {g!r}")
    m = int(g.index) // 2
    terms = []
    for i in range(1, m + 1):
        k = 2 * m - (2 * i - 1)
        if g.family == "A":
            terms.append((-1, _A(2 * i - 2, n), _Ap(k, n)))
        else:
            terms.append((-1, _A(2 * i - 2, n), _Bp(k, n)))
            terms.append((-1, _B(2 * i - 2, n), _Ap(k, n)))
    return _tensor(terms)


@functools.lru_cache(maxsize=None)
def loop_coproduct_gen(g: Generator) -> TensorElement:
    """Coproduct on H(LS^n, S^n) for even n, in the conventional + signs.

    Dual to the rational product of even spheres where the classes dual to
    A'_i, B'_i multiply like S^(i+1), W S^(i+1) with W^2 = 0.
    """
    n = g.n
    _need_even(n)
    if g.family not in ("A'", "B'"):
        raise UnsupportedGenerator(f"the loop coproduct is defined on A'/B' classes, not {g!r}")
    k = int(g.index)
    terms = []
    for i in range(1, k - 1, 2):
        j = k - 1 - i
        if g.family == "A'":
            terms.append((1, _Ap(i, n), _Ap(j, n)))
        else:
            terms.append((1, _Ap(i, n), _Bp(j, n)))
            terms.append((1, _Bp(i, n), _Ap(j, n)))
    return _tensor(terms)


def _linear(fn: Callable[[Generator], TensorElement], X: GradedElement) -> TensorElement:
    out = TensorElement.zero(QQ)
    for g, c in X.items():
        out = out + fn(g).scale(c)
    return out


def _as_elem(X) -> GradedElement:
    if isinstance(X, Generator):
        return GradedElement.of(X, 1, QQ)
    if X.ring is not QQ:
        X = X.reduce(QQ)
    return X


def copairing(n: int, X) -> TensorElement:
    _need_even(n)
    return _linear(copairing_gen, _as_elem(X))


def comodule_left(n: int, X) -> TensorElement:
    _need_even(n)
    return _linear(comodule_left_gen, _as_elem(X))


def comodule_right(n: int, X) -> TensorElement:
    _need_even(n)
    return _linear(comodule_right_gen, _as_elem(X))


def loop_coproduct(n: int, X) -> TensorElement:
    _need_even(n)
    return _linear(loop_coproduct_gen, _as_elem(X))


# ---- cohomology --------------------------------------------------------

@dataclass(frozen=True, order=True)
class CohomologyGenerator:
    family: str          # "a" or "b"
    index: int
    n: int

    def __post_init__(self):
        if self.family not in ("a", "b") or self.index < 0:
            raise UnsupportedGenerator(f"bad cohomology class {self.family}[{self.index}]")

    @property
    def space(self) -> str:
        return PATH if self.index % 2 == 0 else LOOP

    def dual(self) -> Generator:
        fam = "A" if self.family == "a" else "B"
        if self.space == LOOP:
            fam += "'"
        return Generator(self.space, fam, Fraction(self.index), self.n)

    @property
    def degree(self) -> int:
        return self.dual().degree

    def text(self) -> str:
        return f"{self.family}[{self.index}]"

    def __repr__(self):
        return self.text()


def cohomology_of(g: Generator) -> CohomologyGenerator:
    fam = "a" if g.family in ("A", "A'") else "b"
    return CohomologyGenerator(fam, int(g.index), g.n)


def kronecker(phi: CohomologyGenerator, psi: CohomologyGenerator, t: TensorElement) -> Fraction:
    """<phi (x) psi, t> with the Koszul sign (-1)^(|psi||x|)."""
    total = Fraction(0)
    for (x, y), c in t.items():
        if x == phi.dual() and y == psi.dual():
            total += c * (-1) ** ((psi.degree * x.degree) % 2)
    return total


@dataclass
class CoproductTables:
    """The four coproducts used to dualize; replaceable for fault injection."""

    copairing: Callable[[Generator], TensorElement] = copairing_gen
    comodule_left: Callable[[Generator], TensorElement] = comodule_left_gen
    comodule_right: Callable[[Generator], TensorElement] = comodule_right_gen
    loop_coproduct: Callable[[Generator], TensorElement] = loop_coproduct_gen

    def for_spaces(self, s1: str, s2: str):
        return {(PATH, PATH): self.copairing, (LOOP, PATH): self.comodule_left,
                (PATH, LOOP): self.comodule_right, (LOOP, LOOP): self.loop_coproduct}[s1, s2]


DEFAULT_TABLES = CoproductTables()

Signed = Optional[tuple]   # (sign, CohomologyGenerator) or None


def homology_basis(n: int, max_index: int) -> list[Generator]:
    out = []
    for k in range(max_index + 1):
        if k % 2 == 0:
            out += [_A(k, n), _B(k, n)]
        else:
            out += [_Ap(k, n), _Bp(k, n)]
    return out


def dual_expansion(n: int, phi: CohomologyGenerator, psi: CohomologyGenerator,
                   tables: CoproductTables = DEFAULT_TABLES) -> dict:
    """All nonzero <phi (x) psi, cop(X)> over X in the codomain space."""
    _need_even(n)
    cop = tables.for_spaces(phi.space, psi.space)
    target_space = LOOP if phi.space == psi.space else PATH
    top = phi.index + psi.index + 3
    out = {}
    for X in homology_basis(n, top):
        if X.space != target_space:
            continue
        v = kronecker(phi, psi, cop(X))
        if v != 0:
            out[X] = v
    return out


def dual_product(n: int, phi: CohomologyGenerator, psi: CohomologyGenerator,
                 tables: CoproductTables = DEFAULT_TABLES) -> Signed:
    """phi o psi as (sign, class) or None, by dualizing the coproduct tables."""
    hits = dual_expansion(n, phi, psi, tables)
    if not hits:
        return None
    if len(hits) > 1 or any(abs(v) != 1 for v in hits.values()):
        raise ValueError(f"{phi.text()} o {psi.text()} is not a signed basis class: {hits}")
    (X, v), = hits.items()
    return int(v), cohomology_of(X)


def render_signed(s: Signed) -> str:
    if s is None:
        return "0"
    return ("-" if s[0] < 0 else "") + s[1].text()


def cohomology_basis(n: int, cutoff: int) -> list[CohomologyGenerator]:
    return [CohomologyGenerator(f, i, n) for i in range(cutoff + 1) for f in ("a", "b")]


# layout of the extended product table: (label, degree = p*n + q, row)
TABLE2_PATTERN = [
    ("S", 0, 0, PATH), ("S^2", 1, -1, LOOP), ("S^3", 2, -2, PATH), ("WS", 2, -1, PATH),
    ("S^4", 3, -3, LOOP), ("WS^2", 3, -2, LOOP), ("S^5", 4, -4, PATH), ("WS^3", 4, -3, PATH),
]


def _mul_signed(n, a: Signed, b: Signed, tables) -> Signed:
    if a is None or b is None:
        return None
    r = dual_product(n, a[1], b[1], tables)
    return None if r is None else (r[0] * a[0] * b[0], r[1])


@dataclass
class GHReport:
    failures: list = field(default_factory=list)
    associativity: list = field(default_factory=list)
    products: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_gh_structure(n: int, cutoff: int = 8,
                        tables: CoproductTables = DEFAULT_TABLES) -> GHReport:
    """Check the dual product: generation by a[0], b[0], W-pattern, degrees, duality."""
    _need_even(n)
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    rep = GHReport()
    fail = rep.failures.append
    basis = cohomology_basis(n, cutoff)
    a = lambda i: CohomologyGenerator("a", i, n)     # noqa: E731
    b = lambda i: CohomologyGenerator("b", i, n)     # noqa: E731

    for phi, psi in itertools.product(basis, repeat=2):
        try:
            rep.products[phi, psi] = dual_product(n, phi, psi, tables)
        except ValueError as exc:
            fail({"check": "signed-class", "witness": [phi.text(), psi.text()], "detail": str(exc)})
            rep.products[phi, psi] = None

    # degree law and the expected shape of every product
    for (phi, psi), r in rep.products.items():
        want_fam = None if phi.family == psi.family == "b" else (
            "a" if phi.family == psi.family == "a" else "b")
        got = None if r is None else r[1]
        if want_fam is None:
            if got is not None:
                fail({"check": "W^2 = 0", "witness": [phi.text(), psi.text()], "got": render_signed(r)})
            continue
        want = CohomologyGenerator(want_fam, phi.index + psi.index + 1, n)
        if got != want:
            fail({"check": "shape", "witness": [phi.text(), psi.text()],
                  "got": render_signed(r), "want": "+-" + want.text()})
        elif got.degree != phi.degree + psi.degree + n - 1:
            fail({"check": "degree", "witness": [phi.text(), psi.text()]})

    # generation: powers of a[0] give every a[i]; b[0] times them gives every b[i]
    power = (1, a(0))
    for i in range(cutoff + 1):
        if power is None or power[1] != a(i):
            fail({"check": "a[0]-power", "witness": f"a[0]^{i + 1}", "got": render_signed(power),
                  "want": "+-" + a(i).text()})
            break
        for side, val in (("right", _mul_signed(n, (1, b(0)), power, tables)),
                          ("left", _mul_signed(n, power, (1, b(0)), tables))):
            if i >= 1 and i + 1 <= cutoff and (val is None or val[1] != b(i + 1)):
                fail({"check": f"W-pattern-{side}", "witness": f"b[0] o a[0]^{i + 1}",
                      "got": render_signed(val), "want": "+-" + b(i + 1).text()})
        if i < cutoff:
            power = _mul_signed(n, power, (1, a(0)), tables)
    for i in range(1, cutoff + 1):
        val = _mul_signed(n, (1, b(0)), (1, a(i - 1)), tables)
        if val is None or val[1] != b(i):
            fail({"check": "W-pattern", "witness": f"b[0] o a[{i - 1}]", "got": render_signed(val)})

    # placement in the table layout
    for label, p, q, row in TABLE2_PATTERN:
        s_pow = int(label.split("^")[1]) if "^" in label else 1
        c = (b if label.startswith("W") else a)(s_pow - 1)
        if c.index > cutoff:
            continue
        if c.degree != p * n + q or c.space != row:
            fail({"check": "table-placement", "witness": label, "got": [c.degree, c.space],
                  "want": [p * n + q, row]})
    for i in range(cutoff + 1):
        for c, deg in ((a(i), i * (n - 1)), (b(i), i * (n - 1) + 2 * n - 1)):
            if c.degree != deg or c.space != (PATH if i % 2 == 0 else LOOP):
                fail({"check": "degree-pattern", "witness": c.text()})

    # index-shift homogeneity: the sign of phi_i o psi_j has period 2 in i and j
    for (phi, psi), r in rep.products.items():
        if r is None:
            continue
        for dphi, dpsi in ((2, 0), (0, 2)):
            if phi.index < dphi or psi.index < dpsi:
                continue
            prev = rep.products.get((CohomologyGenerator(phi.family, phi.index - dphi, n),
                                     CohomologyGenerator(psi.family, psi.index - dpsi, n)))
            if prev is not None and prev[0] != r[0]:
                fail({"check": "sign-periodicity", "witness": [phi.text(), psi.text()],
                      "got": render_signed(r), "shifted": render_signed(prev)})

    # duality: <phi o psi, X> from the product table equals <phi (x) psi, cop X> for every X
    for (phi, psi), r in rep.products.items():
        cop = tables.for_spaces(phi.space, psi.space)
        for X in homology_basis(n, 2 * cutoff + 2):
            try:
                direct = kronecker(phi, psi, cop(X))
            except UnsupportedGenerator:
                direct = Fraction(0)
            from_table = Fraction(0) if r is None or r[1].dual() != X else Fraction(r[0])
            if direct != from_table:
                fail({"check": "duality", "witness": [phi.text(), psi.text(), repr(X)],
                      "direct": str(direct), "table": str(from_table)})

    rep.associativity = associativity_status(n, cutoff, tables, rep.products)
    return rep


def associativity_status(n: int, cutoff: int, tables: CoproductTables = DEFAULT_TABLES,
                         products: dict | None = None) -> list[dict]:
    """Triples where (xy)z and x(yz) differ; reported, never asserted.

    Each entry says whether the discrepancy is a sign only.
    """
    basis = cohomology_basis(n, cutoff)
    products = products or {}

    def mul(x: Signed, y: Signed) -> Signed:
        if x is None or y is None:
            return None
        key = (x[1], y[1])
        r = products[key] if key in products else dual_product(n, x[1], y[1], tables)
        return None if r is None else (r[0] * x[0] * y[0], r[1])

    out = []
    for x, y, z in itertools.product(basis, repeat=3):
        if x.index + y.index + z.index + 2 > cutoff:
            continue
        lhs = mul(mul((1, x), (1, y)), (1, z))
        rhs = mul((1, x), mul((1, y), (1, z)))
        if lhs != rhs:
            sign_only = lhs is not None and rhs is not None and lhs[1] == rhs[1]
            out.append({"witness": [x.text(), y.text(), z.text()], "lhs": render_signed(lhs),
                        "rhs": render_signed(rhs), "sign_only": sign_only})
    return out
