"""Exact graded linear algebra: coefficient rings, generators and formal sums.

Every homology class in the package is a finite formal sum of tagged
generators.  Generators live either in the free loop space (space ``L``) or
in the antipodal path space (space ``P``).  Degrees are a pure function of
``(family, index, n)``.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping


LOOP = "L"
PATH = "P"

# family tags; ASCII spellings used in text rendering
CIRCLE_FAMILIES = ("g", "G", "g'", "G'")
SPHERE_FAMILIES = ("A", "B", "A'", "B'", "pt", "fund", "E")
POWER_FAMILIES = ("U", "V")
FAMILIES = SPHERE_FAMILIES + CIRCLE_FAMILIES + POWER_FAMILIES

_UNICODE_FAMILY = {"γ": "g", "Γ": "G", "γ'": "g'", "Γ'": "G'", "γ′": "g'", "Γ′": "G'"}


class RingMismatch(ValueError):
    pass


class IllegalGenerator(ValueError):
    pass


class CoefficientRing(enum.Enum):
    ZZ = "Z"
    QQ = "Q"
    GF2 = "GF2"

    @classmethod
    def parse(cls, text: str) -> "CoefficientRing":
        key = text.strip().upper()
        aliases = {"Z": cls.ZZ, "ZZ": cls.ZZ, "Q": cls.QQ, "QQ": cls.QQ,
                   "GF2": cls.GF2, "Z2": cls.GF2, "F2": cls.GF2}
        if key not in aliases:
            raise ValueError(f"unknown coefficient ring {text!r}")
        return aliases[key]

    def coerce(self, c):
        """Bring a Python number into the ring (exactly, or raise)."""
        if isinstance(c, str):
            c = Fraction(c)
        if isinstance(c, bool):
            c = int(c)
        if isinstance(c, float):
            raise TypeError("floating point coefficients are not allowed")
        if self is CoefficientRing.QQ:
            return Fraction(c)
        c = Fraction(c)
        if c.denominator != 1:
            raise ValueError(f"{c} is not an element of {self.value}")
        c = int(c)
        if self is CoefficientRing.GF2:
            return c % 2
        return c

    @property
    def characteristic(self) -> int:
        return 2 if self is CoefficientRing.GF2 else 0


def _as_index(k) -> Fraction:
    k = Fraction(k)
    if k.denominator not in (1, 2):
        raise IllegalGenerator(f"index {k} is neither integral nor half-integral")
    return k


@dataclass(frozen=True, order=True)
class Generator:
    """A basis class ``family[index]`` in space ``L`` or ``P`` for the n-sphere.

    ``U``/``V`` are power families: ``U[k]`` stands for the k-th power of a
    polynomial generator, graded so that ``U[0]`` has the degree n of a unit.
    """

    space: str
    family: str
    index: Fraction
    n: int = field(compare=True)

    def __post_init__(self):
        object.__setattr__(self, "index", _as_index(self.index))
        _validate(self)
        object.__setattr__(self, "_h", hash((self.space, self.family, self.index, self.n)))

    def __hash__(self):
        return self._h

    @property
    def degree(self) -> int:
        return generator_degree(self.family, self.index, self.n)

    def shifted_degree(self) -> int:
        return self.degree - self.n

    def text(self) -> str:
        return f"{self.family}[{_fmt_index(self.index)}]"

    def __repr__(self) -> str:
        return f"{self.space}:{self.text()}"


def _fmt_index(k: Fraction) -> str:
    return str(k.numerator) if k.denominator == 1 else f"{k.numerator}/{k.denominator}"


def _validate(g: Generator) -> None:
    n, fam, k, sp = g.n, g.family, g.index, g.space
    if sp not in (LOOP, PATH):
        raise IllegalGenerator(f"unknown space {sp!r}")
    if fam not in FAMILIES:
        raise IllegalGenerator(f"unknown family {fam!r}")
    if n < 1:
        raise IllegalGenerator("sphere dimension must be positive")
    if fam in POWER_FAMILIES:
        if k.denominator != 1 or k < 0:
            raise IllegalGenerator(f"{fam} powers need a nonnegative integer index")
        return
    if fam in CIRCLE_FAMILIES:
        if n != 1:
            raise IllegalGenerator(f"{fam} only exists for n = 1")
        want = PATH if fam in ("g", "G") else LOOP
        if sp != want:
            raise IllegalGenerator(f"{fam} lives in space {want}")
        if want == PATH and k.denominator != 2:
            raise IllegalGenerator(f"{fam}[{k}] needs a half-integer index")
        if want == LOOP and k.denominator != 1:
            raise IllegalGenerator(f"{fam}[{k}] needs an integer index")
        return
    if n == 1:
        raise IllegalGenerator(f"{fam} does not exist for n = 1")
    if k.denominator != 1 or k < 0:
        raise IllegalGenerator(f"{fam}[{k}] needs a nonnegative integer index")
    k = int(k)
    if fam in ("pt", "fund"):
        if sp != LOOP or k != 0:
            raise IllegalGenerator(f"{fam} is the index-0 loop space class")
        return
    if fam == "E":
        if n % 2 == 0 or sp != PATH or k != 0:
            raise IllegalGenerator("E is the index-0 path space class for odd n")
        return
    if fam in ("A", "B") and sp != PATH or fam in ("A'", "B'") and sp != LOOP:
        raise IllegalGenerator(f"{fam} lives in the other space")
    if n % 2 == 0:
        if fam in ("A", "B") and k % 2 != 0:
            raise IllegalGenerator(f"{fam}[{k}] needs an even index for even n")
        if fam in ("A'", "B'") and k % 2 != 1:
            raise IllegalGenerator(f"{fam}[{k}] needs an odd index for even n")
    elif fam == "A'" and k < 1:
        raise IllegalGenerator("A'[0] is pt for odd n")


def generator_degree(family: str, index, n: int) -> int:
    k = Fraction(index)
    if family in ("g", "g'"):
        return 0
    if family in ("G", "G'"):
        return 1
    if family in ("A", "A'"):
        return int(k) * (n - 1)
    if family in ("B", "B'"):
        return int(k) * (n - 1) + 2 * n - 1
    if family == "pt":
        return 0
    if family in ("fund", "E"):
        return n
    if family in POWER_FAMILIES:
        return int(k) * (n - 1) + n
    raise IllegalGenerator(family)


def gen(family: str, index, n: int, space: str | None = None) -> Generator:
    """Build a generator, inferring its space from the family when possible."""
    fam = _UNICODE_FAMILY.get(family, family.replace("′", "'"))
    if space is None:
        if fam in ("A", "B", "E", "g", "G"):
            space = PATH
        else:
            space = LOOP
    return Generator(space, fam, Fraction(index), n)


class Mixed:
    """Marker returned by degree queries on inhomogeneous elements."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Mixed"


MIXED = Mixed()


def _sort_key(key):
    if isinstance(key, tuple):
        return tuple(_sort_key(k) for k in key)
    return (key.space, key.family, key.index)


class FormalSum:
    """Immutable finite sum of basis keys with nonzero coefficients."""

    __slots__ = ("_terms", "ring", "_hash")

    def __init__(self, terms: Mapping | Iterable = (), ring: CoefficientRing = CoefficientRing.ZZ):
        self.ring = ring
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, c in items:
            c = ring.coerce(c)
            acc[key] = ring.coerce(acc.get(key, 0) + c)
        self._terms = {k: v for k, v in acc.items() if v != 0}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict, ring):
        obj = cls.__new__(cls)
        obj.ring = ring
        obj._terms = terms
        obj._hash = None
        return obj

    def items(self) -> list:
        return sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]))

    def keys(self):
        return [k for k, _ in self.items()]

    def coeff(self, key):
        return self._terms.get(key, self.ring.coerce(0))

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator:
        return iter(self.items())

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _check(self, other):
        if not isinstance(other, FormalSum) or type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.ring is not self.ring:
            raise RingMismatch(f"{self.ring.value} vs {other.ring.value}")

    def combine(self, other, cx=1, cy=1):
        self._check(other)
        r = self.ring
        cx, cy = r.coerce(cx), r.coerce(cy)
        acc = {}
        for k, v in self._terms.items():
            acc[k] = v * cx
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0) + v * cy
        out = {}
        for k, v in acc.items():
            v = r.coerce(v)
            if v != 0:
                out[k] = v
        return type(self)._raw(out, r)

    def __add__(self, other):
        return self.combine(other, 1, 1)

    def __sub__(self, other):
        return self.combine(other, 1, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = self.ring.coerce(c)
        out = {}
        for k, v in self._terms.items():
            v = self.ring.coerce(v * c)
            if v != 0:
                out[k] = v
        return type(self)._raw(out, self.ring)

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self._terms
        if type(other) is not type(self):
            return NotImplemented
        return self.ring is other.ring and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._terms.items())))
        return self._hash

    def map_keys(self, f: Callable, cls=None):
        """Apply a key map that returns (new_key, sign) or None (dropped)."""
        cls = cls or type(self)
        acc = []
        for k, v in self._terms.items():
            hit = f(k)
            if hit is None:
                continue
            nk, s = hit
            acc.append((nk, v * s))
        return cls(acc, self.ring)

    def reduce(self, ring: CoefficientRing):
        """Coefficient change, e.g. ZZ -> GF2 or ZZ -> QQ."""
        return type(self)(((k, v) for k, v in self._terms.items()), ring)


class GradedElement(FormalSum):
    """Formal sum of generators over a coefficient ring."""

    __slots__ = ()

    @classmethod
    def of(cls, g: Generator, c=1, ring: CoefficientRing = CoefficientRing.ZZ):
        return cls([(g, c)], ring)

    @classmethod
    def zero(cls, ring: CoefficientRing = CoefficientRing.ZZ):
        return cls._raw({}, ring)

    def degree(self):
        degs = {g.degree for g in self._terms}
        if len(degs) == 1:
            return degs.pop()
        return MIXED

    def text(self) -> str:
        return render_sum(self.items(), lambda g: g.text())

    def to_json(self) -> dict:
        return {"terms": [
            {"space": g.space, "family": g.family, "index": _json_index(g.index),
             "coeff": str(c)} for g, c in self.items()]}

    def __repr__(self):
        return f"GradedElement({self.text()})"


def _json_index(k: Fraction):
    return int(k) if k.denominator == 1 else str(k)


def render_sum(items, name: Callable) -> str:
    if not items:
        return "0"
    parts = []
    for key, c in items:
        neg = c < 0
        mag = -c if neg else c
        body = name(key) if mag == 1 else f"{mag}*{name(key)}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


def combine(x: GradedElement, y: GradedElement, cx, cy) -> GradedElement:
    """Return ``cx*x + cy*y`` with zero terms pruned."""
    return x.combine(y, cx, cy)


def degree(x: GradedElement):
    return x.degree()


def bilinear(mul: Callable[[Generator, Generator], GradedElement],
             x: FormalSum, y: FormalSum, ring: CoefficientRing | None = None,
             cls=GradedElement) -> FormalSum:
    """Extend a product on basis keys bilinearly."""
    ring = ring or x.ring
    if x.ring is not y.ring:
        raise RingMismatch(f"{x.ring.value} vs {y.ring.value}")
    acc: dict = {}
    for gx, cx in x.items():
        for gy, cy in y.items():
            prod = mul(gx, gy)
            for g, c in prod.items():
                acc[g] = acc.get(g, 0) + cx * cy * c
    return cls(acc, ring)


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coeff>\d+(?:/\d+)?)\s*\*\s*)?
        (?P<fam>[A-Za-zγΓ]+['′]?)\s*\[\s*(?P<idx>-?\d+(?:/\d+)?)\s*\]\s*""",
    re.VERBOSE)


def parse_element(text: str, n: int, ring: CoefficientRing) -> GradedElement:
    """Parse canonical text such as ``2*A[0] - B'[5]``; ``0`` is the empty sum."""
    s = text.strip()
    if s == "0":
        return GradedElement.zero(ring)
    pos, terms = 0, []
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        if terms and not m.group("sign"):
            raise ValueError(f"missing operator in {text!r}")
        c = Fraction(m.group("coeff") or 1)
        if m.group("sign") == "-":
            c = -c
        terms.append((gen(m.group("fam"), Fraction(m.group("idx")), n), c))
        pos = m.end()
    if not terms:
        raise ValueError(f"empty element {text!r}")
    return GradedElement(terms, ring)


def element_from_json(data: dict | str, n: int, ring: CoefficientRing) -> GradedElement:
    if isinstance(data, str):
        data = json.loads(data)
    terms = []
    for t in data["terms"]:
        g = Generator(t["space"], t["family"], Fraction(str(t["index"])), n)
        terms.append((g, Fraction(t["coeff"])))
    return GradedElement(terms, ring)


@dataclass(frozen=True)
class AbelianGroupSummary:
    """Finitely generated abelian group: free rank plus prime-power torsion."""

    free_rank: int
    torsion: tuple = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative rank")
        if any(t < 2 for t in self.torsion):
            raise ValueError("torsion orders must be at least 2")
        object.__setattr__(self, "torsion", tuple(sorted(self.torsion)))

    def __add__(self, other: "AbelianGroupSummary") -> "AbelianGroupSummary":
        return AbelianGroupSummary(self.free_rank + other.free_rank, self.torsion + other.torsion)

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def text(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


ZERO_GROUP = AbelianGroupSummary(0)
