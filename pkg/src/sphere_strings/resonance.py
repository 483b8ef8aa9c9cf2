"""Critical values for the round metric and the resonance strip.

Critical values are kept as exact rational multiples of pi, so every
comparison here is exact.  A value ``Fraction(3)`` means 3 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .coalgebra import CohomologyGenerator, dual_product
from .graded import LOOP, PATH, Generator, IllegalGenerator, gen
from .sphere_algebra import SphereAlgebraTable


def _int(g: Generator) -> int:
    return int(g.index)


def cr_pi(g: Generator) -> Fraction:
    """Round-metric critical value of a generator, in units of pi."""
    n = g.n
    if n < 2:
        raise ValueError("critical values are tabulated for n >= 2")
    if g.family in ("pt", "fund"):
        return Fraction(0)
    k = _int(g)
    if n % 2 == 0:
        # even spheres: cr(A_l) = cr(B_l) = (l+1) pi and the same for primes
        return Fraction(k + 1)
    # odd spheres: read off the stratum whose shifted homology holds the class
    if g.family == "E":
        return Fraction(1)
    if g.space == PATH:
        if g.family == "A":
            return Fraction(k + 1 if k % 2 == 0 else k)
        return Fraction(k + 1 if k % 2 == 0 else k + 2)
    if g.family == "A'":
        return Fraction(k + 1 if k % 2 else k)
    return Fraction(k + 2 if k % 2 == 0 else k + 1)


def critical_value_table(n: int, cutoff: int = 12) -> dict:
    """Generator -> cr / pi for every generator with index <= cutoff."""
    return {g: cr_pi(g) for g in sphere_generators(n, cutoff)}


def sphere_generators(n: int, cutoff: int) -> list[Generator]:
    """Generators of the extended ring for n >= 2, without needing products."""
    out = [gen("pt", 0, n), gen("fund", 0, n)]
    if n % 2:
        out.append(gen("E", 0, n))
    for k in range(cutoff + 1):
        for fam in ("A", "B", "A'", "B'"):
            try:
                out.append(gen(fam, k, n))
            except IllegalGenerator:
                pass
    return sorted(out)


def _pi(x: Fraction) -> str:
    if x == 0:
        return "0"
    return "pi" if x == 1 else f"{x}pi"


def check_cr_subadditivity(n: int, cutoff: int = 12) -> dict:
    """cr(XY) <= cr(X) + cr(Y) over all generator pairs of the product table."""
    t = SphereAlgebraTable(n)
    gens = t.generators(cutoff)
    violations, equal, strict, zero = [], 0, 0, 0
    for x in gens:
        for y in gens:
            prod = t.product_gen(x, y)
            if prod.is_zero():
                zero += 1
                continue
            bound = cr_pi(x) + cr_pi(y)
            for z, _ in prod.items():
                c = cr_pi(z)
                if c > bound:
                    violations.append({"x": x.text(), "y": y.text(), "product": z.text(),
                                       "cr": _pi(c), "bound": _pi(bound)})
                elif c == bound:
                    equal += 1
                else:
                    strict += 1
    return {"n": n, "cutoff": cutoff, "violations": violations, "equalities": equal,
            "strict": strict, "zero_products": zero, "ok": not violations}


def check_cr_superadditivity(n: int, cutoff: int = 8) -> dict:
    """cr(phi o psi) >= cr(phi) + cr(psi) for the dual product, cr via dual classes."""
    if n % 2:
        raise ValueError("the dual product is tabulated for even n")
    basis = [CohomologyGenerator(f, i, n) for i in range(cutoff + 1) for f in ("a", "b")]
    bad, checked = [], 0
    for phi in basis:
        for psi in basis:
            if phi.index + psi.index + 1 > cutoff:
                continue
            r = dual_product(n, phi, psi)
            if r is None:
                continue
            checked += 1
            c = cr_pi(r[1].dual())
            b = cr_pi(phi.dual()) + cr_pi(psi.dual())
            if c < b:
                bad.append({"phi": phi.text(), "psi": psi.text(), "cr": _pi(c), "bound": _pi(b)})
    return {"n": n, "cutoff": cutoff, "checked": checked, "violations": bad, "ok": not bad}


def check_monotone_chain(n: int, cutoff: int = 12) -> bool:
    """cr(A_0) < cr(A'_1) < cr(A_2) < ... for even n."""
    chain = [gen("A" if k % 2 == 0 else "A'", k, n) for k in range(cutoff + 1)]
    vals = [cr_pi(g) for g in chain]
    return all(a < b for a, b in zip(vals, vals[1:]))


def mean_period(n: int, terms: int = 8) -> Fraction:
    """mu / pi, with mu = lim cr(w^m) / m.

    Even n: w = a[0] o a[0], the loop-space square of the degree n-1 class,
    so w^m is a power of a[0] of length 2m.  Odd n: the loop class in the
    m-th closed geodesic stratum, A'[2m-1].  The sequences are constant, so
    the limit is read off exactly and the constancy is asserted.
    """
    if n % 2 == 0:
        a0 = CohomologyGenerator("a", 0, n)
        powers = [a0]                     # powers[j] = a[0]^(j+1) up to sign
        while len(powers) < 2 * terms:
            r = dual_product(n, powers[-1], a0)
            if r is None:
                raise ArithmeticError("power of a[0] vanished")
            powers.append(r[1])
        vals = [cr_pi(powers[2 * m - 1].dual()) / m for m in range(1, terms + 1)]
    else:
        vals = [cr_pi(gen("A'", 2 * m - 1, n)) / m for m in range(1, terms + 1)]
    if len(set(vals)) != 1:
        raise ArithmeticError(f"cr(w^m)/m is not constant: {vals}")
    return vals[0]


@dataclass
class ResonanceReport:
    n: int
    cutoff: int
    mu_pi: Fraction               # mu / pi
    alpha_bar_pi: Fraction        # alpha_bar * pi
    beta: Fraction
    records: list
    loop_beta: Fraction
    bound: Fraction               # strip half-width allowed for every generator
    ok: bool

    @property
    def alpha_bar(self) -> float:
        return float(self.alpha_bar_pi) / math.pi

    def to_dict(self) -> dict:
        return {"n": self.n, "cutoff": self.cutoff, "mu": f"{_pi(self.mu_pi)}",
                "alpha_bar": f"{self.alpha_bar_pi}/pi", "alpha_bar_value": self.alpha_bar,
                "beta": str(self.beta), "loop_beta": str(self.loop_beta),
                "bound": str(self.bound), "ok": self.ok, "records": self.records}


def resonance_check(n: int, cutoff: int = 20) -> ResonanceReport:
    """Scan |deg X - alpha_bar cr(X)| over generators with index <= cutoff.

    alpha_bar = 2(n-1)/mu.  With cr = c pi and alpha_bar = a/pi, the deviation
    deg - a c is an exact rational.  Even n: the bound is the minimal beta.
    Odd n: the loop classes fix beta_L and path classes are allowed the extra
    shift alpha_bar * pi coming from X -> E X (cr moves by at most pi).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    mu = mean_period(n)
    abar = Fraction(2 * (n - 1)) / mu
    recs = []
    for g in sphere_generators(n, cutoff):
        c = cr_pi(g)
        dev = g.degree - abar * c
        recs.append({"generator": g.text(), "space": g.space, "degree": g.degree,
                     "cr": _pi(c), "cr_over_pi": str(c), "deviation": str(dev),
                     "deviation_value": float(dev)})
    devs = {r["generator"]: Fraction(r["deviation"]) for r in recs}
    beta = max(abs(d) for d in devs.values())
    loop_beta = max(abs(devs[r["generator"]]) for r in recs if r["space"] == LOOP)
    bound = beta if n % 2 == 0 else loop_beta + abar
    for r in recs:
        r["inside"] = abs(devs[r["generator"]]) <= bound
    return ResonanceReport(n, cutoff, mu, abar, beta, recs, loop_beta, bound,
                           all(r["inside"] for r in recs))
