"""Acceptance criteria, each timed against its stated limit.

Every test prints one line ``criterion k: PASS|FAIL ...`` to the terminal.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from sphere_strings.cli import main
from sphere_strings.coalgebra import verify_gh_structure
from sphere_strings.extension import (
    check_adapted, find_degree0_involutions, table_algebra, table_parts,
)
from sphere_strings.geodesics import (
    MetricSpec, ShootingFailure, average_index, density_sum, integrate_geodesic,
    jacobi_fd_check, jacobi_index, shoot_antipodal_batch,
)
from sphere_strings.graded import LOOP, PATH, AbelianGroupSummary, CoefficientRing
from sphere_strings.homology import assemble_homology, odd_double_decomposition
from sphere_strings.resonance import check_cr_subadditivity, resonance_check
from sphere_strings.sphere_algebra import (
    SphereAlgebraTable, check_associativity, check_degree_law, verify_presentation,
)

PI = math.pi


@contextmanager
def criterion(k, limit, capsys):
    state = {"ok": False}
    t0 = time.perf_counter()
    try:
        yield state
    finally:
        dt = time.perf_counter() - t0
        passed = state["ok"] and dt < limit
        with capsys.disabled():
            print(f"\ncriterion {k}: {'PASS' if passed else 'FAIL'} ({dt:.2f} s, limit {limit} s)")
        state["time"] = dt
    assert state["ok"], f"criterion {k} failed"
    assert dt < limit, f"criterion {k} took {dt:.1f} s (limit {limit} s)"


def test_criterion_1_even_presentation(capsys):
    with criterion(1, 5, capsys) as c:
        codes = [main(["algebra", "verify", "--n", str(n), "--cutoff", "10"]) for n in (2, 4)]
        reports = [verify_presentation(SphereAlgebraTable(n), 10) for n in (2, 4)]
        capsys.readouterr()
        c["ok"] = codes == [0, 0] and reports == [[], []]


def test_criterion_2_circle_and_odd(capsys):
    with criterion(2, 5, capsys) as c:
        rels = [verify_presentation(SphereAlgebraTable(n), 8) for n in (1, 3, 7)]
        none_for_circle = find_degree0_involutions(table_algebra(SphereAlgebraTable(1)), 2, 2) == []
        t3 = SphereAlgebraTable(3)
        found = {e.text() for e in find_degree0_involutions(table_algebra(t3), 4, 2)}
        c["ok"] = rels == [[], [], []] and none_for_circle and found == {"E[0]", "-E[0]"}


def test_criterion_3_associativity_adaptedness(capsys):
    with criterion(3, 30, capsys) as c:
        bad = 0
        for n in (1, 2, 3, 4, 7):
            t = SphereAlgebraTable(n)
            a, b, p = table_parts(t)
            bad += len(check_associativity(t, 8)) + len(check_adapted(a, b, p, 8))
        c["ok"] = bad == 0


def closed_form_path(n, i):
    if n % 2:
        return AbelianGroupSummary((i % (n - 1) == 0) + (i >= n and (i - n) % (n - 1) == 0))
    if n == 2:
        if i == 1:
            return AbelianGroupSummary(0, (2,))
        return AbelianGroupSummary(1) if i % 2 == 0 else AbelianGroupSummary(1, (2,))
    q = 2 * n - 2
    r = (i % q == 0) + (i >= 2 * n - 1 and (i - 2 * n + 1) % q == 0)
    return AbelianGroupSummary(r, (2,) if i >= n - 1 and (i - n + 1) % q == 0 else ())


def test_criterion_4_homology(capsys):
    with criterion(4, 1, capsys) as c:
        table_ok = all(assemble_homology(PATH, n, CoefficientRing.ZZ, i) == closed_form_path(n, i)
                       for n in range(2, 8) for i in range(51))
        double_ok = all(odd_double_decomposition(n, 60) == [] for n in (3, 5, 7))
        c["ok"] = table_ok and double_ok


def test_criterion_5_duality(capsys):
    with criterion(5, 5, capsys) as c:
        reps = [verify_gh_structure(n, 8) for n in (2, 4)]
        c["ok"] = all(r.ok for r in reps)


def test_criterion_6_round_spectrum(capsys):
    with criterion(6, 60, capsys) as c:
        m = MetricSpec.round(2)
        rng = np.random.default_rng(7)
        starts = []
        for _ in range(20):
            p = rng.normal(size=3)
            p /= np.linalg.norm(p)
            w = rng.normal(size=3)
            w -= (w @ p) * p
            w /= np.linalg.norm(w)
            starts.append((p, rng.uniform(2, 14) * w))
        out = shoot_antipodal_batch(m, starts)
        converged = [g for g in out if not isinstance(g, ShootingFailure)]
        levels = {}
        close = True
        for g in converged:
            k = round((g.length / PI - 1) / 2)
            close &= abs(g.length - (2 * k + 1) * PI) < 1e-6
            levels.setdefault(k, g)
        indices = {jacobi_index(m, g).index for g in levels.values()}
        c["ok"] = (len(converged) == 20 and close and set(levels) == {0, 1, 2}
                   and indices == {0, 2, 4})


def test_criterion_7_index_scaling(capsys):
    with criterion(7, 120, capsys) as c:
        ok = True
        for n in (2, 4):
            m = MetricSpec.round(n)
            p, u = np.eye(n + 1)[0], np.eye(n + 1)[1]
            for k in range(4):
                g = integrate_geodesic(m, p, (2 * k + 1) * PI * u)
                rep = jacobi_index(m, g)
                ok &= rep.index == 2 * k * (n - 1)
                ok &= rep.kernel_dim == 2 * n - 1 and not rep.kernel_flagged
        c["ok"] = ok


def test_criterion_8_resonance(capsys):
    with criterion(8, 1, capsys) as c:
        ok = True
        for n in (2, 4):
            rep = resonance_check(n, 20)
            ok &= rep.alpha_bar_pi == n - 1 and rep.beta == n and rep.ok
            ok &= math.isclose(rep.alpha_bar, (n - 1) / PI)
        c["ok"] = ok


def test_criterion_9_density(capsys):
    with criterion(9, 120, capsys) as c:
        ok = True
        for n in (2, 4):
            m = MetricSpec.round(n)
            g = integrate_geodesic(m, np.eye(n + 1)[0], PI * np.eye(n + 1)[1])
            a = average_index(m, g, 12)
            ok &= abs(float(a.alpha) - (n - 1)) <= 0.05 * (n - 1)
            ok &= density_sum(m, [a], 0.1).passed
        c["ok"] = ok


def test_criterion_10_properties(capsys):
    with criterion(10, 60, capsys) as c:
        e = np.eye(3)
        cases = [(MetricSpec.round(2), e[0], 2.0 * e[1]),
                 (MetricSpec.ellipsoid((1, 1.1, 0.95)), e[0], np.array([0, 1.5, 1.0])),
                 (MetricSpec.parse("conformal:1;0.2*x1^2", 2), e[0], np.array([0, 1.0, 2.0]))]
        jvfd = all(jacobi_fd_check(m, p, v) < 1e-4 for m, p, v in cases)
        el = True
        for m, p, v in cases:
            g = integrate_geodesic(m, p, v)
            el &= abs(g.length ** 2 - g.energy) <= 1e-10 * g.energy
        degree = all(check_degree_law(SphereAlgebraTable(n), 12) == [] for n in (2, 3, 4, 7))
        sub = all(check_cr_subadditivity(n, 12)["ok"] for n in (2, 4))
        c["ok"] = jvfd and el and degree and sub


@pytest.fixture(autouse=True)
def _no_loop_tag_clash():
    assert LOOP != PATH
    yield
