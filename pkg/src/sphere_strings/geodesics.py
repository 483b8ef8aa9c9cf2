"""Numerical geodesics on S^n for Z2-invariant metrics.

Everything runs in ambient coordinates x in R^(n+1) with |x| = 1.  Metrics
are diagonal, g_x(v, v) = sum d_i(x) v_i^2:

* round:      d = 1
* ellipsoid:  d = a^2 (pull-back of the ellipsoid sum (y_i/a_i)^2 = 1)
* conformal:  d = lambda(x), lambda an even polynomial

The integrator is classical RK4 on the constrained Euler-Lagrange system,
followed by projection back to the sphere and a metric-orthogonal velocity
correction.  All arithmetic is analytic (no abs or conjugation), so the same
code runs on complex states and a complex step through the flow gives exact
tangent maps.  That is how Jacobi fields and endpoint derivatives are computed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq, minimize_scalar

STEPS_PER_PI = 2000
DRIFT_TOL = 1e-6
SIGMA_ZERO = 1e-7
SIGMA_AMBIGUOUS = 1e-5
CSTEP = 1e-30


class IntegrationFailure(RuntimeError):
    def __init__(self, step: int, drift: float):
        super().__init__(f"constraint drift {drift:.3e} at step {step}")
        self.step = step
        self.drift = drift


class ShootingFailure(RuntimeError):
    def __init__(self, message: str, residual: float, record=None):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual
        self.record = record


# ---- metrics -------------------------------------------------------------

@dataclass(frozen=True)
class MetricSpec:
    variant: str                        # "round", "ellipsoid" or "conformal"
    n: int
    axes: tuple = ()                    # ellipsoid semi-axes, length n+1
    terms: tuple = ()                   # conformal: ((coef, exponents), ...)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.variant == "round":
            return
        if self.variant == "ellipsoid":
            if len(self.axes) != self.n + 1 or min(self.axes) <= 0:
                raise ValueError(f"ellipsoid needs {self.n + 1} positive semi-axes")
            object.__setattr__(self, "_d2", np.asarray(self.axes, float) ** 2)
            return
        if self.variant == "conformal":
            if not self.terms:
                raise ValueError("conformal factor needs at least one term")
            for _, e in self.terms:
                if len(e) != self.n + 1 or min(e) < 0:
                    raise ValueError(f"bad exponent vector {e}")
            self._check_even()
            return
        raise ValueError(f"unknown metric variant {self.variant!r}")

    @classmethod
    def round(cls, n: int) -> "MetricSpec":
        return cls("round", n)

    @classmethod
    def ellipsoid(cls, axes) -> "MetricSpec":
        axes = tuple(float(a) for a in axes)
        return cls("ellipsoid", len(axes) - 1, axes)

    @classmethod
    def conformal(cls, n: int, terms) -> "MetricSpec":
        return cls("conformal", n, (), tuple((float(c), tuple(int(k) for k in e)) for c, e in terms))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "MetricSpec":
        """Parse ``round``, ``ellipsoid:1,1,1.1`` or ``conformal:1;0.2*x0^2``."""
        head, _, rest = text.strip().partition(":")
        head = head.strip().lower()
        if head == "round":
            if n is None:
                raise ValueError("round metric needs n")
            return cls.round(n)
        if head == "ellipsoid":
            m = cls.ellipsoid([float(a) for a in rest.split(",")])
            if n is not None and m.n != n:
                raise ValueError(f"ellipsoid has {m.n + 1} axes but n = {n}")
            return m
        if head == "conformal":
            if n is None:
                raise ValueError("conformal metric needs n")
            return cls.conformal(n, [_parse_monomial(t, n) for t in rest.split(";") if t.strip()])
        raise ValueError(f"unknown metric {text!r}")

    def text(self) -> str:
        if self.variant == "round":
            return "round"
        if self.variant == "ellipsoid":
            return "ellipsoid:" + ",".join(f"{a:g}" for a in self.axes)
        return "conformal:" + ";".join(_monomial_text(c, e) for c, e in self.terms)

    def _check_even(self, samples: int = 64):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(samples, self.n + 1))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        lp, lm = self.factor(x), self.factor(-x)
        if not np.allclose(lp, lm, rtol=1e-12, atol=1e-12):
            raise ValueError("conformal factor is not even: lambda(-p) != lambda(p)")
        if np.min(lp) <= 0:
            raise ValueError("conformal factor must be positive on the sphere")

    # conformal factor and its gradient, batched over rows
    def factor(self, x):
        out = 0
        for c, e in self.terms:
            t = c
            for i, k in enumerate(e):
                if k:
                    t = t * x[..., i] ** k
            out = out + t * np.ones(x.shape[:-1])
        return out

    def factor_grad(self, x):
        g = np.zeros_like(x)
        for c, e in self.terms:
            for i, k in enumerate(e):
                if not k:
                    continue
                t = c * k * x[..., i] ** (k - 1)
                for j, kj in enumerate(e):
                    if j != i and kj:
                        t = t * x[..., j] ** kj
                g[..., i] = g[..., i] + t
        return g

    def diag(self, x):
        if self.variant == "round":
            return np.ones_like(x)
        if self.variant == "ellipsoid":
            return np.broadcast_to(self._d2, x.shape)
        return self.factor(x)[..., None] * np.ones_like(x)

    def norm2(self, x, v):
        return (self.diag(x) * v * v).sum(-1)

    def accel(self, x, v):
        """Acceleration of the constrained geodesic equation."""
        vv = (v * v).sum(-1)[..., None]
        if self.variant == "round":
            return -(vv / (x * x).sum(-1)[..., None]) * x
        if self.variant == "ellipsoid":
            xd = x / self._d2
            return -(vv / (x * xd).sum(-1)[..., None]) * xd
        s = self.factor(x)[..., None]
        gs = self.factor_grad(x)
        r = 0.5 * vv * gs - (gs * v).sum(-1)[..., None] * v
        mu = (-vv - (x * r).sum(-1)[..., None] / s) / ((x * x).sum(-1)[..., None] / s)
        return (r + mu * x) / s

    def max_diag(self) -> float:
        if self.variant == "ellipsoid":
            return max(self.axes) ** 2
        return 1.0


_MONO = re.compile(r"x(\d+)(?:\^(\d+))?")


def _parse_monomial(text: str, n: int):
    parts = [p.strip() for p in text.split("*")]
    coef, exps = 1.0, [0] * (n + 1)
    for p in parts:
        m = _MONO.fullmatch(p)
        if m:
            i = int(m.group(1))
            if i > n:
                raise ValueError(f"variable x{i} out of range for n = {n}")
            exps[i] += int(m.group(2) or 1)
        else:
            coef *= float(p)
    if sum(exps) % 2:
        raise ValueError(f"term {text!r} has odd total degree; the factor must be even")
    return coef, tuple(exps)


def _monomial_text(c, e) -> str:
    xs = [f"x{i}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k]
    return "*".join([f"{c:g}"] + xs)


# ---- integration ---------------------------------------------------------

def _project(m: MetricSpec, x, v, nrm=None):
    if nrm is None:
        nrm = np.sqrt((x * x).sum(-1))[..., None]
    x = x / nrm
    w = x if m.variant == "round" else x / m.diag(x)
    c = (x * v).sum(-1)[..., None] / (x * w).sum(-1)[..., None]
    return x, v - c * w


def _rk4(m: MetricSpec, x, v, h):
    a1 = m.accel(x, v)
    x2, v2 = x + 0.5 * h * v, v + 0.5 * h * a1
    a2 = m.accel(x2, v2)
    x3, v3 = x + 0.5 * h * v2, v + 0.5 * h * a2
    a3 = m.accel(x3, v3)
    x4, v4 = x + h * v3, v + h * a3
    a4 = m.accel(x4, v4)
    xn = x + h / 6 * (v + 2 * v2 + 2 * v3 + v4)
    vn = v + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
    return xn, vn


def _flow(m: MetricSpec, x0, v0, T: float, steps: int, store: bool, drift_tol=DRIFT_TOL):
    """Integrate rows of (x, v) for time T.  Returns (xs, vs, max_drift)."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    h = T / steps
    x, v = np.array(x0), np.array(v0)
    xs = [x] if store else None
    vs = [v] if store else None
    worst = 0.0
    for k in range(steps):
        x, v = _rk4(m, x, v, h)
        nrm = np.sqrt((x * x).sum(-1))[..., None]
        drift = float(np.abs(nrm.real - 1).max())
        if drift > worst:
            worst = drift
            if drift > drift_tol:
                raise IntegrationFailure(k + 1, drift)
        x, v = _project(m, x, v, nrm)
        if store:
            xs.append(x)
            vs.append(v)
    if store:
        return np.array(xs), np.array(vs), worst
    return x, v, worst


def default_steps(m: MetricSpec, p, v, T: float = 1.0, steps_per_pi: int = STEPS_PER_PI) -> int:
    length = T * math.sqrt(float(m.norm2(np.asarray(p, float), np.asarray(v, float))))
    return max(1, math.ceil(steps_per_pi * max(length, math.pi) / math.pi))


@dataclass
class GeodesicRecord:
    metric: MetricSpec
    p: np.ndarray
    v: np.ndarray
    T: float
    steps: int
    times: np.ndarray = field(repr=False)
    xs: np.ndarray = field(repr=False)
    vs: np.ndarray = field(repr=False)
    energy: float
    length: float
    residual: float
    max_drift: float
    iterations: int = 0

    @property
    def speed(self) -> float:
        return self.length / self.T

    def to_dict(self, samples: int = 0) -> dict:
        out = {"metric": self.metric.text(), "n": self.metric.n, "p": self.p.tolist(),
               "v": self.v.tolist(), "T": self.T, "steps": self.steps,
               "length": self.length, "energy": self.energy,
               "length_over_pi": self.length / math.pi, "residual": self.residual,
               "max_drift": self.max_drift, "iterations": self.iterations}
        if samples:
            idx = np.linspace(0, self.steps, samples + 1).round().astype(int)
            out["trajectory"] = [{"t": float(self.times[i]), "x": self.xs[i].tolist(),
                                  "v": self.vs[i].tolist()} for i in idx]
        return out


def _check_start(p, v):
    p, v = np.asarray(p, float), np.asarray(v, float)
    if p.shape != v.shape or p.ndim != 1:
        raise ValueError("p and v must be vectors of the same length")
    if abs(np.linalg.norm(p) - 1) > 1e-9:
        raise ValueError("p must be a unit vector")
    if abs(p @ v) > 1e-9 * max(1.0, np.linalg.norm(v)):
        raise ValueError("v must be tangent at p")
    return p, v


def antipodal_residual(xs0, vs0, x1, v1) -> float:
    return float(np.linalg.norm(x1 + xs0) + np.linalg.norm(v1 + vs0))


def integrate_geodesic(m: MetricSpec, p, v, T: float = 1.0, steps: int | None = None,
                       drift_tol: float = DRIFT_TOL) -> GeodesicRecord:
    p, v = _check_start(p, v)
    if len(p) != m.n + 1:
        raise ValueError(f"point must live in R^{m.n + 1}")
    steps = steps or default_steps(m, p, v, T)
    xs, vs, drift = _flow(m, p[None], v[None], T, steps, True, drift_tol)
    xs, vs = xs[:, 0], vs[:, 0]
    times = np.linspace(0.0, T, steps + 1)
    g = m.norm2(xs, vs)
    energy = T * float(_simpson(g, T / steps))
    length = float(_simpson(np.sqrt(g), T / steps))
    res = antipodal_residual(p, v, xs[-1], vs[-1])
    return GeodesicRecord(m, p, v, T, steps, times, xs, vs, energy, length, res, drift)


def _simpson(y, h):
    from scipy.integrate import simpson
    return simpson(y, dx=h)


# ---- shooting ------------------------------------------------------------

def tangent_basis(p) -> np.ndarray:
    """Orthonormal basis of the tangent space at p, as columns."""
    return null_space(np.asarray(p, float)[None])


def shoot_antipodal(m: MetricSpec, p, v0, tol: float = 1e-8, max_iter: int = 50,
                    fd_step: float = 1e-6, steps: int | None = None) -> GeodesicRecord:
    """Damped Gauss-Newton on the antipodal endpoint map.

    Unknown: the initial velocity in a basis of T_p.  Residual:
    (gamma(1) + p, gamma'(1) + v) in R^(2n+2).  The Jacobian is a central
    finite difference with step ``fd_step``; the step is halved whenever the
    residual would increase.
    """
    out = shoot_antipodal_batch(m, [(p, v0)], tol, max_iter, fd_step, steps)[0]
    if isinstance(out, ShootingFailure):
        raise out
    return out


def shoot_antipodal_batch(m: MetricSpec, starts, tol: float = 1e-8, max_iter: int = 50,
                          fd_step: float = 1e-6, steps: int | None = None) -> list:
    """Run :func:`shoot_antipodal` on many (p, v0) pairs in lockstep.

    Every Newton iteration integrates all problems as rows of one batch, so
    the result of each problem is independent of the others.  Returns one
    entry per start, in input order: a record or a :class:`ShootingFailure`.
    """
    starts = [_check_start(p, v) for p, v in starts]
    if not starts:
        return []
    for p, _ in starts:
        if len(p) != m.n + 1:
            raise ValueError(f"point must live in R^{m.n + 1}")
    if steps is None:
        steps = max(default_steps(m, p, v) for p, v in starts)
    P = np.array([p for p, _ in starts])
    Bs = np.array([tangent_basis(p) for p in P])            # (q, N, n)
    C = np.einsum("qNk,qN->qk", Bs, np.array([v for _, v in starts]))
    q, k = C.shape

    def F(idx, cs):
        V = np.einsum("rNk,rk->rN", Bs[idx], cs)
        x1, v1, _ = _flow(m, P[idx], V, 1.0, steps, False)
        return np.concatenate([x1 + P[idx], v1 + V], axis=-1)

    def size(r):
        h = r.shape[-1] // 2
        return np.linalg.norm(r[..., :h], axis=-1) + np.linalg.norm(r[..., h:], axis=-1)

    R = F(np.arange(q), C)
    best = size(R)
    iters = np.zeros(q, int)
    status = [None] * q
    eye = np.eye(k) * fd_step
    while True:
        active = [j for j in range(q) if status[j] is None and best[j] >= tol]
        for j in active:
            if iters[j] >= max_iter:
                status[j] = ShootingFailure("no convergence", float(best[j]))
        active = [j for j in active if status[j] is None]
        if not active:
            break
        idx = np.repeat(active, 2 * k)
        pert = np.vstack([np.vstack([C[j] + eye, C[j] - eye]) for j in active])
        rows = F(idx, pert).reshape(len(active), 2 * k, -1)
        deltas = {}
        for a, j in enumerate(active):
            iters[j] += 1
            J = (rows[a, :k] - rows[a, k:]).T / (2 * fd_step)
            deltas[j] = np.linalg.lstsq(J, -R[j], rcond=None)[0]
        lam = {j: 1.0 for j in active}
        pending = list(active)
        while pending:
            trial = np.array([C[j] + lam[j] * deltas[j] for j in pending])
            rn = F(np.array(pending), trial)
            sn = size(rn)
            nxt = []
            for a, j in enumerate(pending):
                if sn[a] < best[j]:
                    C[j], R[j], best[j] = trial[a], rn[a], sn[a]
                    continue
                lam[j] /= 2
                if lam[j] < 1e-10:
                    status[j] = ShootingFailure("line search stalled", float(best[j]))
                else:
                    nxt.append(j)
            pending = nxt
    out = []
    for j in range(q):
        if status[j] is not None:
            out.append(status[j])
            continue
        rec = integrate_geodesic(m, P[j], Bs[j] @ C[j], 1.0, steps)
        rec.iterations = int(iters[j])
        out.append(rec)
    return out


def level_guess(m: MetricSpec, level: int, p=None, direction=None):
    """Start point and velocity guess aimed at the level-th antipodal geodesic."""
    N = m.n + 1
    p = np.eye(N)[0] if p is None else np.asarray(p, float)
    if direction is None:
        direction = np.eye(N)[1] if N > 1 else None
    u = np.asarray(direction, float)
    u = u - (u @ p) * p
    u /= np.linalg.norm(u)
    speed = (2 * level + 1) * math.pi * 0.95 / math.sqrt(float(m.norm2(p, u)))
    return p, speed * u


# ---- Jacobi fields and conjugate points -----------------------------------

@dataclass
class ConjugatePoint:
    t: float
    multiplicity: int
    flagged: bool
    singular_values: list

    def to_dict(self):
        return {"t": self.t, "multiplicity": self.multiplicity, "flagged": self.flagged,
                "singular_values": self.singular_values}


@dataclass
class IndexReport:
    conjugate_points: list
    index: int
    kernel_dim: int
    kernel_flagged: bool
    kernel_singular_values: list
    flags: list

    def to_dict(self):
        return {"index": self.index, "kernel_dim": self.kernel_dim,
                "kernel_flagged": self.kernel_flagged,
                "kernel_singular_values": self.kernel_singular_values,
                "conjugate_points": [c.to_dict() for c in self.conjugate_points],
                "flags": self.flags}


def transverse_directions(m: MetricSpec, p, v) -> np.ndarray:
    """Rows spanning the tangent vectors at p that are g-orthogonal to v."""
    p, v = np.asarray(p, float), np.asarray(v, float)
    return null_space(np.vstack([p, m.diag(p) * v])).T


class _JacobiFlow:
    """Geodesic plus a transverse Jacobi frame J(0) = 0, J'(0) = w_j."""

    def __init__(self, m: MetricSpec, p, v, T: float, steps: int):
        self.m, self.T, self.steps = m, T, steps
        self.h = T / steps
        W = transverse_directions(m, p, v)
        self.k = len(W)
        X0 = np.broadcast_to(p, W.shape).astype(complex)
        V0 = v + 1j * CSTEP * W
        self.xs, self.vs, _ = _flow(m, X0, V0, T, steps, True)
        self.scale = math.sqrt(float(m.norm2(p, v)))

    def matrix_at(self, i: int):
        return self.scale * self.xs[i].imag.T / CSTEP

    def matrix(self, t: float):
        i = min(int(t / self.h), self.steps - 1)
        dt = t - i * self.h
        x, v = self.xs[i], self.vs[i]
        if dt > 0:
            x, v = _rk4(self.m, x, v, dt)
            x, v = _project(self.m, x, v)
        return self.scale * x.imag.T / CSTEP

    def grid_sigma_min(self):
        M = self.scale * np.transpose(self.xs.imag, (0, 2, 1)) / CSTEP
        return np.linalg.svd(M, compute_uv=False)[:, -1]


def _refine(flow: _JacobiFlow, i: int):
    """Locate the conjugate time near grid index i."""
    ta, tb = (i - 1) * flow.h, (i + 1) * flow.h
    _, _, Vt = np.linalg.svd(flow.matrix_at(i))
    u = Vt[-1]
    e = flow.matrix(tb) @ u - flow.matrix(ta) @ u
    if np.linalg.norm(e) > 0:
        e = e / np.linalg.norm(e)
        phi = lambda t: float(e @ (flow.matrix(t) @ u))      # noqa: E731
        fa, fb = phi(ta), phi(tb)
        if fa * fb < 0:
            return brentq(phi, ta, tb, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if fa == 0:
            return ta
        if fb == 0:
            return tb
    sig = lambda t: np.linalg.svd(flow.matrix(t), compute_uv=False)[-1]   # noqa: E731
    return minimize_scalar(sig, bounds=(ta, tb), method="bounded",
                           options={"xatol": 1e-14}).x


def conjugate_points(m: MetricSpec, p, v, T: float, steps: int,
                     candidate_tol: float = 0.05) -> list[ConjugatePoint]:
    """Conjugate points to t = 0 in the open interval (0, T]."""
    flow = _JacobiFlow(m, np.asarray(p, float), np.asarray(v, float), T, steps)
    if flow.k == 0:
        return []
    s = flow.grid_sigma_min()
    cands = [i for i in range(1, steps)
             if s[i] < candidate_tol and s[i] <= s[i - 1] and s[i] < s[i + 1]]
    if s[steps] < candidate_tol and s[steps] <= s[steps - 1]:
        cands.append(steps)
    out = []
    for i in cands:
        t0 = T if i == steps else _refine(flow, i)
        sv = np.linalg.svd(flow.matrix(t0), compute_uv=False)
        mult = int(np.sum(sv < SIGMA_ZERO))
        amb = bool(np.any((sv >= SIGMA_ZERO) & (sv <= SIGMA_AMBIGUOUS)))
        if mult == 0 and not amb:
            continue
        out.append(ConjugatePoint(float(t0), mult, amb, [float(x) for x in sv]))
    return out


def endpoint_kernel(m: MetricSpec, p, v, T: float, steps: int):
    """Singular values of the derivative of the antipodal endpoint map on TS^n.

    Directions: (dp, -(dp.v) p) for dp in T_p, and (0, |v| w) for w in T_p.
    Velocity components of the output are divided by |v|.
    """
    p, v = np.asarray(p, float), np.asarray(v, float)
    B = tangent_basis(p).T
    s = math.sqrt(float(m.norm2(p, v)))
    dP = np.vstack([B, np.zeros_like(B)])
    dV = np.vstack([-(B @ v)[:, None] * p[None], s * B])
    X0 = p + 1j * CSTEP * dP
    V0 = v + 1j * CSTEP * dV
    x1, v1, _ = _flow(m, X0, V0, T, steps, False)
    D = np.hstack([(x1 + X0).imag, (v1 + V0).imag / s]) / CSTEP
    return np.linalg.svd(D, compute_uv=False)


def jacobi_index(m: MetricSpec, g: GeodesicRecord, residual_tol: float = 1e-6) -> IndexReport:
    """Index from interior conjugate points, plus the endpoint kernel estimate."""
    if g.residual > residual_tol:
        raise ValueError(f"geodesic residual {g.residual:.3e} exceeds {residual_tol:g}")
    cps = conjugate_points(m, g.p, g.v, g.T, g.steps)
    interior = [c for c in cps if g.T * 1e-6 < c.t < g.T * (1 - 1e-6)]
    flags = [f"ambiguous singular value at t = {c.t:.12g}" for c in interior if c.flagged]
    sv = endpoint_kernel(m, g.p, g.v, g.T, g.steps)
    kdim = int(np.sum(sv < SIGMA_ZERO))
    kflag = bool(np.any((sv >= SIGMA_ZERO) & (sv <= SIGMA_AMBIGUOUS)))
    if kflag:
        flags.append("ambiguous endpoint kernel singular value")
    return IndexReport(interior, sum(c.multiplicity for c in interior), kdim, kflag,
                       [float(x) for x in sv], flags)


# ---- average index and density --------------------------------------------

@dataclass
class AverageIndex:
    record: GeodesicRecord
    k_max: int
    indices: list
    alpha: Fraction
    flags: list

    @property
    def mean_frequency(self) -> float:
        return float(self.alpha) / self.record.length

    def to_dict(self):
        return {"k_max": self.k_max, "indices": self.indices, "alpha": float(self.alpha),
                "alpha_exact": str(self.alpha), "length": self.record.length,
                "mean_frequency": self.mean_frequency, "flags": self.flags}


def _slope(ks, ys) -> Fraction:
    kb = Fraction(sum(ks), len(ks))
    yb = Fraction(sum(ys), len(ys))
    num = sum((k - kb) * (y - yb) for k, y in zip(ks, ys))
    den = sum((k - kb) ** 2 for k in ks)
    return num / den


def average_index(m: MetricSpec, g: GeodesicRecord, k_max: int = 12) -> AverageIndex:
    """Slope of k -> ind(gamma^k), gamma^k running over k periods of g."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    T = g.T * k_max
    cps = conjugate_points(m, g.p, g.v, T, g.steps * k_max)
    flags = [f"ambiguous singular value at t = {c.t:.12g}" for c in cps if c.flagged]
    ks = list(range(1, k_max + 1))
    ind = [sum(c.multiplicity for c in cps if g.T * 1e-6 < c.t < k * g.T * (1 - 1e-6))
           for k in ks]
    return AverageIndex(g, k_max, ind, _slope(ks, ind), flags)


@dataclass
class DensityReport:
    total: Fraction
    bound: Fraction
    passed: bool
    alpha_bar: float
    eps: float
    members: list
    flags: list

    def to_dict(self):
        return {"sum": float(self.total), "sum_exact": str(self.total),
                "bound": str(self.bound), "passed": self.passed,
                "alpha_bar": self.alpha_bar, "eps": self.eps,
                "members": self.members, "flags": self.flags}


def density_sum(m: MetricSpec, geodesics: list, eps: float,
                alpha_bar: float | None = None) -> DensityReport:
    """Sum of 1/alpha over geodesics whose mean frequency is within eps of alpha_bar.

    ``geodesics`` holds :class:`AverageIndex` results.  ``alpha_bar`` defaults
    to the round value (n-1)/pi.
    """
    n = m.n
    if n % 2:
        raise ValueError("density bound is stated for even n")
    if alpha_bar is None:
        alpha_bar = (n - 1) / math.pi
    total, members, flags = Fraction(0), [], []
    for j, a in enumerate(geodesics):
        if abs(a.mean_frequency - alpha_bar) >= eps:
            continue
        if a.alpha == 0:
            flags.append(f"geodesic {j}: alpha = 0 inside the band")
            continue
        total += 1 / a.alpha
        members.append(j)
    bound = Fraction(1, n - 1)
    return DensityReport(total, bound, total >= bound and not flags, alpha_bar, eps, members, flags)


def jacobi_fd_check(m: MetricSpec, p, v, T: float = 0.7, steps: int | None = None,
                    eps: float = 1e-5) -> float:
    """Largest relative gap between Jacobi fields and central differences.

    For every transverse direction w the complex-step Jacobi field J_w(T)
    is compared with (gamma_{v+eps w}(T) - gamma_{v-eps w}(T)) / (2 eps).
    """
    p, v = _check_start(p, v)
    steps = steps or default_steps(m, p, v, T)
    W = transverse_directions(m, p, v)
    X0 = np.broadcast_to(p, W.shape)
    xc, _, _ = _flow(m, X0.astype(complex), v + 1j * CSTEP * W, T, steps, False)
    J = xc.imag / CSTEP
    xp, _, _ = _flow(m, X0, v + eps * W, T, steps, False)
    xm, _, _ = _flow(m, X0, v - eps * W, T, steps, False)
    fd = (xp - xm) / (2 * eps)
    return float(np.max(np.linalg.norm(J - fd, axis=1) / np.linalg.norm(J, axis=1)))
