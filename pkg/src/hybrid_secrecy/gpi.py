"""Generalized power iteration for products of two Rayleigh quotients.

Maximizes ``log2((x^H A1 x / x^H B1 x) * (x^H A2 x / x^H B2 x))`` over unit
vectors ``x``. Stationary points satisfy ``N(x) x = D(x) x`` with

    N(x) = A1 / x^H A1 x + A2 / x^H A2 x
    D(x) = B1 / x^H B1 x + B2 / x^H B2 x,

which suggests the fixed-point update ``x <- normalize(D(x)^{-1} N(x) x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


@dataclass(frozen=True)
class RayleighProductObjective:
    a1: np.ndarray
    b1: np.ndarray
    a2: np.ndarray
    b2: np.ndarray

    @property
    def n(self) -> int:
        return self.a1.shape[0]

    def scaled(self, c: float) -> "RayleighProductObjective":
        return RayleighProductObjective(c * self.a1, c * self.b1, c * self.a2, c * self.b2)


@dataclass(frozen=True)
class GpiSettings:
    tol: float = 1e-8
    max_iter: int = 500
    # every generalized eigenvector of (a1, b1) and (a2, b2) is tried as a
    # start when n is at most this; larger problems use the dominant ones only
    multistart_dim: int = 16
    screen_iter: int = 5
    keep: int = 2
    update: str = "eig"

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be > 0 and max_iter >= 1")
        if self.update not in ("eig", "power"):
            raise ValueError(f"unknown update rule {self.update!r}")


@dataclass(frozen=True)
class GpiResult:
    x: np.ndarray
    value: float
    iterations: int
    kkt_residual: float
    converged: bool
    trace: tuple = ()


def _quad(m, x):
    return float(np.real(np.vdot(x, m @ x)))


def objective_value(obj: RayleighProductObjective, x) -> float:
    """``log2`` of the quotient product at ``x`` (normalized first)."""
    x = np.asarray(x, dtype=complex)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise ValueError("x must be nonzero")
    x = x / nrm
    qa1, qb1, qa2, qb2 = (_quad(m, x) for m in (obj.a1, obj.b1, obj.a2, obj.b2))
    return float(np.log2(qa1 / qb1) + np.log2(qa2 / qb2))


def kkt_residual(obj: RayleighProductObjective, x) -> float:
    """Norm of ``(I - x x^H)(N(x) - D(x)) x`` at a unit vector ``x``."""
    g = _direction(obj, x)
    g = g - x * np.vdot(x, g)
    return float(np.linalg.norm(g))


def _direction(obj, x):
    return (obj.a1 @ x / _quad(obj.a1, x) + obj.a2 @ x / _quad(obj.a2, x)
            - obj.b1 @ x / _quad(obj.b1, x) - obj.b2 @ x / _quad(obj.b2, x))


def validate(obj: RayleighProductObjective, atol=1e-10) -> RayleighProductObjective:
    """Check Hermitian / definiteness assumptions; returns a symmetrized copy."""
    mats = []
    for name, m in zip(("a1", "b1", "a2", "b2"), (obj.a1, obj.b1, obj.a2, obj.b2)):
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape != obj.a1.shape:
            raise ValueError(f"{name} must be square and match a1")
        if np.linalg.norm(m - m.conj().T) > atol * max(1.0, np.linalg.norm(m)):
            raise ValueError(f"{name} is not Hermitian")
        mats.append(0.5 * (m + m.conj().T))
    a1, b1, a2, b2 = mats
    for name, m in (("b1", b1), ("b2", b2)):
        if np.linalg.eigvalsh(m)[0] <= 0:
            raise ValueError(f"{name} must be positive definite")
    for name, m in (("a1", a1), ("a2", a2)):
        if np.linalg.eigvalsh(m)[0] < -atol * max(1.0, np.linalg.norm(m)):
            raise ValueError(f"{name} must be positive semidefinite")
    return RayleighProductObjective(a1, b1, a2, b2)


def default_starts(obj: RayleighProductObjective, multistart_dim=16, seed=0):
    """Start vectors: generalized eigenvectors of both pencils, Bob's dominant first."""
    starts = []
    try:
        _, v1 = sla.eigh(obj.a1, obj.b1)
        _, v2 = sla.eigh(obj.a2, obj.b2)
    except (np.linalg.LinAlgError, ValueError):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(obj.n) + 1j * rng.standard_normal(obj.n)
        return [x / np.linalg.norm(x)]
    if obj.n <= multistart_dim:
        cols = [v1[:, j] for j in range(obj.n - 1, -1, -1)] + \
               [v2[:, j] for j in range(obj.n - 1, -1, -1)]
    else:
        cols = [v1[:, -1], v1[:, -2], v2[:, -1], v2[:, -2]] if obj.n > 1 else [v1[:, -1]]
    for c in cols:
        starts.append(c / np.linalg.norm(c))
    return starts


class _State:
    """Iterate plus the cached products needed for value, residual and update."""

    __slots__ = ("x", "prods", "quads", "value", "residual")

    def __init__(self, obj, x):
        self.x = x
        self.prods = (obj.a1 @ x, obj.b1 @ x, obj.a2 @ x, obj.b2 @ x)
        self.quads = qa1, qb1, qa2, qb2 = tuple(np.vdot(x, p).real for p in self.prods)
        if qa1 <= 0 or qa2 <= 0:
            self.value = -math.inf
            self.residual = math.inf
            return
        self.value = math.log2((qa1 / qb1) * (qa2 / qb2))
        ax1, bx1, ax2, bx2 = self.prods
        g = ax1 / qa1 + ax2 / qa2 - bx1 / qb1 - bx2 / qb2
        g = g - x * np.vdot(x, g)
        self.residual = math.sqrt(np.vdot(g, g).real)


def _candidates(obj, st, update):
    ax1, bx1, ax2, bx2 = st.prods
    qa1, qb1, qa2, qb2 = st.quads
    d_x = obj.b1 / qb1 + obj.b2 / qb2
    if update == "eig":
        n_x = obj.a1 / qa1 + obj.a2 / qa2
        try:
            _, v = sla.eigh(n_x, d_x, subset_by_index=[obj.n - 1, obj.n - 1],
                             check_finite=False)
            yield v[:, 0]
        except (np.linalg.LinAlgError, ValueError):
            pass
    yield np.linalg.solve(d_x, ax1 / qa1 + ax2 / qa2)


def _step(obj, st, update="eig"):
    """One safeguarded update; returns ``None`` if no ascent is found.

    ``update="power"`` is the plain fixed-point step ``D(x)^{-1} N(x) x``;
    ``"eig"`` jumps to the dominant generalized eigenvector of
    ``(N(x), D(x))`` (same fixed points, much faster contraction) and falls
    back to the power step when that fails to ascend.
    """
    for y in _candidates(obj, st, update):
        y = y / math.sqrt(np.vdot(y, y).real)
        # align global phase so that damping interpolates sensibly
        ph = np.vdot(y, st.x)
        if abs(ph) > 0:
            y = y * (ph / abs(ph))
        step = 1.0
        while step > 1e-6:
            cand = st.x + step * (y - st.x)
            nrm = math.sqrt(np.vdot(cand, cand).real)
            if nrm > 0:
                new = _State(obj, cand / nrm)
                if new.value >= st.value - 1e-13:
                    return new
            step *= 0.5
    return None


def _ascend(obj, st, settings, budget, trace):
    it = 0
    while st.residual > settings.tol and it < budget:
        new = _step(obj, st, settings.update)
        if new is None:
            break
        it += 1
        dx = new.x - st.x
        moved = math.sqrt(np.vdot(dx, dx).real)
        st = new
        trace.append(st.value)
        if moved < 1e-15:
            break
    return st, it


def gpi_maximize(obj: RayleighProductObjective, settings: GpiSettings | None = None,
                 x0=None, starts=None) -> GpiResult:
    """Maximize the Rayleigh-quotient product over the unit sphere.

    ``x0`` (optional) is tried first, followed by ``starts`` or, by default,
    the generalized eigenvectors of both quotient pencils. All starts are
    screened for a few iterations and the best ``keep`` are run to
    convergence. Hitting ``max_iter`` is reported through ``converged=False``,
    not raised.
    """
    settings = settings or GpiSettings()
    obj = validate(obj)
    if starts is None:
        starts = default_starts(obj, settings.multistart_dim)
    starts = ([] if x0 is None else [np.asarray(x0, dtype=complex)]) + list(starts)
    runs = []
    total = 0
    for s in starts:
        trace = []
        s = np.asarray(s, dtype=complex)
        st = _State(obj, s / np.linalg.norm(s))
        trace.append(st.value)
        st, it = _ascend(obj, st, settings, min(settings.screen_iter, settings.max_iter), trace)
        total += it
        runs.append([st, it, trace])
    # stable sort keeps x0 ahead of equally good default starts
    runs.sort(key=lambda r: -r[0].value)
    for r in runs[:settings.keep]:
        st, it = _ascend(obj, r[0], settings, settings.max_iter - r[1], r[2])
        r[0], r[1] = st, r[1] + it
        total += it
    best = runs[0]
    for r in runs[1:settings.keep]:
        if r[0].value > best[0].value + 1e-12:
            best = r
    st = best[0]
    return GpiResult(st.x, st.value, total, st.residual, st.residual <= settings.tol,
                     tuple(best[2]))
