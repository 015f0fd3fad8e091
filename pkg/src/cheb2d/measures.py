"""Closed-form bivariate measures, Gauss-Chebyshev quadrature and moment matrices.

Every shipped density is the product Chebyshev-U weight
``(4/pi^2) sqrt(1-x^2) sqrt(1-y^2)`` times a rational factor that is smooth
on the closed square, so measures store that factor ("ratio") and all
integrals run through a tensor Gauss rule for the normalized weight
``(2/pi) sqrt(1-t^2)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .parameters import DeformationFamily, InvalidFamily


class InsufficientMoments(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)


def quadrature_rule(kind: str = "chebyshev2", N: int = 512) -> QuadratureRule:
    """Gauss rule for ``(2/pi) sqrt(1-t^2) dt``, exact up to degree ``2N-1``."""
    if kind != "chebyshev2":
        raise ValueError(f"unsupported quadrature kind {kind!r}")
    if N < 1:
        raise ValueError("N >= 1")
    theta = np.arange(1, N + 1) * math.pi / (N + 1)
    return QuadratureRule(np.cos(theta), 2.0 / (N + 1) * np.sin(theta) ** 2)


def chebyshev_weight(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return 2.0 / math.pi * np.sqrt(np.clip(1.0 - t * t, 0.0, None))


# -- closed-form densities ---------------------------------------------------


def mu0(s11: float, x, y):
    """Rational factor shared by both deformations."""
    s2 = s11 * s11
    den = 4 * s2 * (x * x + y * y) - 4 * s11 * (1 + s2) * x * y + (1 - s2) ** 2
    return (1 - s2) / den


def density_one_param(s11: float, x, y):
    """Density of the one-parameter deformation on the open square."""
    if not abs(s11) < 1:
        raise InvalidFamily("|s11| < 1 required")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 4 / math.pi**2 * np.sqrt(1 - x * x) * np.sqrt(1 - y * y) * mu0(s11, x, y)


@dataclass(frozen=True)
class SingularLine:
    """``{x = x0}`` carrying ``y_ratio(y) * (2/pi) sqrt(1-y^2) dy``."""

    x0: float
    y_ratio: Callable


@dataclass(frozen=True)
class BivariateMeasure:
    ac_ratio: Callable
    lines: tuple = ()
    name: str = ""
    notes: tuple = field(default=(), compare=False)

    def ac_density(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return chebyshev_weight(x) * chebyshev_weight(y) * self.ac_ratio(x, y)

    def line_density(self, k: int, y):
        line = self.lines[k]
        return chebyshev_weight(y) * line.y_ratio(np.asarray(y, dtype=float))


def measure_chebyshev() -> BivariateMeasure:
    return BivariateMeasure(lambda x, y: np.ones(np.broadcast(x, y).shape), (), "chebyshev")


def measure_one_param(s11: float) -> BivariateMeasure:
    DeformationFamily.one_param(s11).check()
    return BivariateMeasure(lambda x, y: mu0(s11, x, y), (), f"one_param(s11={s11})")


def line_formula_valid(s11: float, s10: float) -> bool:
    """Whether the closed-form line density accounts for all mass on ``x = x0``.

    For ``|2 s10 s11| >= 1`` the rational factor's zero set crosses ``y = 1``
    between ``x = 1`` and ``x0`` and the true line measure carries an extra
    atom at ``y > 1`` that the formula omits.
    """
    return abs(2 * s10 * s11) < 1


def measure_two_param(s11: float, s10: float) -> BivariateMeasure:
    """Two-parameter measure: rational a.c. part plus a weighted line at ``x0``."""
    DeformationFamily.two_param(s11, s10).check()
    z0 = 1 / (2 * s10)
    x0 = (z0 + 1 / z0) / 2
    notes = ()
    if not line_formula_valid(s11, s10):
        msg = (
            f"|2 s10 s11| = {abs(2 * s10 * s11):.3g} >= 1: the line density at x0 = {x0:.6g} "
            "misses a point mass off [-1, 1]; orthonormality will not hold"
        )
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes = (msg,)

    def ac(x, y):
        return z0 * mu0(s11, x, y) / (2 * (x0 - x))

    def line(y):
        return (1 - z0 * z0) * mu0(s11, x0, y)

    return BivariateMeasure(ac, (SingularLine(x0, line),), f"two_param(s11={s11}, s10={s10})", notes)


def measure_for_family(family: DeformationFamily) -> BivariateMeasure:
    family.check()
    if family.tag == "chebyshev":
        return measure_chebyshev()
    if family.tag == "one_param":
        return measure_one_param(family.s11)
    return measure_two_param(family.s11, family.s10)


def default_nodes(family: DeformationFamily) -> int:
    return 2048 if abs(family.s11) >= 0.85 else 512


# -- integration ---------------------------------------------------------------


def _as_components(v: np.ndarray, shape) -> np.ndarray:
    v = np.asarray(v)
    if v.shape == shape:
        v = v[..., None]
    return v


def inner_product(f: Callable, g: Callable, mu: BivariateMeasure, N: int = 512, block: int = 64) -> np.ndarray:
    """``<f, g> = int f g^T dmu`` for vector-valued callables ``f(x, y)``, ``g(x, y)``.

    Tensor Gauss rule over the square (processed in x-blocks) plus a 1D
    rule along every singular line.
    """
    rule = quadrature_rule("chebyshev2", N)
    t, w = rule.nodes, rule.weights
    total = None
    for start in range(0, N, block):
        xs = t[start : start + block]
        X, Y = np.meshgrid(xs, t, indexing="ij")
        wt = (w[start : start + block, None] * w[None, :]) * mu.ac_ratio(X, Y)
        fv = _as_components(f(X, Y), X.shape).reshape(X.size, -1)
        gv = _as_components(g(X, Y), X.shape).reshape(X.size, -1)
        part = (fv * wt.reshape(-1, 1)).T @ gv
        total = part if total is None else total + part
    for line in mu.lines:
        X = np.full_like(t, line.x0)
        wt = w * line.y_ratio(t)
        fv = _as_components(f(X, t), t.shape)
        gv = _as_components(g(X, t), t.shape)
        total = total + (fv * wt[:, None]).T @ gv
    return total


def matrix_measure_slice(mu: BivariateMeasure, m: int, x, N: int = 512) -> np.ndarray:
    """Hankel density ``(int y^(i+j) mu(x, y) dy)_(i,j)`` at points x inside (-1, 1)."""
    rule = quadrature_rule("chebyshev2", N)
    x = np.asarray(x, dtype=float)
    ratio = mu.ac_ratio(x[..., None], rule.nodes)
    powers = rule.nodes[:, None] ** np.arange(2 * m + 1)
    mom = np.einsum("...k,k,kp->...p", ratio, rule.weights, powers)
    idx = np.add.outer(np.arange(m + 1), np.arange(m + 1))
    return chebyshev_weight(x)[..., None, None] * mom[..., idx]


def line_mass_matrix(mu: BivariateMeasure, m: int, k: int = 0, N: int = 512) -> np.ndarray:
    """Hankel mass ``int [1..y^m]^T [1..y^m] d(line k)``."""
    rule = quadrature_rule("chebyshev2", N)
    line = mu.lines[k]
    powers = rule.nodes[:, None] ** np.arange(2 * m + 1)
    mom = (rule.weights * line.y_ratio(rule.nodes)) @ powers
    idx = np.add.outer(np.arange(m + 1), np.arange(m + 1))
    return mom[idx]


def moments(mu: BivariateMeasure, imax: int, jmax: int, N: int = 512) -> np.ndarray:
    """Table ``h[i, j] = int x^i y^j dmu`` for ``i <= imax``, ``j <= jmax``."""
    rule = quadrature_rule("chebyshev2", N)
    t, w = rule.nodes, rule.weights
    X, Y = np.meshgrid(t, t, indexing="ij")
    wt = w[:, None] * w[None, :] * mu.ac_ratio(X, Y)
    xp = t[None, :] ** np.arange(imax + 1)[:, None]
    yp = t[None, :] ** np.arange(jmax + 1)[:, None]
    h = xp @ wt @ yp.T
    for line in mu.lines:
        ym = yp @ (w * line.y_ratio(t))
        h = h + np.outer(line.x0 ** np.arange(imax + 1), ym)
    return h


@dataclass(frozen=True)
class DoublyHankel:
    """Moment matrix ``H_{n,m}``: block (a, b) is ``H_{a+b}``, entry (k, l) of ``H_i`` is ``h[i, k+l]``."""

    n: int
    m: int
    blocks: tuple

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.blocks[a + b] for b in range(self.n + 1)] for a in range(self.n + 1)])


def doubly_hankel(h: np.ndarray, n: int, m: int) -> DoublyHankel:
    h = np.asarray(h)
    if h.shape[0] < 2 * n + 1 or h.shape[1] < 2 * m + 1:
        raise InsufficientMoments(f"need a {2 * n + 1} x {2 * m + 1} moment table, got {h.shape}")
    idx = np.add.outer(np.arange(m + 1), np.arange(m + 1))
    return DoublyHankel(n, m, tuple(h[i][idx] for i in range(2 * n + 1)))


def hankel_defects(mat: np.ndarray, n: int, m: int) -> dict:
    """Largest deviation from block-Hankel and inner-Hankel structure."""
    mat = np.asarray(mat)
    d = m + 1
    blk = lambda a, b: mat[a * d : (a + 1) * d, b * d : (b + 1) * d]
    outer = 0.0
    for a in range(n + 1):
        for b in range(n + 1):
            ref = blk(min(a + b, n), a + b - min(a + b, n))
            outer = max(outer, float(np.abs(blk(a, b) - ref).max()))
    inner = 0.0
    for a in range(n + 1):
        for b in range(n + 1):
            hb = blk(a, b)
            for k in range(d):
                for l in range(d):
                    kk = min(k + l, m)
                    inner = max(inner, abs(hb[k, l] - hb[kk, k + l - kk]))
    return {"block_hankel": outer, "inner_hankel": inner}


# -- matrix measures -----------------------------------------------------------


@dataclass(frozen=True)
class MatrixMeasure:
    """Matrix density ``ratio(x) * (2/pi) sqrt(1-x^2)`` on (-1, 1) plus point masses."""

    ratio: Callable
    masses: tuple = ()

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return chebyshev_weight(x)[..., None, None] * self.ratio(x)

    def gram(self, F: Callable, G: Callable | None = None, N: int = 512) -> np.ndarray:
        """``int F(x) dM(x) G(x)^T`` for matrix-valued ``F``, ``G`` (default ``G = F``).

        ``F(x)`` may return a stack ``(k, len(x), p, d)``; the result is then
        ``(k, k, p, p)``.
        """
        G = F if G is None else G
        rule = quadrature_rule("chebyshev2", N)
        pts = rule.nodes
        mats = self.ratio(pts) * rule.weights[:, None, None]
        out = _gram(F(pts), mats, G(pts))
        for x0, r in self.masses:
            xp = np.array([x0])
            out = out + _gram(F(xp), np.asarray(r)[None], G(xp))
        return out


def _gram(fv, mats, gv):
    if fv.ndim == 3:
        return np.einsum("xab,xbc,xdc->ad", fv, mats, gv)
    return np.einsum("kxab,xbc,lxdc->klad", fv, mats, gv)
