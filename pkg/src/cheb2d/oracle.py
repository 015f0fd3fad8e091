"""Independent reference computations built only from moments and quadrature.

Polynomials are stored as coefficient stacks ``c[k, i, j]``: component ``k``,
coefficient of ``x**i y**j``. Inner products of such stacks are contractions
against a moment table ``h[i, j] = int x^i y^j dmu``, so nothing here touches
the recurrence machinery except where a comparison is the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import cholesky_lower, solve_lower_triangular
from .measures import BivariateMeasure, doubly_hankel, moments, quadrature_rule
from .parameters import DeformationFamily
from .recurrence import JacobiOperator, eval_matrix_polys, jacobi_operator
from .scattering import psi


# -- coefficient-stack algebra ------------------------------------------------------


def pair_moments(f: np.ndarray, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``<f, g> = int f g^T dmu`` for coefficient stacks ``f``, ``g``."""
    fi, fj = f.shape[1:]
    gi, gj = g.shape[1:]
    if fi + gi - 1 > h.shape[0] or fj + gj - 1 > h.shape[1]:
        raise ValueError(f"moment table {h.shape} too small for degrees {f.shape[1:]} x {g.shape[1:]}")
    ii = np.add.outer(np.arange(fi), np.arange(gi))
    jj = np.add.outer(np.arange(fj), np.arange(gj))
    hh = h[ii[:, None, :, None], jj[None, :, None, :]]  # (fi, fj, gi, gj)
    return np.einsum("aij,ijkl,bkl->ab", f, hh, g)


def times_x(f: np.ndarray) -> np.ndarray:
    out = np.zeros((f.shape[0], f.shape[1] + 1, f.shape[2]))
    out[:, 1:] = f
    return out


def times_y(f: np.ndarray) -> np.ndarray:
    out = np.zeros((f.shape[0], f.shape[1], f.shape[2] + 1))
    out[:, :, 1:] = f
    return out


def evaluate(c: np.ndarray, x, y) -> np.ndarray:
    """Values of a coefficient stack at points; trailing axis indexes components."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xp = x[..., None] ** np.arange(c.shape[1])
    yp = y[..., None] ** np.arange(c.shape[2])
    return np.einsum("kij,...i,...j->...k", c, xp, yp)


def pad(c: np.ndarray, ni: int, nj: int) -> np.ndarray:
    out = np.zeros((c.shape[0], ni, nj))
    out[:, : c.shape[1], : c.shape[2]] = c
    return out


# -- Gram-Schmidt oracles -----------------------------------------------------------


@dataclass(frozen=True)
class LexTable:
    """``coeffs[n][l, i, j]``: the ``l``-th component of the level-``(n, m)`` vector polynomial."""

    m: int
    coeffs: tuple

    def vector(self, n: int) -> np.ndarray:
        return self.coeffs[n]


def gram_schmidt_lex(h: np.ndarray, n: int, m: int) -> LexTable:
    """Lex-ordered orthonormal polynomials up to x-degree ``n`` with y-degree at most ``m``.

    Basis index ``a (m+1) + k`` carries ``x^a y^k``. With ``H = L L^T`` the
    rows of ``L^{-1}`` are the orthonormal polynomials, leading coefficient
    positive.
    """
    H = doubly_hankel(h, n, m).matrix
    low = cholesky_lower(0.5 * (H + H.T))
    cinv = solve_lower_triangular(low, np.eye(len(H)))
    d = m + 1
    out = []
    for a in range(n + 1):
        rows = cinv[a * d : (a + 1) * d, : (a + 1) * d]
        out.append(rows.reshape(d, a + 1, d))
    return LexTable(m, tuple(out))


def tilde_lex(h: np.ndarray, n: int, m: int) -> LexTable:
    """Reverse-lex polynomials: ``coeffs[k]`` is the ``(n, k)`` vector, components indexed by x-degree.

    Computed as lex Gram-Schmidt on the transposed moment table with the
    variables swapped back.
    """
    t = gram_schmidt_lex(np.asarray(h).T, m, n)
    return LexTable(n, tuple(np.swapaxes(c, 1, 2) for c in t.coeffs))


def lex_vector(h: np.ndarray, n: int, m: int) -> np.ndarray:
    return gram_schmidt_lex(h, n, m).coeffs[n]


def tilde_vector(h: np.ndarray, n: int, m: int) -> np.ndarray:
    """``tilde P_{n,m}``: ``n+1`` components with leading terms ``x^l y^m``."""
    return tilde_lex(h, n, m).coeffs[m]


def totaldeg_monomials(deg: int) -> list[tuple[int, int]]:
    """``(i, j)`` exponents ordered by degree and, within a degree, by increasing x-power."""
    return [(i, d - i) for d in range(deg + 1) for i in range(d + 1)]


def gram_schmidt_totaldeg(h: np.ndarray, nmax: int) -> list[np.ndarray]:
    """Total-degree orthonormal vectors ``P_0..P_nmax``; ``P_d`` has ``d+1`` components."""
    mons = totaldeg_monomials(nmax)
    if h.shape[0] < 2 * nmax + 1 or h.shape[1] < 2 * nmax + 1:
        raise ValueError("moment table too small")
    G = np.array([[h[a[0] + b[0], a[1] + b[1]] for b in mons] for a in mons])
    low = cholesky_lower(0.5 * (G + G.T))
    cinv = solve_lower_triangular(low, np.eye(len(G)))
    out = []
    start = 0
    for d in range(nmax + 1):
        block = np.zeros((d + 1, nmax + 1, nmax + 1))
        for r in range(d + 1):
            for col, (i, j) in enumerate(mons[: start + d + 1]):
                block[r, i, j] = cinv[start + r, col]
        out.append(block)
        start += d + 1
    return out


@dataclass(frozen=True)
class TotalDegreeExtraction:
    Ax: tuple
    Ay: tuple
    Bx: tuple
    By: tuple


def totaldeg_coefficients(h: np.ndarray, nmax: int) -> TotalDegreeExtraction:
    """``A_{x,n} = <x P_n, P_{n+1}>``, ``B_{x,n} = <x P_n, P_n>`` and the y analogues, ``n <= nmax``."""
    polys = gram_schmidt_totaldeg(h, nmax + 1)
    ax, ay, bx, by = [], [], [], []
    for n in range(nmax + 1):
        xp, yp = times_x(polys[n]), times_y(polys[n])
        ax.append(pair_moments(xp, polys[n + 1], h))
        ay.append(pair_moments(yp, polys[n + 1], h))
        bx.append(pair_moments(xp, polys[n], h))
        by.append(pair_moments(yp, polys[n], h))
    return TotalDegreeExtraction(tuple(ax), tuple(ay), tuple(bx), tuple(by))


# -- coefficients of the lex recurrences ---------------------------------------------


@dataclass
class LexOracle:
    """Lex and reverse-lex polynomials of a measure, built from one moment table."""

    mu: BivariateMeasure
    nmax: int
    mmax: int
    N: int = 512
    h: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        deg = 2 * max(self.nmax, self.mmax) + 3
        self.h = moments(self.mu, deg, deg, self.N)
        self._lex = {}
        self._tilde = {}

    def P(self, n: int, m: int) -> np.ndarray:
        if m not in self._lex:
            self._lex[m] = gram_schmidt_lex(self.h, self.nmax + 1, m)
        return self._lex[m].coeffs[n]

    def Pt(self, n: int, m: int) -> np.ndarray:
        if n not in self._tilde:
            self._tilde[n] = tilde_lex(self.h, n, self.mmax + 1)
        return self._tilde[n].coeffs[m]

    def ip(self, f, g):
        return pair_moments(f, g, self.h)


def thm22_coefficients(oracle: LexOracle, n: int, m: int) -> dict:
    """The eight coefficient matrices of the lex recurrences at level ``(n, m)``, ``n, m >= 1``."""
    o = oracle
    P, Pt, ip = o.P, o.Pt, o.ip
    return {
        "A": ip(times_x(P(n - 1, m)), P(n, m)),
        "B": ip(times_x(P(n, m)), P(n, m)),
        "J1": ip(times_y(P(n, m - 1)), P(n, m)),
        "J2": -ip(times_y(P(n, m - 1)), Pt(n - 1, m)),
        "J3": -ip(times_y(P(n, m - 1)), Pt(n - 1, m - 1)),
        "Gamma": ip(P(n, m - 1), P(n, m)),
        "K": ip(P(n, m - 1), Pt(n - 1, m)),
        "I": ip(P(n, m), Pt(n, m)),
    }


def residuals_recurrences(oracle: LexOracle, n: int, m: int, coeffs: dict, npts: int = 100, seed: int = 0) -> dict:
    """Max residual of the four lex recurrence identities at seeded points of the square."""
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(-1, 1, (2, npts))
    ev = lambda c: evaluate(c, x, y)
    P, Pt = oracle.P, oracle.Pt
    c = coeffs
    r10 = x[:, None] * ev(P(n, m)) - (ev(P(n + 1, m)) @ c["A_next"].T + ev(P(n, m)) @ c["B"].T + ev(P(n - 1, m)) @ c["A"])
    r11 = ev(P(n, m)) @ c["Gamma"].T - (ev(P(n, m - 1)) - ev(Pt(n - 1, m)) @ c["K"].T)
    r12 = ev(P(n, m)) @ c["J1"].T - (
        y[:, None] * ev(P(n, m - 1)) + ev(Pt(n - 1, m)) @ c["J2"].T + ev(Pt(n - 1, m - 1)) @ c["J3"].T
    )
    r13 = ev(P(n, m)) - (ev(Pt(n, m)) @ c["I"].T + ev(P(n, m - 1)) @ c["Gamma"])
    return {k: float(np.abs(v).max()) for k, v in (("x_recurrence", r10), ("gamma_split", r11), ("y_recurrence", r12), ("tilde_split", r13))}


def check_level(oracle: LexOracle, n: int, m: int, npts: int = 100, seed: int = 0) -> tuple[dict, dict]:
    coeffs = thm22_coefficients(oracle, n, m)
    coeffs["A_next"] = oracle.ip(times_x(oracle.P(n, m)), oracle.P(n + 1, m))
    return coeffs, residuals_recurrences(oracle, n, m, coeffs, npts, seed)


# -- identities of the one-parameter proof ----------------------------------------


def phi_vector(s11: float, m: int, z, y) -> np.ndarray:
    """``phi_{1,m}(z, y) = Psi_1(z) U(y)`` (components along the last axis)."""
    op = jacobi_operator(DeformationFamily.one_param(s11), m)
    z = np.asarray(z, dtype=complex)
    ps = psi(op, 1, z)
    u = op.y_values(np.asarray(y, dtype=float))
    return np.einsum("...ij,...j->...i", ps, u)


def phi00(s11: float, z, y):
    return (s11 * s11 * z * z - 2 * s11 * z * y + 1) / (z * math.sqrt(1 - s11 * s11))


def chebyshev_u(j: int, y) -> np.ndarray:
    """``U_0..U_j`` at ``y`` (trailing axis)."""
    y = np.asarray(y)
    out = np.zeros(y.shape + (j + 1,), dtype=np.result_type(y, float))
    out[..., 0] = 1
    if j >= 1:
        out[..., 1] = 2 * y
    for k in range(2, j + 1):
        out[..., k] = 2 * y * out[..., k - 1] - out[..., k - 2]
    return out


def series_terms(zs_abs: float, m: int, tol: float = 1e-13) -> int:
    """Terms needed so that ``sum_{j >= K} |zs|^j (m+j+1)`` is below ``tol``."""
    if zs_abs == 0:
        return 1
    K = 1
    while True:
        tail = zs_abs**K * ((m + K + 1) / (1 - zs_abs) + zs_abs / (1 - zs_abs) ** 2)
        if tail < tol:
            return K
        K += 1


def phi_identity_check(s11: float, m: int, z, y) -> dict:
    """Residuals of the closed forms of ``phi_{1,m}`` and of its U-series."""
    z = np.asarray(z, dtype=complex)
    y = np.asarray(y, dtype=float)
    phi = phi_vector(s11, m, z, y)
    p0 = phi00(s11, z, y)
    K = series_terms(float(np.abs(z * s11).max()), m)
    u = chebyshev_u(m + K, y)
    closed = np.empty_like(phi)
    closed[..., :m] = p0[..., None] * u[..., :m]
    closed[..., m] = u[..., m] / z - s11 * (u[..., m - 1] if m >= 1 else 0)
    powers = (z[..., None] * s11) ** np.arange(K)
    series = math.sqrt(1 - s11 * s11) * p0 * np.sum(powers * u[..., m : m + K], axis=-1)
    return {
        "closed_form": float(np.abs(phi - closed).max()),
        "series": float(np.abs(phi[..., m] - series).max()),
        "phi00": float(np.abs(phi_vector(s11, 1, z, y)[..., 0] - p0).max()),
        "terms": K,
    }


# -- quadrature Gram matrices --------------------------------------------------------


def vector_gram(op: JacobiOperator, mu: BivariateMeasure, nmax: int, N: int = 512, lines: bool = True) -> np.ndarray:
    """Blocks ``<P_n q, P_k q>`` for ``n, k <= nmax`` on the ``N x N`` tensor Gauss grid.

    The integrand factors as ``P_n(x) q(y) q(y)^T P_k(x)^T``, so the y-sum
    is done once per x-node; the result is the same discrete sum as the
    full grid. ``lines=False`` drops the singular lines.
    """
    rule = quadrature_rule("chebyshev2", N)
    t, w = rule.nodes, rule.weights
    q = op.y_values(t)
    qq = (q[:, :, None] * q[:, None, :]).reshape(N, -1)
    ratio = mu.ac_ratio(t[:, None], t[None, :]) * w[None, :]
    slices = (ratio @ qq).reshape(N, op.size, op.size) * w[:, None, None]
    polys = eval_matrix_polys(op, nmax, t)
    out = np.einsum("nxab,xbc,kxdc->nkad", polys, slices, polys)
    if lines:
        for line in mu.lines:
            mass = ((w * line.y_ratio(t)) @ qq).reshape(op.size, op.size)
            p0 = eval_matrix_polys(op, nmax, np.array(line.x0))
            out = out + np.einsum("nab,bc,kdc->nkad", p0, mass, p0)
    return out


# -- one-variable slices ------------------------------------------------------------


def stieltjes(nodes: np.ndarray, weights: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Jacobi coefficients ``(a_1..a_count, b_0..b_{count-1})`` of a discrete measure, normalized to its mass."""
    w = weights / weights.sum()
    a = np.zeros(count)
    b = np.zeros(count)
    prev = np.zeros_like(nodes)
    cur = np.ones_like(nodes)
    for k in range(count):
        b[k] = np.sum(w * nodes * cur * cur)
        nxt = (nodes - b[k]) * cur - (a[k - 1] * prev if k else 0.0)
        a[k] = math.sqrt(np.sum(w * nxt * nxt))
        prev, cur = cur, nxt / a[k]
    return a, b


def slice_jacobi(mu: BivariateMeasure, x: float, count: int, N: int = 512) -> tuple[np.ndarray, np.ndarray, float]:
    """Recurrence of the y-measure ``mu(x, y) dy`` at fixed ``x`` and its (normalized) mass."""
    rule = quadrature_rule("chebyshev2", N)
    w = rule.weights * mu.ac_ratio(np.full_like(rule.nodes, x), rule.nodes)
    a, b = stieltjes(rule.nodes, w, count)
    return a, b, float(w.sum())
