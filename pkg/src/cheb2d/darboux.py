"""Adding a mass point at ``x0 = (z0 + 1/z0)/2`` by a Darboux transformation.

The transformed measure is ``sigma(x) / (2 z0 (x0 - x)) dx + r_hat delta_{x0}``.
``Q_n = int P_n dM_hat`` is expressed through the second scattering solution
at ``z0``, and the new orthonormal polynomials are a two-term combination
of the old ones. On matrix sequences ``f = (f_0, f_1, ...)`` (with
``f_{-1} = 0``) the shifted operator factors as ``L - x0 = P Q`` and the
new operator is ``L_hat - x0 = Q P``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import NotPositiveDefinite, cholesky_lower, hs_norm, reverse_cholesky_lower, solve_lower_triangular
from .measures import MatrixMeasure, matrix_measure_slice, measure_two_param, line_mass_matrix, line_formula_valid
from .parameters import DeformationFamily
from .recurrence import JacobiOperator, eval_matrix_polys, jacobi_operator, matrix_poly_coeffs
from .scattering import jost_fplus, scattering_sequence, weight_ratio


class SingularJost(np.linalg.LinAlgError):
    pass


class LinkBroken(AssertionError):
    pass


@dataclass(frozen=True)
class DarbouxConfig:
    z0: float

    def __post_init__(self):
        if not (0 < abs(self.z0) < 1) or not np.isreal(self.z0):
            raise ValueError(f"need real 0 < |z0| < 1, got {self.z0!r}")

    @property
    def x0(self) -> float:
        return (self.z0 + 1 / self.z0) / 2

    @classmethod
    def from_s10(cls, s10: float) -> "DarbouxConfig":
        return cls(1 / (2 * s10))


def f_minus(op: JacobiOperator, z) -> np.ndarray:
    """``f_-(z) = f_+(1/z)``, using the polynomial extension of ``f_+``."""
    return jost_fplus(op)(1 / np.asarray(z, dtype=float)).real


def _inv(a: np.ndarray, what: str) -> np.ndarray:
    if np.linalg.cond(a) > 1e12:
        raise SingularJost(f"{what} is numerically singular (cond {np.linalg.cond(a):.3e})")
    return np.linalg.inv(a)


def q_sequence(op: JacobiOperator, cfg: DarbouxConfig, nmax: int) -> np.ndarray:
    """``Q_{-1}..Q_nmax`` (array index ``n + 1``), ``Q_n = P^-_n(z0) f_-(z0)^{-T} / (2 z0)``."""
    fm = f_minus(op, cfg.z0)
    fmt_inv = _inv(fm.T, "f_-(z0)")
    pm = scattering_sequence(op, cfg.z0, nmax, -1).real
    return pm @ fmt_inv / (2 * cfg.z0)


@dataclass(frozen=True, eq=False)
class HatMeasure:
    """``ratio(x) (2/pi) sqrt(1-x^2) dx / (x0 - x)`` plus ``r_hat`` at ``x0``; ``ratio`` is that of ``sigma/(2 z0)``."""

    op: JacobiOperator
    cfg: DarbouxConfig
    r_hat: np.ndarray

    def sigma_hat_ratio(self, x) -> np.ndarray:
        return weight_ratio(self.op, x) / (2 * self.cfg.z0)

    def base_density(self, x) -> np.ndarray:
        """``sigma_hat(x) / (x0 - x)`` on (-1, 1)."""
        x = np.asarray(x, dtype=float)
        return self.as_matrix_measure().density(x)

    def as_matrix_measure(self) -> MatrixMeasure:
        fplus = jost_fplus(self.op)
        x0, z0 = self.cfg.x0, self.cfg.z0

        def ratio(x):
            x = np.asarray(x, dtype=float)
            return weight_ratio(self.op, x, fplus) / (2 * z0 * (x0 - x))[..., None, None]

        return MatrixMeasure(ratio, ((x0, self.r_hat),))

    def admissibility(self) -> float:
        """Smallest eigenvalue of ``r_hat``; negative values mean the transform is not a positive measure."""
        return float(np.linalg.eigvalsh(0.5 * (self.r_hat + self.r_hat.T)).min())


def hat_measure(op: JacobiOperator, cfg: DarbouxConfig) -> HatMeasure:
    z0 = cfg.z0
    fplus = jost_fplus(op)
    inner = (fplus(1 / z0).T @ fplus(z0)).real
    r = -((z0 - 1 / z0) / (4 * z0)) * _inv(inner, "f_+(1/z0)^T f_+(z0)")
    return HatMeasure(op, cfg, 0.5 * (r + r.T))


def dn_constants(op: JacobiOperator, cfg: DarbouxConfig, nmax: int) -> list[np.ndarray]:
    """Normalizing factors ``d_0..d_nmax``.

    ``d_0 = L0^{-1} Q_{-1}^{-T}`` with ``L0`` the Cholesky factor of ``Q_0``;
    for ``n >= 1`` ``d_n`` solves ``d_n G_n d_n^T = I`` with
    ``G_n = Q_{n-1}^T A_n Q_n / (2 z0)`` and ``d_n Q_{n-1}^T`` lower
    triangular with positive diagonal.
    """
    q = q_sequence(op, cfg, nmax)
    qq = lambda n: q[n + 1]
    out = [solve_lower_triangular(cholesky_lower(0.5 * (qq(0) + qq(0).T)), np.eye(op.size)) @ _inv(qq(-1).T, "Q_-1")]
    for n in range(1, nmax + 1):
        g = qq(n - 1).T @ op.A(n) @ qq(n) / (2 * cfg.z0)
        g = 0.5 * (g + g.T)
        c = qq(n - 1).T
        try:
            s = c.T @ np.linalg.solve(g, c)
            low = reverse_cholesky_lower(0.5 * (s + s.T))
        except NotPositiveDefinite as exc:
            raise NotPositiveDefinite(f"normalization at n = {n} is not positive: {exc}") from None
        out.append(low @ _inv(c, f"Q_{n - 1}"))
    return out


def hat_polynomials(op: JacobiOperator, cfg: DarbouxConfig, nmax: int, x) -> np.ndarray:
    """``P_hat_0..P_hat_nmax`` at ``x``; ``P_hat_n = d_n (Q_{n-1}^T A_n P_n - Q_n^T A_n^T P_{n-1})``."""
    pair = factor_operators(op, cfg, nmax + 1)
    polys = eval_matrix_polys(op, nmax, x)
    return pair.apply_Q(polys)


def hat_poly_coeffs(op: JacobiOperator, cfg: DarbouxConfig, nmax: int) -> list[np.ndarray]:
    """x-coefficients of ``P_hat_n``, entry ``n`` shaped ``(n+1, d, d)``."""
    pair = factor_operators(op, cfg, nmax + 1)
    coeffs = matrix_poly_coeffs(op, nmax)
    out = []
    for n in range(nmax + 1):
        c = np.zeros((n + 1, op.size, op.size))
        c[:] += pair.q_cur(n) @ coeffs[n]
        if n >= 1:
            c[:n] -= pair.q_prev(n) @ coeffs[n - 1]
        out.append(c)
    return out


@dataclass(frozen=True, eq=False)
class DifferenceOperatorPair:
    """Backward ``Q`` and forward ``P`` acting on stacks ``f[n]`` (leading axis ``n``).

    ``(Q f)_n = d_n (Q_{n-1}^T A_n f_n - Q_n^T A_n^T f_{n-1})``,
    ``(P f)_n = Q_n^{-T} (d_{n+1}^{-1} f_{n+1} - d_n^{-1} f_n)``.
    Coefficients are stored for ``n <= nmax``; sequences must vanish from
    index ``nmax`` on for ``P`` to be exact.
    """

    op: JacobiOperator
    cfg: DarbouxConfig
    Q: np.ndarray
    d: tuple
    nmax: int

    def _q(self, n):
        return self.Q[n + 1]

    def q_cur(self, n):
        return self.d[n] @ self._q(n - 1).T @ self.op.A(n)

    def q_prev(self, n):
        return self.d[n] @ self._q(n).T @ self.op.A(n).T

    def apply_Q(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        self._check_len(f)
        out = np.empty_like(f)
        for n in range(len(f)):
            out[n] = self.q_cur(n) @ f[n]
            if n >= 1:
                out[n] -= self.q_prev(n) @ f[n - 1]
        return out

    def apply_P(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        self._check_len(f)
        out = np.empty_like(f)
        dinv = [np.linalg.inv(dn) for dn in self.d]
        for n in range(len(f)):
            nxt = dinv[n + 1] @ f[n + 1] if n + 1 < len(f) else 0.0
            out[n] = np.linalg.solve(self._q(n).T, nxt - dinv[n] @ f[n])
        return out

    def apply_L(self, f: np.ndarray) -> np.ndarray:
        return apply_jacobi(self.op.A, self.op.B, f)

    def hat_A(self, n: int) -> np.ndarray:
        """``A_hat_n`` for ``1 <= n <= nmax`` read off the ``f_{n}`` coefficient of ``(Q P f)_{n-1}``."""
        k = n - 1
        return self.q_cur(k) @ np.linalg.solve(self._q(k).T, np.linalg.inv(self.d[n]))

    def hat_B(self, n: int) -> np.ndarray:
        out = -self.q_cur(n) @ np.linalg.solve(self._q(n).T, np.linalg.inv(self.d[n]))
        if n >= 1:
            out -= self.q_prev(n) @ np.linalg.solve(self._q(n - 1).T, np.linalg.inv(self.d[n]))
        return out + self.cfg.x0 * np.eye(self.op.size)

    def hat_A_transpose_route(self, n: int) -> np.ndarray:
        """``A_hat_n`` from the ``f_{n-1}`` coefficient of ``(Q P f)_n``, transposed back."""
        return (self.q_prev(n) @ np.linalg.solve(self._q(n - 1).T, np.linalg.inv(self.d[n - 1]))).T

    def apply_Lhat(self, f: np.ndarray) -> np.ndarray:
        return apply_jacobi(self.hat_A, self.hat_B, f)

    def _check_len(self, f):
        if len(f) > self.nmax + 1:
            raise ValueError(f"sequence of length {len(f)} exceeds stored coefficients (nmax = {self.nmax})")


def apply_jacobi(A, B, f: np.ndarray) -> np.ndarray:
    """``(L f)_n = A_{n+1} f_{n+1} + B_n f_n + A_n^T f_{n-1}`` on a finite stack (``f_{-1} = 0``)."""
    f = np.asarray(f)
    out = np.empty_like(f)
    for n in range(len(f)):
        out[n] = B(n) @ f[n]
        if n + 1 < len(f):
            out[n] += A(n + 1) @ f[n + 1]
        if n >= 1:
            out[n] += A(n).T @ f[n - 1]
    return out


def factor_operators(op: JacobiOperator, cfg: DarbouxConfig, nmax: int) -> DifferenceOperatorPair:
    """``P``, ``Q`` with coefficients up to index ``nmax``."""
    q = q_sequence(op, cfg, nmax + 1)
    d = tuple(dn_constants(op, cfg, nmax + 1))
    return DifferenceOperatorPair(op, cfg, q, d, nmax)


@dataclass(frozen=True)
class HatOperator:
    A: tuple
    B: tuple
    tail_index: int


def hat_operator(op: JacobiOperator, cfg: DarbouxConfig, nmax: int | None = None) -> HatOperator:
    """``A_hat_1..A_hat_nmax`` and ``B_hat_0..B_hat_{nmax-1}`` read off ``Q P``."""
    nmax = nmax or op.tail_index + 3
    pair = factor_operators(op, cfg, nmax)
    A = tuple(pair.hat_A(n) for n in range(1, nmax + 1))
    B = tuple(pair.hat_B(n) for n in range(nmax))
    half = 0.5 * np.eye(op.size)
    tail = 1
    for n in range(1, nmax + 1):
        if hs_norm(A[n - 1] - half) > 1e-12:
            tail = n + 1
    for n in range(nmax):
        if hs_norm(B[n]) > 1e-12:
            tail = max(tail, n + 2)
    return HatOperator(A, B, tail)


def hat_operator_from_coefficients(op: JacobiOperator, cfg: DarbouxConfig, nmax: int) -> HatOperator:
    """Independent route: match the two leading x-coefficients of ``x P_hat_n``."""
    c = hat_poly_coeffs(op, cfg, nmax + 1)
    A, B = [], []
    for n in range(nmax):
        a = c[n][n] @ np.linalg.inv(c[n + 1][n + 1])
        prev = c[n][n - 1] if n >= 1 else np.zeros_like(a)
        B.append((prev - a @ c[n + 1][n]) @ np.linalg.inv(c[n][n]))
        A.append(a)
    return HatOperator(tuple(A), tuple(B), -1)


# -- the link between the one- and two-parameter families -----------------------


@dataclass(frozen=True)
class LinkReport:
    s11: float
    s10: float
    m: int
    z0: float
    x0: float
    residuals: dict
    line_formula_valid: bool

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def alpha_matrix(s11: float, s10: float, m: int) -> np.ndarray:
    a = np.eye(m + 1)
    for i in range(1, m + 1):
        a[i, i - 1] = -2 * s10 * s11
    return a


def link_operators(op: JacobiOperator, s11: float, s10: float):
    """The explicit pair for ``z0 = 1/(2 s10)`` (returns ``apply_P``, ``apply_Q``)."""
    alpha = alpha_matrix(s11, s10, op.m)

    def apply_Q(f):
        out = np.empty_like(f)
        out[0] = alpha @ f[0]
        for n in range(1, len(f)):
            out[n] = f[n] - 4 * s10 * op.A(n).T @ f[n - 1]
        return out

    def apply_P(f):
        out = np.empty_like(f)
        nxt = lambda n: f[n + 1] if n + 1 < len(f) else np.zeros_like(f[0])
        out[0] = op.A(1) @ nxt(0) - alpha.T @ f[0] / (4 * s10)
        for n in range(1, len(f)):
            out[n] = op.A(n + 1) @ nxt(n) - f[n] / (4 * s10)
        return out

    return apply_P, apply_Q


def _seq_norm(a):
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def two_param_link(s11: float, s10: float, m: int, nmax: int = 8, seed: int = 0, tol: float = 1e-9) -> LinkReport:
    """Verify that the two-parameter family is the Darboux transform of the one-parameter one.

    Checks the explicit factorization against both operators, the generic
    transform at ``z0 = 1/(2 s10)`` against the two-parameter coefficients
    and polynomials (``P_hat_n = |z0| P'_n alpha``), and the a.c. x-slices
    of the two measures.
    """
    one = jacobi_operator(DeformationFamily.one_param(s11), m)
    two = jacobi_operator(DeformationFamily.two_param(s11, s10), m)
    cfg = DarbouxConfig.from_s10(s10)
    alpha = alpha_matrix(s11, s10, m)
    d = m + 1
    rng = np.random.default_rng(seed)
    res = {}

    apply_P, apply_Q = link_operators(one, s11, s10)
    pq, qp = 0.0, 0.0
    for _ in range(10):
        f = rng.standard_normal((nmax + 1, d, d))
        f[-2:] = 0
        lhs = apply_jacobi(one.A, one.B, f) - cfg.x0 * f
        pq = max(pq, _seq_norm(lhs - apply_P(apply_Q(f))))
        lhs = apply_jacobi(two.A, two.B, f) - cfg.x0 * f
        qp = max(qp, _seq_norm(lhs - apply_Q(apply_P(f))))
    res["explicit_PQ"] = pq
    res["explicit_QP"] = qp

    xs = rng.uniform(-1, 1, 50)
    p1 = eval_matrix_polys(one, nmax, xs)
    p2 = eval_matrix_polys(two, nmax, xs)
    res["explicit_Q_on_polys"] = _seq_norm(apply_Q(p1) - p2 @ alpha)

    hat = hat_polynomials(one, cfg, nmax, xs)
    res["hat_polys"] = float(max(hs_norm(hat[n] - abs(cfg.z0) * p2[n] @ alpha) for n in range(nmax + 1)))

    hop = hat_operator(one, cfg, nmax)
    res["hat_A"] = float(max(hs_norm(hop.A[n - 1] - two.A(n)) for n in range(1, nmax + 1)))
    res["hat_B"] = float(max(hs_norm(hop.B[n] - two.B(n)) for n in range(nmax)))

    res["slices"] = slice_residual(s11, s10, m)
    report = LinkReport(s11, s10, m, cfg.z0, cfg.x0, res, line_formula_valid(s11, s10))
    if report.max_residual > tol:
        raise LinkBroken(f"link residuals above {tol}: {res}")
    return report


def _u_basis(m: int) -> np.ndarray:
    return jacobi_operator(DeformationFamily.chebyshev(), m).y_basis


def slice_residual(s11: float, s10: float, m: int, npts: int = 64, N: int = 512) -> float:
    """Relative pointwise gap between ``z0^2 sigma_hat/(x0-x)`` and the U-basis x-slice of the two-parameter density."""
    one = jacobi_operator(DeformationFamily.one_param(s11), m)
    cfg = DarbouxConfig.from_s10(s10)
    hm = hat_measure(one, cfg).as_matrix_measure()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mu = measure_two_param(s11, s10)
    xs = np.cos((np.arange(npts) + 0.5) * math.pi / npts)
    c = _u_basis(m)
    target = c @ matrix_measure_slice(mu, m, xs, N) @ c.T
    got = cfg.z0**2 * hm.density(xs)
    scale = np.abs(target).max(axis=(-1, -2))
    return float((np.abs(got - target).max(axis=(-1, -2)) / scale).max())


def line_mass_residual(s11: float, s10: float, m: int, N: int = 512) -> float:
    """Gap between ``z0^2 alpha r_hat alpha^T`` and the closed-form line mass in the edge basis."""
    one = jacobi_operator(DeformationFamily.one_param(s11), m)
    two = jacobi_operator(DeformationFamily.two_param(s11, s10), m)
    cfg = DarbouxConfig.from_s10(s10)
    r = hat_measure(one, cfg).r_hat
    alpha = alpha_matrix(s11, s10, m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mu = measure_two_param(s11, s10)
    c = two.y_basis
    target = c @ line_mass_matrix(mu, m, 0, N) @ c.T
    return hs_norm(cfg.z0**2 * alpha @ r @ alpha.T - target)
