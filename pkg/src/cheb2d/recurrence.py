"""Block Jacobi operators of the deformation families and their polynomials.

The matrix polynomials ``P_n`` start from ``P_0 = I`` and are orthonormal
against a matrix measure of unit mass. The bivariate vector polynomials are
``P_n(x) @ q(y)`` where ``q(y) = (q_0(y), ..., q_m(y))`` are the orthonormal
polynomials of the edge ``n = 0`` (Chebyshev U_j for the one-parameter
family, a shifted variant for the two-parameter family).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import solve_lower_triangular
from .parameters import DeformationFamily, InvalidFamily, ledger_for_family, line_recurrence


class UnsupportedFamily(ValueError):
    pass


def line_basis(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Monomial coefficients of the orthonormal polynomials of a 1D recurrence.

    Row ``j`` holds the ascending coefficients of ``q_j`` where
    ``y q_j = a_{j+1} q_{j+1} + b_j q_j + a_j q_{j-1}``, ``q_0 = 1``.
    """
    c = np.zeros((m + 1, m + 1))
    c[0, 0] = 1.0
    for j in range(m):
        nxt = np.zeros(m + 1)
        nxt[1:] = c[j, :-1]
        nxt -= b[j] * c[j]
        if j >= 1:
            nxt -= a[j - 1] * c[j - 1]
        c[j + 1] = nxt / a[j]
    return c


@dataclass(frozen=True, eq=False)
class JacobiOperator:
    """Coefficients ``A_n`` (n >= 1) and ``B_n`` (n >= 0), free beyond the stored prefix.

    ``A_prefix[k]`` is ``A_{k+1}``; ``B_prefix[k]`` is ``B_k``. Past the
    prefixes ``A_n = I/2`` and ``B_n = 0``. ``A_0 = I`` by convention.
    ``y_a``/``y_b`` are the edge recurrence coefficients that define ``q(y)``.
    """

    m: int
    A_prefix: tuple = ()
    B_prefix: tuple = ()
    y_a: np.ndarray = field(default=None, compare=False)
    y_b: np.ndarray = field(default=None, compare=False)
    family: DeformationFamily | None = None

    def __post_init__(self):
        d = self.m + 1
        for a in self.A_prefix:
            if a.shape != (d, d) or np.any(np.triu(a, 1) != 0) or np.any(np.diag(a) <= 0):
                raise ValueError("A_n must be lower triangular with positive diagonal")
        for b in self.B_prefix:
            if b.shape != (d, d) or np.any(b != b.T):
                raise ValueError("B_n must be symmetric")
        if self.y_a is None:
            object.__setattr__(self, "y_a", np.full(self.m, 0.5))
            object.__setattr__(self, "y_b", np.zeros(self.m))

    @property
    def size(self) -> int:
        return self.m + 1

    def A(self, n: int) -> np.ndarray:
        if n == 0:
            return np.eye(self.size)
        if n <= len(self.A_prefix):
            return self.A_prefix[n - 1]
        return 0.5 * np.eye(self.size)

    def B(self, n: int) -> np.ndarray:
        if n < len(self.B_prefix):
            return self.B_prefix[n]
        return np.zeros((self.size, self.size))

    @property
    def tail_index(self) -> int:
        """Smallest ``N >= 1`` with ``A_n = I/2`` and ``B_{n-1} = 0`` for all ``n >= N``."""
        half = 0.5 * np.eye(self.size)
        n0 = 1
        for k, a in enumerate(self.A_prefix, start=1):
            if np.any(a != half):
                n0 = max(n0, k + 1)
        for k, b in enumerate(self.B_prefix):
            if np.any(b != 0):
                n0 = max(n0, k + 2)
        return n0

    @property
    def y_basis(self) -> np.ndarray:
        """Monomial coefficient rows of ``q_0..q_m`` (lower triangular)."""
        return line_basis(self.y_a, self.y_b, self.m)

    def y_values(self, y) -> np.ndarray:
        """``q_0(y)..q_m(y)`` by recurrence, shape ``y.shape + (m+1,)``."""
        y = np.asarray(y)
        out = np.zeros(y.shape + (self.size,), dtype=np.result_type(y, float))
        out[..., 0] = 1.0
        prev = np.zeros_like(out[..., 0])
        for j in range(self.m):
            cur = ((y - self.y_b[j]) * out[..., j] - (self.y_a[j - 1] * prev if j else 0.0)) / self.y_a[j]
            prev = out[..., j]
            out[..., j + 1] = cur
        return out


def _bidiag(m: int, diag: np.ndarray, sub: float) -> np.ndarray:
    a = np.diag(diag)
    for i in range(1, m + 1):
        a[i, i - 1] = sub
    return a


def _tridiag(m: int, diag, off: float) -> np.ndarray:
    b = np.diag(np.broadcast_to(np.asarray(diag, dtype=float), (m + 1,)).copy())
    for i in range(m):
        b[i, i + 1] = b[i + 1, i] = off
    return b


def jacobi_operator(family: DeformationFamily, m: int) -> JacobiOperator:
    family.check()
    ledger = ledger_for_family(family, 1, max(m, 1))
    ya, yb = line_recurrence(ledger, "y", m)
    if family.tag == "chebyshev":
        return JacobiOperator(m, (), (), ya, yb, family)
    s, rho = family.s11, family.rho
    diag = np.full(m + 1, rho / 2)
    diag[-1] = 0.5
    if family.tag == "one_param":
        a1 = np.diag(diag)
        b0 = _tridiag(m, 0.0, s / 2)
        return JacobiOperator(m, (a1,), (b0,), ya, yb, family)
    if family.tag == "two_param":
        s10 = family.s10
        a1 = _bidiag(m, diag, -2 * s10 * s * rho / 2)
        d0 = np.full(m + 1, s10 * (1 - s * s))
        d0[0] = s10
        b0 = _tridiag(m, d0, s / 2)
        b1 = np.diag(np.r_[np.full(m, s10 * s * s), 0.0])
        return JacobiOperator(m, (a1,), (b0, b1), ya, yb, family)
    raise InvalidFamily(family.tag)


def eval_matrix_polys(op: JacobiOperator, nmax: int, x) -> np.ndarray:
    """``P_0(x)..P_nmax(x)`` as an array of shape ``(nmax+1,) + x.shape + (d, d)``."""
    x = np.asarray(x)
    d = op.size
    eye = np.eye(d)
    out = np.zeros((nmax + 1,) + x.shape + (d, d), dtype=np.result_type(x, float))
    out[0] = eye
    prev = np.zeros_like(out[0])
    xi = x[..., None, None] * eye
    for n in range(nmax):
        rhs = (xi - op.B(n)) @ out[n] - op.A(n).T @ prev
        ainv = solve_lower_triangular(op.A(n + 1), eye)
        prev = out[n]
        out[n + 1] = ainv @ rhs
    return out


def matrix_poly_coeffs(op: JacobiOperator, nmax: int) -> list[np.ndarray]:
    """Coefficients in ``x``: entry ``n`` has shape ``(n+1, d, d)``, index = power."""
    d = op.size
    eye = np.eye(d)
    coeffs = [eye[None].copy()]
    prev = np.zeros((1, d, d))
    for n in range(nmax):
        cur = coeffs[n]
        rhs = np.zeros((n + 2, d, d))
        rhs[1:] += cur
        rhs[:-1] -= op.B(n) @ cur
        rhs[: prev.shape[0]] -= op.A(n).T @ prev
        ainv = solve_lower_triangular(op.A(n + 1), eye)
        prev = cur
        coeffs.append(ainv @ rhs)
    return coeffs


def leading_coefficient(op: JacobiOperator, n: int) -> np.ndarray:
    return matrix_poly_coeffs(op, n)[n][n]


@dataclass(frozen=True)
class VectorPolynomialValue:
    n: int
    m: int
    value: np.ndarray


def eval_vector_poly(op: JacobiOperator, n: int, x, y) -> VectorPolynomialValue:
    """``P_n(x) @ q(y)``; the last axis of ``value`` indexes the m+1 components."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    p = eval_matrix_polys(op, n, x)[n]
    q = op.y_values(y)
    return VectorPolynomialValue(n, op.m, np.einsum("...ij,...j->...i", p, q))


def vector_poly_coeffs(op: JacobiOperator, n: int) -> np.ndarray:
    """Monomial coefficients ``c[l, i, j]`` of ``x**i y**j`` in component ``l``."""
    px = matrix_poly_coeffs(op, n)[n]
    return np.einsum("ilk,kj->lij", px, op.y_basis)


def parametric_slice_coeffs(family: DeformationFamily, x: float, m: int) -> tuple[float, float]:
    """``(a_m, b_{m-1})`` of the y-recurrence at fixed x, one-parameter family only."""
    if family.tag == "chebyshev":
        return 0.5, 0.0
    if family.tag != "one_param":
        raise UnsupportedFamily("slice coefficients are only known for the one-parameter family")
    if m < 1:
        raise ValueError("m >= 1")
    if m == 1:
        return family.rho / 2, family.s11 * x
    return 0.5, 0.0


def parametric_psi(family: DeformationFamily, x: float, m: int, w) -> complex:
    """``psi_m(w) = q_m - 2 w a_m q_{m-1}`` with ``y = (w + 1/w)/2`` and ``q_0 = 1``."""
    w = np.asarray(w, dtype=complex)
    y = (w + 1 / w) / 2
    q_prev, q = np.zeros_like(w), np.ones_like(w)
    a_prev = 0.0
    for k in range(1, m + 1):
        a_k, b_km1 = parametric_slice_coeffs(family, x, k)
        q_prev, q = q, ((y - b_km1) * q - a_prev * q_prev) / a_k
        a_prev = a_k
    a_m = parametric_slice_coeffs(family, x, m)[0]
    return q - 2 * w * a_m * q_prev


@dataclass(frozen=True)
class TotalDegreeCoefficients:
    n: int
    Ax: np.ndarray
    Ay: np.ndarray
    Bx: np.ndarray
    By: np.ndarray


def total_degree_coeffs(family: DeformationFamily, n: int) -> TotalDegreeCoefficients:
    """Conjectured total-degree recurrence matrices (computation-suggested, unproved)."""
    s = 0.0 if family.tag == "chebyshev" else family.s11
    rho = math.sqrt(1 - s * s)
    ax = np.zeros((n + 1, n + 2))
    ax[0, 0], ax[0, 1] = s / 2, rho / 2
    for i in range(1, n + 1):
        ax[i, i + 1] = 0.5
    ay = np.zeros((n + 1, n + 2))
    ay[:, : n + 1] = 0.5 * np.eye(n + 1)
    bx = np.zeros((n + 1, n + 1))
    by = np.zeros((n + 1, n + 1))
    if family.tag == "two_param":
        s10 = family.s10
        if n == 0:
            bx[0, 0] = s10
            by[0, 0] = s10 * s
        else:
            bx[:2, :2] = s10 * np.array([[1 - s * s, -s * rho], [-s * rho, s * s]])
    return TotalDegreeCoefficients(n, ax, ay, bx, by)
