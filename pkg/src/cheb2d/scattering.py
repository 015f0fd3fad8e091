"""Matrix Jost functions and scattering solutions of finitely supported block Jacobi operators.

With ``x = (z + 1/z)/2`` and the operator free past its tail index ``N``,
the scattering solutions are ``z^{+-n} I`` for ``n >= N - 1`` and are
continued downward by the recurrence. The Jost function ``f_+`` is the
Laurent polynomial ``z^k Psi_k(z) / (2z)`` for any ``k >= N - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .linalg import hs_norm, solve_upper_triangular
from .measures import MatrixMeasure, quadrature_rule
from .recurrence import JacobiOperator, eval_matrix_polys, matrix_poly_coeffs


class ZeroArgument(ValueError):
    pass


class AssumptionViolated(ValueError):
    pass


class NearSingularJost(np.linalg.LinAlgError):
    pass


JOST_COND_MAX = 1e12


@dataclass(frozen=True)
class JoukowskiPoint:
    x: complex
    z: complex


def joukowski_z(x):
    """Root ``z`` of ``z^2 - 2xz + 1 = 0`` with ``|z| <= 1``.

    On the cut ``[-1, 1]`` the root on the upper half circle is returned
    (``z = exp(i arccos x)``); elsewhere the small root, computed as the
    reciprocal of the large one to avoid cancellation.
    """
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=complex))
    z = np.empty_like(xa)
    on_cut = (xa.imag == 0) & (np.abs(xa.real) <= 1)
    z[on_cut] = np.exp(1j * np.arccos(xa.real[on_cut]))
    off = ~on_cut
    if np.any(off):
        xo = xa[off]
        root = np.sqrt(xo * xo - 1)
        big = np.where(np.abs(xo + root) >= np.abs(xo - root), xo + root, xo - root)
        zo = 1 / big
        # ties |z| = 1 off the real cut are not reachable; keep Im z >= 0 convention anyway
        zo = np.where((np.abs(np.abs(zo) - 1) < 1e-15) & (zo.imag < 0), 1 / zo, zo)
        z[off] = zo
    if scalar:
        return JoukowskiPoint(complex(xa[0]), complex(z[0]))
    return JoukowskiPoint(xa, z)


def _x_of_z(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroArgument("z = 0 has no Joukowski preimage")
    return (z + 1 / z) / 2


# -- Laurent matrix polynomials ------------------------------------------------


@dataclass(frozen=True, eq=False)
class LaurentMatrixPolynomial:
    """``sum_k coeffs[k] z^(low + k)`` with square matrix coefficients."""

    low: int
    coeffs: np.ndarray

    @property
    def high(self) -> int:
        return self.low + len(self.coeffs) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        powers = z[..., None] ** np.arange(self.low, self.high + 1)
        return np.einsum("...k,kij->...ij", powers, self.coeffs)

    def coefficient(self, k: int) -> np.ndarray:
        if self.low <= k <= self.high:
            return self.coeffs[k - self.low]
        return np.zeros(self.coeffs.shape[1:], dtype=self.coeffs.dtype)

    def transpose(self) -> "LaurentMatrixPolynomial":
        return LaurentMatrixPolynomial(self.low, np.swapaxes(self.coeffs, 1, 2))

    def reflect(self) -> "LaurentMatrixPolynomial":
        """``z -> 1/z``."""
        return LaurentMatrixPolynomial(-self.high, self.coeffs[::-1].copy())

    def times_scalar_poly(self, p) -> "LaurentMatrixPolynomial":
        """Multiply by ``sum_k p[k] z^k``."""
        p = np.asarray(p)
        out = np.zeros((len(self.coeffs) + len(p) - 1,) + self.coeffs.shape[1:], dtype=np.result_type(p, self.coeffs))
        for k, c in enumerate(p):
            out[k : k + len(self.coeffs)] += c * self.coeffs
        return LaurentMatrixPolynomial(self.low, out)

    def trimmed(self, atol: float = 0.0) -> "LaurentMatrixPolynomial":
        mags = np.abs(self.coeffs).reshape(len(self.coeffs), -1).max(axis=1)
        keep = np.nonzero(mags > atol)[0]
        if len(keep) == 0:
            return LaurentMatrixPolynomial(0, self.coeffs[:1] * 0)
        return LaurentMatrixPolynomial(self.low + keep[0], self.coeffs[keep[0] : keep[-1] + 1].copy())


def _substitute_joukowski(xcoeffs: np.ndarray) -> LaurentMatrixPolynomial:
    """Rewrite ``sum_i c_i x^i`` with ``x = (z + 1/z)/2`` as a Laurent polynomial."""
    deg = len(xcoeffs) - 1
    out = np.zeros((2 * deg + 1,) + xcoeffs.shape[1:], dtype=float)
    for i, c in enumerate(xcoeffs):
        for j in range(i + 1):
            out[2 * j - i + deg] += comb(i, j) / 2.0**i * c
    return LaurentMatrixPolynomial(-deg, out)


def psi_star_laurent(op: JacobiOperator, k: int) -> LaurentMatrixPolynomial:
    """``z^k Psi_k(z)`` built symbolically from the x-coefficients of ``P_k``, ``P_{k-1}``."""
    d = op.size
    coeffs = matrix_poly_coeffs(op, max(k, 0))
    pk = _substitute_joukowski(coeffs[k])
    acc = np.zeros((4 * k + 4, d, d))
    base = 2 * k + 1  # array index of power 0
    for p in range(pk.low, pk.high + 1):
        acc[base + p + k] += pk.coefficient(p)
    if k >= 1:
        pkm1 = _substitute_joukowski(coeffs[k - 1])
        at = op.A(k).T
        for p in range(pkm1.low, pkm1.high + 1):
            acc[base + p + k + 1] -= 2 * at @ pkm1.coefficient(p)
    return LaurentMatrixPolynomial(-base, acc).trimmed()


def jost_fplus(op: JacobiOperator) -> LaurentMatrixPolynomial:
    """``f_+(z) = Psi*_{N-1}(z) / (2z)`` (symbolic route)."""
    k = op.tail_index - 1
    ps = psi_star_laurent(op, k)
    return LaurentMatrixPolynomial(ps.low - 1, ps.coeffs / 2.0)


def jost_fplus_interpolated(op: JacobiOperator) -> LaurentMatrixPolynomial:
    """``f_+`` by sampling ``z^N Psi_N`` on ``4N + 1`` roots of unity and inverting the DFT."""
    n0 = op.tail_index
    npts = 4 * n0 + 1
    zs = np.exp(2j * np.pi * np.arange(npts) / npts)
    vals = zs[:, None, None] ** n0 * psi(op, n0, zs)
    c = np.fft.fft(vals, axis=0) / npts
    c = np.where(np.abs(c.imag) < 1e-13, c.real, c)
    coeffs = np.real_if_close(c, tol=1e6) / 2.0
    return LaurentMatrixPolynomial(-1, np.asarray(coeffs)).trimmed(atol=1e-13)


def jost_fminus(op: JacobiOperator) -> LaurentMatrixPolynomial:
    """``f_-(z) = f_+(1/z)`` as a Laurent polynomial."""
    return jost_fplus(op).reflect()


def psi(op: JacobiOperator, n: int, z) -> np.ndarray:
    """``Psi_n(z) = P_n(x) - 2 z A_n^T P_{n-1}(x)``, ``x = (z + 1/z)/2``."""
    z = np.asarray(z, dtype=complex)
    x = _x_of_z(z)
    polys = eval_matrix_polys(op, n, x)
    if n == 0:
        return polys[0]
    return polys[n] - 2 * z[..., None, None] * (op.A(n).T @ polys[n - 1])


def psi_by_recursion(op: JacobiOperator, n: int, z) -> np.ndarray:
    """``Psi_n`` propagated from ``Psi_0 = I`` by the one-step update."""
    z = np.asarray(z, dtype=complex)
    x = _x_of_z(z)
    d = op.size
    eye = np.eye(d)
    polys = eval_matrix_polys(op, max(n - 1, 0), x)
    zz = z[..., None, None]
    cur = np.broadcast_to(eye, z.shape + (d, d)).astype(complex)
    for k in range(1, n + 1):
        a = op.A(k)
        ainv = np.linalg.inv(a)
        inner = (eye - 4 * a @ a.T) * zz - 2 * op.B(k - 1)
        cur = ainv @ cur / (2 * zz) + 0.5 * ainv @ inner @ polys[k - 1]
    return cur


@dataclass(frozen=True)
class AssumptionCheck:
    passed: bool
    min_abs_det: float
    zero_count: int


def check_assumtwo(fplus: LaurentMatrixPolynomial, ngrid: int = 32, nangles: int | None = None) -> AssumptionCheck:
    """Sample ``det(z f_+(z))`` on circles ``|z| = k/ngrid`` and count zeros inside the unit disk."""
    nangles = nangles or max(256, 8 * ngrid)
    ang = np.exp(2j * np.pi * (np.arange(nangles) + 0.5) / nangles)
    radii = np.arange(1, ngrid + 1) / ngrid
    zs = np.concatenate([[0.0], (radii[:, None] * ang[None, :]).ravel()])
    zf = LaurentMatrixPolynomial(fplus.low + 1, fplus.coeffs)
    if zf.low < 0:
        raise AssumptionViolated("z f_+(z) has a pole at z = 0")
    dets = np.linalg.det(zf(zs))
    circle = np.exp(2j * np.pi * np.arange(8192) / 8192)
    dc = np.linalg.det(zf(circle))
    phase = np.unwrap(np.angle(np.r_[dc, dc[:1]]))
    count = int(round((phase[-1] - phase[0]) / (2 * math.pi)))
    mn = float(min(np.abs(dets).min(), np.abs(dc).min()))
    return AssumptionCheck(mn > 1e-10 and count == 0, mn, count)


def scattering_sequence(op: JacobiOperator, z, nmax: int, sign: int = +1) -> np.ndarray:
    """``P^{sign}_n(z)`` for ``n = -1..nmax`` (array index ``n + 1``).

    Free region ``n >= N - 1`` is ``z^{sign n} I``; below it the recurrence is
    run downward, ``P_{n-1} = A_n^{-T}((x - B_n) P_n - A_{n+1} P_{n+1})``.
    """
    z = np.asarray(z, dtype=complex)
    x = _x_of_z(z)
    d = op.size
    eye = np.eye(d)
    top = max(nmax, op.tail_index - 1, 0) + 1
    out = np.zeros((top + 2,) + z.shape + (d, d), dtype=complex)
    for n in range(op.tail_index - 1, top + 1):
        out[n + 1] = (z ** (sign * n))[..., None, None] * eye
    xi = x[..., None, None] * eye
    for n in range(op.tail_index - 1, -1, -1):
        rhs = (xi - op.B(n)) @ out[n + 1] - op.A(n + 1) @ out[n + 2]
        out[n] = solve_upper_triangular(op.A(n).T, eye) @ rhs
    return out[: nmax + 2]


def scattering_solutions(op: JacobiOperator, n: int, z) -> tuple[np.ndarray, np.ndarray]:
    """``(P^+_n(z), P^-_n(z))``."""
    plus = scattering_sequence(op, z, n, +1)[n + 1]
    minus = scattering_sequence(op, z, n, -1)[n + 1]
    return plus, minus


def wronskian(op: JacobiOperator, X, Y, n: int, x) -> np.ndarray:
    """``X_n(conj x)^H A_{n+1} Y_{n+1}(x) - X_{n+1}(conj x)^H A_{n+1}^T Y_n(x)``.

    ``X`` and ``Y`` are samplers ``(k, x) -> matrix`` of two solutions.
    """
    xc = np.conj(x)
    a = op.A(n + 1)
    xn = np.conj(np.swapaxes(X(n, xc), -1, -2))
    xn1 = np.conj(np.swapaxes(X(n + 1, xc), -1, -2))
    return xn @ a @ Y(n + 1, x) - xn1 @ a.T @ Y(n, x)


def matrix_weight(op: JacobiOperator, x, fplus: LaurentMatrixPolynomial | None = None) -> np.ndarray:
    """``sigma_m(x) = (1/2pi) sqrt(1-x^2) (f_+^H f_+)^{-1}`` at ``z = exp(i arccos x)``."""
    x = np.asarray(x, dtype=float)
    return chebyshev_weight_matrix(x) * weight_ratio(op, x, fplus)


def chebyshev_weight_matrix(x):
    return (2 / math.pi * np.sqrt(1 - x * x))[..., None, None]


def weight_ratio(op: JacobiOperator, x, fplus: LaurentMatrixPolynomial | None = None) -> np.ndarray:
    """``sigma_m`` divided by ``(2/pi) sqrt(1-x^2)``: ``(f_+^H f_+)^{-1} / 4``."""
    fplus = fplus or jost_fplus(op)
    x = np.asarray(x, dtype=float)
    z = np.exp(1j * np.arccos(np.clip(x, -1, 1)))
    f = fplus(z)
    g = np.conj(np.swapaxes(f, -1, -2)) @ f
    cond = np.linalg.cond(g)
    if np.any(cond > JOST_COND_MAX):
        raise NearSingularJost(f"f_+^H f_+ condition number {np.max(cond):.3e}")
    inv = np.linalg.inv(g)
    inv = 0.5 * (inv + np.conj(np.swapaxes(inv, -1, -2)))
    return inv.real / 4


def matrix_measure(op: JacobiOperator) -> MatrixMeasure:
    fplus = jost_fplus(op)
    return MatrixMeasure(lambda x: weight_ratio(op, x, fplus))


def _excluded(z, radius=1e-3):
    z = np.asarray(z)
    return (np.abs(z - 1) < radius) | (np.abs(z + 1) < radius)


def check_unit_circle_identities(op: JacobiOperator, zsamples, nmax: int = 6) -> dict:
    """Max residual per identity over unit-circle samples (``z = +-1`` neighbourhoods dropped)."""
    z = np.asarray(zsamples, dtype=complex)
    z = z[~_excluded(z)]
    x = _x_of_z(z).real
    d = op.size
    eye = np.eye(d)
    zz = z[:, None, None]
    fp = jost_fplus(op)
    fplus = fp(z)
    pplus = scattering_sequence(op, z, nmax + 1, +1)
    pminus = scattering_sequence(op, z, nmax + 1, -1)
    fminus = np.swapaxes(pminus[0], -1, -2)
    tr = lambda a: np.swapaxes(a, -1, -2)
    herm = lambda a: np.conj(tr(a))
    norm = lambda a: float(np.sqrt((np.abs(a) ** 2).sum(axis=(-1, -2))).max())
    out = {}
    out["jost"] = norm(tr(pplus[0]) - fplus)
    out["reflection"] = norm(fplus - jost_fminus(op)(1 / z))
    out["reflection_scattering"] = norm(fminus - tr(scattering_sequence(op, 1 / z, 0, +1)[0]))
    out["jost_symmetry"] = norm(tr(fplus) @ fminus - tr(fminus) @ fplus)
    polys = eval_matrix_polys(op, nmax + 1, x)
    wr, ex = 0.0, 0.0
    for n in range(-1, nmax + 1):
        a = op.A(n + 1)
        w = herm(pplus[n + 1]) @ a @ pplus[n + 2] - herm(pplus[n + 2]) @ a.T @ pplus[n + 1]
        wr = max(wr, norm(w - 0.5 * (zz - 1 / zz) * eye))
    for n in range(0, nmax + 1):
        rhs = 2 / (zz - 1 / zz) * (pplus[n + 1] @ fminus - pminus[n + 1] @ fplus)
        ex = max(ex, norm(polys[n] - rhs))
    out["wronskian"] = wr
    out["polynomial_expansion"] = ex
    rec = 0.0
    for n in range(0, nmax + 1):
        rec = max(rec, norm(psi(op, n, z) - psi_by_recursion(op, n, z)))
    out["psi_recursion"] = rec
    ref = psi_star_laurent(op, op.tail_index - 1)(z)
    const = 0.0
    for n in range(op.tail_index - 1, nmax + 1):
        const = max(const, norm(zz**n * psi(op, n, z) - ref))
    out["psi_star_constant"] = const
    return out


def cauchy_residual(op: JacobiOperator, z: float, nmax: int = 4, N: int = 1024) -> float:
    """``P^+_n(z)`` against ``int P_n(y)/(x - y) dM(y) f_+(z)^T`` for real ``0 < |z| < 1``."""
    rule = quadrature_rule("chebyshev2", N)
    x = float(np.real((z + 1 / z) / 2))
    fplus = jost_fplus(op)
    ratio = weight_ratio(op, rule.nodes, fplus)
    polys = eval_matrix_polys(op, nmax, rule.nodes)
    pplus = scattering_sequence(op, z, nmax, +1)
    ft = fplus(z).T
    worst = 0.0
    for n in range(nmax + 1):
        integral = np.einsum("k,kab,kbc->ac", rule.weights / (x - rule.nodes), polys[n], ratio)
        worst = max(worst, hs_norm(pplus[n + 1] - integral @ ft))
    return worst
