import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cheb2d.linalg import hs_norm
from cheb2d.parameters import DeformationFamily
from cheb2d.recurrence import eval_matrix_polys, jacobi_operator
from cheb2d.scattering import (
    AssumptionViolated,
    LaurentMatrixPolynomial,
    NearSingularJost,
    ZeroArgument,
    cauchy_residual,
    check_assumtwo,
    check_unit_circle_identities,
    jost_fminus,
    jost_fplus,
    jost_fplus_interpolated,
    joukowski_z,
    matrix_measure,
    matrix_weight,
    psi,
    scattering_sequence,
    weight_ratio,
)

ONE_PARAM = [DeformationFamily.chebyshev(), DeformationFamily.one_param(0.6), DeformationFamily.one_param(-0.4)]
CIRCLE = np.exp(1j * np.linspace(0.05, 2 * math.pi - 0.05, 37))


def test_joukowski_examples():
    assert joukowski_z(1.25).z == pytest.approx(0.5)
    assert joukowski_z(-1.25).z == pytest.approx(-0.5)
    assert joukowski_z(1e6).z == pytest.approx(5e-7, rel=1e-9)
    assert joukowski_z(0.0).z == pytest.approx(1j)


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_joukowski_root_property(x):
    z = joukowski_z(x).z
    assert abs(z) <= 1 + 1e-12
    assert abs(z * z - 2 * x * z + 1) <= 1e-9 * max(1.0, abs(x) ** 2)


def test_zero_argument():
    op = jacobi_operator(DeformationFamily.chebyshev(), 1)
    with pytest.raises(ZeroArgument):
        scattering_sequence(op, 0.0, 2)


def test_laurent_basics():
    p = LaurentMatrixPolynomial(-1, np.array([[[1.0]], [[2.0]], [[3.0]]]))
    assert p.high == 1
    assert p(2.0)[0, 0] == pytest.approx(0.5 + 2 + 6)
    assert p.reflect()(2.0)[0, 0] == pytest.approx(p(0.5)[0, 0])
    q = p.times_scalar_poly([0.0, 1.0])
    assert q(2.0)[0, 0] == pytest.approx(2 * p(2.0)[0, 0])
    assert LaurentMatrixPolynomial(0, np.zeros((2, 1, 1))).trimmed().coeffs.shape == (1, 1, 1)


def test_chebyshev_jost_is_free():
    op = jacobi_operator(DeformationFamily.chebyshev(), 2)
    z = 0.3 + 0.2j
    np.testing.assert_allclose(jost_fplus(op)(z), np.eye(3) / (2 * z), atol=1e-15)
    np.testing.assert_allclose(weight_ratio(op, np.array([0.2])), np.eye(3)[None], atol=1e-14)


@pytest.mark.parametrize("fam", ONE_PARAM, ids=str)
def test_symbolic_and_interpolated_jost_agree(fam):
    op = jacobi_operator(fam, 3)
    z = np.array([0.4 + 0.1j, -0.7j, 0.9])
    np.testing.assert_allclose(jost_fplus(op)(z), jost_fplus_interpolated(op)(z), atol=1e-12)


@pytest.mark.parametrize("fam", ONE_PARAM, ids=str)
@pytest.mark.parametrize("m", [0, 1, 3])
def test_unit_circle_identities(fam, m):
    op = jacobi_operator(fam, m)
    res = check_unit_circle_identities(op, CIRCLE)
    assert set(res) == {"jost", "reflection", "reflection_scattering", "jost_symmetry", "wronskian", "polynomial_expansion", "psi_recursion", "psi_star_constant"}
    assert max(res.values()) <= 1e-10, res


def test_unit_circle_identities_two_param():
    res = check_unit_circle_identities(jacobi_operator(DeformationFamily.two_param(0.3, 1.0), 2), CIRCLE)
    assert max(res.values()) <= 1e-10, res


def test_psi_free_region():
    op = jacobi_operator(DeformationFamily.one_param(0.6), 2)
    z = 0.5 * np.exp(0.3j)
    ref = psi(op, op.tail_index - 1, z) * z ** (op.tail_index - 1)
    for n in range(op.tail_index, 6):
        np.testing.assert_allclose(psi(op, n, z) * z**n, ref, atol=1e-13)


@pytest.mark.parametrize("fam", ONE_PARAM, ids=str)
def test_assumption_holds(fam):
    chk = check_assumtwo(jost_fplus(jacobi_operator(fam, 2)))
    assert chk.passed and chk.zero_count == 0 and chk.min_abs_det > 1e-3


def test_assumption_detects_zero():
    f = jost_fplus(jacobi_operator(DeformationFamily.one_param(0.6), 0))
    bad = f.times_scalar_poly([-0.5, 1.0])
    chk = check_assumtwo(bad)
    assert not chk.passed and chk.zero_count == 1


def test_assumption_pole():
    with pytest.raises(AssumptionViolated):
        check_assumtwo(LaurentMatrixPolynomial(-2, np.ones((1, 1, 1))))


def test_two_param_jost_has_bound_states():
    # the atom at x0 appears as zeros of z f_+ inside the disk
    for m in (0, 1, 2):
        chk = check_assumtwo(jost_fplus(jacobi_operator(DeformationFamily.two_param(0.3, 1.0), m)))
        assert not chk.passed and chk.zero_count == m + 1


@pytest.mark.parametrize("fam", ONE_PARAM, ids=str)
def test_matrix_weight_orthonormality(fam):
    op = jacobi_operator(fam, 2)
    g = matrix_measure(op).gram(lambda x: eval_matrix_polys(op, 4, x))
    d = op.size
    for a in range(5):
        for b in range(5):
            ref = np.eye(d) if a == b else np.zeros((d, d))
            assert hs_norm(g[a, b] - ref) <= 1e-10


@given(st.floats(-0.99, 0.99))
def test_weight_independent_of_branch(x):
    op = jacobi_operator(DeformationFamily.one_param(0.6), 2)
    fp = jost_fplus(op)
    z = np.exp(1j * math.acos(x))
    up = np.linalg.inv(np.conj(fp(z)).T @ fp(z))
    down = np.linalg.inv(np.conj(fp(np.conj(z))).T @ fp(np.conj(z)))
    np.testing.assert_allclose(up, np.conj(down), atol=1e-12)
    np.testing.assert_allclose(up.imag, -up.imag.T, atol=1e-12)
    w = matrix_weight(op, np.array([x]))[0]
    np.testing.assert_allclose(w, w.T, atol=1e-14)
    assert np.linalg.eigvalsh(w).min() >= -1e-14


def test_fminus_is_reflection():
    op = jacobi_operator(DeformationFamily.one_param(0.6), 1)
    z = 0.4 - 0.3j
    np.testing.assert_allclose(jost_fminus(op)(1 / z), jost_fplus(op)(z), atol=1e-13)


def test_near_singular_weight():
    f = LaurentMatrixPolynomial(0, np.array([[[1.0, 0.0], [0.0, 1e-9]]]))
    op = jacobi_operator(DeformationFamily.chebyshev(), 1)
    with pytest.raises(NearSingularJost):
        weight_ratio(op, np.array([0.1]), f)


@pytest.mark.parametrize("fam", ONE_PARAM, ids=str)
@pytest.mark.parametrize("z", [0.5, -0.3])
def test_cauchy_representation(fam, z):
    assert cauchy_residual(jacobi_operator(fam, 2), z) <= 1e-10
