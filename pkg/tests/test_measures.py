import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cheb2d.linalg import hs_norm
from cheb2d.measures import (
    InsufficientMoments,
    density_one_param,
    doubly_hankel,
    hankel_defects,
    inner_product,
    line_formula_valid,
    line_mass_matrix,
    matrix_measure_slice,
    measure_chebyshev,
    measure_for_family,
    measure_one_param,
    measure_two_param,
    moments,
    quadrature_rule,
)
from cheb2d.parameters import DeformationFamily, InvalidFamily
from cheb2d.recurrence import eval_vector_poly, jacobi_operator

from families import FAMILIES


def test_density_example():
    assert density_one_param(0.6, 0.0, 0.0) == pytest.approx(0.63326, abs=1e-5)
    with pytest.raises(InvalidFamily):
        density_one_param(1.0, 0.0, 0.0)


def test_quadrature_small_rules():
    r = quadrature_rule("chebyshev2", 1)
    assert r.weights.sum() == pytest.approx(1.0)
    r = quadrature_rule("chebyshev2", 2)
    assert r.weights @ r.nodes**2 == pytest.approx(0.25)
    with pytest.raises(ValueError):
        quadrature_rule("legendre", 4)


@given(st.integers(0, 40))
def test_quadrature_exact_on_chebyshev_u(k):
    r = quadrature_rule("chebyshev2", 21)
    theta = np.arccos(r.nodes)
    u = np.sin((k + 1) * theta) / np.sin(theta)
    assert r.weights @ u == pytest.approx(1.0 if k == 0 else 0.0, abs=1e-13)


@pytest.mark.parametrize("s", [0.6, -0.3, 0.9])
def test_one_param_low_moments(s):
    h = moments(measure_one_param(s), 2, 2, N=2048 if abs(s) > 0.85 else 512)
    assert h[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert h[1, 1] == pytest.approx(s / 4, abs=1e-12)
    assert h[1, 0] == pytest.approx(0.0, abs=1e-14)
    assert h[2, 0] == pytest.approx(0.25, abs=1e-12)


def test_two_param_total_mass():
    h = moments(measure_two_param(0.3, 1.0), 1, 1)
    assert h[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert h[1, 0] == pytest.approx(1.0, abs=1e-12)


def test_line_formula_warning():
    assert line_formula_valid(0.3, 1.0) and not line_formula_valid(0.6, 1.0)
    with pytest.warns(RuntimeWarning):
        mu = measure_two_param(0.6, 1.0)
    assert mu.notes
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        measure_two_param(0.3, 1.0)


def test_measure_for_family_dispatch():
    assert measure_for_family(DeformationFamily.chebyshev()).lines == ()
    assert len(measure_for_family(DeformationFamily.two_param(0.3, -1.0)).lines) == 1
    assert measure_for_family(DeformationFamily.two_param(0.3, -1.0)).lines[0].x0 == pytest.approx(-1.25)


@pytest.mark.parametrize("fam", [f for f in FAMILIES if f.tag != "two_param" or line_formula_valid(f.s11, f.s10)], ids=str)
def test_vector_polys_orthonormal(fam):
    m = 2
    op = jacobi_operator(fam, m)
    mu = measure_for_family(fam)

    def stack(x, y):
        return np.concatenate([eval_vector_poly(op, n, x, y).value for n in range(4)], axis=-1)

    g = inner_product(stack, stack, mu)
    assert hs_norm(g - np.eye(g.shape[0])) <= 1e-10


def test_moment_table_shapes_and_hankel():
    h = moments(measure_one_param(0.6), 4, 4)
    dh = doubly_hankel(h, 2, 2)
    assert dh.matrix.shape == (9, 9)
    assert hankel_defects(dh.matrix, 2, 2) == {"block_hankel": 0.0, "inner_hankel": 0.0}
    np.testing.assert_allclose(dh.matrix, dh.matrix.T, atol=1e-15)
    assert np.linalg.eigvalsh(dh.matrix).min() > 0
    with pytest.raises(InsufficientMoments):
        doubly_hankel(h, 3, 1)


def test_hankel_defects_detects_perturbation():
    h = moments(measure_chebyshev(), 2, 2)
    mat = doubly_hankel(h, 1, 1).matrix.copy()
    mat[0, 3] += 1e-3
    d = hankel_defects(mat, 1, 1)
    assert d["block_hankel"] > 0 or d["inner_hankel"] > 0


def test_slice_and_line_mass():
    mu = measure_two_param(0.3, 1.0)
    s = matrix_measure_slice(mu, 1, np.array([0.0, 0.5]))
    assert s.shape == (2, 2, 2)
    np.testing.assert_allclose(s, np.swapaxes(s, -1, -2))
    lm = line_mass_matrix(mu, 2)
    assert lm.shape == (3, 3) and np.linalg.eigvalsh(lm).min() > 0
    h = moments(mu, 0, 4)
    x_int = quadrature_rule(N=512)
    ac = (x_int.weights[:, None, None] * matrix_measure_slice(mu, 2, x_int.nodes) / (2 / math.pi * np.sqrt(1 - x_int.nodes**2))[:, None, None]).sum(0)
    idx = np.add.outer(np.arange(3), np.arange(3))
    np.testing.assert_allclose(ac + lm, h[0][idx], atol=1e-12)
