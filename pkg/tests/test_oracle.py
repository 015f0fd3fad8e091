import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cheb2d.measures import inner_product, measure_for_family, measure_one_param, measure_two_param, moments, quadrature_rule
from cheb2d.oracle import (
    LexOracle,
    chebyshev_u,
    check_level,
    evaluate,
    gram_schmidt_lex,
    gram_schmidt_totaldeg,
    pad,
    pair_moments,
    phi_identity_check,
    series_terms,
    slice_jacobi,
    stieltjes,
    thm22_coefficients,
    tilde_vector,
    vector_gram,
    times_x,
    times_y,
    totaldeg_coefficients,
    totaldeg_monomials,
)
from cheb2d.parameters import DeformationFamily, lex_step_coefficients
from cheb2d.recurrence import eval_vector_poly, jacobi_operator, parametric_slice_coeffs, total_degree_coeffs, vector_poly_coeffs

from families import FAMILIES


@pytest.fixture(scope="module")
def one_param_oracle():
    return LexOracle(measure_one_param(0.6), 4, 4)


def test_coefficient_stack_helpers():
    c = np.zeros((1, 2, 2))
    c[0, 1, 0] = 2.0
    assert times_x(c)[0, 2, 0] == 2.0
    assert times_y(c)[0, 1, 1] == 2.0
    assert evaluate(c, np.array([3.0]), np.array([5.0]))[0, 0] == 6.0
    h = moments(measure_one_param(0.6), 4, 4)
    one = np.ones((1, 1, 1))
    xy = np.zeros((1, 2, 2))
    xy[0, 1, 1] = 1
    assert pair_moments(one, xy, h)[0, 0] == pytest.approx(0.15)


@pytest.mark.parametrize("fam", FAMILIES, ids=str)
def test_gram_schmidt_matches_recurrence(fam):
    h = moments(measure_for_family(fam), 8, 8)
    for m in range(5):
        table = gram_schmidt_lex(h, 4, m)
        op = jacobi_operator(fam, m)
        for n in range(5):
            assert np.abs(table.coeffs[n] - vector_poly_coeffs(op, n)).max() <= 1e-8


def test_gram_schmidt_is_orthonormal(one_param_oracle):
    o = one_param_oracle
    stack = np.concatenate([pad(o.P(n, 3), 4, 4) for n in range(4)], axis=0)
    g = pair_moments(stack, stack, o.h)
    np.testing.assert_allclose(g, np.eye(len(g)), atol=1e-11)


@pytest.mark.parametrize("s", [0.6, -0.3])
def test_tilde_symmetry_one_param(s):
    o = LexOracle(measure_one_param(s), 3, 3)
    for n in range(1, 4):
        for m in range(1, 4):
            np.testing.assert_allclose(o.Pt(n, m), np.swapaxes(o.P(m, n), 1, 2), atol=1e-10)


def test_tilde_leading_terms():
    h = moments(measure_two_param(0.3, 1.0), 8, 8)
    t = tilde_vector(h, 2, 3)
    assert t.shape == (3, 3, 4)
    for l in range(3):
        assert t[l, l, 3] > 0
        assert np.all(t[l, l + 1 :, 3] == 0)


@pytest.mark.parametrize("s", [0.6, -0.6, 0.3])
def test_closed_form_lex_coefficients(s):
    o = LexOracle(measure_one_param(s), 4, 4)
    for n in range(1, 5):
        for m in range(1, 5):
            c = thm22_coefficients(o, n, m)
            ref = lex_step_coefficients(DeformationFamily.one_param(s), n, m)
            assert np.abs(c["K"] - ref.K).max() <= 1e-8
            assert np.abs(c["J1"] - ref.J1).max() <= 1e-8
            assert np.abs(c["J2"] - ref.J2).max() <= 1e-8


def test_recurrence_identities(one_param_oracle):
    for n in range(1, 4):
        for m in range(1, 4):
            _, res = check_level(one_param_oracle, n, m)
            assert max(res.values()) <= 1e-8, (n, m, res)


def test_j3_relation(one_param_oracle):
    o = one_param_oracle
    for n in range(1, 4):
        for m in range(1, 4):
            c = thm22_coefficients(o, n, m)
            at = o.ip(times_y(o.Pt(n - 1, m - 1)), o.Pt(n - 1, m))
            np.testing.assert_allclose(c["J3"], -c["K"] @ at.T, atol=1e-9)


def test_gamma_and_i_consistency(one_param_oracle):
    o = one_param_oracle
    c = thm22_coefficients(o, 2, 2)
    # orthogonal split of P_(n,m) into tilde and lower-m parts
    np.testing.assert_allclose(c["I"] @ c["I"].T + c["Gamma"].T @ c["Gamma"], np.eye(3), atol=1e-9)


def test_totaldeg_monomial_order():
    assert totaldeg_monomials(2) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]


@pytest.mark.parametrize("fam", FAMILIES, ids=str)
def test_total_degree_blocks(fam):
    h = moments(measure_for_family(fam), 12, 12)
    ext = totaldeg_coefficients(h, 4)
    for n in range(5):
        ref = total_degree_coeffs(fam, n)
        assert np.abs(ext.Ax[n] - ref.Ax).max() <= 1e-7
        assert np.abs(ext.Ay[n] - ref.Ay).max() <= 1e-7
        assert np.abs(ext.Bx[n] - ref.Bx).max() <= 1e-7
        assert np.abs(ext.By[n] - ref.By).max() <= 1e-7


def test_totaldeg_requires_moments():
    with pytest.raises(ValueError):
        gram_schmidt_totaldeg(np.ones((3, 3)), 2)


def test_chebyshev_u_values():
    u = chebyshev_u(3, np.array(0.5))
    np.testing.assert_allclose(u, [1, 1, 0, -1])


def test_series_terms_bound():
    assert series_terms(0.0, 3) == 1
    k = series_terms(0.6, 2)
    assert 0.6**k * (2 + k + 1) < 1e-13


@given(
    st.sampled_from([0.3, 0.6]),
    st.integers(0, 5),
    st.floats(0.05, 0.95),
    st.floats(0, 2 * np.pi),
    st.floats(-1, 1),
)
def test_phi_identities(s, m, r, theta, y):
    res = phi_identity_check(s, m, r * np.exp(1j * theta), y)
    assert max(res["closed_form"], res["series"], res["phi00"]) <= 1e-10


def test_stieltjes_recovers_chebyshev():
    r = quadrature_rule(N=64)
    a, b = stieltjes(r.nodes, r.weights, 10)
    np.testing.assert_allclose(a, 0.5, atol=1e-13)
    np.testing.assert_allclose(b, 0.0, atol=1e-13)


@pytest.mark.parametrize("x", [-0.7, 0.0, 0.4])
def test_one_param_slice(x):
    s = 0.6
    a, b, mass = slice_jacobi(measure_one_param(s), x, 6)
    fam = DeformationFamily.one_param(s)
    for k in range(1, 7):
        ak, bk = parametric_slice_coeffs(fam, x, k)
        assert a[k - 1] == pytest.approx(ak, abs=1e-12)
        assert b[k - 1] == pytest.approx(bk, abs=1e-12)
    assert mass == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("fam", [DeformationFamily.one_param(0.6), DeformationFamily.two_param(0.3, 1.0)], ids=str)
def test_vector_gram_matches_full_grid(fam):
    op = jacobi_operator(fam, 2)
    mu = measure_for_family(fam)

    def stack(x, y):
        return np.concatenate([eval_vector_poly(op, n, x, y).value for n in range(4)], axis=-1)

    full = inner_product(stack, stack, mu, N=48)
    fast = vector_gram(op, mu, 3, N=48).transpose(0, 2, 1, 3).reshape(12, 12)
    np.testing.assert_allclose(fast, full, atol=1e-13)
    no_line = vector_gram(op, mu, 3, N=48, lines=False)
    assert (np.abs(no_line - vector_gram(op, mu, 3, N=48)).max() > 1e-2) == bool(mu.lines)
