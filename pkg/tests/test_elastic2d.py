import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elastic_te import elastic2d, specfun
from elastic_te.errors import DegenerateBracketError, NotAnEigenvalueError, ParameterError
from elastic_te.params import LameParameters, unchecked_parameters, wavenumbers

from conftest import TABLE_PARAMS

# Frozen from this implementation (bisection of the boundary determinant to 1e-13).
FROZEN_BI = {4: 2.191809879784558, 8: 3.217575245562209, 13: 4.455448506876332}
FROZEN_MONO_20 = 30.418083752678566


def cartesian(mode, side, x, y, parts="ps"):
    r = np.hypot(x, y)
    return elastic2d.eval_mode(mode, side, r, np.arctan2(y, x), parts)


# -- boundary system ------------------------------------------------------------


def test_matrix_vectorizes_over_frequency():
    omegas = np.array([0.7, 1.9, 3.3])
    stacked = elastic2d.boundary_matrix(5, omegas, TABLE_PARAMS)
    assert stacked.shape == (3, 4, 4)
    for w, mat in zip(omegas, stacked):
        assert np.allclose(mat, elastic2d.boundary_matrix(5, w, TABLE_PARAMS))


def test_determinant_vanishes_without_contrast():
    params = unchecked_parameters(1.0, 1.0, 1.0, 1.0)
    for w in (0.8, 2.4, 5.1):
        mat = elastic2d.boundary_matrix(6, w, params)
        det = abs(np.linalg.det(mat)) / np.prod(np.linalg.norm(mat, axis=1))
        assert det < 1e-13


def test_equal_densities_rejected_by_checked_constructor():
    with pytest.raises(ParameterError):
        LameParameters(rho=1.0, rho_tilde=1.0)


@settings(max_examples=25, deadline=None)
@given(m=st.integers(1, 40), w=st.floats(0.2, 15.0))
def test_determinant_real_and_column_scaling_keeps_sign(m, w):
    raw = elastic2d.det_fm(m, w, TABLE_PARAMS)
    scaled = elastic2d.det_fm(m, w, TABLE_PARAMS, scaled=True)
    if raw != 0.0:
        assert np.sign(raw) == np.sign(scaled)


def test_rejects_bad_inputs():
    with pytest.raises(ParameterError):
        elastic2d.boundary_matrix(0, 1.0, TABLE_PARAMS)
    with pytest.raises(ParameterError):
        elastic2d.boundary_matrix(3, -1.0, TABLE_PARAMS)


# -- brackets -------------------------------------------------------------------


def test_floor_strict():
    assert elastic2d.floor_strict(4.0) == 3
    assert elastic2d.floor_strict(4.2) == 4


def test_bi_bracket_formula():
    br = elastic2d.bracket_bi(8, 1, TABLE_PARAMS)
    n = math.sqrt(20.0)
    assert br.lo == pytest.approx(specfun.bessel_zero(8, 1) / n)
    assert br.hi == pytest.approx(specfun.bessel_zero(8, 2) / n)


def test_mono_indices_and_degenerate_orders():
    assert elastic2d.mono_indices(30, 0.3, 0.8) == (2, 15)
    with pytest.raises(DegenerateBracketError):
        elastic2d.mono_indices(2, 0.3, 0.8)


# -- eigenvalues and coefficients -----------------------------------------------


@pytest.mark.parametrize("m", sorted(FROZEN_BI))
def test_bi_eigenvalues_frozen(m):
    mode = elastic2d.compute_mode(m, TABLE_PARAMS, "bi")
    assert mode.omega == pytest.approx(FROZEN_BI[m], rel=1e-10)
    assert elastic2d.bracket_bi(m, 1, TABLE_PARAMS).contains(mode.omega)


def test_mono_eigenvalue_frozen(mono_mode_20):
    assert mono_mode_20.omega == pytest.approx(FROZEN_MONO_20, rel=1e-10)
    assert elastic2d.bracket_mono(20, 0.3, 0.8, TABLE_PARAMS).contains(mono_mode_20.omega)


def test_nullvector_certified(bi_mode_8):
    assert elastic2d.singular_value_ratio(8, bi_mode_8.omega, TABLE_PARAMS) < 1e-12
    coeffs = np.array(bi_mode_8.coefficients)
    assert np.linalg.norm(coeffs) == pytest.approx(1.0)
    assert bi_mode_8.alpha.imag == 0 and bi_mode_8.alpha.real >= 0


def test_off_eigenvalue_rejected(bi_mode_8):
    with pytest.raises(NotAnEigenvalueError):
        elastic2d.solve_coefficients(8, bi_mode_8.omega * (1 + 1e-3), TABLE_PARAMS)


def test_gamma_over_alpha_matches_closed_form(bi_mode_8):
    ratio = bi_mode_8.gamma / bi_mode_8.alpha
    oracle = elastic2d.closed_form_gamma_over_alpha(8, bi_mode_8.omega, TABLE_PARAMS)
    assert ratio == pytest.approx(oracle, rel=1e-8)
    # compressional and shear amplitudes are a quarter period out of phase
    assert abs(ratio.real) < 1e-12 * abs(ratio)


def test_boundary_residual(bi_mode_8, mono_mode_20):
    assert elastic2d.boundary_residual(bi_mode_8) < 1e-10
    assert elastic2d.boundary_residual(mono_mode_20) < 1e-10


def test_residual_grows_off_resonance(bi_mode_8):
    # a mode built from the nullvector at omega fails continuity once omega is perturbed
    shifted = dataclasses.replace(bi_mode_8, omega=bi_mode_8.omega * 1.01)
    assert elastic2d.boundary_residual(shifted) > 1e-3


# -- field identities -----------------------------------------------------------


@pytest.fixture(scope="module")
def probe_points():
    rng = np.random.default_rng(7)
    r = rng.uniform(0.2, 0.95, 12)
    t = rng.uniform(0, 2 * math.pi, 12)
    return r * np.cos(t), r * np.sin(t)


def _navier_residual(mode, side, x, y, h):
    p = mode.params
    rho = p.rho if side == "u" else p.rho_tilde
    f = lambda dx, dy: cartesian(mode, side, x + dx, y + dy)
    c = f(0, 0)
    dxx = (f(h, 0) - 2 * c + f(-h, 0)) / h**2
    dyy = (f(0, h) - 2 * c + f(0, -h)) / h**2
    dxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h)
    grad_div = np.stack([dxx[:, 0] + dxy[:, 1], dxy[:, 0] + dyy[:, 1]], axis=-1)
    return p.mu * (dxx + dyy) + (p.lam + p.mu) * grad_div + rho * mode.omega**2 * c, rho * mode.omega**2 * c


@pytest.mark.parametrize("side", ["u", "v"])
def test_navier_equation_by_finite_differences(bi_mode_8, side):
    # probe the outer half of the disk, where the localized mode has its mass
    rng = np.random.default_rng(11)
    r, t = rng.uniform(0.5, 0.97, 12), rng.uniform(0, 2 * math.pi, 12)
    x, y = r * np.cos(t), r * np.sin(t)
    coarse, inertia = _navier_residual(bi_mode_8, side, x, y, 2e-3)
    fine, _ = _navier_residual(bi_mode_8, side, x, y, 1e-3)
    res = (4 * fine - coarse) / 3
    scale = np.max(np.linalg.norm(inertia, axis=-1))
    assert np.max(np.linalg.norm(res, axis=-1)) / scale < 1e-4


@pytest.mark.parametrize("side", ["u", "v"])
def test_jacobian_matches_finite_differences(bi_mode_8, probe_points, side):
    x, y = probe_points
    h = 1e-4
    fd_x = (cartesian(bi_mode_8, side, x + h, y) - cartesian(bi_mode_8, side, x - h, y)) / (2 * h)
    fd_y = (cartesian(bi_mode_8, side, x, y + h) - cartesian(bi_mode_8, side, x, y - h)) / (2 * h)
    grad = elastic2d.mode_gradient(bi_mode_8, side, np.hypot(x, y), np.arctan2(y, x))
    fd = np.stack([fd_x, fd_y], axis=-1)  # [..., i, j] = d_j w_i
    assert np.max(np.abs(grad - fd)) < 1e-6 * np.max(np.abs(grad))


@pytest.mark.parametrize("side", ["u", "v"])
def test_split_into_compressional_and_shear(mono_mode_20, side):
    r = np.linspace(0.0, 1.0, 9)[:, None]
    t = np.linspace(0, 2 * math.pi, 13)[None, :]
    total = elastic2d.eval_mode(mono_mode_20, side, r, t)
    p_part, s_part = elastic2d.decompose_ps(mono_mode_20, side)
    assert np.max(np.abs(total - p_part(r, t) - s_part(r, t))) <= 1e-12 * np.max(np.abs(total))
    gp = elastic2d.mode_gradient(mono_mode_20, side, r, t, "p")
    gs = elastic2d.mode_gradient(mono_mode_20, side, r, t, "s")
    scale = max(np.max(np.abs(gp)), np.max(np.abs(gs)))
    assert np.max(np.abs(gs[..., 0, 0] + gs[..., 1, 1])) < 1e-10 * scale
    assert np.max(np.abs(gp[..., 1, 0] - gp[..., 0, 1])) < 1e-10 * scale


@pytest.mark.parametrize("side", ["u", "v"])
def test_operator_definitions_agree_with_ansatz_split(bi_mode_8, side):
    r = np.array([0.0, 0.3, 0.7, 1.0])[:, None]
    t = np.array([0.2, 1.9, 4.4])[None, :]
    p_op, s_op = elastic2d.operator_parts(bi_mode_8, side, r, t)
    p_part, s_part = elastic2d.decompose_ps(bi_mode_8, side)
    scale = np.max(np.abs(elastic2d.eval_mode(bi_mode_8, side, r, t)))
    assert np.max(np.abs(p_op - p_part(r, t))) < 1e-10 * scale
    assert np.max(np.abs(s_op - s_part(r, t))) < 1e-10 * scale


def test_ladder_matches_polar_field_including_origin(bi_mode_8):
    r = np.array([0.0, 0.25, 0.8])[:, None]
    t = np.array([0.0, 2.0])[None, :]
    w1, w2 = elastic2d.ladder_fields(bi_mode_8, "u")
    lad = np.stack([w1(r, t), w2(r, t)], axis=-1)
    assert np.allclose(lad, elastic2d.eval_mode(bi_mode_8, "u", r, t), atol=1e-13)


@settings(max_examples=15, deadline=None)
@given(c=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_fields_scale_linearly(bi_mode_8, c):
    r = np.array([0.4, 0.9])
    t = np.array([1.0, 3.0])
    base = elastic2d.eval_mode(bi_mode_8, "v", r, t)
    scaled = elastic2d.eval_mode(bi_mode_8.scaled(c), "v", r, t)
    assert np.allclose(scaled, c * base, rtol=1e-12, atol=0)


def test_stress_is_symmetric(bi_mode_8):
    sigma = elastic2d.mode_stress(bi_mode_8, "u", np.array([0.3, 0.9]), np.array([0.5, 2.5]))
    assert np.allclose(sigma, np.swapaxes(sigma, -1, -2))


def test_wavenumbers_follow_densities():
    k = wavenumbers(2.0, LameParameters(lam=2.0, mu=3.0, rho=1.5, rho_tilde=6.0))
    assert k.k1 == pytest.approx(2.0 * math.sqrt(1.5 / 8.0))
    assert k.k2 == pytest.approx(2.0 * math.sqrt(1.5 / 3.0))
    assert k.k2_tilde / k.k2 == pytest.approx(2.0)
