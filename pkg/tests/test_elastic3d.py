import math

import numpy as np
import pytest
from scipy import optimize, special

from elastic_te import elastic3d
from elastic_te.errors import DegenerateAngleError, ParameterError
from elastic_te.params import LameParameters

BALL = LameParameters(lam=1.0, mu=1.0, rho=1.0, rho_tilde=20.0, dim=3)
# Frozen toroidal roots for the ball (bisection of f_tilde to 1e-13).
FROZEN_TOROIDAL = {6: 2.6157740669469827, 10: 3.618327491229711, 14: 4.60070606783867}


# -- spherical harmonics --------------------------------------------------------


@pytest.mark.parametrize("l,n", [(0, 0), (3, 1), (7, 4), (12, 12), (30, 5)])
def test_legendre_matches_scipy(l, n):
    x = np.linspace(-0.99, 0.99, 41)
    assert np.allclose(elastic3d.assoc_legendre(l, n, x), special.lpmv(n, l, x), rtol=1e-11, atol=1e-12)


@pytest.mark.parametrize("l,n", [(2, 1), (5, 0), (6, 3), (9, 9)])
def test_harmonic_unit_norm_and_orthogonal(l, n):
    x, w = np.polynomial.legendre.leggauss(60)
    theta = np.arccos(x)
    y, _, _ = elastic3d.spherical_harmonic(l, n, theta, 0.0)
    y2, _, _ = elastic3d.spherical_harmonic(l + 1, n, theta, 0.0)
    assert 2 * math.pi * np.sum(w * np.abs(y) ** 2) == pytest.approx(1.0, rel=1e-12)
    assert abs(2 * math.pi * np.sum(w * y * np.conj(y2))) < 1e-12


@pytest.mark.parametrize("l,n", [(2, 1), (5, 0), (6, 3), (10, 10)])
def test_harmonic_derivatives_by_finite_differences(l, n):
    th, ph, h = 1.1, 0.7, 1e-6
    y, dt, dp = elastic3d.spherical_harmonic(l, n, th, ph)
    fd_t = (elastic3d.spherical_harmonic(l, n, th + h, ph)[0] - elastic3d.spherical_harmonic(l, n, th - h, ph)[0]) / (2 * h)
    fd_p = (elastic3d.spherical_harmonic(l, n, th, ph + h)[0] - elastic3d.spherical_harmonic(l, n, th, ph - h)[0]) / (2 * h)
    assert dt == pytest.approx(fd_t, rel=1e-8)
    if n:
        assert dp == pytest.approx(fd_p, rel=1e-8)


def test_degenerate_angle_detected():
    # Y_m^0 has no phi dependence, so d_phi Y vanishes everywhere
    with pytest.raises(DegenerateAngleError):
        elastic3d.generic_angle(4, 0)


def test_degree_checks():
    with pytest.raises(ParameterError):
        elastic3d.spherical_harmonic(2, 3, 1.0, 0.0)
    with pytest.raises(ParameterError):
        elastic3d.assemble_A(2, 3, 1.0, BALL)


# -- radial amplitudes against a symbolic oracle --------------------------------


@pytest.fixture(scope="module")
def symbolic_fields():
    """Displacement and traction of the three ansatz fields, m = 2, n = 1, from sympy."""
    sp = pytest.importorskip("sympy")
    x, y, z = sp.symbols("x y z", real=True)
    k = sp.Rational(37, 10)
    lam, mu = 2.0, 1.5
    r = sp.sqrt(x**2 + y**2 + z**2)
    norm = sp.sqrt(sp.Rational(5, 24) / sp.pi)
    # Y_2^1 = N P_2^1(cos theta) e^{i phi} with P_2^1(c) = -3 c sqrt(1 - c^2)
    harmonic = -3 * norm * (z / r) * ((x + sp.I * y) / r)
    psi = sp.expand_func(sp.jn(2, k * r)) * harmonic
    X = sp.Matrix([x, y, z])

    def grad(f):
        return sp.Matrix([sp.diff(f, v) for v in (x, y, z)])

    def curl(F):
        return sp.Matrix(
            [
                sp.diff(F[2], y) - sp.diff(F[1], z),
                sp.diff(F[0], z) - sp.diff(F[2], x),
                sp.diff(F[1], x) - sp.diff(F[0], y),
            ]
        )

    th, ph = 1.1, 0.7
    point = {x: math.sin(th) * math.cos(ph), y: math.sin(th) * math.sin(ph), z: math.cos(th)}
    frame = np.array(
        [
            [math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)],
            [math.cos(th) * math.cos(ph), math.cos(th) * math.sin(ph), -math.sin(th)],
            [-math.sin(ph), math.cos(ph), 0.0],
        ]
    )
    out = {}
    for name, F in (("p", grad(psi)), ("t", curl(X * psi)), ("s", curl(curl(X * psi)))):
        J = F.jacobian(X)
        disp = np.array([complex(sp.N(c.subs(point))) for c in F])
        G = np.array([[complex(sp.N(J[i, j].subs(point))) for j in range(3)] for i in range(3)])
        sigma = lam * np.trace(G) * np.eye(3) + mu * (G + G.T)
        out[name] = (frame @ disp, frame @ (sigma @ frame[0]))
    params = LameParameters(lam=lam, mu=mu, rho=1.0, rho_tilde=5.0, dim=3)
    return out, float(k), params, (th, ph)


@pytest.mark.parametrize("kind", ["p", "s"])
def test_spheroidal_amplitudes_match_symbolic(symbolic_fields, kind):
    fields, k, params, (th, ph) = symbolic_fields
    y, dt, dp = elastic3d.spherical_harmonic(2, 1, th, ph)
    ds = dp / math.sin(th)
    ur, utan, tr, ttan = elastic3d.spheroidal_amplitudes(2, k, params, kind)
    disp, trac = fields[kind]
    assert np.allclose(disp, [ur * y, utan * dt, utan * ds], rtol=1e-10, atol=1e-12)
    assert np.allclose(trac, [tr * y, ttan * dt, ttan * ds], rtol=1e-10, atol=1e-12)


def test_toroidal_amplitudes_match_symbolic(symbolic_fields):
    fields, k, params, (th, ph) = symbolic_fields
    _, dt, dp = elastic3d.spherical_harmonic(2, 1, th, ph)
    ds = dp / math.sin(th)
    u_amp, t_amp = elastic3d.toroidal_amplitudes(2, k, params)
    disp, trac = fields["t"]
    assert np.allclose(disp, [0.0, u_amp * ds, -u_amp * dt], rtol=1e-10, atol=1e-12)
    assert np.allclose(trac, [0.0, t_amp * ds, -t_amp * dt], rtol=1e-10, atol=1e-12)


# -- scalar conditions and brackets ---------------------------------------------


def test_toroidal_block_determinant_tracks_f_tilde():
    for w in (0.9, 1.7, 2.8):
        det = np.linalg.det(elastic3d.toroidal_block(6, w, BALL))
        assert abs(det) == pytest.approx(BALL.mu * abs(elastic3d.f_tilde(6, w, BALL)), rel=1e-10)


@pytest.mark.parametrize("m", sorted(FROZEN_TOROIDAL))
def test_toroidal_roots_frozen_and_bracketed(m):
    br = elastic3d.bracket_bi_3d(m, 1, BALL)
    assert np.sign(elastic3d.f_tilde(m, br.lo, BALL)) != np.sign(elastic3d.f_tilde(m, br.hi, BALL))
    w = elastic3d.find_eigenvalue_3d(br, m, BALL)
    assert w == pytest.approx(FROZEN_TOROIDAL[m], rel=1e-10)


def test_bracket_uses_spherical_zeros():
    br = elastic3d.bracket_bi_3d(6, 1, BALL)
    f = lambda x: special.spherical_jn(6, x)
    grid = np.arange(6.5, 20.0, 0.25)
    flips = np.nonzero(np.sign(f(grid[:-1])) != np.sign(f(grid[1:])))[0]
    first, second = (optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-14) for i in flips[:2])
    assert br.lo * math.sqrt(20) == pytest.approx(first, rel=1e-12)
    assert br.hi * math.sqrt(20) == pytest.approx(second, rel=1e-12)


def test_radial_expression_changes_sign_with_f_tilde():
    ws = np.linspace(2.3, 2.9, 61)
    radial = elastic3d.det_Fmn_radial(6, ws, BALL)
    ft = elastic3d.f_tilde(6, ws, BALL)
    k1 = elastic3d.k1_factor(6, ws, BALL)
    assert np.all(np.sign(radial) == np.sign(ft * k1))


def test_unknown_condition_rejected():
    with pytest.raises(ParameterError):
        elastic3d.find_eigenvalue_3d(elastic3d.bracket_bi_3d(6, 1, BALL), 6, BALL, which="nope")


# -- 6x6 boundary matrix --------------------------------------------------------


@pytest.mark.parametrize("m", [6, 10])
def test_det_root_independent_of_angle(m):
    br = elastic3d.bracket_bi_3d(m, 1, BALL)
    roots = [elastic3d.det_A_root(br, m, 1, BALL, angle) for angle in elastic3d.GENERIC_ANGLES]
    assert max(roots) - min(roots) < 1e-8
    assert roots[0] == pytest.approx(FROZEN_TOROIDAL[m], abs=1e-8)


@pytest.mark.parametrize("m", sorted(FROZEN_TOROIDAL))
def test_toroidal_nullvector_purity(m):
    mode = elastic3d.make_mode_3d(m, 1, FROZEN_TOROIDAL[m], BALL)
    coeffs = np.abs(np.array(mode.coeffs))
    assert np.linalg.norm(coeffs) == pytest.approx(1.0)
    assert np.max(coeffs[[0, 2, 3, 5]]) < 1e-6


def test_printed_layout_discrepancies_are_the_traction_tangential_entries():
    found = elastic3d.printed_discrepancies(6, 1, 2.6, BALL)
    assert found == [(5, 2), (5, 3), (5, 5), (5, 6), (6, 2), (6, 3), (6, 5), (6, 6)]


def test_printed_layout_root_drifts_with_angle():
    br = elastic3d.bracket_bi_3d(6, 1, BALL)
    roots = [elastic3d.det_A_root(br, 6, 1, BALL, angle, "printed") for angle in elastic3d.GENERIC_ANGLES]
    assert max(roots) - min(roots) > 1e-3


# -- localization ---------------------------------------------------------------


def test_radial_l2_weights_agree_on_purely_toroidal_modes():
    # with only the toroidal coefficient nonzero both weightings differ by a constant
    coeffs = (0, 1, 0, 0, 1, 0)
    w = FROZEN_TOROIDAL[6]
    ratios = [
        elastic3d.radial_l2_3d(coeffs, 6, w, BALL, 0.5, "u", weights)
        / elastic3d.radial_l2_3d(coeffs, 6, w, BALL, 1.0, "u", weights)
        for weights in ("printed", "orthonormal")
    ]
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-12)


def test_localization_ratio_decreases_in_m():
    ratios = []
    for m in sorted(FROZEN_TOROIDAL):
        mode = elastic3d.make_mode_3d(m, 1, FROZEN_TOROIDAL[m], BALL)
        ratios.append(elastic3d.localization_ratio_3d(mode, "u", 0.5))
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
