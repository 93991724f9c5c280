"""Transmission eigenvalues of the Lamé system on the unit ball.

Fields are expanded as

    u = a grad(j_m(k1 r) Y) + b curl(x j_m(k2 r) Y) + c curl curl(x j_m(k2 r) Y)
    v = d grad(j_m(k1~ r) Y) + e curl(x j_m(k2~ r) Y) + f curl curl(x j_m(k2~ r) Y)

with Y = Y_m^n.  The b/e (toroidal) terms decouple from the rest, and on
r = 1 every component factors into a radial amplitude times Y, d_theta Y or
d_phi Y / sin(theta).  Continuity of displacement and traction therefore
splits into a 4x4 spheroidal block, a 2x2 toroidal block, and an angular
mixing that does not depend on the frequency.

Two layouts of the 6x6 boundary matrix are provided:

* ``"derived"``: rows (u_r, u_theta, u_phi, t_r, t_theta, t_phi) of u - v,
  columns (a, b, c, d, e, f), built from the radial blocks.
* ``"printed"``: an alternative entry list whose columns are
  (P, poloidal, toroidal) per side without the sign flip of v.  Several of its
  traction entries do not follow from the ansatz; :func:`printed_discrepancies`
  lists them.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .elastic2d import Bracket, floor_strict, mono_indices, nullvector, scan_root
from .errors import DegenerateAngleError, InconsistentNullspaceError, ParameterError
from .params import LameParameters, wavenumbers
from .quadrature import quadrature_1d
from . import specfun

GENERIC_ANGLES = ((1.1, 0.7), (0.9, 2.3), (1.7, 4.1))
SECONDARY_ANGLES = ((0.6, 1.9), (1.4, 3.3), (2.2, 5.4))
RESIDUAL_TOL = 1e-5


@dataclass(frozen=True)
class BallEigenMode:
    m: int
    n_deg: int
    omega: float
    coeffs: tuple
    params: LameParameters

    @property
    def wavenumbers(self):
        return wavenumbers(self.omega, self.params)


# -- spherical harmonics --------------------------------------------------------


def assoc_legendre(l, n, x):
    """P_l^n(x) for 0 <= n <= l, Condon-Shortley phase, by upward recurrence in degree."""
    if not 0 <= n <= l:
        return np.zeros_like(np.asarray(x, dtype=float))
    x = np.asarray(x, dtype=float)
    somx2 = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    p_nn = np.ones_like(x)
    fact = 1.0
    for _ in range(n):
        p_nn = -p_nn * fact * somx2
        fact += 2.0
    if l == n:
        return p_nn
    p_prev, p_cur = p_nn, x * (2 * n + 1) * p_nn
    for deg in range(n + 2, l + 1):
        p_prev, p_cur = p_cur, (x * (2 * deg - 1) * p_cur - (deg + n - 1) * p_prev) / (deg - n)
    return p_cur


def _ylm_norm(l, n):
    n = abs(n)
    return math.sqrt((2 * l + 1) / (4 * math.pi) * math.exp(math.lgamma(l - n + 1) - math.lgamma(l + n + 1)))


def spherical_harmonic(l, n, theta, phi):
    """(Y, d_theta Y, d_phi Y) with Y = N P_l^{|n|}(cos theta) e^{i n phi}."""
    if abs(n) > l:
        raise ParameterError("need |n| <= m")
    a = abs(n)
    theta = np.asarray(theta, dtype=float)
    x = np.cos(theta)
    p = assoc_legendre(l, a, x)
    # with the Condon-Shortley phase, dP^a/dtheta = (P^{a+1} - (l + a)(l - a + 1) P^{a-1}) / 2
    if a == 0:
        dp = assoc_legendre(l, 1, x)
    else:
        dp = 0.5 * (assoc_legendre(l, a + 1, x) - (l + a) * (l - a + 1) * assoc_legendre(l, a - 1, x))
    phase = _ylm_norm(l, n) * np.exp(1j * n * np.asarray(phi, dtype=float))
    y = phase * p
    return y, phase * dp, 1j * n * y


@lru_cache(maxsize=None)
def _harmonic_sups(l, n):
    th = np.linspace(0.0, math.pi, 721)
    y, dt, dp = spherical_harmonic(l, n, th, 0.0)
    return float(np.max(np.abs(y))), float(np.max(np.abs(dt))), float(np.max(np.abs(dp)))


def _angular(l, n, theta, phi):
    y, dt, dp = spherical_harmonic(l, n, theta, phi)
    sups = _harmonic_sups(l, n)
    for val, sup in zip((y, dt, dp), sups):
        if not abs(val) > 1e-3 * sup:
            raise DegenerateAngleError(f"angular factor vanishes at ({theta}, {phi}) for (m, n) = ({l}, {n})")
    return complex(y), complex(dt), complex(dp), math.sin(theta)


def generic_angle(m, n_deg, candidates=GENERIC_ANGLES):
    for angle in candidates:
        try:
            _angular(m, n_deg, *angle)
            return angle
        except DegenerateAngleError:
            continue
    raise DegenerateAngleError(f"no generic angle among {candidates} for (m, n) = ({m}, {n_deg})")


# -- radial blocks --------------------------------------------------------------


def _radial_values(m, k):
    j, d = specfun.spherical_bessel_j_and_prime(m, k)
    L = m * (m + 1)
    k2jpp = -2 * k * d + (L - k * k) * j
    return j, d, k2jpp


def spheroidal_amplitudes(m, k, params, kind):
    """(u_r, u_tan, t_r, t_tan) amplitudes at r = 1 of a P or poloidal field.

    u_r, t_r multiply Y; u_tan, t_tan multiply grad_S Y.
    """
    j, d, k2jpp = _radial_values(m, k)
    L = m * (m + 1)
    mu, lam = params.mu, params.lam
    if kind == "p":
        return np.array([k * d, j, 2 * mu * k2jpp - lam * k * k * j, 2 * mu * (k * d - j)])
    if kind == "s":
        return np.array([L * j, j + k * d, 2 * mu * L * (k * d - j), mu * (k2jpp + (L - 2) * j)])
    raise ValueError(kind)


def toroidal_amplitudes(m, k, params):
    """(u_tor, t_tor) amplitudes at r = 1 of curl(x j_m(k r) Y)."""
    j, d, _ = _radial_values(m, k)
    return np.array([j, params.mu * (k * d - j)])


def spheroidal_block(m, omega, params):
    """4x4 system for (a, c, d, f); columns of v negated."""
    k = wavenumbers(omega, params)
    return np.column_stack(
        [
            spheroidal_amplitudes(m, k.k1, params, "p"),
            spheroidal_amplitudes(m, k.k2, params, "s"),
            -spheroidal_amplitudes(m, k.k1_tilde, params, "p"),
            -spheroidal_amplitudes(m, k.k2_tilde, params, "s"),
        ]
    )


def toroidal_block(m, omega, params):
    """2x2 system for (b, e); its determinant is -f_tilde."""
    k = wavenumbers(omega, params)
    return np.column_stack([toroidal_amplitudes(m, k.k2, params), -toroidal_amplitudes(m, k.k2_tilde, params)])


# -- scalar conditions ----------------------------------------------------------


def f_tilde(m, omega, params: LameParameters):
    """k2 j_m'(k2) j_m(k2 n) - k2 n j_m(k2) j_m'(k2 n), n the contrast."""
    omega = np.asarray(omega, dtype=float)
    k2 = omega * math.sqrt(params.rho / params.mu)
    n = math.sqrt(params.rho_tilde / params.rho)
    j, d = specfun.spherical_bessel_j_and_prime(m, k2)
    jn, dn = specfun.spherical_bessel_j_and_prime(m, k2 * n)
    out = k2 * d * jn - k2 * n * j * dn
    return float(out) if out.ndim == 0 else out


def k1_factor(m, omega, params: LameParameters):
    """Compressional analogue of :func:`f_tilde`."""
    omega = np.asarray(omega, dtype=float)
    k1 = omega * math.sqrt(params.rho / (params.lam + 2 * params.mu))
    n = math.sqrt(params.rho_tilde / params.rho)
    j, d = specfun.spherical_bessel_j_and_prime(m, k1)
    jn, dn = specfun.spherical_bessel_j_and_prime(m, k1 * n)
    out = k1 * d * jn - k1 * n * j * dn
    return float(out) if out.ndim == 0 else out


def det_Fmn_radial(m, omega, params: LameParameters, n_deg=1, angle=None):
    """Frequency-dependent part of the factored determinant expression.

    k1-factor * k2-factor * |B|, where B is the angular-weighted combination of
    two 2x2 radial determinants with the angular ratios frozen at a generic
    angle.  B is complex in general, so its modulus is used; the sign changes
    of this function come from the two k-factors.
    """
    theta, phi = angle or generic_angle(m, n_deg)
    y, dt, dp, s = _angular(m, n_deg, theta, phi)
    omega = np.asarray(omega, dtype=float)
    k2 = omega * math.sqrt(params.rho / params.mu)
    n = math.sqrt(params.rho_tilde / params.rho)
    j, d = specfun.spherical_bessel_j_and_prime(m, k2)
    jn, dn = specfun.spherical_bessel_j_and_prime(m, k2 * n)
    det1 = (j + k2 * d) * (k2 * n) ** 2 * jn - (jn + k2 * n * dn) * k2**2 * j
    det2 = k2 * d * jn - k2 * n * dn * j
    ratio_t = dt / dp
    lead = (1 / s + s * ratio_t) / (3 / s**2 * (1 - 2 * n_deg**2 * (math.cos(theta) / s) * y / dt))
    bracket = lead * det1 - s * ratio_t * det2
    out = k1_factor(m, omega, params) * f_tilde(m, omega, params) * np.abs(bracket)
    return float(out) if np.ndim(out) == 0 else out


# -- brackets and roots ---------------------------------------------------------


def bracket_bi_3d(m, s0, params: LameParameters) -> Bracket:
    if s0 < 1:
        raise ParameterError("s0 must be >= 1")
    c = params.shear_speed / params.n
    return Bracket(c * specfun.spherical_bessel_zero(m, s0), c * specfun.spherical_bessel_zero(m, s0 + 1), "bi", (s0,))


def bracket_mono_3d(m, gamma1, gamma2, params: LameParameters) -> Bracket:
    s1, s2 = mono_indices(m, gamma1, gamma2)
    c = params.shear_speed
    return Bracket(c * specfun.spherical_bessel_zero(m, s1), c * specfun.spherical_bessel_zero(m, s2), "mono", (s1, s2))


def _spheroidal_det(m, omega, params):
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(omega.shape)
    for i, w in enumerate(omega.ravel()):
        mat = spheroidal_block(m, w, params)
        scale = np.max(np.abs(mat), axis=0)
        out.ravel()[i] = np.linalg.det(mat / scale)
    return out


CONDITIONS = {
    "f_tilde": f_tilde,
    "radial": det_Fmn_radial,
    "k1_factor": k1_factor,
    "spheroidal": _spheroidal_det,
}


def find_eigenvalue_3d(bracket: Bracket, m, params: LameParameters, which="f_tilde"):
    """Smallest root in ``bracket`` of one of the scalar conditions.

    ``which``: f_tilde (toroidal), radial (factored expression), k1_factor,
    or spheroidal (determinant of the 4x4 spheroidal block).
    """
    fn = CONDITIONS.get(which)
    if fn is None:
        raise ParameterError(f"unknown condition {which!r}")
    return scan_root(lambda w: fn(m, w, params), bracket.lo, bracket.hi)


# -- 6x6 boundary matrix --------------------------------------------------------


def _derived_matrix(m, omega, params, y, dt, dp, s):
    k = wavenumbers(omega, params)
    ds = dp / s
    cols = []
    for sign, kp, ks in ((1.0, k.k1, k.k2), (-1.0, k.k1_tilde, k.k2_tilde)):
        p = sign * spheroidal_amplitudes(m, kp, params, "p")
        t = sign * toroidal_amplitudes(m, ks, params)
        q = sign * spheroidal_amplitudes(m, ks, params, "s")
        for amp in (p, None, q):
            if amp is None:
                cols.append([0.0, t[0] * ds, -t[0] * dt, 0.0, t[1] * ds, -t[1] * dt])
            else:
                cols.append([amp[0] * y, amp[1] * dt, amp[1] * ds, amp[2] * y, amp[3] * dt, amp[3] * ds])
    return np.array(cols, dtype=complex).T


def _printed_matrix(m, omega, params, y, dt, dp, s, n_deg, theta):
    k = wavenumbers(omega, params)
    mu, lam = params.mu, params.lam
    L = m * (m + 1)
    cot = math.cos(theta) / s
    dpp = -(n_deg**2) * y  # d_phi^2 Y
    cols = []
    for kp, ks in ((k.k1, k.k2), (k.k1_tilde, k.k2_tilde)):
        jp, dpj, k2jpp_p = _radial_values(m, kp)
        js, dsj, _ = _radial_values(m, ks)
        j_k1 = specfun.spherical_bessel_j(m, k.k1)  # printed sixth-row entry uses j_m(k1) on the u side
        a61_extra = 2 * j_k1 if kp == k.k1 else 2 * js
        col_p = [
            kp * dpj * y,
            jp * dt,
            jp * dp / s,
            (2 * mu * k2jpp_p - lam * kp * kp * jp) * y,
            -2 * mu * (jp - kp * dpj) * dt,
            -2 * mu / s * (jp - kp * dpj) * dp,
        ]
        tail = dt / s**2 + 2 * cot / s**2 * dpp
        col_pol = [
            L * js * y,
            (js + ks * dsj) * dt,
            (js + ks * dsj) * dp / s,
            -2 * mu * L * (js - ks * dsj) * y,
            2 * mu * (-(js + ks * dsj) * dt + js * (tail + L * dt)) + mu * js * (tail + ks * ks * dt),
            mu / s * (2 * L * js - (js + ks * dsj) + ks * ks * js) * dp,
        ]
        col_tor = [
            0.0,
            js * dp / s,
            -js * dt,
            0.0,
            -mu / s * (2 * js * dp + (js + ks * dsj) * dt),
            mu * (a61_extra + js + ks * dsj) * dt,
        ]
        cols += [col_p, col_pol, col_tor]
    return np.array(cols, dtype=complex).T


def assemble_A(m, n_deg, omega, params: LameParameters, theta0=1.1, phi0=0.7, layout="derived"):
    """6x6 boundary matrix at the angle (theta0, phi0).

    Raises :class:`DegenerateAngleError` when Y, d_theta Y or d_phi Y nearly
    vanish there.
    """
    if m < 1 or abs(n_deg) > m:
        raise ParameterError("need m >= 1 and |n_deg| <= m")
    y, dt, dp, s = _angular(m, n_deg, theta0, phi0)
    if layout == "derived":
        return _derived_matrix(m, omega, params, y, dt, dp, s)
    if layout == "printed":
        return _printed_matrix(m, omega, params, y, dt, dp, s, n_deg, theta0)
    raise ParameterError(f"unknown layout {layout!r}")


def det_A_real(m, n_deg, omega, params, angle, layout="derived", reference=None):
    """Real projection of det(A) along its phase at a reference frequency.

    For the derived layout det(A) is an angle-only complex constant times a
    real function of omega, so this projection keeps every root.  Columns are
    scaled by positive factors to avoid underflow.
    """
    omegas = np.atleast_1d(np.asarray(omega, dtype=float))
    dets = np.empty(omegas.shape, dtype=complex)
    for i, w in enumerate(omegas):
        mat = assemble_A(m, n_deg, w, params, *angle, layout=layout)
        scale = np.max(np.abs(mat), axis=0)
        dets[i] = np.linalg.det(mat / scale)
    if reference is None:
        reference = dets[np.argmax(np.abs(dets))]
    out = (dets * np.conj(reference) / abs(reference)).real
    return float(out[0]) if np.ndim(omega) == 0 else out


def det_A_root(bracket, m, n_deg, params, angle, layout="derived"):
    """Smallest root of :func:`det_A_real` in ``bracket``."""
    grid = np.linspace(bracket.lo, bracket.hi, 65)
    ref_vals = np.array([np.linalg.det(_scaled(assemble_A(m, n_deg, w, params, *angle, layout=layout))) for w in grid])
    reference = ref_vals[np.argmax(np.abs(ref_vals))]
    return scan_root(
        lambda w: det_A_real(m, n_deg, w, params, angle, layout, reference), bracket.lo, bracket.hi
    )


def _scaled(mat):
    return mat / np.max(np.abs(mat), axis=0)


def solve_coefficients_3d(m, n_deg, omega, params: LameParameters, layout="derived"):
    """Unit nullvector (a, b, c, d, e, f) of the boundary matrix.

    Certified by the singular-value ratio at the assembly angle and by the
    residual at three further angles.
    """
    angle = generic_angle(m, n_deg)
    mat = assemble_A(m, n_deg, omega, params, *angle, layout=layout)
    vec, _ = nullvector(mat)
    pivot = vec[np.argmax(np.abs(vec))]
    vec = vec * (abs(pivot) / pivot)
    for extra in SECONDARY_ANGLES:
        try:
            other = assemble_A(m, n_deg, omega, params, *extra, layout=layout)
        except DegenerateAngleError:
            continue
        work = _scaled(other)
        cols = np.max(np.abs(other), axis=0)
        res = np.linalg.norm(work @ (vec * cols)) / (np.linalg.norm(work) * np.linalg.norm(vec * cols))
        if res > RESIDUAL_TOL:
            raise InconsistentNullspaceError(f"residual {res:.3e} at angle {extra}")
    return vec


def nullspace_residual(mat, vec):
    return float(np.linalg.norm(mat @ vec) / (np.linalg.norm(mat) * np.linalg.norm(vec)))


def make_mode_3d(m, n_deg, omega, params, layout="derived") -> BallEigenMode:
    coeffs = solve_coefficients_3d(m, n_deg, omega, params, layout)
    return BallEigenMode(m, n_deg, float(omega), tuple(complex(c) for c in coeffs), params)


def printed_discrepancies(m, n_deg, omega, params, angle=GENERIC_ANGLES[0], rtol=1e-10):
    """Entries where the printed layout differs from the derived one.

    The derived layout is reordered to the printed column order
    (P, poloidal, toroidal) with v unnegated before comparison.
    """
    derived = assemble_A(m, n_deg, omega, params, *angle, layout="derived")
    printed = assemble_A(m, n_deg, omega, params, *angle, layout="printed")
    aligned = derived[:, [0, 2, 1, 3, 5, 4]] * np.array([1, 1, 1, -1, -1, -1])
    scale = np.max(np.abs(aligned), axis=0)
    diff = np.abs(printed - aligned) / scale
    return [(i + 1, j + 1) for i, j in zip(*np.nonzero(diff > rtol))]


# -- radial localization --------------------------------------------------------

_WEIGHTS = {
    "printed": lambda m: (2 * math.pi, (2 * m + 1) * m * math.pi, (2 * m + 1) * m * math.pi),
    "orthonormal": lambda m: (1.0, m * (m + 1.0), m * (m + 1.0)),
}


def radial_l2_3d(coeffs, m, omega, params: LameParameters, tau, side, weights="printed"):
    """Integral over (0, tau) of the radial density

        w_r r^2 |P k j'(k_p r) + S L/r j(k_s r)|^2
        + w_t r^2 |T j(k_s r)|^2
        + w_t |P j(k_p r) + S (j(k_s r) + r k_s j'(k_s r))|^2

    with (P, T, S) = (a, b, c) for u and (d, e, f) for v.  ``weights``
    selects (w_r, w_t) for the toroidal and tangential terms: "printed" uses
    (2 pi, (2m+1) m pi), "orthonormal" uses (1, m(m+1)).
    """
    if not 0 < tau <= 1:
        raise ParameterError("tau must lie in (0, 1]")
    a, b, c, d, e, f = coeffs
    k = wavenumbers(omega, params)
    if side == "u":
        P, T, S, kp, ks = a, b, c, k.k1, k.k2
    elif side == "v":
        P, T, S, kp, ks = d, e, f, k.k1_tilde, k.k2_tilde
    else:
        raise ParameterError("side must be 'u' or 'v'")
    w_r, w_tor, w_tan = _WEIGHTS[weights](m)
    L = m * (m + 1)

    def density(r):
        jp, dpj = specfun.spherical_bessel_j_and_prime(m, kp * r)
        js, dsj = specfun.spherical_bessel_j_and_prime(m, ks * r)
        radial = P * kp * dpj + S * L / r * js
        tang = P * jp + S * (js + r * ks * dsj)
        return w_r * r * r * np.abs(radial) ** 2 + w_tor * r * r * np.abs(T * js) ** 2 + w_tan * np.abs(tang) ** 2

    return quadrature_1d(density, 0.0, tau, waves=max(kp, ks) * tau / math.pi)


def localization_ratio_3d(mode: BallEigenMode, side, tau, weights="printed"):
    num = radial_l2_3d(mode.coeffs, mode.m, mode.omega, mode.params, tau, side, weights)
    den = radial_l2_3d(mode.coeffs, mode.m, mode.omega, mode.params, 1.0, side, weights)
    return math.sqrt(num / den)
