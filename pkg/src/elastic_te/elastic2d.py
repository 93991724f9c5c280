"""Transmission eigenvalues and eigenfunctions of the Lamé system on the unit disk.

The eigen-pair is sought as

    u = alpha grad(J_m(k1 r) e^{im theta}) + gamma curl(J_m(k2 r) e^{im theta})
    v = beta  grad(J_m(k1~ r) e^{im theta}) + delta curl(J_m(k2~ r) e^{im theta})

with the scalar curl curl f = (-d_y f, d_x f).  Continuity of displacement and
traction on r = 1 gives a 4x4 system in (alpha, gamma, beta, delta); its
determinant vanishes exactly at the transmission eigenvalues.
"""
from dataclasses import dataclass, replace
from functools import lru_cache
import math

import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateBracketError,
    NoRootFoundError,
    NotAnEigenvalueError,
    ParameterError,
)
from .params import LameParameters, Wavenumbers, wavenumbers
from . import specfun

SCAN_PANELS = 400
MAX_SCAN_PANELS = 4000
SV_RATIO_MAX = 1e-6
DET_TOL = 1e-7


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    kind: str
    indices: tuple

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterError(f"bracket must satisfy lo < hi, got ({self.lo}, {self.hi})")

    def contains(self, x):
        return self.lo < x < self.hi


@dataclass(frozen=True)
class DiskEigenMode:
    m: int
    omega: float
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex
    params: LameParameters

    @property
    def wavenumbers(self) -> Wavenumbers:
        return wavenumbers(self.omega, self.params)

    @property
    def coefficients(self):
        return (self.alpha, self.beta, self.gamma, self.delta)

    def scaled(self, factor):
        return replace(
            self,
            alpha=self.alpha * factor,
            beta=self.beta * factor,
            gamma=self.gamma * factor,
            delta=self.delta * factor,
        )

    def side(self, side):
        """(p coefficient, s coefficient, k_p, k_s) of one side of the pair."""
        k = self.wavenumbers
        if side == "u":
            return self.alpha, self.gamma, k.k1, k.k2
        if side == "v":
            return self.beta, self.delta, k.k1_tilde, k.k2_tilde
        raise ParameterError(f"side must be 'u' or 'v', got {side!r}")


# -- boundary system ------------------------------------------------------------


def _wave_arrays(omega, params):
    omega = np.asarray(omega, dtype=float)
    p_mod = params.lam + 2 * params.mu
    return (
        omega * math.sqrt(params.rho / p_mod),
        omega * math.sqrt(params.rho / params.mu),
        omega * math.sqrt(params.rho_tilde / p_mod),
        omega * math.sqrt(params.rho_tilde / params.mu),
    )


def boundary_matrix(m, omega, params: LameParameters):
    """Boundary system at r = 1, columns ordered (alpha, gamma, beta, delta).

    Rows: radial and angular displacement continuity, then radial and angular
    traction continuity (each scaled so the common factor e^{im theta} drops).
    ``omega`` may be an array; the result then has shape omega.shape + (4, 4).
    """
    if m < 1:
        raise ParameterError("angular order m must be >= 1")
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ParameterError("omega must be positive")
    k1, k2, k1t, k2t = _wave_arrays(omega, params)
    mu = params.mu
    w2, w2t = params.rho * omega**2, params.rho_tilde * omega**2
    j1, d1 = specfun.bessel_j_and_prime(m, k1)
    j2, d2 = specfun.bessel_j_and_prime(m, k2)
    j1t, d1t = specfun.bessel_j_and_prime(m, k1t)
    j2t, d2t = specfun.bessel_j_and_prime(m, k2t)
    im = 1j * m
    mm = 2 * mu * m * m

    a = (w2 - mm) * j1 + 2 * mu * k1 * d1
    b = 2 * mu * im * (k2 * d2 - j2)
    c = -((w2t - mm) * j1t + 2 * mu * k1t * d1t)
    d = -2 * mu * im * (k2t * d2t - j2t)
    e = -2 * mu * im * (k1 * d1 - j1)
    f = (w2 - mm) * j2 + 2 * mu * k2 * d2
    g = 2 * mu * im * (k1t * d1t - j1t)
    h = -((w2t - mm) * j2t + 2 * mu * k2t * d2t)

    out = np.empty(omega.shape + (4, 4), dtype=complex)
    out[..., 0, :] = np.stack([k1 * d1, -im * j2, -k1t * d1t, im * j2t], axis=-1)
    out[..., 1, :] = np.stack([im * j1, k2 * d2, -im * j1t, -k2t * d2t], axis=-1)
    out[..., 2, :] = np.stack([a, b, c, d], axis=-1)
    out[..., 3, :] = np.stack([e, f, g, h], axis=-1)
    return out


def _row_norm_product(mat):
    return np.prod(np.linalg.norm(mat, axis=-1), axis=-1)


@lru_cache(maxsize=256)
def _dominant_component(m, params):
    """Which component of the complex determinant carries its zero set.

    Calibrated on a fixed frequency sample.
    """
    omegas = params.shear_speed * np.linspace(0.3, 1.5 * (m + 5), 32)
    mats = boundary_matrix(m, omegas, params)
    dets = np.linalg.det(mats) / _row_norm_product(mats)
    return "real" if np.max(np.abs(dets.real)) >= np.max(np.abs(dets.imag)) else "imag"


def _column_equilibrate(mats):
    scale = np.max(np.abs(mats), axis=-2, keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    return mats / scale


def det_fm(m, omega, params: LameParameters, scaled=False):
    """Real-valued determinant of :func:`boundary_matrix`.

    The determinant of this layout is real up to round-off; the orthogonal
    component is checked against 1e-8 times the product of the row norms.
    ``scaled=True`` first divides each column by its largest entry, a
    positive factor that leaves signs and the zero set unchanged but keeps
    the value away from underflow at large m.
    """
    mats = boundary_matrix(m, omega, params)
    if scaled:
        mats = _column_equilibrate(mats)
    dets = np.linalg.det(mats)
    tol = 1e-8 * _row_norm_product(mats)
    if _dominant_component(m, params) == "real":
        main, other = dets.real, dets.imag
    else:
        main, other = dets.imag, dets.real
    if np.any(np.abs(other) > tol):
        raise ConsistencyError(
            f"determinant has two non-negligible components (m={m}, max {np.max(np.abs(other)):.3e})"
        )
    return float(main) if np.ndim(omega) == 0 else main


# -- brackets and roots ---------------------------------------------------------


def floor_strict(t):
    """Largest integer strictly smaller than t."""
    f = math.floor(t)
    return f - 1 if f == t else f


def mono_indices(m, gamma1, gamma2):
    if not 0 < gamma1 < gamma2 < 1:
        raise ParameterError("need 0 < gamma1 < gamma2 < 1")
    s1, s2 = floor_strict(m**gamma1), floor_strict(m**gamma2)
    if s1 < 1:
        raise DegenerateBracketError(f"m = {m} too small: first index {s1} < 1")
    if s1 >= s2:
        raise DegenerateBracketError(f"indices collapse for m = {m}: s1 = {s1}, s2 = {s2}")
    return s1, s2


def bracket_mono(m, gamma1, gamma2, params: LameParameters) -> Bracket:
    """Interval (c j_{m,s1}, c j_{m,s2}) with c = sqrt(mu/rho), s_i from m^gamma_i."""
    s1, s2 = mono_indices(m, gamma1, gamma2)
    c = params.shear_speed
    return Bracket(c * specfun.bessel_zero(m, s1), c * specfun.bessel_zero(m, s2), "mono", (s1, s2))


def bracket_bi(m, s0, params: LameParameters) -> Bracket:
    """Interval (c j_{m,s0} / n, c j_{m,s0+1} / n) with c = sqrt(mu/rho)."""
    if s0 < 1:
        raise ParameterError("s0 must be >= 1")
    c = params.shear_speed / params.n
    return Bracket(c * specfun.bessel_zero(m, s0), c * specfun.bessel_zero(m, s0 + 1), "bi", (s0,))


def _first_sign_change(xs, fs):
    sign = np.sign(fs)
    exact = np.nonzero(sign == 0)[0]
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    first_exact = exact[0] if len(exact) else None
    first_flip = flips[0] if len(flips) else None
    if first_exact is not None and (first_flip is None or first_exact <= first_flip):
        return ("exact", first_exact)
    if first_flip is not None:
        return ("flip", first_flip)
    return None


def bisect(f, a, b, fa=None, xtol=1e-13):
    """Bisection on a sign-change interval of a scalar function."""
    fa = f(a) if fa is None else fa
    while b - a > xtol * max(1.0, abs(a)):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def scan_root(f_vec, lo, hi, panels=SCAN_PANELS, max_panels=MAX_SCAN_PANELS):
    """Smallest root of a continuous function on (lo, hi).

    Uniform sign scan with ``panels`` panels, doubled up to ``max_panels``
    when no sign change shows up, then bisection.  ``f_vec`` must accept
    arrays.
    """
    n = panels
    while True:
        xs = np.linspace(lo, hi, n + 1)
        fs = np.asarray(f_vec(xs), dtype=float)
        hit = _first_sign_change(xs, fs)
        if hit is not None:
            break
        if n >= max_panels:
            raise NoRootFoundError(
                f"no sign change on ({lo}, {hi}) with {n} panels", scan=(xs, fs)
            )
        n = min(2 * n, max_panels)
    how, i = hit
    if how == "exact":
        return float(xs[i])
    return bisect(lambda x: float(f_vec(x)), float(xs[i]), float(xs[i + 1]), fa=float(fs[i]))


def find_eigenvalue(bracket: Bracket, m, params: LameParameters):
    """Smallest zero of :func:`det_fm` inside ``bracket``."""
    return scan_root(lambda w: det_fm(m, w, params, scaled=True), bracket.lo, bracket.hi)


# -- coefficients ---------------------------------------------------------------


def equilibrate(mat, sweeps=4):
    """Row and column scalings D_r, D_c making D_r mat D_c well balanced."""
    rows = np.ones(mat.shape[0])
    cols = np.ones(mat.shape[1])
    work = mat.copy()
    for _ in range(sweeps):
        r = np.linalg.norm(work, axis=1)
        r[r == 0] = 1.0
        work /= r[:, None]
        rows /= r
        c = np.linalg.norm(work, axis=0)
        c[c == 0] = 1.0
        work /= c[None, :]
        cols /= c
    return work, rows, cols


def nullvector(mat, ratio_max=SV_RATIO_MAX, det_tol=None):
    """Unit nullvector of a nearly singular square matrix.

    Returns (vector, singular-value ratio).  The ratio is measured on the
    equilibrated matrix since raw entries can differ by many decades.
    """
    work, _, cols = equilibrate(mat)
    _, sv, vh = np.linalg.svd(work)
    ratio = sv[-1] / sv[0]
    if det_tol is not None:
        det = abs(np.linalg.det(work))
        if det > det_tol * np.prod(np.linalg.norm(work, axis=1)):
            raise NotAnEigenvalueError(f"determinant {det:.3e} not negligible")
    if not ratio < ratio_max:
        raise NotAnEigenvalueError(f"singular-value ratio {ratio:.3e} >= {ratio_max:g}")
    vec = cols * vh[-1].conj()
    return vec / np.linalg.norm(vec), ratio


def _phase_fix(vec, lead):
    pivot = vec[lead] if abs(vec[lead]) > 1e-14 else vec[np.argmax(np.abs(vec) > 1e-14)]
    return vec * (abs(pivot) / pivot)


def solve_coefficients(m, omega, params: LameParameters):
    """(alpha, beta, gamma, delta) spanning the nullspace of the boundary system.

    Unit Euclidean norm, phase fixed so that alpha is real and non-negative.
    """
    mat = boundary_matrix(m, omega, params)
    vec, _ = nullvector(mat, det_tol=DET_TOL)
    alpha, gamma, beta, delta = _phase_fix(vec, 0)
    if alpha.real < 0:
        alpha, gamma, beta, delta = -alpha, -gamma, -beta, -delta
    alpha = complex(alpha.real, 0.0)
    return alpha, beta, gamma, delta


def singular_value_ratio(m, omega, params):
    work, _, _ = equilibrate(boundary_matrix(m, omega, params))
    sv = np.linalg.svd(work, compute_uv=False)
    return sv[-1] / sv[0]


def make_mode(m, omega, params: LameParameters) -> DiskEigenMode:
    alpha, beta, gamma, delta = solve_coefficients(m, omega, params)
    return DiskEigenMode(m, float(omega), alpha, beta, gamma, delta, params)


def compute_mode(m, params: LameParameters, kind="bi", s0=1, gammas=(0.3, 0.8)) -> DiskEigenMode:
    """Eigenvalue in the bi or mono bracket and its unit-norm mode."""
    if kind == "bi":
        br = bracket_bi(m, s0, params)
    elif kind == "mono":
        br = bracket_mono(m, gammas[0], gammas[1], params)
    else:
        raise ParameterError(f"kind must be 'bi' or 'mono', got {kind!r}")
    return make_mode(m, find_eigenvalue(br, m, params), params)


def closed_form_gamma_over_alpha(m, omega, params):
    """gamma / alpha from eliminating beta and delta from the displacement rows.

    Valid when mu~ = mu and lam~ = lam; used as an independent oracle for the
    nullvector.
    """
    k = wavenumbers(omega, params)
    n = params.n
    j1, d1 = specfun.bessel_j_and_prime(m, k.k1)
    j2 = specfun.bessel_j(m, k.k2)
    j1n, d1n = specfun.bessel_j_and_prime(m, k.k1 * n)
    return -1j * (n / (n * n - 1)) * (k.k1 / m) * (j1 / j2) * (n * d1 / j1 - d1n / j1n)


# -- field evaluation -----------------------------------------------------------


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r > 1)):
        raise ParameterError("r must lie in [0, 1]")
    return r


def _radial(m, k, r):
    """F, F', F'' of F(r) = J_m(k r) for r > 0 (F'' from Bessel's equation)."""
    x = k * r
    j, d = specfun.bessel_j_and_prime(m, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        dd = -d / x - (1.0 - m * m / (x * x)) * j
    return j, k * d, k * k * dd


def _scalar_gradient(m, k, r, theta):
    """Cartesian gradient (f_x, f_y) of f = J_m(k r) e^{im theta}."""
    F, Fr, _ = _radial(m, k, r)
    e = np.exp(1j * m * theta)
    c, s = np.cos(theta), np.sin(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = 1j * m * F / r
    fx = e * (c * Fr - s * ang)
    fy = e * (s * Fr + c * ang)
    origin = r == 0
    if np.any(origin):
        lim = k / 2 if m == 1 else 0.0
        fx = np.where(origin, lim, fx)
        fy = np.where(origin, 1j * lim, fy)
    return fx, fy


def _scalar_hessian(m, k, r, theta):
    """(f_xx, f_xy, f_yy) of f = J_m(k r) e^{im theta}."""
    F, Fr, Frr = _radial(m, k, r)
    e = np.exp(1j * m * theta)
    c, s = np.cos(theta), np.sin(theta)
    ft = 1j * m * F
    frt = 1j * m * Fr
    ftt = -m * m * F
    with np.errstate(divide="ignore", invalid="ignore"):
        ir, ir2 = 1.0 / r, 1.0 / (r * r)
        fxx = c * c * Frr + s * s * ir * Fr + s * s * ir2 * ftt - 2 * s * c * ir * frt + 2 * s * c * ir2 * ft
        fyy = s * s * Frr + c * c * ir * Fr + c * c * ir2 * ftt + 2 * s * c * ir * frt - 2 * s * c * ir2 * ft
        cs2 = c * c - s * s
        fxy = s * c * Frr - s * c * ir * Fr - s * c * ir2 * ftt + cs2 * ir * frt - cs2 * ir2 * ft
    fxx, fxy, fyy = e * fxx, e * fxy, e * fyy
    origin = r == 0
    if np.any(origin):
        q = k * k / 4 if m == 2 else 0.0
        fxx = np.where(origin, q, fxx)
        fxy = np.where(origin, 1j * q, fxy)
        fyy = np.where(origin, -q, fyy)
    return fxx, fxy, fyy


def _field(m, p, s, kp, ks, r, theta, parts="ps"):
    r, theta = np.broadcast_arrays(_check_radius(r), np.asarray(theta, dtype=float))
    out = np.zeros(r.shape + (2,), dtype=complex)
    if "p" in parts:
        fx, fy = _scalar_gradient(m, kp, r, theta)
        out[..., 0] += p * fx
        out[..., 1] += p * fy
    if "s" in parts:
        gx, gy = _scalar_gradient(m, ks, r, theta)
        out[..., 0] += -s * gy
        out[..., 1] += s * gx
    return out


def eval_mode(mode: DiskEigenMode, side, r, theta, parts="ps"):
    """Cartesian displacement of u or v at (r, theta); shape broadcast(r, theta) + (2,).

    ``parts`` selects the compressional ("p"), shear ("s") or both ("ps") terms.
    """
    p, s, kp, ks = mode.side(side)
    return _field(mode.m, p, s, kp, ks, r, theta, parts)


def decompose_ps(mode: DiskEigenMode, side):
    """Evaluators (r, theta) -> field of the compressional and shear parts."""
    mode.side(side)

    def p_part(r, theta):
        return eval_mode(mode, side, r, theta, parts="p")

    def s_part(r, theta):
        return eval_mode(mode, side, r, theta, parts="s")

    return p_part, s_part


def mode_gradient(mode: DiskEigenMode, side, r, theta, parts="ps"):
    """Jacobian G[..., i, j] = d_j w_i of the displacement in Cartesian components."""
    p, s, kp, ks = mode.side(side)
    m = mode.m
    r, theta = np.broadcast_arrays(_check_radius(r), np.asarray(theta, dtype=float))
    out = np.zeros(r.shape + (2, 2), dtype=complex)
    if "p" in parts:
        pxx, pxy, pyy = _scalar_hessian(m, kp, r, theta)
        out[..., 0, 0] += p * pxx
        out[..., 0, 1] += p * pxy
        out[..., 1, 0] += p * pxy
        out[..., 1, 1] += p * pyy
    if "s" in parts:
        sxx, sxy, syy = _scalar_hessian(m, ks, r, theta)
        # w = s (-xi_y, xi_x)
        out[..., 0, 0] += -s * sxy
        out[..., 0, 1] += -s * syy
        out[..., 1, 0] += s * sxx
        out[..., 1, 1] += s * sxy
    return out


def stress_from_gradient(grad, params: LameParameters):
    eps = 0.5 * (grad + np.swapaxes(grad, -1, -2))
    tr = eps[..., 0, 0] + eps[..., 1, 1]
    sigma = 2 * params.mu * eps
    sigma[..., 0, 0] += params.lam * tr
    sigma[..., 1, 1] += params.lam * tr
    return sigma


def mode_stress(mode: DiskEigenMode, side, r, theta, parts="ps"):
    """Cauchy stress lam tr(eps) I + 2 mu eps."""
    return stress_from_gradient(mode_gradient(mode, side, r, theta, parts), mode.params)


def boundary_traction(mode: DiskEigenMode, side, theta):
    theta = np.asarray(theta, dtype=float)
    sigma = mode_stress(mode, side, np.ones_like(theta), theta)
    normal = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return np.einsum("...ij,...j->...i", sigma, normal)


def boundary_residual(mode: DiskEigenMode, samples=128):
    """Largest relative mismatch of displacement and traction across r = 1."""
    theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    ones = np.ones_like(theta)
    u = eval_mode(mode, "u", ones, theta)
    v = eval_mode(mode, "v", ones, theta)
    tu = boundary_traction(mode, "u", theta)
    tv = boundary_traction(mode, "v", theta)

    def rel(a, b):
        scale = max(np.max(np.linalg.norm(a, axis=-1)), np.max(np.linalg.norm(b, axis=-1)))
        return np.max(np.linalg.norm(a - b, axis=-1)) / scale

    return float(max(rel(u, v), rel(tu, tv)))


# -- exact derivatives by raising and lowering ----------------------------------
#
# With D+ = d_x + i d_y and D- = d_x - i d_y,
#   D+ [J_q(kr) e^{iq theta}] = -k J_{q+1}(kr) e^{i(q+1) theta}
#   D- [J_q(kr) e^{iq theta}] =  k J_{q-1}(kr) e^{i(q-1) theta}
# so every Cartesian derivative of the ansatz is a finite sum of such terms.
# This is independent of the polar formulas above and exact at r = 0.


class LadderField:
    """Finite sum of c * J_q(k r) e^{i q theta}, keyed by (k, q)."""

    def __init__(self, terms=None):
        self.terms = dict(terms or {})

    @classmethod
    def wave(cls, k, q, coef=1.0):
        return cls({(k, q): complex(coef)})

    def __add__(self, other):
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0.0) + c
        return LadderField(out)

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return LadderField({key: c * scalar for key, c in self.terms.items()})

    __rmul__ = __mul__

    def raise_(self):
        return LadderField({(k, q + 1): -k * c for (k, q), c in self.terms.items()})

    def lower(self):
        return LadderField({(k, q - 1): k * c for (k, q), c in self.terms.items()})

    def dx(self):
        return (self.raise_() + self.lower()) * 0.5

    def dy(self):
        return (self.raise_() - self.lower()) * (-0.5j)

    def __call__(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        out = np.zeros(r.shape, dtype=complex)
        for (k, q), c in self.terms.items():
            if c == 0:
                continue
            j = specfun.bessel_j(abs(q), k * r)
            if q < 0 and q % 2:
                j = -j
            out += c * j * np.exp(1j * q * theta)
        return out


def ladder_fields(mode: DiskEigenMode, side):
    """(w1, w2) of one side as LadderField objects."""
    p, s, kp, ks = mode.side(side)
    phi = LadderField.wave(kp, mode.m, p)
    xi = LadderField.wave(ks, mode.m, s)
    return phi.dx() - xi.dy(), phi.dy() + xi.dx()


def operator_parts(mode: DiskEigenMode, side, r, theta):
    """Compressional and shear parts from the field-level operators

        w^p = -(1/k_p^2) grad(div w),
        w^s = (1/k_s^2) (d_xy w2 - d_yy w1, d_xy w1 - d_xx w2),

    applied to the total field with the side's own wavenumbers.
    """
    _, _, kp, ks = mode.side(side)
    w1, w2 = ladder_fields(mode, side)
    div = w1.dx() + w2.dy()
    wp = (div.dx() * (-1 / kp**2), div.dy() * (-1 / kp**2))
    ws = (
        (w2.dx().dy() - w1.dy().dy()) * (1 / ks**2),
        (w1.dx().dy() - w2.dx().dx()) * (1 / ks**2),
    )
    p = np.stack([wp[0](r, theta), wp[1](r, theta)], axis=-1)
    s = np.stack([ws[0](r, theta), ws[1](r, theta)], axis=-1)
    return p, s
