"""Localization ratios, stress fields, sector energies, sup-norms and growth fits."""
from dataclasses import dataclass
import math

import numpy as np

from .elastic2d import DiskEigenMode, mode_gradient, mode_stress
from .errors import ConsistencyError, DegenerateModeError, ParameterError
from .quadrature import gauss_legendre_nodes, panel_count, quadrature_1d, quadrature_1d_with_error
from . import specfun

__all__ = [
    "SectorRegion",
    "GrowthFit",
    "quadrature_1d",
    "l2_norm",
    "l2_norm_grid",
    "localization_ratio",
    "gradient",
    "stress",
    "sector_energy",
    "grad_sup",
    "normalize",
    "growth_order_fit",
    "integral_estimate_check",
]

SIDES = ("u", "v", "up", "us", "vp", "vs")


@dataclass(frozen=True)
class SectorRegion:
    tau: float = 2.0 / 3.0
    theta1: float = 0.0
    theta2: float = math.pi / 3.0

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ParameterError("tau must lie in (0, 1)")
        if not 0 <= self.theta1 < self.theta2 <= 2 * math.pi:
            raise ParameterError("need 0 <= theta1 < theta2 <= 2 pi")


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    r_squared: float
    sample_count: int


def _split_side(side):
    if side not in SIDES:
        raise ParameterError(f"side must be one of {SIDES}, got {side!r}")
    return side[0], (side[1:] or "ps")


def gradient(mode: DiskEigenMode, side, r, theta):
    """Cartesian Jacobian d_j w_i of u or v (analytic second derivatives)."""
    base, parts = _split_side(side)
    return mode_gradient(mode, base, r, theta, parts)


def stress(mode: DiskEigenMode, side, r, theta):
    base, parts = _split_side(side)
    return mode_stress(mode, base, r, theta, parts)


# -- L2 norms -------------------------------------------------------------------


def _radial_density(mode, side):
    """Integrand over r of the angular integral of |w|^2 r, without the 2 pi."""
    base, parts = _split_side(side)
    p, s, kp, ks = mode.side(base)
    m = mode.m
    cp = abs(p) ** 2 if "p" in parts else 0.0
    cs = abs(s) ** 2 if "s" in parts else 0.0
    cross = (p * np.conj(s)).imag if parts == "ps" else 0.0

    def density(r):
        jp, dp = specfun.bessel_j_and_prime(m, kp * r)
        js, ds = specfun.bessel_j_and_prime(m, ks * r)
        out = cp * (kp**2 * dp**2 * r + m * m * jp**2 / r)
        out = out + cs * (ks**2 * ds**2 * r + m * m * js**2 / r)
        if cross:
            h_prime = kp * dp * js + ks * jp * ds
            out = out - 2.0 * cross * m * h_prime
        return out

    return density, max(kp, ks)


def l2_norm(mode: DiskEigenMode, side, tau=1.0):
    """L2 norm over the disk of radius tau by one-dimensional radial reduction.

    ``side`` is one of u, v, up, us, vp, vs (p and s select the compressional
    and shear parts).
    """
    if not 0 < tau <= 1:
        raise ParameterError("tau must lie in (0, 1]")
    density, k = _radial_density(mode, side)
    value = 2 * math.pi * quadrature_1d(density, 0.0, tau, waves=k * tau / math.pi)
    if value < 0:
        if value < -1e-12 * 2 * math.pi * abs(quadrature_1d(lambda r: abs(density(r)), 0.0, tau)):
            raise ConsistencyError(f"negative squared norm {value:.3e}")
        value = 0.0
    return math.sqrt(value)


def l2_norm_grid(mode: DiskEigenMode, side, tau=1.0):
    """Same norm by a tensor-grid quadrature of |w|^2 r dr dtheta."""
    from .elastic2d import eval_mode

    base, parts = _split_side(side)
    _, _, kp, ks = mode.side(base)
    k = max(kp, ks)
    r, wr = gauss_legendre_nodes(0.0, tau, panel_count(k * tau / math.pi) * 2)
    t, wt = gauss_legendre_nodes(0.0, 2 * math.pi, panel_count(2 * mode.m) * 2)
    field = eval_mode(mode, base, r[:, None], t[None, :], parts)
    dens = np.sum(np.abs(field) ** 2, axis=-1) * r[:, None]
    return math.sqrt(float(wr @ dens @ wt))


def localization_ratio(mode: DiskEigenMode, side, tau):
    """||w||_{L2(disk of radius tau)} / ||w||_{L2(unit disk)}."""
    if not 0 < tau < 1:
        raise ParameterError("tau must lie in (0, 1)")
    total = l2_norm(mode, side, 1.0)
    if total == 0:
        raise DegenerateModeError(f"side {side} has zero norm")
    return l2_norm(mode, side, tau) / total


def normalize(mode: DiskEigenMode, convention="v_unit") -> DiskEigenMode:
    """Scale all coefficients so the chosen side has unit L2 norm on the disk."""
    side = {"v_unit": "v", "u_unit": "u"}.get(convention)
    if side is None:
        raise ParameterError("convention must be 'v_unit' or 'u_unit'")
    norm = l2_norm(mode, side, 1.0)
    if norm == 0:
        raise DegenerateModeError(f"side {side} has zero norm")
    return mode.scaled(1.0 / norm)


# -- sector quantities ----------------------------------------------------------


def _sector_grid(mode, side, region, refine=1):
    base, _ = _split_side(side)
    _, _, kp, ks = mode.side(base)
    k = max(kp, ks)
    r, wr = gauss_legendre_nodes(region.tau, 1.0, refine * panel_count(k * (1 - region.tau) / math.pi))
    span = region.theta2 - region.theta1
    t, wt = gauss_legendre_nodes(region.theta1, region.theta2, refine * panel_count(mode.m * span / math.pi))
    return r, wr, t, wt


def energy_density(mode: DiskEigenMode, side, r, theta):
    """sigma(w) : conj(grad w), complex (its imaginary part vanishes in exact arithmetic)."""
    grad = gradient(mode, side, r, theta)
    from .elastic2d import stress_from_gradient

    sigma = stress_from_gradient(grad, mode.params)
    return np.sum(sigma * np.conj(grad), axis=(-2, -1))


def sector_energy(mode: DiskEigenMode, side, region: SectorRegion, measure="literal"):
    """Integral of Re(sigma(w) : conj(grad w)) over the annular sector.

    ``measure="literal"`` integrates dr dtheta, ``measure="area"`` r dr dtheta.
    """
    if measure not in ("literal", "area"):
        raise ParameterError("measure must be 'literal' or 'area'")
    r, wr, t, wt = _sector_grid(mode, side, region)
    dens = energy_density(mode, side, r[:, None], t[None, :])
    if measure == "area":
        dens = dens * r[:, None]
    total = wr @ dens @ wt
    if abs(total.imag) > 1e-8 * max(abs(total.real), 1e-300):
        raise ConsistencyError(f"energy has imaginary part {total.imag:.3e}")
    return float(total.real)


def grad_sup(mode: DiskEigenMode, side, region: SectorRegion, squared=False, refine=1):
    """Largest Frobenius norm of the Jacobian over a tensor grid of the closed sector.

    The grid has at least 20 radial and max(64, 8m) angular nodes, both
    scaled with the local oscillation.  ``squared`` returns max |grad w|^2.
    """
    base, _ = _split_side(side)
    _, _, kp, ks = mode.side(base)
    k = max(kp, ks)
    nr = refine * max(20, int(math.ceil(16 * k * (1 - region.tau) / math.pi))) + 1
    nt = refine * max(64, 8 * mode.m) + 1
    r = np.linspace(region.tau, 1.0, nr)
    t = np.linspace(region.theta1, region.theta2, nt)
    grad = gradient(mode, side, r[:, None], t[None, :])
    frob2 = np.sum(np.abs(grad) ** 2, axis=(-2, -1))
    top = float(np.max(frob2))
    return top if squared else math.sqrt(top)


# -- fits and estimates ---------------------------------------------------------


def growth_order_fit(samples):
    """Least-squares line through (log x, log y)."""
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ParameterError("need at least three (x, y) samples")
    if np.any(pts <= 0):
        raise ParameterError("samples must be positive")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return GrowthFit(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)), len(pts))


def bessel_mass_ratio(m, tau2, tau1):
    """Integral of J_m(m r)^2 r over (tau2, tau1) divided by J_m(m tau1)^2."""
    if not 0 < tau2 < tau1:
        raise ParameterError("need 0 < tau2 < tau1")
    integral, _ = quadrature_1d_with_error(
        lambda r: specfun.bessel_j(m, m * r) ** 2 * r, tau2, tau1, waves=m * tau1 / math.pi
    )
    return integral / specfun.bessel_j(m, m * tau1) ** 2


def integral_estimate_check(m, tau2, tau1):
    """(lhs at m, local decay exponent).

    The exponent is the log-log slope of the ratio between orders m/2 and m.
    ``tau1`` may be a number or a function of m.
    """
    t1 = tau1 if callable(tau1) else (lambda _m: tau1)
    half = max(1, m // 2)
    lhs = bessel_mass_ratio(m, tau2, t1(m))
    lhs_half = bessel_mass_ratio(half, tau2, t1(half))
    return lhs, math.log(lhs / lhs_half) / math.log(m / half)
