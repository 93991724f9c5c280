"""Bessel functions of the first kind, spherical Bessel functions and their zeros.

Evaluation uses the ascending series where its terms decrease monotonically
and Miller's backward recurrence elsewhere, so there is no region in which an
asymptotic expansion is the compute path.  Asymptotic formulas live here only
as cross-checks.

Zeros are found by a sign-change scan started at the order (no zero of J_m
lies below m) followed by safeguarded Newton iteration, and every zero of
J_m with m >= 1 is certified against the two-sided Airy-zero window.
"""
import math

import numpy as np

from .errors import BesselDomainError, BoundViolationError, ZeroRefinementError

_TINY_START = 1e-30
_RESCALE_AT = 1e200
_RESCALE_BY = 1e-200


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise BesselDomainError("argument must be finite")
    if np.any(arr < 0):
        raise BesselDomainError("argument must be non-negative")
    return arr


def _check_order(m):
    if int(m) != m or m < 0:
        raise BesselDomainError(f"order must be a non-negative integer, got {m}")
    return int(m)


def _series(nu, x):
    """Ascending series of J_nu(x) for real nu >= 0, x > 0."""
    half = x / 2.0
    lead = np.exp(nu * np.log(half) - math.lgamma(nu + 1.0))
    q = -half * half
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 400):
        term = term * q / (k * (k + nu))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return lead * total


def _series_region(nu, x):
    # terms decrease from the first one on when (x/2)^2 < nu + 1
    return x <= 2.0 * math.sqrt(nu + 1.0)


def _miller_pair(m, x):
    """J_{m-1}(x) and J_m(x) by backward recurrence, x > 0 array.

    Normalized with 1 = J_0 + 2 * sum_k J_{2k}.  For m = 0 the first output is
    J_{-1} = -J_1.
    """
    top = max(float(m), float(np.max(x)))
    start = int(top + math.sqrt(160.0 * top) + 20)
    start += start % 2
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, _TINY_START)
    norm = np.zeros_like(x)
    jm = np.zeros_like(x)
    jm1 = np.zeros_like(x)
    j1 = np.zeros_like(x)
    two_over_x = 2.0 / x
    for k in range(start, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        order = k - 1
        if order == 0:
            norm = norm + j_cur
        elif order % 2 == 0:
            norm = norm + 2.0 * j_cur
        if order == m:
            jm = j_cur.copy()
        if order == m - 1:
            jm1 = j_cur.copy()
        if order == 1:
            j1 = j_cur.copy()
        big = np.abs(j_cur) > _RESCALE_AT
        if np.any(big):
            for arr in (j_cur, j_next, norm, jm, jm1, j1):
                arr[big] *= _RESCALE_BY
    if m == 0:
        jm1 = -j1
    return jm1 / norm, jm / norm


def _miller_pair_scalar(m, x):
    """Plain-float version of :func:`_miller_pair` for one argument."""
    top = max(float(m), x)
    start = int(top + math.sqrt(160.0 * top) + 20)
    start += start % 2
    j_next, j_cur = 0.0, _TINY_START
    norm = jm = jm1 = j1 = 0.0
    two_over_x = 2.0 / x
    for k in range(start, 0, -1):
        j_next, j_cur = j_cur, k * two_over_x * j_cur - j_next
        order = k - 1
        if order == 0:
            norm += j_cur
        elif order % 2 == 0:
            norm += 2.0 * j_cur
        if order == m:
            jm = j_cur
        elif order == m - 1:
            jm1 = j_cur
        if order == 1:
            j1 = j_cur
        if abs(j_cur) > _RESCALE_AT:
            j_cur *= _RESCALE_BY
            j_next *= _RESCALE_BY
            norm *= _RESCALE_BY
            jm *= _RESCALE_BY
            jm1 *= _RESCALE_BY
            j1 *= _RESCALE_BY
    if m == 0:
        jm1 = -j1
    return jm1 / norm, jm / norm


def _bessel_pair(m, x):
    """(J_{m-1}(x), J_m(x)) for an integer order m >= 0 and array x >= 0."""
    lower = np.zeros_like(x)
    upper = np.zeros_like(x)
    zero = x == 0
    if m == 0:
        upper[zero] = 1.0
    if m == 1:
        lower[zero] = 1.0
    ser = _series_region(m, x) & ~zero
    if np.any(ser):
        xs = x[ser]
        upper[ser] = _series(m, xs)
        lower[ser] = _series(m - 1, xs) if m >= 1 else -_series(1, xs)
    mil = ~(ser | zero)
    if np.any(mil):
        xm = x[mil]
        if xm.size == 1:
            lower[mil], upper[mil] = _miller_pair_scalar(m, float(xm[0]))
        else:
            lower[mil], upper[mil] = _miller_pair(m, xm)
    return lower, upper


def _finish(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def bessel_j(m, x):
    """J_m(x) for integer m >= 0 and x >= 0 (scalar or array)."""
    m = _check_order(m)
    xa = np.atleast_1d(_as_array(x)).astype(float)
    _, jm = _bessel_pair(m, xa)
    return _finish(jm.reshape(np.shape(x)), x)


def bessel_j_and_prime(m, x):
    """(J_m(x), J'_m(x)) sharing a single evaluation pass."""
    m = _check_order(m)
    xa = np.atleast_1d(_as_array(x)).astype(float)
    lower, jm = _bessel_pair(m, xa)
    deriv = np.empty_like(xa)
    pos = xa > 0
    deriv[pos] = lower[pos] - m / xa[pos] * jm[pos]
    deriv[~pos] = 0.5 if m == 1 else 0.0
    shape = np.shape(x)
    return _finish(jm.reshape(shape), x), _finish(deriv.reshape(shape), x)


def bessel_j_prime(m, x):
    """J'_m(x) via J'_m = J_{m-1} - (m/x) J_m, with the x = 0 limit."""
    return bessel_j_and_prime(m, x)[1]


# -- spherical Bessel functions -------------------------------------------------


def _spherical_miller(m, x):
    """j_{m-1} and j_m for 0 < x < m by backward recurrence.

    The unnormalized sequence is matched to the closed form of j_0 or j_1,
    whichever is larger in magnitude at each x.
    """
    top = max(float(m), float(np.max(x)))
    start = int(top + math.sqrt(160.0 * top) + 20)
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, _TINY_START)
    jm = np.zeros_like(x)
    jm1 = np.zeros_like(x)
    j1 = np.zeros_like(x)
    for k in range(start, 0, -1):
        j_prev = (2 * k + 1) / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        order = k - 1
        if order == m:
            jm = j_cur.copy()
        if order == m - 1:
            jm1 = j_cur.copy()
        if order == 1:
            j1 = j_cur.copy()
        big = np.abs(j_cur) > _RESCALE_AT
        if np.any(big):
            for arr in (j_cur, j_next, jm, jm1, j1):
                arr[big] *= _RESCALE_BY
    s, c = np.sin(x), np.cos(x)
    exact0 = s / x
    exact1 = s / x**2 - c / x
    use0 = np.abs(exact0) >= np.abs(exact1)
    scale = np.where(use0, exact0 / np.where(use0, j_cur, 1.0), exact1 / np.where(use0, 1.0, j1))
    return jm1 * scale, jm * scale


def _spherical_upward(m, x):
    s, c = np.sin(x), np.cos(x)
    j0 = s / x
    if m == 0:
        return -(s / x**2 - c / x), j0
    j1 = s / x**2 - c / x
    prev, cur = j0, j1
    for k in range(1, m):
        prev, cur = cur, (2 * k + 1) / x * cur - prev
    return prev, cur


def _spherical_pair(m, x):
    """(j_{m-1}(x), j_m(x)); for m = 0 the first output is -j_1."""
    lower = np.zeros_like(x)
    upper = np.zeros_like(x)
    zero = x == 0
    if m == 0:
        upper[zero] = 1.0
    nu = m + 0.5
    ser = _series_region(nu, x) & ~zero
    if np.any(ser):
        xs = x[ser]
        fac = np.sqrt(np.pi / (2 * xs))
        upper[ser] = fac * _series(nu, xs)
        lower[ser] = fac * (_series(nu - 1, xs) if m >= 1 else -_series(1.5, xs))
    up = (x >= m) & ~(ser | zero)
    if np.any(up):
        lower[up], upper[up] = _spherical_upward(m, x[up])
    mil = ~(ser | zero | up)
    if np.any(mil):
        lower[mil], upper[mil] = _spherical_miller(m, x[mil])
    return lower, upper


def spherical_bessel_j_and_prime(m, x):
    """(j_m(x), j'_m(x)) for integer m >= 0 and x >= 0."""
    m = _check_order(m)
    xa = np.atleast_1d(_as_array(x)).astype(float)
    lower, jm = _spherical_pair(m, xa)
    deriv = np.empty_like(xa)
    pos = xa > 0
    if m == 0:
        deriv[pos] = lower[pos]
    else:
        deriv[pos] = lower[pos] - (m + 1) / xa[pos] * jm[pos]
    deriv[~pos] = 1.0 / 3.0 if m == 1 else 0.0
    shape = np.shape(x)
    return _finish(jm.reshape(shape), x), _finish(deriv.reshape(shape), x)


def spherical_bessel_j(m, x):
    """j_m(x) = sqrt(pi / (2x)) J_{m+1/2}(x), with j_m(0) = delta_{m0}."""
    return spherical_bessel_j_and_prime(m, x)[0]


def spherical_bessel_j_prime(m, x):
    return spherical_bessel_j_and_prime(m, x)[1]


# -- zeros ----------------------------------------------------------------------


def airy_zero_bounds(s):
    """Interval for |a_s|, the s-th negative zero of Ai, in absolute value.

    |a_s| = T (1 + sigma_s) with T = (3 pi / 8 (4s - 1))^(2/3) and
    0 <= sigma_s <= 0.130 (3 pi / 8 (4s - 1.051))^(-2).
    """
    if s < 1:
        raise BesselDomainError("zero index must be >= 1")
    t = (3 * math.pi / 8 * (4 * s - 1)) ** (2.0 / 3.0)
    sigma_max = 0.130 * (3 * math.pi / 8 * (4 * s - 1.051)) ** -2
    return t, t * (1 + sigma_max)


def zero_bound_window(m, s):
    """Two-sided window (lo, hi) that must contain j_{m,s}.

    Uses m + |a_s| m^(1/3) / 2^(1/3) < j_{m,s} and
    j_{m,s} < m + |a_s| m^(1/3) / 2^(1/3) + (3/20) |a_s|^2 2^(1/3) / m^(1/3),
    taking the extreme admissible |a_s| on each side.  For m = 0 the upper
    bound is undefined and ``hi`` is +inf.
    """
    a_lo, a_hi = airy_zero_bounds(s)
    c = 2.0 ** (1.0 / 3.0)
    if m == 0:
        return 0.0, math.inf
    m3 = m ** (1.0 / 3.0)
    lo = m + a_lo * m3 / c
    hi = m + a_hi * m3 / c + 0.15 * a_hi**2 * c / m3
    return lo, hi


def _nth_sign_change(f, start, s, step=0.5, chunk=64):
    """Bracket of the s-th sign change of f on (start, inf)."""
    found = 0
    x0 = start
    f0 = float(f(np.array([x0]))[0])
    while True:
        grid = x0 + step * np.arange(1, chunk + 1)
        vals = f(grid)
        xs = np.concatenate(([x0], grid))
        fs = np.concatenate(([f0], vals))
        flips = np.nonzero(np.signbit(fs[:-1]) != np.signbit(fs[1:]))[0]
        if found + len(flips) >= s:
            i = flips[s - found - 1]
            return float(xs[i]), float(xs[i + 1])
        found += len(flips)
        x0, f0 = float(grid[-1]), float(vals[-1])


def _refine(fd, a, b, guess=None, tol=1e-14, maxit=200):
    """Safeguarded Newton on a sign-change bracket [a, b].

    ``fd(x)`` returns (f(x), f'(x)).
    """
    fa = fd(a)[0]
    x = 0.5 * (a + b) if guess is None or not a < guess < b else guess
    for _ in range(maxit):
        fx, dfx = fd(x)
        if fx == 0.0:
            return x
        if (fx < 0) == (fa < 0):
            a, fa = x, fx
        else:
            b = x
        step = fx / dfx if dfx != 0 else math.inf
        x_new = x - step
        if not a < x_new < b:
            x_new = 0.5 * (a + b)
        if abs(x_new - x) <= tol * max(1.0, abs(x)) or b - a <= tol * max(1.0, abs(x)):
            return x_new
        x = x_new
    raise ZeroRefinementError("zero refinement did not converge", (a, b))


def _scalar_fd(fn, m):
    def fd(x):
        v, d = fn(m, x)
        return float(v), float(d)

    return fd


def bessel_zero(m, s, certify=True):
    """s-th positive zero j_{m,s} of J_m, to about 1e-14 relative.

    With ``certify`` the result is checked against :func:`zero_bound_window`.
    """
    m = _check_order(m)
    if s < 1:
        raise BesselDomainError("zero index must be >= 1")
    start = float(m) if m >= 1 else 0.0
    a, b = _nth_sign_change(lambda x: bessel_j(m, x), start, s)
    lo, hi = zero_bound_window(m, s)
    guess = 0.5 * (lo + hi) if m >= 1 else None
    x = _refine(_scalar_fd(bessel_j_and_prime, m), a, b, guess)
    if certify and m >= 1 and not lo < x < hi:
        raise BoundViolationError(f"j_({m},{s}) = {x} outside window ({lo}, {hi})")
    return x


def _prime_and_second(m, x):
    j, jp = bessel_j_and_prime(m, x)
    jpp = -jp / x - (1.0 - m * m / (x * x)) * j
    return jp, jpp


def bessel_prime_zero(m, s):
    """s-th positive zero j'_{m,s} of J'_m (x = 0 is not counted for m >= 2)."""
    m = _check_order(m)
    if s < 1:
        raise BesselDomainError("zero index must be >= 1")
    # J'_m keeps one sign on (0, m] for m >= 1; J'_0 = -J_1 < 0 near 0+
    start = float(m) if m >= 1 else 1e-3
    a, b = _nth_sign_change(lambda x: bessel_j_prime(m, x), start, s)
    return _refine(_scalar_fd(_prime_and_second, m), a, b)


def spherical_bessel_zero(m, s):
    """s-th positive zero of j_m, i.e. j_{m+1/2,s}."""
    m = _check_order(m)
    if s < 1:
        raise BesselDomainError("zero index must be >= 1")
    # zeros of J_nu exceed nu for nu >= 0
    a, b = _nth_sign_change(lambda x: spherical_bessel_j(m, x), m + 0.5, s)
    return _refine(_scalar_fd(spherical_bessel_j_and_prime, m), a, b)


# -- asymptotic cross-checks ----------------------------------------------------


def uniform_asymptotic_jm(m, x_ratio):
    """Leading Airy-type uniform approximation of J_m(m * x_ratio), 0 < x_ratio < 1."""
    from scipy.special import airy

    x = np.asarray(x_ratio, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise BesselDomainError("x_ratio must lie in (0, 1)")
    root = np.sqrt(1.0 - x * x)
    zeta = (1.5 * (np.log((1.0 + root) / x) - root)) ** (2.0 / 3.0)
    ai = airy(m ** (2.0 / 3.0) * zeta)[0]
    out = (4.0 * zeta / (1.0 - x * x)) ** 0.25 * ai / m ** (1.0 / 3.0)
    return _finish(out, x_ratio)


def large_argument_jm(m, x):
    """Debye leading term of J_m(x) for x > m."""
    x = np.asarray(x, dtype=float)
    q = np.sqrt(x * x - m * m)
    out = np.sqrt(2.0 / (np.pi * q)) * np.cos(q - m * np.pi / 2 + m * np.arcsin(m / x) - np.pi / 4)
    return _finish(out, x)


def large_argument_jm_prime(m, x):
    """Debye leading term of J'_m(x) for x > m."""
    x = np.asarray(x, dtype=float)
    q = np.sqrt(x * x - m * m)
    amp = np.sqrt(2.0 * q / (np.pi * x * x))
    out = -amp * np.cos(q - m * np.arccos(m / x) - 3 * np.pi / 4)
    return _finish(out, x)


def large_argument_envelopes(m, x):
    """Amplitudes of the two Debye terms, used to scale their error."""
    x = np.asarray(x, dtype=float)
    q = np.sqrt(x * x - m * m)
    return np.sqrt(2.0 / (np.pi * q)), np.sqrt(2.0 * q / (np.pi * x * x))


# -- bound checks ---------------------------------------------------------------


def ratio_bounds_next_order(m, x):
    """Bounds x m/(2m+2) and x m/(m+2) on J_{m+1}(m x)/J_m(m x), 0 < x <= 1."""
    x = np.asarray(x, dtype=float)
    return x * m / (2 * m + 2), x * m / (m + 2)


def log_derivative_bounds(m, x):
    """Lower and upper bounds on J'_m(x)/J_m(x) for 0 < x < m + 1/2."""
    x = np.asarray(x, dtype=float)
    lower = (np.sqrt((2 * m + 1) ** 2 - 4 * x * x) - 1.0) / (2 * x)
    return lower, m / x
