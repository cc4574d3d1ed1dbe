"""Levy-measure mathematics for the generalized gamma process family.

The GGP Levy intensity is rho(w) = w^(-1-sigma) exp(-tau w) / Gamma(1-sigma)
on (0, inf). Everything here is deterministic; samplers live in totalmass.py.
"""

import numpy as np
from scipy.special import exp1, gamma as gammafn, gammainc, gammaincc, gammaln

from .errors import DomainError, NotInvertibleError

_LOG_XMIN = -690.0  # ln-space bracket for tail-intensity inversion
_LOG_XMAX = 690.0


def _log_upper_gamma_asymptotic(a, x):
    # Gamma(a, x) ~ x^(a-1) e^-x [1 + (a-1)/x + (a-1)(a-2)/x^2 + ...] in logs;
    # four terms give relative error below |a-1|...|a-4| / x^4
    series = 1.0
    term = np.ones_like(x)
    for k in range(1, 4):
        term = term * (a - k) / x
        series = series + term
    return (a - 1.0) * np.log(x) - x + np.log(series)


def _log_upper_gamma(a, x):
    """log Gamma(a, x) for a in (-1, 1], x > 0, vectorized in x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 300.0
    xs = x[small]
    if a > 1e-10:
        out[small] = np.log(gammaincc(a, xs) * gammafn(a))
    elif abs(a) <= 1e-10:
        # the recurrence below cancels like eps/|a|; Gamma(a,x) -> E1(x) + O(a)
        out[small] = np.log(exp1(xs))
    else:
        # a in (-1, 0): recurrence from Gamma(a+1, x); its cancellation grows
        # like eps * x / |a|
        out[small] = np.log(
            (gammaincc(a + 1.0, xs) * gammafn(a + 1.0) - xs**a * np.exp(-xs)) / a
        )
    # large x: the direct forms underflow to 0, so use the asymptotic series
    if np.any(~small):
        out[~small] = _log_upper_gamma_asymptotic(a, x[~small])
    return out


def levy_density(params, w):
    """GGP Levy density rho(w) = w^(-1-sigma) e^(-tau w) / Gamma(1-sigma)."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("levy_density requires w > 0")
    return np.exp(log_levy_density(params, w))


def log_levy_density(params, w):
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("log_levy_density requires w > 0")
    s, t = params.sigma, params.tau
    return (-1.0 - s) * np.log(w) - t * w - gammaln(1.0 - s)


def log_tail_intensity(params, x):
    """log of the tail Levy intensity log rhobar(x), rhobar(x) = int_x^inf rho."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("tail intensity requires x > 0")
    s, t = params.sigma, params.tau
    if t == 0.0:
        # region guarantees sigma in (0, 1) here
        return -s * np.log(x) - np.log(s) - gammaln(1.0 - s)
    return s * np.log(t) + _log_upper_gamma(-s, t * x) - gammaln(1.0 - s)


def tail_intensity(params, x):
    """Tail Levy intensity rhobar(x); decreasing, finite for all x > 0."""
    scalar = np.isscalar(x)
    out = np.exp(log_tail_intensity(params, x))
    return float(out) if scalar else out


def total_tail_mass(params):
    """rhobar(0+): tau^sigma / (-sigma) for sigma < 0, infinite otherwise."""
    if params.sigma < 0:
        return params.tau**params.sigma / (-params.sigma)
    return np.inf


def _dlog_tail_dlogx(params, x):
    # d log rhobar / d log x = -x rho(x) / rhobar(x)
    return -np.exp(np.log(x) + log_levy_density(params, x) - log_tail_intensity(params, x))


def inv_tail_intensity(params, y):
    """Invert the tail intensity: x with rhobar(x) = y, y > 0.

    Closed form for tau = 0; otherwise bisection on log x over a wide
    bracket followed by Newton polish steps on log rhobar.
    """
    scalar = np.isscalar(y)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise DomainError("inv_tail_intensity requires y > 0")
    s, t = params.sigma, params.tau
    if s < 0 and np.any(y >= total_tail_mass(params)):
        raise NotInvertibleError(
            "y exceeds the total Levy mass tau^sigma/(-sigma) of the finite-activity GGP"
        )
    if t == 0.0:
        x = (s * gammafn(1.0 - s) * y) ** (-1.0 / s)
        return float(x[0]) if scalar else x

    logy = np.log(y)
    lo = np.full_like(logy, _LOG_XMIN)
    hi = np.full_like(logy, _LOG_XMAX)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        too_big = log_tail_intensity(params, np.exp(mid)) < logy
        hi = np.where(too_big, mid, hi)
        lo = np.where(too_big, lo, mid)
    logx = 0.5 * (lo + hi)
    for _ in range(3):
        x = np.exp(logx)
        g = log_tail_intensity(params, x) - logy
        gp = _dlog_tail_dlogx(params, x)
        step = np.where(gp != 0.0, g / gp, 0.0)
        logx = np.clip(logx - step, _LOG_XMIN, _LOG_XMAX)
    x = np.exp(logx)
    return float(x[0]) if scalar else x


def laplace_exponent(params, t):
    """Laplace exponent psi(t) per unit alpha: E[e^(-t W*)] = exp(-alpha psi(t))."""
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("laplace_exponent requires t >= 0")
    s, tau = params.sigma, params.tau
    if s == 0.0:
        if tau == 0.0:
            raise DomainError("laplace exponent undefined for sigma = 0, tau = 0")
        out = np.log1p(t / tau)
    else:
        out = ((t + tau) ** s - tau**s) / s
    return float(out) if scalar else out


def log_kappa(params, m, z):
    """log kappa(m, z) = log int_0^inf w^m e^(-zw) rho(w) dw.

    Closed form Gamma(m-sigma)/Gamma(1-sigma) (z+tau)^(sigma-m), evaluated
    in log space; m may be an integer array.
    """
    m = np.asarray(m)
    if np.any(m < 1):
        raise DomainError("kappa requires m >= 1")
    z = np.asarray(z, dtype=float)
    s, tau = params.sigma, params.tau
    if np.any(z + tau <= 0):
        raise DomainError("kappa requires z + tau > 0")
    return gammaln(m - s) - gammaln(1.0 - s) + (s - m) * np.log(z + tau)


def kappa(params, m, z):
    scalar = np.isscalar(m) and np.isscalar(z)
    out = np.exp(log_kappa(params, m, z))
    return float(out) if scalar else out


def expected_truncation_mass(params, eps):
    """alpha * int_0^eps w rho(dw): mean weight mass lost below the threshold."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    s, tau, a = params.sigma, params.tau, params.alpha
    if tau == 0.0:
        return a * eps ** (1.0 - s) / ((1.0 - s) * gammafn(1.0 - s))
    return a * gammainc(1.0 - s, tau * eps) * tau ** (s - 1.0)
