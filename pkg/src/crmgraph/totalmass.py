"""Exact samplers for GGP total masses and zero-truncated Poisson draws.

The total mass W*_alpha of a restricted GGP is gamma distributed for
sigma = 0, an exponentially tilted stable variable for sigma in (0, 1)
(sampled by Devroye's double-rejection scheme), and a compound Poisson sum
of gamma jumps for sigma < 0. Exponential tilting by c is folded
analytically into the rate: the tilted law is the total-mass law with
tau -> tau + c, for every sigma.
"""

import math

import numpy as np

from .errors import DomainError
from .params import GgpParams


def _stable_std(rng, alpha):
    """One draw of the positive stable law with E[e^(-tS)] = exp(-t^alpha).

    Kanter's representation: S = (a(U)/E)^((1-alpha)/alpha) with U uniform
    on (0, pi) and E unit exponential.
    """
    u = rng.uniform(0.0, math.pi)
    e = rng.exponential()
    log_a = (
        (alpha / (1.0 - alpha)) * math.log(math.sin(alpha * u))
        + math.log(math.sin((1.0 - alpha) * u))
        - (1.0 / (1.0 - alpha)) * math.log(math.sin(u))
    )
    return math.exp(((1.0 - alpha) / alpha) * (log_a - math.log(e)))


def _sinc(x):
    if x == 0.0:
        return 1.0
    if abs(x) < 2e-4:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


def _zolotarev_b(u, alpha):
    # sinc(u) / (sinc(alpha u)^alpha sinc((1-alpha) u)^(1-alpha))
    return _sinc(u) / (_sinc(alpha * u) ** alpha * _sinc((1.0 - alpha) * u) ** (1.0 - alpha))


def _zolotarev_a(u, alpha):
    return (
        ((1.0 - alpha) * _sinc((1.0 - alpha) * u)) ** (1.0 - alpha)
        * (alpha * _sinc(alpha * u)) ** alpha
        / _sinc(u)
    )


def _log_exp_tilted_stable_std(rng, alpha, lam_alpha):
    """Log of a draw from the standard positive stable law tilted by exp(-lam x).

    Devroye (2009) double-rejection algorithm; exact, O(1) expected cost
    uniformly in the tilt. Parameterized by lam_alpha = lam**alpha and
    returned in log space, since the caller's rescaling can make lam itself
    and the draw overflow or underflow a double.
    """
    if lam_alpha == 0.0:
        return math.log(_stable_std(rng, alpha))

    b = (1.0 - alpha) / alpha
    gamma = lam_alpha * alpha * (1.0 - alpha)
    sqrt_gamma = math.sqrt(gamma)
    c1 = math.sqrt(math.pi / 2.0)
    c2 = 2.0 + c1
    c3 = c2 * sqrt_gamma
    xi = (1.0 + math.sqrt(2.0) * c3) / math.pi
    psi = c3 * math.exp(-gamma * math.pi * math.pi / 8.0) / math.sqrt(math.pi)
    w1 = c1 * xi / sqrt_gamma if sqrt_gamma > 0 else math.inf
    w2 = 2.0 * math.sqrt(math.pi) * psi
    w3 = xi * math.pi

    while True:
        # outer rejection: sample the auxiliary angle U and uniform Z
        while True:
            v = rng.uniform()
            if gamma >= 1.0:
                if v < w1 / (w1 + w2):
                    u = abs(rng.standard_normal()) / sqrt_gamma
                else:
                    w = rng.uniform()
                    u = math.pi * (1.0 - w * w)
            else:
                w = rng.uniform()
                u = math.pi * w if v < w3 / (w2 + w3) else math.pi * (1.0 - w * w)
            if u >= math.pi:
                continue
            zeta = math.sqrt(_zolotarev_b(u, alpha))
            z = 1.0 / (1.0 - (1.0 + alpha * zeta / sqrt_gamma) ** (-1.0 / alpha))
            arg = -lam_alpha * (1.0 - 1.0 / (zeta * zeta))
            rho = (
                math.inf
                if arg > 700.0
                else math.pi * math.exp(arg) / ((1.0 + c1) * sqrt_gamma / zeta + z)
            )
            d = 0.0
            if gamma >= 1.0:
                d += xi * math.exp(-gamma * u * u / 2.0)
            if 0.0 < u < math.pi:
                d += psi / math.sqrt(math.pi - u)
            if gamma < 1.0:
                d += xi
            rho *= d
            big_z = rng.uniform() * rho
            if big_z <= 1.0:
                break

        # inner rejection in x
        a = _zolotarev_a(u, alpha) ** (1.0 / (1.0 - alpha))
        m = (b / a) ** alpha * lam_alpha
        delta = math.sqrt(m * alpha / a)
        a1 = delta * c1
        a3 = z / a
        s = a1 + delta + a3
        v2 = rng.uniform()
        n = 0.0
        e1 = 0.0
        if v2 < a1 / s:
            n = rng.standard_normal()
            x = m - delta * abs(n)
        elif v2 < (a1 + delta) / s:
            x = m + delta * rng.uniform()
        else:
            e1 = rng.exponential()
            x = m + delta + e1 * a3
        if x <= 0.0:
            continue
        e2 = -math.log(big_z)
        # log(lam_alpha)/alpha - b log(m) simplified to avoid huge intermediates
        arg = math.log(lam_alpha) - (1.0 - alpha) * math.log(b / a)
        blog = b * math.log(m / x)
        if blog < 30.0:
            tilt_term = math.exp(arg) * math.expm1(blog)
        elif arg + blog < 700.0:
            tilt_term = math.exp(arg + blog)
        else:
            tilt_term = math.inf
        c = a * (x - m) + tilt_term
        if x < m:
            c -= n * n / 2.0
        elif x > m + delta:
            c -= e1
        if c <= e2:
            return -b * math.log(x)


def sample_total_mass(params, rng):
    """One exact draw of the GGP total mass W*_alpha."""
    a, s, t = params.alpha, params.sigma, params.tau
    if s == 0.0:
        return float(rng.gamma(a, 1.0 / t))
    if s < 0.0:
        k = rng.poisson(-(a / s) * t**s)
        return float(np.sum(rng.gamma(-s, 1.0 / t, size=k)))
    # sigma in (0, 1): scaled, exponentially tilted stable with tilt t*scale;
    # (t*scale)^sigma = t^sigma (a/sigma) stays finite even when scale overflows
    log_scale = math.log(a / s) / s
    lam_alpha = t**s * (a / s) if t > 0.0 else 0.0
    return math.exp(log_scale + _log_exp_tilted_stable_std(rng, s, lam_alpha))


def sample_tilted_total_mass(spec, rng):
    """Draw from the density proportional to exp(-tilt * w) g*_{alpha,sigma,tau}(w)."""
    base = spec.base
    return sample_total_mass(base.with_tilt(spec.tilt), rng)


def sample_truncated_poisson(rate, rng, size=None):
    """Zero-truncated Poisson draws, stable down to vanishing rates.

    Small rates use CDF inversion (the distribution degenerates to 1);
    larger rates redraw plain Poisson variates until nonzero.
    """
    scalar = size is None and np.isscalar(rate)
    rate = np.atleast_1d(np.asarray(rate, dtype=float))
    if np.any(rate <= 0) or np.any(~np.isfinite(rate)):
        raise DomainError("truncated Poisson requires rate > 0")
    if size is not None:
        rate = np.broadcast_to(rate, (size,) if np.isscalar(size) else size).copy()
    out = np.empty(rate.shape, dtype=np.int64)

    small = rate <= 1.0
    if np.any(small):
        lam = rate[small]
        u = rng.uniform(size=lam.shape)
        k = np.ones(lam.shape, dtype=np.int64)
        # p(k) built iteratively; p(1) = lam / (e^lam - 1)
        p = lam / np.expm1(lam)
        cum = p.copy()
        active = u > cum
        j = 1
        while np.any(active) and j < 200:
            j += 1
            p = p * lam / j
            cum = cum + p
            k = np.where(active, j, k)
            active = u > cum
        out[small] = k

    big = ~small
    if np.any(big):
        lam = rate[big]
        draws = rng.poisson(lam)
        zero = draws == 0
        while np.any(zero):
            draws[zero] = rng.poisson(lam[zero])
            zero = draws == 0
        out[big] = draws

    if scalar:
        return int(out[0])
    return out
