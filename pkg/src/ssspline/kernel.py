"""The shifted surface spline kernel and its generalized Fourier transform.

The kernel is

    h(x) = (-1)^m (|x|^2 + c^2)^(lam/2) * log(sqrt(|x|^2 + c^2)),

a radial function of ``r2 = |x|^2``. The transform

    h_hat(xi) = l(lam, n) |xi|^(-lam-n) (c|xi|)^nu K_nu(c|xi|),  nu = (n+lam)/2,

is only used as a diagnostic (positivity, decay), never for interpolation.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .theory import KernelParams, TheoryContext, theory_context

EULER_GAMMA = 0.57721566490153286061

# crossover points for the three K_0/K_1 evaluation regimes
_SERIES_MAX_T = 2.0
_ASYMPTOTIC_MIN_T = 30.0


def eval_h(r2, params: KernelParams):
    """Evaluate the kernel at squared distances `r2` (scalar or array).

    ``np.longdouble`` input is evaluated in that precision; anything else
    in double.
    """
    r2 = np.asarray(r2)
    if r2.dtype != np.longdouble:
        r2 = r2.astype(float)
    if np.any(r2 < 0):
        raise DomainError("squared distance must be nonnegative")
    s = r2 + params.c * params.c
    sign = -1.0 if params.m % 2 else 1.0
    out = sign * s ** (params.lam // 2) * (0.5 * np.log(s))
    return out if out.ndim else float(out)


# --- modified Bessel function of the second kind --------------------------

def _k01_series(t: float):
    # power series about t = 0; accurate while the I_nu growth does not cancel
    q = 0.25 * t * t
    log_half = math.log(0.5 * t)
    i0 = k0_tail = 0.0
    i1_sum = k1_tail = 0.0
    term0 = 1.0  # q^k / (k!)^2
    term1 = 1.0  # q^k / (k! (k+1)!)
    harmonic = 0.0
    for k in range(60):
        if k:
            harmonic += 1.0 / k
            term0 *= q / (k * k)
            term1 *= q / (k * (k + 1))
        i0 += term0
        k0_tail += term0 * harmonic
        i1_sum += term1
        # psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
        k1_tail += term1 * (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (k + 1))
        if term0 < 1e-18 * i0 and k > 2:
            break
    k0 = -(log_half + EULER_GAMMA) * i0 + k0_tail
    i1 = 0.5 * t * i1_sum
    k1 = 1.0 / t + log_half * i1 - 0.25 * t * k1_tail
    return k0, k1


def _k01_quadrature(t: float):
    # K_nu(t) = int_0^inf exp(-t cosh s) cosh(nu s) ds. The integrand is
    # analytic and decays double-exponentially, so the trapezoid rule
    # converges geometrically in the step size.
    s_max = math.acosh(1.0 + 45.0 / t)
    step = 0.02
    s = np.arange(0.0, s_max + step, step)
    w = np.exp(-t * (np.cosh(s) - 1.0))
    w[0] *= 0.5
    scale = step * math.exp(-t)
    return scale * float(np.sum(w)), scale * float(np.sum(w * np.cosh(s)))


def _k01_asymptotic(t: float):
    # Hankel expansion, truncated at the smallest term
    out = []
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        total = term = 1.0
        for k in range(1, 60):
            nxt = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * t)
            if abs(nxt) >= abs(term):
                break
            term = nxt
            total += term
            if abs(term) < 1e-17 * abs(total):
                break
        out.append(math.sqrt(math.pi / (2.0 * t)) * math.exp(-t) * total)
    return out[0], out[1]


def _bessel_k_scalar(nu: int, t: float) -> float:
    if t <= _SERIES_MAX_T:
        k_prev, k_cur = _k01_series(t)
    elif t < _ASYMPTOTIC_MIN_T:
        k_prev, k_cur = _k01_quadrature(t)
    else:
        k_prev, k_cur = _k01_asymptotic(t)
    if nu == 0:
        return k_prev
    # upward recurrence is stable for K (it is the dominant solution)
    for j in range(1, nu):
        k_prev, k_cur = k_cur, k_prev + (2.0 * j / t) * k_cur
    return k_cur


def bessel_k(nu: int, t):
    """Modified Bessel function of the second kind ``K_nu(t)`` for integer order.

    Parameters
    ----------
    nu : int
        Nonnegative integer order.
    t : float or array_like
        Positive argument(s).

    Notes
    -----
    ``K_0`` and ``K_1`` come from the power series for ``t <= 2``, the
    trapezoid rule on ``int_0^inf exp(-t cosh s) cosh(nu s) ds`` for
    ``2 < t < 30`` and the Hankel asymptotic series beyond. Higher orders use
    the recurrence ``K_{nu+1} = K_{nu-1} + (2 nu / t) K_nu``.
    """
    if isinstance(nu, bool) or int(nu) != nu or nu < 0:
        raise DomainError(f"order must be a nonnegative integer, got {nu!r}")
    nu = int(nu)
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("bessel_k needs t > 0")
    if arr.ndim == 0:
        return _bessel_k_scalar(nu, float(arr))
    flat = np.array([_bessel_k_scalar(nu, float(v)) for v in arr.ravel()])
    return flat.reshape(arr.shape)


def eval_h_fourier(xi_norm, params: KernelParams, ctx: TheoryContext | None = None):
    """Generalized Fourier transform of the kernel at ``|xi| = xi_norm > 0``."""
    if ctx is None:
        ctx = theory_context(params.n, params.lam)
    xi = np.asarray(xi_norm, dtype=float)
    if np.any(~(xi > 0)):
        raise DomainError("the transform is singular at xi = 0; need |xi| > 0")
    nu = (params.n + params.lam) // 2
    t = params.c * xi
    log_val = (ctx.l_const.log_value - (params.lam + params.n) * np.log(xi)
               + nu * np.log(t) + np.log(bessel_k(nu, t)))
    out = np.exp(log_val)
    return out if out.ndim else float(out)
