"""Closed-form constants for the shifted surface spline error theory.

Everything that can overflow a double (``exp(2 n gamma_n)``, factorials,
powers of ``2 pi``) is assembled as a :class:`~ssspline.logscalar.LogScalar`.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from .errors import DomainError, ValidationError
from .logscalar import LogScalar

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class KernelParams:
    """Parameters of the shifted surface spline.

    `n` and `lam` must both be even and `lam >= 2`; the order of conditional
    positive definiteness ``m = 1 + lam / 2`` is derived, never set.
    """

    n: int
    lam: int
    c: float = 1.0

    def __post_init__(self):
        check_even_pair(self.n, self.lam)
        c = float(self.c)
        if not (c > 0 and math.isfinite(c)):
            raise ValidationError(f"shape parameter c must be positive and finite, got {self.c!r}")
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return 1 + self.lam // 2

    def to_json(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "c": self.c, "m": self.m}


def check_even_pair(n, lam):
    """Raise ValidationError unless (n, lam) is a valid even/even pair."""
    for name, v in (("n", n), ("lambda", lam)):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValidationError(f"{name} must be an integer, got {v!r}")
    if n < 2 or n % 2:
        raise ValidationError(
            f"the shifted surface spline is defined here for even dimension n >= 2, got n={n}")
    if lam < 2 or lam % 2:
        raise ValidationError(
            f"the shifted surface spline requires an even exponent lambda >= 2, got lambda={lam}")


def gamma(n: int) -> int:
    """The integer sequence gamma_1 = 2, gamma_n = 2 n (1 + gamma_{n-1}).

    Python integers are unbounded, so this is exact for any `n`.

    >>> [gamma(k) for k in range(1, 5)]
    [2, 12, 78, 632]
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DomainError(f"gamma(n) needs an integer n >= 1, got {n!r}")
    g = 2
    for k in range(2, n + 1):
        g = 2 * k * (1 + g)
    return g


def _log_product(lo: int, hi: int) -> float:
    """log(lo * (lo+1) * ... * hi), summing logs of the integer factors."""
    return math.fsum(math.log(j) for j in range(lo, hi + 1))


def delta0_case(n: int, lam: int) -> str:
    """Which branch ('a', 'b' or 'c') of the rho/Delta_0 definition applies."""
    diff = n - lam
    if diff > 3:
        return "a"
    if diff <= 1:
        return "b"
    return "c"


def rho_and_delta0(n: int, lam: int, m: int | None = None):
    """Return ``(rho, delta0)`` with ``delta0`` as a LogScalar.

    (a) ``n - lam > 3``: ``s = ceil((n-lam-3)/2)``, ``rho = 1 + s/(2m+3)``,
        ``delta0 = (2m+3)(2m+4)...(2m+2+s) / rho**(2m+2)``.
    (b) ``n - lam <= 1``: ``s = -ceil((n-lam-3)/2)``, ``rho = 1``,
        ``delta0 = 1 / ((2m-s+3)...(2m+1)(2m+2))``.
    (c) otherwise ``rho = delta0 = 1``.
    """
    if m is None:
        m = 1 + lam // 2
    elif m != 1 + lam // 2:
        raise DomainError(f"m must equal 1 + lambda/2 = {1 + lam // 2}, got {m}")
    diff = n - lam
    case = delta0_case(n, lam)
    if case == "a":
        s = math.ceil((diff - 3) / 2)
        rho = 1.0 + s / (2 * m + 3)
        log_d = _log_product(2 * m + 3, 2 * m + 2 + s) - (2 * m + 2) * math.log(rho)
        return rho, LogScalar(log_d)
    if case == "b":
        s = -math.ceil((diff - 3) / 2)
        return 1.0, LogScalar(-_log_product(2 * m - s + 3, 2 * m + 2))
    return 1.0, LogScalar.one()


def l_constant(lam: int, n: int) -> LogScalar:
    """``(2 pi)^(-n/2) * 2^(lam/2) * (lam/2)!`` from the kernel's Fourier transform."""
    half = lam // 2
    return LogScalar(-0.5 * n * LOG_2PI + half * math.log(2.0) + math.lgamma(half + 1))


def c0_norm_constant(m: int, lam: int, n: int) -> LogScalar:
    """Native-space norm constant ``(2 pi)^(-n) sqrt(m!) / sqrt(l(lam, n))``."""
    if m != 1 + lam // 2:
        raise DomainError(f"m must equal 1 + lambda/2 = {1 + lam // 2}, got {m}")
    log_val = -n * LOG_2PI + 0.5 * math.lgamma(m + 1) - 0.5 * l_constant(lam, n).log_value
    return LogScalar(log_val)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n, with Gamma(n/2 + 1) evaluated exactly.

    Even ``n = 2k``: ``pi^k / k!``. Odd ``n = 2k+1``: ``2^(k+1) pi^k / (2k+1)!!``.
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    k, odd = divmod(n, 2)
    if not odd:
        return math.pi ** k / math.factorial(k)
    double_fact = math.prod(range(1, 2 * k + 2, 2))
    return 2.0 ** (k + 1) * math.pi ** k / double_fact


@dataclass(frozen=True)
class TheoryContext:
    """All constants that depend only on the dimension and the kernel exponent."""

    n: int
    lam: int
    gamma_n: int
    rho: float
    delta0: LogScalar
    l_const: LogScalar
    c0_const: LogScalar
    alpha_n: float

    @property
    def m(self) -> int:
        return 1 + self.lam // 2

    @property
    def p(self) -> float:
        """Exponent ``(1 - n + lam) / 4`` of c in the MN function."""
        return (1 - self.n + self.lam) / 4.0

    @property
    def log_growth(self) -> float:
        """``log(rho * sqrt(n) * exp(2 n gamma_n))``, shared by c0, c1 and omega."""
        return math.log(self.rho) + 0.5 * math.log(self.n) + 2.0 * self.n * self.gamma_n

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "m": self.m,
            "gamma_n": self.gamma_n,
            "rho": self.rho,
            "delta0": self.delta0.to_json(),
            "delta0_case": delta0_case(self.n, self.lam),
            "l": self.l_const.to_json(),
            "C0": self.c0_const.to_json(),
            "alpha_n": self.alpha_n,
        }


def theory_context(n: int, lam: int) -> TheoryContext:
    """Validated, cached :class:`TheoryContext` for the pair ``(n, lam)``."""
    # validate before the cache lookup: 2.0 and 2 share a cache key
    check_even_pair(n, lam)
    return _theory_context(n, lam)


@functools.lru_cache(maxsize=256)
def _theory_context(n: int, lam: int) -> TheoryContext:
    m = 1 + lam // 2
    rho, delta0 = rho_and_delta0(n, lam, m)
    return TheoryContext(
        n=n,
        lam=lam,
        gamma_n=gamma(n),
        rho=rho,
        delta0=delta0,
        l_const=l_constant(lam, n),
        c0_const=c0_norm_constant(m, lam, n),
        alpha_n=unit_ball_volume(n),
    )
