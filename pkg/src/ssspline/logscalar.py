"""Positive magnitudes carried by their natural logarithm.

The constants behind the shape-parameter theory contain factors like
``exp(2 * n * gamma_n)``, which is ``exp(48)`` for ``n = 2`` and ``exp(5056)``
for ``n = 4``. :class:`LogScalar` keeps such numbers as ``log(x)`` so they
can be multiplied, divided, raised to powers and added without overflow.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from .errors import DomainError

# exp() of anything above this overflows a double
_MAX_LOG = math.log(1.7976931348623157e308)


@functools.total_ordering
@dataclass(frozen=True)
class LogScalar:
    """A nonnegative real stored as its natural logarithm.

    Parameters
    ----------
    log_value : float
        ``log(x)``. Ignored (and normalised to ``-inf``) when `is_zero` is set.
    is_zero : bool
        Marks the exact value zero, which has no finite logarithm.

    Examples
    --------
    >>> a = LogScalar.from_log(5056.0)
    >>> (a * a).log_value
    10112.0
    >>> float(LogScalar.from_value(2.0) + LogScalar.from_value(3.0))
    5.000000000000001
    """

    log_value: float = 0.0
    is_zero: bool = False

    def __post_init__(self):
        if self.is_zero:
            object.__setattr__(self, "log_value", -math.inf)
        elif math.isnan(self.log_value):
            raise DomainError("LogScalar log_value is NaN")
        elif self.log_value == -math.inf:
            object.__setattr__(self, "is_zero", True)

    # construction --------------------------------------------------------
    @classmethod
    def from_value(cls, x) -> "LogScalar":
        if isinstance(x, LogScalar):
            return x
        x = float(x)
        if x < 0 or math.isnan(x):
            raise DomainError(f"LogScalar needs a nonnegative value, got {x!r}")
        if x == 0.0:
            return cls.zero()
        return cls(math.log(x))

    @classmethod
    def from_log(cls, log_value: float) -> "LogScalar":
        return cls(float(log_value))

    @classmethod
    def zero(cls) -> "LogScalar":
        return cls(-math.inf, True)

    @classmethod
    def one(cls) -> "LogScalar":
        return cls(0.0)

    @classmethod
    def from_json(cls, obj) -> "LogScalar":
        """Parse either a plain number or a ``{"log": L}`` object."""
        if isinstance(obj, dict):
            if set(obj) != {"log"}:
                raise DomainError(f"expected {{'log': L}}, got keys {sorted(obj)}")
            return cls.from_log(obj["log"])
        if isinstance(obj, bool) or not isinstance(obj, (int, float)):
            raise DomainError(f"expected a number or {{'log': L}}, got {obj!r}")
        return cls.from_value(obj)

    # conversion ----------------------------------------------------------
    @property
    def representable(self) -> bool:
        return self.is_zero or self.log_value <= _MAX_LOG

    def __float__(self) -> float:
        if self.is_zero:
            return 0.0
        if self.log_value > _MAX_LOG:
            return math.inf
        return math.exp(self.log_value)

    def to_json(self):
        """``{"log": L}`` always; the exact zero serialises as ``0``."""
        if self.is_zero:
            return 0
        return {"log": self.log_value}

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        if self.representable and self.log_value > -700:
            return f"{float(self):.12g}"
        return f"exp({self.log_value:.12g})"

    # arithmetic ----------------------------------------------------------
    def __mul__(self, other) -> "LogScalar":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return LogScalar.zero()
        return LogScalar(self.log_value + other.log_value)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogScalar":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero:
            raise ZeroDivisionError("LogScalar division by zero")
        if self.is_zero:
            return self
        return LogScalar(self.log_value - other.log_value)

    def __rtruediv__(self, other) -> "LogScalar":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, exponent) -> "LogScalar":
        exponent = float(exponent)
        if self.is_zero:
            if exponent > 0:
                return self
            if exponent == 0:
                return LogScalar.one()
            raise ZeroDivisionError("zero raised to a negative power")
        return LogScalar(self.log_value * exponent)

    def sqrt(self) -> "LogScalar":
        return self ** 0.5

    def __add__(self, other) -> "LogScalar":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return LogScalar(float(_logaddexp(self.log_value, other.log_value)))

    __radd__ = __add__

    def __sub__(self, other) -> "LogScalar":
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero:
            return self
        if other.log_value > self.log_value:
            raise DomainError("LogScalar subtraction would be negative")
        if other.log_value == self.log_value:
            return LogScalar.zero()
        delta = other.log_value - self.log_value
        return LogScalar(self.log_value + math.log(-math.expm1(delta)))

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.log_value < other.log_value

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.log_value == other.log_value

    def __hash__(self) -> int:
        return hash(self.log_value)


def _coerce(x):
    if isinstance(x, LogScalar):
        return x
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return LogScalar.from_value(x)
    return NotImplemented


def _logaddexp(a: float, b: float) -> float:
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def as_log_scalar(x) -> LogScalar:
    """Accept a LogScalar, a nonnegative number, or a ``{"log": L}`` dict."""
    if isinstance(x, LogScalar):
        return x
    return LogScalar.from_json(x) if isinstance(x, dict) else LogScalar.from_value(x)


def log_sum(values) -> LogScalar:
    """Sum an iterable of LogScalars with one shared max shift."""
    logs = [v.log_value for v in values if not v.is_zero]
    if not logs:
        return LogScalar.zero()
    top = max(logs)
    return LogScalar(top + math.log(math.fsum(math.exp(v - top) for v in logs)))
