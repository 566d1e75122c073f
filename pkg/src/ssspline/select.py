"""Optimal choice of the shape parameter c.

Once everything independent of c is fixed, the error bound for band-limited
data is proportional to::

    MN(c) = c^p * exp(c sigma / 2) * omega(c)^(1/d),   p = (1 - n + lam) / 4,

on ``c >= c0``. With the cube side ``b0`` fixed this is piecewise in c
(breakpoint ``c1``); on dilation-invariant domains ``b0`` grows with c and a
single branch ``c^p exp(c k)`` remains. The selectors below return the
minimiser from closed-form stationary points; :func:`oracle_minimize_mn` is a
brute-force grid search used to validate them.

All c-dependent magnitudes are LogScalars, and ``d`` and ``b0`` may be given
as LogScalars too: for ``n >= 4`` the factor ``exp(2 n gamma_n)`` is at least
``exp(5056)``, so any finite-valued c0 needs ``d`` far below float range.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .logscalar import LogScalar, as_log_scalar
from .theory import LOG_2PI, TheoryContext, theory_context

LOG_3_2 = math.log(1.5)  # -log(2/3)
# below this the k correction cannot change a double-precision sigma/2
_LOG_UNDERFLOW = math.log(1e-300)


class CaseId(str, enum.Enum):
    FIXED1 = "Fixed1"
    FIXED2 = "Fixed2"
    FIXED3 = "Fixed3"
    FIXED4 = "Fixed4"
    FIXED5 = "Fixed5"
    DILATION1 = "Dilation1"
    DILATION2 = "Dilation2"
    DILATION3 = "Dilation3"
    DILATION4 = "Dilation4"
    ZERO_EXPONENT = "ZeroExponent"


@dataclass(frozen=True)
class SelectionProblem:
    """Inputs to the shape-parameter criteria.

    Parameters
    ----------
    ctx : TheoryContext
    sigma : float
        Band limit of the target function.
    d : float or LogScalar
        Fill distance.
    b0 : float, LogScalar or None
        Cube side. ``None`` selects the dilation-invariant criteria.
    strict : bool
        When set (the default) a fixed-b0 problem must satisfy
        ``d < b0 / (4 gamma_n (m + 1))``, which is what makes ``c0 < c1``.
    """

    ctx: TheoryContext
    sigma: float
    d: LogScalar
    b0: LogScalar | None = None
    strict: bool = True

    def __post_init__(self):
        sigma = float(self.sigma)
        if not (sigma > 0 and math.isfinite(sigma)):
            raise ValidationError(f"sigma must be positive and finite, got {self.sigma!r}")
        object.__setattr__(self, "sigma", sigma)
        d = _positive(self.d, "d")
        object.__setattr__(self, "d", d)
        if self.b0 is not None:
            b0 = _positive(self.b0, "b0")
            object.__setattr__(self, "b0", b0)
            if self.strict and not self.satisfies_protocol:
                raise ValidationError(
                    f"fill distance must satisfy d < b0 / (4 gamma_n (m+1)): "
                    f"d = {d}, bound = {self.d_limit} "
                    f"(gamma_n = {self.ctx.gamma_n}, m = {self.ctx.m})")

    @classmethod
    def create(cls, n, lam, sigma, d, b0=None, strict=True) -> "SelectionProblem":
        return cls(theory_context(n, lam), sigma, d, b0, strict)

    @classmethod
    def from_json(cls, doc: dict, strict: bool = True) -> "SelectionProblem":
        """Parse ``{"n", "lambda", "sigma", "d", "b0_mode"}``.

        ``b0_mode`` is ``{"fixed": b0}`` or ``"dilation_invariant"``; ``d`` and
        ``b0`` may be numbers or ``{"log": L}`` objects.
        """
        missing = [k for k in ("n", "lambda", "sigma", "d", "b0_mode") if k not in doc]
        if missing:
            raise ValidationError(f"selection problem is missing {missing}")
        mode = doc["b0_mode"]
        if mode == "dilation_invariant":
            b0 = None
        elif isinstance(mode, dict) and set(mode) == {"fixed"}:
            b0 = _parse_magnitude(mode["fixed"], "b0")
        else:
            raise ValidationError(
                f"b0_mode must be {{'fixed': b0}} or 'dilation_invariant', got {mode!r}")
        return cls.create(doc["n"], doc["lambda"], doc["sigma"],
                          _parse_magnitude(doc["d"], "d"), b0, strict)

    def to_json(self) -> dict:
        return {
            "n": self.ctx.n,
            "lambda": self.ctx.lam,
            "sigma": self.sigma,
            "d": self.d.to_json(),
            "b0_mode": "dilation_invariant" if self.b0 is None else {"fixed": self.b0.to_json()},
        }

    @property
    def dilation_invariant(self) -> bool:
        return self.b0 is None

    @property
    def d_limit(self) -> LogScalar | None:
        """``b0 / (4 gamma_n (m+1))`` in fixed mode."""
        if self.b0 is None:
            return None
        return self.b0 / LogScalar(math.log(4 * self.ctx.gamma_n * (self.ctx.m + 1)))

    @property
    def satisfies_protocol(self) -> bool:
        return self.b0 is None or self.d < self.d_limit


def _positive(x, name) -> LogScalar:
    try:
        v = as_log_scalar(x)
    except DomainError as exc:
        raise ValidationError(f"{name}: {exc}") from None
    if v.is_zero or not math.isfinite(v.log_value):
        raise ValidationError(f"{name} must be positive and finite, got {x!r}")
    return v


def _parse_magnitude(x, name):
    try:
        return LogScalar.from_json(x)
    except DomainError as exc:
        raise ValidationError(f"{name}: {exc}") from None


# --- constants ------------------------------------------------------------

def _log_grown(ctx: TheoryContext, x: LogScalar) -> float:
    """``log(rho sqrt(n) e^(2n gamma_n) x)`` with the large terms cancelled first.

    For n >= 4 both ``2 n gamma_n`` and ``-log d`` are in the thousands; adding
    them before anything else is exact when they are within a factor of two,
    and keeps every formula below consistent to rounding in the small terms.
    """
    return ctx.log_growth + x.log_value


def compute_c0(ctx: TheoryContext, d) -> LogScalar:
    """Smallest admissible shape parameter ``12 rho sqrt(n) e^(2n gamma_n) gamma_n (m+1) d``."""
    d = as_log_scalar(d)
    if d.is_zero:
        return d
    return LogScalar(math.log(12 * ctx.gamma_n * (ctx.m + 1)) + _log_grown(ctx, d))


def compute_c1(ctx: TheoryContext, b0) -> LogScalar:
    """Crossover ``3 b0 rho sqrt(n) e^(2n gamma_n)`` of the two terms defining C."""
    b0 = as_log_scalar(b0)
    if b0.is_zero:
        return b0
    return LogScalar(math.log(3.0) + _log_grown(ctx, b0))


def c_branch_is_first(ctx: TheoryContext, c, b0) -> bool:
    """True when ``2 rho sqrt(n) e^(2n gamma_n) / c >= 2/(3 b0)``, i.e. ``c <= c1``."""
    return as_log_scalar(c) <= compute_c1(ctx, b0)


def _log_6c_gamma_d(ctx, c: LogScalar, b0, d: LogScalar) -> float:
    # log(6 C gamma_n d); each branch groups the large logs before adding small ones
    log_6g = math.log(6 * ctx.gamma_n)
    if b0 is None or c_branch_is_first(ctx, c, b0):
        return log_6g + math.log(2.0) + (_log_grown(ctx, d) - c.log_value)
    return log_6g + math.log(2.0 / 3.0) + (d.log_value - as_log_scalar(b0).log_value)


def compute_omega_and_d0(ctx: TheoryContext, c, b0=None):
    """Return ``(log_omega, d0)`` for shape parameter `c`.

    ``C = max(2 rho sqrt(n) e^(2n gamma_n) / c, 2 / (3 b0))`` (the first term
    alone when `b0` is None), ``omega = (2/3)^(1 / (6 C gamma_n))`` and
    ``d0 = 1 / (6 C gamma_n (m+1))``.
    """
    c = as_log_scalar(c)
    if c.is_zero:
        raise DomainError("c must be positive")
    log_6Cg = _log_6c_gamma_d(ctx, c, b0, LogScalar.one())
    log_omega = -LOG_3_2 * math.exp(-log_6Cg)
    d0 = LogScalar(-log_6Cg - math.log(ctx.m + 1))
    return log_omega, d0


def _log_omega_power(ctx, c: LogScalar, b0, d: LogScalar) -> float:
    # log(omega^(1/d)) = -log(3/2) / (6 C gamma_n d), kept in log space since
    # both 1/(6 C gamma_n) and 1/d can be far outside double range
    with np.errstate(over="ignore"):
        return -float(np.exp(math.log(LOG_3_2) - _log_6c_gamma_d(ctx, c, b0, d)))


@dataclass(frozen=True)
class DerivedSelectionConstants:
    c0: LogScalar
    c1: LogScalar | None
    k: float
    p: float
    log_k_correction: float
    notes: tuple = ()

    def to_json(self) -> dict:
        return {
            "log_c0": self.c0.log_value,
            "log_c1": None if self.c1 is None else self.c1.log_value,
            "k": self.k,
            "p": self.p,
            "log_k_correction": self.log_k_correction,
            "notes": list(self.notes),
        }


def compute_k(problem: SelectionProblem):
    """``k = sigma/2 - log(3/2) / (12 rho sqrt(n) e^(2n gamma_n) gamma_n d)``.

    The correction equals ``log(3/2) (m+1) / c0`` and is formed from its log.
    Returns ``(k, log_correction, underflowed)``.
    """
    ctx = problem.ctx
    log_corr = math.log(LOG_3_2) - math.log(12 * ctx.gamma_n) - _log_grown(ctx, problem.d)
    if log_corr < _LOG_UNDERFLOW:
        return problem.sigma / 2.0, log_corr, True
    return problem.sigma / 2.0 - math.exp(log_corr), log_corr, False


def sigma_for_zero_k(ctx: TheoryContext, d) -> float:
    """Band limit that makes k exactly zero for fill distance `d`."""
    d = as_log_scalar(d)
    log_corr = math.log(LOG_3_2) - math.log(12 * ctx.gamma_n) - _log_grown(ctx, d)
    return 2.0 * math.exp(log_corr)


def derived_constants(problem: SelectionProblem) -> DerivedSelectionConstants:
    ctx = problem.ctx
    c0 = compute_c0(ctx, problem.d)
    c1 = None if problem.b0 is None else compute_c1(ctx, problem.b0)
    k, log_corr, underflow = compute_k(problem)
    notes = []
    if underflow:
        notes.append("correction underflow: k set to sigma/2")
    if c1 is not None and not c0 < c1:
        notes.append("c0 >= c1: fill distance violates d < b0/(4 gamma_n (m+1))")
    return DerivedSelectionConstants(c0, c1, k, ctx.p, log_corr, tuple(notes))


# --- the MN objective -----------------------------------------------------

def _c_times(log_c, log_factor, sign=1.0):
    # sign * c * factor for arrays of log c, overflowing to +-inf
    with np.errstate(over="ignore"):
        return sign * np.exp(log_c + log_factor)


def log_mn_at_log_c(problem: SelectionProblem, log_c, *, check_floor=True, consts=None):
    """Vectorized ``log MN`` from ``log c``.

    Fixed b0: ``p log c + c k`` below c1 and
    ``p log c + c sigma/2 - log(3/2) b0 / (4 gamma_n d)`` from c1 on.
    Dilation-invariant: ``p log c + c k`` throughout.
    """
    consts = consts or derived_constants(problem)
    log_c = np.asarray(log_c, dtype=float)
    if check_floor and np.any(log_c < consts.c0.log_value - 1e-12 * max(1.0, abs(consts.c0.log_value))):
        raise DomainError(f"c is below the theoretical floor c0 = {consts.c0}")
    ctx = problem.ctx
    half_sigma = _c_times(log_c, math.log(problem.sigma / 2.0))
    if consts.log_k_correction < _LOG_UNDERFLOW:
        lower = half_sigma
    else:
        lower = half_sigma - _c_times(log_c, consts.log_k_correction)
    if problem.b0 is None:
        tail = lower
    else:
        log_ratio = problem.b0.log_value - problem.d.log_value - math.log(4 * ctx.gamma_n)
        upper = half_sigma - LOG_3_2 * math.exp(log_ratio)
        tail = np.where(log_c < consts.c1.log_value, lower, upper)
    with np.errstate(invalid="ignore"):
        out = consts.p * log_c + tail
    return out if out.ndim else float(out)


def log_mn(problem: SelectionProblem, c, *, check_floor=True) -> float:
    """Natural log of the MN function at shape parameter `c`."""
    c = as_log_scalar(c)
    if c.is_zero:
        raise DomainError("c must be positive")
    return float(log_mn_at_log_c(problem, c.log_value, check_floor=check_floor))


def mn_branch(problem: SelectionProblem, c) -> str:
    if problem.b0 is None:
        return "dilation"
    c = as_log_scalar(c)
    return "below-c1" if c < compute_c1(problem.ctx, problem.b0) else "above-c1"


# --- selection ------------------------------------------------------------

@dataclass(frozen=True)
class Recommendation:
    case_id: CaseId
    c: LogScalar | None
    log_mn: float | None
    constants: DerivedSelectionConstants
    b0_back_solved: LogScalar | None = None
    candidates: tuple = ()
    notes: tuple = field(default=())
    log_omega: float | None = None
    d0: LogScalar | None = None

    @property
    def unbounded(self) -> bool:
        """True when the criterion is 'the larger c, the better'."""
        return self.c is None

    def to_json(self) -> dict:
        consts = self.constants.to_json()
        const_notes = consts.pop("notes")
        return {
            "case_id": self.case_id.value,
            "choice": "unbounded_prefer_large" if self.unbounded else "finite",
            "c": "unbounded" if self.unbounded else self.c.to_json(),
            "c_display": "unbounded" if self.unbounded else str(self.c),
            "log_mn": self.log_mn,
            "b0_back_solved": None if self.b0_back_solved is None else self.b0_back_solved.to_json(),
            "candidates": [{"c": c.to_json(), "log_mn": v} for c, v in self.candidates],
            "notes": list(self.notes) + const_notes,
            "log_omega": self.log_omega,
            "log_d0": None if self.d0 is None else self.d0.log_value,
            **consts,
        }


def _from_value(x: float) -> LogScalar:
    return LogScalar(math.log(x))


def _finite(problem, case, c, consts, candidates=(), notes=()):
    value = log_mn(problem, c, check_floor=False)
    b0_back = None
    if problem.b0 is None:
        b0_back = c / LogScalar(math.log(3.0) + problem.ctx.log_growth)
    log_omega, d0 = compute_omega_and_d0(problem.ctx, c, problem.b0)
    return Recommendation(case, c, value, consts, b0_back, tuple(candidates), tuple(notes),
                          log_omega, d0)


def _better(problem, a: LogScalar, b: LogScalar):
    """Pick the candidate with smaller log MN, preferring the smaller c on ties."""
    va = log_mn(problem, a, check_floor=False)
    vb = log_mn(problem, b, check_floor=False)
    lo, hi = (a, b) if a <= b else (b, a)
    v_lo, v_hi = (va, vb) if a <= b else (vb, va)
    chosen = lo if v_lo <= v_hi else hi
    notes = ("tie between candidates; smaller c returned",) if v_lo == v_hi else ()
    return chosen, ((a, va), (b, vb)), notes


def select_c_fixed(problem: SelectionProblem) -> Recommendation:
    """Optimal c on ``[c0, inf)`` when the cube side b0 is fixed."""
    if problem.b0 is None:
        raise DomainError("select_c_fixed needs a fixed-b0 problem")
    consts = derived_constants(problem)
    if not consts.c0 < consts.c1:
        raise ValidationError("c0 >= c1: fill distance violates d < b0/(4 gamma_n (m+1))")
    p, k, c0, c1 = consts.p, consts.k, consts.c0, consts.c1
    sigma = problem.sigma

    if p == 0:
        # MN is exp(c k) below c1 and increasing above it
        c = c1 if k < 0 else c0
        return _finite(problem, CaseId.ZERO_EXPONENT, c, consts)

    if p > 0:
        if k >= 0:
            return _finite(problem, CaseId.FIXED1, c0, consts)
        # c^p e^(ck) rises up to -p/k and falls after it
        peak = _from_value(-p / k)
        if c1 <= peak:
            return _finite(problem, CaseId.FIXED2, c0, consts)
        if peak <= c0:
            return _finite(problem, CaseId.FIXED2, c1, consts)
        c, cands, notes = _better(problem, c0, c1)
        return _finite(problem, CaseId.FIXED2, c, consts, cands, notes)

    # p < 0: c^p e^(c sigma/2) bottoms out at -2p/sigma = (n - lam - 1)/(2 sigma)
    upper_stat = _from_value(-2.0 * p / sigma)
    c_upper = max(upper_stat, c1)
    if k == 0:
        return _finite(problem, CaseId.FIXED3, c_upper, consts)
    if k < 0:
        return _finite(problem, CaseId.FIXED5, c_upper, consts)
    lower_stat = _from_value(-p / k)
    c_lower = min(max(lower_stat, c0), c1)
    if c_lower == c_upper:
        return _finite(problem, CaseId.FIXED4, c_lower, consts)
    c, cands, notes = _better(problem, c_lower, c_upper)
    return _finite(problem, CaseId.FIXED4, c, consts, cands, notes)


def select_c_dilation(problem: SelectionProblem) -> Recommendation:
    """Optimal c on ``[c0, inf)`` for a dilation-invariant domain.

    A finite choice carries the cube side ``b0 = c / (3 rho sqrt(n) e^(2n gamma_n))``
    that goes with it.
    """
    if problem.b0 is not None:
        raise DomainError("select_c_dilation needs a dilation-invariant problem")
    consts = derived_constants(problem)
    p, k, c0 = consts.p, consts.k, consts.c0

    def unbounded(case):
        return Recommendation(case, None, None, consts,
                              notes=("MN decreases to 0 as c grows; supply a feasibility cap",))

    if p == 0:
        if k < 0:
            return unbounded(CaseId.ZERO_EXPONENT)
        return _finite(problem, CaseId.ZERO_EXPONENT, c0, consts)
    if p > 0:
        if k >= 0:
            return _finite(problem, CaseId.DILATION1, c0, consts)
        return unbounded(CaseId.DILATION2)
    if k > 0:
        stat = _from_value(-p / k)
        return _finite(problem, CaseId.DILATION3, stat if c0 <= stat else c0, consts)
    return unbounded(CaseId.DILATION4)


def select_c(problem: SelectionProblem) -> Recommendation:
    if problem.dilation_invariant:
        return select_c_dilation(problem)
    return select_c_fixed(problem)


def expected_case(p: float, k: float, dilation: bool) -> CaseId:
    """Case label implied by the signs of p and k alone."""
    if p == 0:
        return CaseId.ZERO_EXPONENT
    if dilation:
        if p > 0:
            return CaseId.DILATION1 if k >= 0 else CaseId.DILATION2
        return CaseId.DILATION3 if k > 0 else CaseId.DILATION4
    if p > 0:
        return CaseId.FIXED1 if k >= 0 else CaseId.FIXED2
    if k == 0:
        return CaseId.FIXED3
    return CaseId.FIXED4 if k > 0 else CaseId.FIXED5


# --- bounds ---------------------------------------------------------------

def seminorm_bound(problem: SelectionProblem, c, l2_norm) -> LogScalar:
    """Upper bound on the native-space seminorm of a band-limited f.

    ``C0(m,n) (2/pi)^(1/4) sigma^((1+n+lam)/4) c^((1-n-lam)/4) e^(c sigma/2) ||f||_2``
    """
    c = as_log_scalar(c)
    l2 = as_log_scalar(l2_norm)
    if c.is_zero:
        raise DomainError("c must be positive")
    if l2.is_zero:
        return LogScalar.zero()
    ctx, sigma = problem.ctx, problem.sigma
    log_val = (ctx.c0_const.log_value
               + 0.25 * math.log(2.0 / math.pi)
               + (1 + ctx.n + ctx.lam) / 4.0 * math.log(sigma)
               + (1 - ctx.n - ctx.lam) / 4.0 * c.log_value
               + float(_c_times(c.log_value, math.log(sigma / 2.0))))
    return LogScalar(log_val) * l2


def native_error_bound(problem: SelectionProblem, c, seminorm) -> LogScalar:
    """Pointwise bound ``sqrt(l) (2 pi)^(1/4) sqrt(n alpha_n) sqrt(Delta0) c^(lam/2) omega^(1/d) |f|_h``."""
    c = as_log_scalar(c)
    seminorm = as_log_scalar(seminorm)
    if seminorm.is_zero:
        return LogScalar.zero()
    ctx = problem.ctx
    log_val = (0.5 * ctx.l_const.log_value + 0.25 * LOG_2PI
               + 0.5 * math.log(ctx.n * ctx.alpha_n) + 0.5 * ctx.delta0.log_value
               + 0.5 * ctx.lam * c.log_value
               + _log_omega_power(ctx, c, problem.b0, problem.d))
    return LogScalar(log_val) * seminorm


def bound_constant(problem: SelectionProblem) -> LogScalar:
    """The c-independent factor ``sqrt(m!) (2pi)^(-n) sqrt(2 n alpha_n) sigma^((1+n+lam)/4) sqrt(Delta0)``."""
    ctx = problem.ctx
    return LogScalar(0.5 * math.lgamma(ctx.m + 1) - ctx.n * LOG_2PI
                     + 0.5 * math.log(2 * ctx.n * ctx.alpha_n)
                     + (1 + ctx.n + ctx.lam) / 4.0 * math.log(problem.sigma)
                     + 0.5 * ctx.delta0.log_value)


def error_bound(problem: SelectionProblem, c, l2_norm, *, check_floor=True) -> LogScalar:
    """Pointwise interpolation error bound for ``f`` band-limited to `sigma`.

    Evaluated factor by factor, with ``omega^(1/d)`` built from the same
    ``C`` as :func:`compute_omega_and_d0` for the problem's b0 mode.
    """
    c = as_log_scalar(c)
    l2 = as_log_scalar(l2_norm)
    if c.is_zero:
        raise DomainError("c must be positive")
    ctx = problem.ctx
    if check_floor and c < compute_c0(ctx, problem.d) * (1 - 1e-12):
        raise DomainError(f"c = {c} is below the theoretical floor c0 = {compute_c0(ctx, problem.d)}")
    if l2.is_zero:
        return LogScalar.zero()
    log_mn_direct = ((1 - ctx.n + ctx.lam) / 4.0 * c.log_value
                     + float(_c_times(c.log_value, math.log(problem.sigma / 2.0)))
                     + _log_omega_power(ctx, c, problem.b0, problem.d))
    return bound_constant(problem) * LogScalar(log_mn_direct) * l2


# --- brute-force oracle ---------------------------------------------------

def oracle_minimize_mn(problem: SelectionProblem, c_max, grid_points: int = 4001,
                       zoom_levels: int = 4):
    """Grid-search minimiser of log MN on ``[c0, c_max]``.

    A log-uniform grid is searched, then re-gridded on the bracket around
    the best index `zoom_levels` times. Ties resolve to the smallest c.
    Returns ``(c_star, log_mn_star)``.
    """
    if grid_points < 1000:
        raise DomainError("grid_points must be >= 1000")
    consts = derived_constants(problem)
    c_max = as_log_scalar(c_max)
    lo, hi = consts.c0.log_value, c_max.log_value
    if not hi > lo:
        raise DomainError("c_max must exceed c0")
    best_lc, best_val = lo, math.inf
    for _ in range(zoom_levels + 1):
        grid = np.linspace(lo, hi, grid_points)
        vals = log_mn_at_log_c(problem, grid, check_floor=False, consts=consts)
        vals = np.where(np.isnan(vals), np.inf, vals)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_lc, best_val = float(grid[i]), float(vals[i])
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]
    return LogScalar(best_lc), best_val
