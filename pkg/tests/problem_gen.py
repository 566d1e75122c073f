"""Random selection problems steered into each sign pattern of (p, k)."""
import math

from ssspline.logscalar import LogScalar
from ssspline.select import LOG_3_2, SelectionProblem, sigma_for_zero_k
from ssspline.theory import theory_context

POSITIVE_P = [(2, 2), (2, 4), (4, 4), (4, 6)]
NEGATIVE_P = [(4, 2), (6, 2), (6, 4)]

CASES = {
    # case: (p sign, k sign, dilation)
    "Fixed1": (1, 1, False),
    "Fixed2": (1, -1, False),
    "Fixed3": (-1, 0, False),
    "Fixed4": (-1, 1, False),
    "Fixed5": (-1, -1, False),
    "Dilation1": (1, 1, True),
    "Dilation2": (1, -1, True),
    "Dilation3": (-1, 1, True),
    "Dilation4": (-1, -1, True),
}


def random_problem(case, rng):
    """Draw a SelectionProblem whose (p, k) signs select `case`.

    c0 is drawn in [0.01, 10] and d back-solved (as a LogScalar, since
    exp(2 n gamma_n) is astronomically large); sigma is then placed
    relative to 2 log(3/2)(m+1)/c0, the value at which k changes sign.
    """
    p_sign, k_sign, dilation = CASES[case]
    pairs = POSITIVE_P if p_sign > 0 else NEGATIVE_P
    n, lam = pairs[rng.integers(len(pairs))]
    ctx = theory_context(n, lam)
    log_c0 = rng.uniform(math.log(0.01), math.log(10.0))
    log_d = log_c0 - math.log(12 * ctx.gamma_n * (ctx.m + 1)) - ctx.log_growth
    d = LogScalar(log_d)
    b0 = None
    if not dilation:
        log_c1 = log_c0 + rng.uniform(math.log(2.0), math.log(1e3))
        b0 = LogScalar(log_c1 - math.log(3.0) - ctx.log_growth)
    sigma_zero = 2.0 * LOG_3_2 * (ctx.m + 1) / math.exp(log_c0)
    if k_sign > 0:
        sigma = sigma_zero * math.exp(rng.uniform(math.log(1.2), math.log(50.0)))
    elif k_sign < 0:
        sigma = sigma_zero * math.exp(rng.uniform(math.log(0.02), math.log(0.8)))
    else:
        sigma = sigma_for_zero_k(ctx, d)
    return SelectionProblem(ctx, sigma, d, b0)


def oracle_c_max(problem, constants):
    """Right end of the oracle grid: well beyond every breakpoint of MN."""
    p, k = constants.p, constants.k
    scales = [float(constants.c0), 2.0 * abs(p) / problem.sigma]
    if constants.c1 is not None:
        scales.append(float(constants.c1))
    if k != 0:
        scales.append(abs(p / k))
    return LogScalar.from_value(100.0 * max(scales))
