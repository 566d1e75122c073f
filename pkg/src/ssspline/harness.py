"""Band-limited test functions and empirical bound-vs-error experiments.

Test functions are sums of tensor-product sinc kernels

    f(x) = sum_k w_k prod_i sin(beta (x_i - a_ki)) / (pi (x_i - a_ki)),

whose Fourier transform is supported in the box ``[-beta, beta]^n``. With
``beta = sigma / sqrt(n)`` that box sits inside the ball of radius sigma.
Each 1-D factor is the reproducing kernel of the Paley-Wiener space, so
``<S(. - a), S(. - b)> = S(a - b)`` and the L2 norm follows exactly from
the Gram matrix of the centres.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError
from .interp import CubeDomain, ScatteredData, build_interpolant, fill_distance
from .logscalar import LogScalar
from .select import (SelectionProblem, compute_c0, compute_omega_and_d0,
                     error_bound)
from .theory import KernelParams, theory_context

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "lambda", "c", "d", "sigma", "log_bound", "empirical_max_error", "regime"]
IN_REGIME = "in-theory"
OUT_OF_REGIME = "out-of-regime (bound not asserted)"


def _sinc_factor(t, beta):
    # sin(beta t) / (pi t) with the removable singularity filled by beta / pi
    return beta / math.pi * np.sinc(beta * np.asarray(t) / math.pi)


@dataclass(frozen=True)
class BandLimitedFunction:
    sigma: float
    weights: np.ndarray
    centers: np.ndarray

    @property
    def n(self) -> int:
        return self.centers.shape[1]

    @property
    def beta(self) -> float:
        return self.sigma / math.sqrt(self.n)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pts = np.atleast_2d(x)
        diff = pts[:, None, :] - self.centers[None, :, :]
        vals = np.prod(_sinc_factor(diff, self.beta), axis=2) @ self.weights
        return float(vals[0]) if x.ndim == 1 else vals

    @property
    def l2_norm(self) -> float:
        diff = self.centers[:, None, :] - self.centers[None, :, :]
        gram = np.prod(_sinc_factor(diff, self.beta), axis=2)
        return math.sqrt(max(float(self.weights @ gram @ self.weights), 0.0))


def make_sinc_product(sigma: float, n: int, centers_and_weights) -> BandLimitedFunction:
    """Build ``f`` from ``[(weight, center), ...]`` pairs."""
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    pairs = list(centers_and_weights)
    if not pairs:
        raise ValidationError("need at least one (weight, center) term")
    weights = np.array([float(w) for w, _ in pairs])
    centers = np.array([np.asarray(a, dtype=float).ravel() for _, a in pairs])
    if centers.shape[1] != n:
        raise ValidationError(f"centers must have dimension {n}")
    return BandLimitedFunction(float(sigma), weights, centers)


@dataclass
class BoundReport:
    n: int
    lam: int
    c: float
    d: float
    sigma: float
    log_bound: float
    empirical_max_error: float
    regime: str
    log_c0: float
    log_d0: float
    l2_norm: float
    num_centers: int

    @property
    def in_regime(self) -> bool:
        return self.regime == IN_REGIME

    def to_json(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out

    def csv_row(self) -> dict:
        row = self.to_json()
        return {k: row[k] for k in CSV_COLUMNS}


def run_bound_experiment(f: BandLimitedFunction, domain: CubeDomain, centers,
                         params: KernelParams, *, b0=None, probe_resolution: int = 41,
                         fill_resolution: int = 101, target=None,
                         tol_residual: float = 1e-8) -> BoundReport:
    """Interpolate `f` at `centers` and compare the observed error with the bound.

    `target` overrides the function sampled and probed (default `f`); the
    bound is still computed from ``f.sigma`` and ``f.l2_norm``. The bound is
    only asserted when ``c >= c0`` and ``d <= d0`` (and, with a fixed `b0`,
    ``d < b0 / (4 gamma_n (m+1))``); otherwise it is reported with the
    out-of-regime flag.
    """
    X = np.atleast_2d(np.asarray(centers, dtype=float))
    if not domain.contains(X):
        raise ValidationError("centers must lie inside the cube domain")
    target = f if target is None else target
    d = fill_distance(domain, X, fill_resolution)
    s = build_interpolant(ScatteredData(X, target(X)), params, tol_residual=tol_residual)
    probes = domain.grid(probe_resolution)
    empirical = float(np.max(np.abs(s(probes) - target(probes))))

    ctx = theory_context(params.n, params.lam)
    problem = SelectionProblem(ctx, f.sigma, d, b0, strict=False)
    c = LogScalar.from_value(params.c)
    c0 = compute_c0(ctx, problem.d)
    _, d0 = compute_omega_and_d0(ctx, c, problem.b0)
    ok = c0 <= c and problem.d <= d0 and problem.satisfies_protocol
    bound = error_bound(problem, c, f.l2_norm, check_floor=False)
    report = BoundReport(
        n=params.n, lam=params.lam, c=params.c, d=d, sigma=f.sigma,
        log_bound=bound.log_value, empirical_max_error=empirical,
        regime=IN_REGIME if ok else OUT_OF_REGIME,
        log_c0=c0.log_value, log_d0=d0.log_value, l2_norm=f.l2_norm,
        num_centers=len(X))
    if ok and math.log(max(empirical, 1e-300)) > report.log_bound:
        raise AssertionError(f"in-regime bound violated: {report}")
    logger.info("experiment c=%g d=%g err=%.3e regime=%s", params.c, d, empirical, report.regime)
    return report


def grid_centers(domain: CubeDomain, per_axis: int) -> np.ndarray:
    return domain.grid(per_axis)


def run_experiment_config(config: dict, seed: int = 0) -> list[BoundReport]:
    """Run every (c, centre set) job of an experiment config, sorted by job key.

    Config keys: ``n``, ``lambda``, ``sigma``, ``c_values``, and ``grids``
    (centres per axis) and/or ``random_centers`` (point counts, drawn
    uniformly from the domain with ``seed``); optional ``terms``
    (``[{"weight", "center"}]``), ``domain`` (``{"lower", "side"}``), ``b0``,
    ``probe_resolution``, ``fill_resolution``.
    """
    try:
        n, lam, sigma = config["n"], config["lambda"], config["sigma"]
        c_values = [float(c) for c in config["c_values"]]
        grids = [int(g) for g in config.get("grids", [])]
        random_counts = [int(k) for k in config.get("random_centers", [])]
    except KeyError as exc:
        raise ValidationError(f"experiment config is missing {exc}") from None
    if not grids and not random_counts:
        raise ValidationError("experiment config needs 'grids' or 'random_centers'")
    dom = config.get("domain", {"lower": [0.0] * n, "side": 1.0})
    domain = CubeDomain(dom["lower"], float(dom["side"]))
    if domain.n != n:
        raise ValidationError("domain dimension does not match n")
    terms = config.get("terms") or [{"weight": 1.0, "center": list(domain.lower + domain.side / 2)}]
    f = make_sinc_product(sigma, n, [(t["weight"], t["center"]) for t in terms])
    rng = np.random.default_rng(seed)
    center_sets = [grid_centers(domain, g) for g in sorted(grids)]
    center_sets += [domain.lower + domain.side * rng.random((k, n)) for k in sorted(random_counts)]
    reports = []
    for c in sorted(c_values):
        params = KernelParams(n, lam, c)
        for X in center_sets:
            reports.append(run_bound_experiment(
                f, domain, X, params, b0=config.get("b0"),
                probe_resolution=int(config.get("probe_resolution", 41)),
                fill_resolution=int(config.get("fill_resolution", 101))))
    return reports


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2)
