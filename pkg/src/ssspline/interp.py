"""Scattered-data interpolation with the shifted surface spline.

The interpolant is ``s(x) = p(x) + sum_j c_j h(x - x_j)`` with ``p`` of total
degree ``<= m - 1`` and coefficients annihilating that polynomial space. It is
found from the saddle-point system::

    [ A   P ] [c]   [y]
    [ P^T 0 ] [b] = [0]

Rather than factoring the indefinite block matrix directly, the system is
solved in the null space of ``P^T``: with ``P = Q R`` and ``Z`` spanning the
orthogonal complement of ``range(P)``, ``c = Z u`` where ``Z^T A Z`` is
positive definite because the kernel is conditionally positive definite of
order m.

Solving and evaluating happen in normalized coordinates
``x' = (x - shift) / scale`` with shape parameter ``c / scale``. Since
``h_c(x) = scale^lam (h_{c/scale}(x') + (-1)^m log(scale) (|x'|^2 + (c/scale)^2)^(lam/2))``
and the second term contributes only a polynomial in ``P_{m-1}`` once the
side conditions hold, both forms describe the same ``s``; the normalized one
avoids the cancellation between large kernel and polynomial parts that
the raw coefficients suffer on wide domains.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree

from .errors import DomainError, NumericalError, ValidationError
from .kernel import eval_h
from .theory import KernelParams

logger = logging.getLogger(__name__)

DEFAULT_TOL_RESIDUAL = 1e-8
DEFAULT_PIVOT_FLOOR = 1e-13
BASIS_ORDER = "graded-lex"
# extended precision for residuals and evaluation; equals double on
# platforms without a wider long double
EXT = np.longdouble


def poly_dim(n: int, degree: int) -> int:
    """Dimension of the space of polynomials of total degree <= degree in R^n."""
    return math.comb(n + degree, n) if degree >= 0 else 0


def monomial_exponents(n: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples of all monomials up to `degree`, graded-lex ordered."""
    out = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            exps = [0] * n
            for axis in combo:
                exps[axis] += 1
            out.append(tuple(exps))
    return out


def poly_basis(n: int, degree: int, x) -> np.ndarray:
    """Monomial values at `x` (shape ``(n,)`` or ``(k, n)``), graded-lex order.

    >>> poly_basis(2, 2, [1.0, 2.0])
    array([1., 1., 2., 1., 2., 4.])
    """
    if degree < 0:
        raise DomainError("polynomial degree must be >= 0")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != n:
        raise DomainError(f"points have dimension {pts.shape[1]}, expected {n}")
    cols = [np.ones(len(pts))]
    for total in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            cols.append(np.prod(pts[:, list(combo)], axis=1))
    out = np.column_stack(cols)
    return out[0] if single else out


@dataclass(frozen=True)
class ScatteredData:
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=float).ravel()
        if pts.ndim != 2:
            raise ValidationError("points must be a list of coordinate vectors")
        if len(pts) != len(vals):
            raise ValidationError(f"{len(pts)} points but {len(vals)} values")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(vals))):
            raise ValidationError("points and values must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_json(cls, doc: dict) -> "ScatteredData":
        try:
            n = doc["n"]
            data = cls(doc["points"], doc["values"])
        except KeyError as exc:
            raise ValidationError(f"scattered data document is missing {exc}") from None
        if data.n != n:
            raise ValidationError(f"declared n={n} but points have dimension {data.n}")
        return data


@dataclass(frozen=True)
class CubeDomain:
    """Axis-aligned cube ``lower + [0, side]^n``."""

    lower: np.ndarray
    side: float

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float).ravel())
        if not self.side > 0:
            raise ValidationError("cube side must be positive")

    @property
    def n(self) -> int:
        return len(self.lower)

    def grid(self, resolution: int) -> np.ndarray:
        axis = np.linspace(0.0, self.side, resolution)
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        return self.lower + np.column_stack([g.ravel() for g in mesh])

    def contains(self, X, tol=1e-12) -> bool:
        X = np.atleast_2d(X)
        return bool(np.all(X >= self.lower - tol) and np.all(X <= self.lower + self.side + tol))


@dataclass(frozen=True)
class _Normalized:
    shift: np.ndarray
    scale: float
    params: KernelParams
    centers: np.ndarray
    kernel_coeffs: np.ndarray
    poly_coeffs: np.ndarray


@dataclass(frozen=True)
class Interpolant:
    """``s(x) = p(x) + sum_j c_j h(x - x_j)`` in raw coordinates.

    `poly_coeffs` are over the graded-lex monomial basis in the raw
    coordinates. Evaluation goes through an equivalent normalized form that
    is derived from these fields (or kept from the solve).
    """

    params: KernelParams
    centers: np.ndarray
    kernel_coeffs: np.ndarray
    poly_coeffs: np.ndarray
    residual: float = field(default=0.0, compare=False)
    _normalized: _Normalized | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self._normalized is None:
            object.__setattr__(self, "_normalized", _normalize_raw(self))

    @property
    def degree(self) -> int:
        return self.params.m - 1

    def __call__(self, x):
        return eval_interpolant(self, x)

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "centers": self.centers.tolist(),
            "kernel_coeffs": self.kernel_coeffs.tolist(),
            "poly_coeffs": self.poly_coeffs.tolist(),
            "basis_order": BASIS_ORDER,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Interpolant":
        if doc.get("basis_order", BASIS_ORDER) != BASIS_ORDER:
            raise ValidationError(f"unsupported basis order {doc['basis_order']!r}")
        p = doc["params"]
        return cls(
            KernelParams(p["n"], p["lambda"], p["c"]),
            np.asarray(doc["centers"], dtype=float),
            np.asarray(doc["kernel_coeffs"], dtype=float),
            np.asarray(doc["poly_coeffs"], dtype=float),
        )


def _normalization(X: np.ndarray):
    shift = X.mean(axis=0)
    scale = float(np.abs(X - shift).max()) or 1.0
    return shift, scale


def _scaled_params(params: KernelParams, scale: float) -> KernelParams:
    return KernelParams(params.n, params.lam, params.c / scale)


def _kernel_poly_part(Xs, coeffs, params: KernelParams, fit):
    """Coefficients of ``(-1)^m sum_j c_j (|x - x_j|^2 + c^2)^(lam/2)`` in P_{m-1}.

    The sum is a polynomial of degree <= m-1 whenever the ``c_j`` satisfy
    the side conditions; `fit` maps its values at `Xs` to coefficients.
    """
    sign = -1.0 if params.m % 2 else 1.0
    vals = sign * ((squared_distances(Xs, Xs) + params.c ** 2) ** (params.lam // 2)) @ coeffs
    return fit(vals)


def _normalize_raw(s: Interpolant) -> _Normalized:
    """Rebuild the normalized form from raw fields (used after JSON loading)."""
    shift, scale = _normalization(s.centers)
    ps = _scaled_params(s.params, scale)
    Xs = (s.centers - shift) / scale
    cs = s.kernel_coeffs * scale ** s.params.lam
    P = poly_basis(s.params.n, s.degree, Xs)
    gamma = _kernel_poly_part(Xs, cs, ps, lambda v: np.linalg.lstsq(P, v, rcond=None)[0])
    beta = _affine_poly(s.poly_coeffs, s.params.n, s.degree, shift, scale)
    return _Normalized(shift, scale, ps, Xs, cs, beta + math.log(scale) * gamma)


def squared_distances(X, Y, dtype=float) -> np.ndarray:
    diff = np.asarray(X, dtype=dtype)[:, None, :] - np.asarray(Y, dtype=dtype)[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _centered_kernel(r2, params):
    # sum_j c_j = 0 holds for every m >= 2, so dropping the constant h(0)
    # leaves s unchanged while shrinking the matrix entries (and rounding)
    return eval_h(r2, params) - eval_h(np.zeros(1, dtype=r2.dtype), params)[0]


def check_scattered_data(data: ScatteredData, params: KernelParams):
    """Validate sizes and distinctness before any factorization."""
    if data.n != params.n:
        raise ValidationError(f"data dimension {data.n} does not match kernel dimension {params.n}")
    q = poly_dim(params.n, params.m - 1)
    if len(data.points) < q:
        raise ValidationError(
            f"insufficient points for polynomial unisolvency: need at least {q} "
            f"for degree {params.m - 1} in R^{params.n}, got {len(data.points)}")
    if len(data.points) > 1:
        dist, _ = cKDTree(data.points).query(data.points, k=2)
        if np.any(dist[:, 1] == 0.0):
            raise ValidationError("duplicate points in scattered data")


def build_interpolant(data: ScatteredData, params: KernelParams, *,
                      tol_residual: float = DEFAULT_TOL_RESIDUAL,
                      pivot_floor: float = DEFAULT_PIVOT_FLOOR,
                      refine_steps: int = 2) -> Interpolant:
    """Solve for the unique interpolant of `data`.

    Raises
    ------
    ValidationError
        Too few points for the polynomial part, duplicate points, or a
        dimension mismatch.
    NumericalError
        The polynomial block is rank deficient (point set not unisolvent),
        the projected kernel block is not numerically positive definite, or
        the post-solve residual exceeds ``tol_residual * (1 + max|y|)``.
        ``exc.stage`` names the failing block.
    """
    check_scattered_data(data, params)
    X, y = data.points, data.values
    N = len(X)
    degree = params.m - 1
    q = poly_dim(params.n, degree)

    # everything below runs in normalized coordinates
    shift, scale = _normalization(X)
    ps = _scaled_params(params, scale)
    Xs = (X - shift) / scale
    P_scaled = poly_basis(params.n, degree, Xs)
    Q, R = np.linalg.qr(P_scaled, mode="complete")
    r_diag = np.abs(np.diag(R[:q]))
    if r_diag.min() < pivot_floor * max(r_diag.max(), 1.0):
        raise NumericalError(
            "degenerate point set or ill-conditioned system: polynomial block is "
            f"rank deficient (point set not unisolvent for degree {degree})",
            stage="polynomial")
    Q1, Z = Q[:, :q], Q[:, q:]

    A = _centered_kernel(squared_distances(Xs, Xs), ps)
    A = 0.5 * (A + A.T)
    c = np.zeros(N)
    u_shape = N - q
    if u_shape:
        B = Z.T @ A @ Z
        B = 0.5 * (B + B.T)
        try:
            chol = scipy.linalg.cho_factor(B, lower=True)
        except np.linalg.LinAlgError:
            raise NumericalError(
                "degenerate point set or ill-conditioned system: kernel block is "
                "not numerically positive definite", stage="kernel") from None
        pivots = np.diag(chol[0]) ** 2
        if pivots.min() < pivot_floor * np.abs(B).max():
            raise NumericalError(
                "degenerate point set or ill-conditioned system: kernel block pivot "
                f"{pivots.min():.3e} below floor", stage="kernel")

    def solve(rhs):
        cc = Z @ scipy.linalg.cho_solve(chol, Z.T @ rhs) if u_shape else np.zeros(N)
        bb = scipy.linalg.solve_triangular(R[:q], Q1.T @ (rhs - A @ cc))
        return cc, bb

    # mixed-precision refinement: double factorization, extended-precision
    # residuals, so the attainable residual is set by the wider format
    A_ext = _centered_kernel(squared_distances(Xs, Xs, EXT), ps)
    A_ext = 0.5 * (A_ext + A_ext.T)
    P_ext, y_ext = P_scaled.astype(EXT), y.astype(EXT)
    c, beta = (v.astype(EXT) for v in solve(y))
    for _ in range(refine_steps):
        r = y_ext - A_ext @ c - P_ext @ beta
        dc, db = solve(r.astype(float))
        c += dc
        beta += db

    residual = float(np.abs(A_ext @ c + P_ext @ beta - y_ext).max())
    tol = tol_residual * (1.0 + np.abs(y).max())
    if residual > 1e-3 * tol and u_shape:
        # refinement stalls once cond(Z^T A Z) * eps_double ~ 1; retry with
        # corrections solved entirely in extended precision, keep the better
        logger.info("double-precision refinement stalled at %.3e; using extended solve", residual)
        alt = _refine_extended(A_ext, P_ext, y_ext, Z, c.copy(), beta.copy(), refine_steps + 1)
        if alt is not None and alt[2] < residual:
            c, beta, residual = alt
    if residual > tol:
        raise NumericalError(
            f"interpolation residual {residual:.3e} exceeds tolerance "
            f"{tol_residual:.1e} * (1 + max|y|); the shape parameter may be too "
            "large for the point spacing", stage="residual")

    def fit(v):
        return scipy.linalg.solve_triangular(R[:q], Q1.T @ v)

    c64, beta64 = c.astype(float), beta.astype(float)
    gamma = _kernel_poly_part(Xs, c64, ps, fit)
    raw_poly = _affine_poly(beta64 - math.log(scale) * gamma, params.n, degree,
                            -shift / scale, 1.0 / scale)
    norm = _Normalized(shift, scale, ps, Xs, c, beta)
    return Interpolant(params, X.copy(), c64 / scale ** params.lam, raw_poly, residual, norm)


def _refine_extended(A, P, y, Z, c, beta, steps):
    """Iterative refinement with every solve in extended precision.

    ``Z`` from the double QR is orthogonal to ``P`` only to double rounding,
    which leaks ``c`` into ``range(P)``; it is first projected onto the null
    space of ``P^T`` in extended precision. Returns ``(c, beta, residual)``,
    or None if a block is not positive definite even in extended precision.
    """
    try:
        Lg = _cholesky_ext(P.T @ P)

        def project(V):
            for _ in range(2):
                V = V - P @ _cho_solve_ext(Lg, P.T @ V)
            return V

        Z = project(Z.astype(EXT))
        L = _cholesky_ext(Z.T @ A @ Z)
    except np.linalg.LinAlgError:
        return None
    c = project(c)
    for _ in range(steps):
        r = y - A @ c - P @ beta
        dc = Z @ _cho_solve_ext(L, Z.T @ r)
        c += dc
        beta += _cho_solve_ext(Lg, P.T @ (r - A @ dc))
    return c, beta, float(np.abs(A @ c + P @ beta - y).max())


def _cholesky_ext(B: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor computed column by column in B's own precision."""
    n = len(B)
    L = np.zeros_like(B)
    for j in range(n):
        v = B[j:, j] - L[j:, :j] @ L[j, :j]
        if not v[0] > 0:
            raise np.linalg.LinAlgError("matrix is not positive definite")
        L[j, j] = np.sqrt(v[0])
        L[j + 1:, j] = v[1:] / L[j, j]
    return L


def _forward_substitute(L, b):
    x = np.zeros_like(b)
    for i in range(len(b)):
        x[i] = (b[i] - L[i, :i] @ x[:i]) / L[i, i]
    return x


def _back_substitute(U, b):
    x = np.zeros_like(b)
    for i in range(len(b) - 1, -1, -1):
        x[i] = (b[i] - U[i, i + 1:] @ x[i + 1:]) / U[i, i]
    return x


def _cho_solve_ext(L, b):
    return _back_substitute(L.T, _forward_substitute(L, b))


def _affine_poly(beta, n, degree, a, b) -> np.ndarray:
    """Coefficients of ``y -> sum_e beta_e (a + b y)^e`` in the monomial basis of y."""
    exps = monomial_exponents(n, degree)
    index = {e: i for i, e in enumerate(exps)}
    a = np.broadcast_to(np.asarray(a, dtype=float), (n,))
    out = np.zeros(len(exps))
    for coef, e in zip(beta, exps):
        # binomial expansion of prod_i (a_i + b y_i)^e_i
        per_axis = [[(j, math.comb(k, j) * a[i] ** (k - j) * b ** j) for j in range(k + 1)]
                    for i, k in enumerate(e)]
        for choice in itertools.product(*per_axis):
            out[index[tuple(j for j, _ in choice)]] += coef * math.prod(w for _, w in choice)
    return out


def eval_interpolant(s: Interpolant, x) -> np.ndarray:
    """Evaluate ``s`` at one point (shape ``(n,)``) or many (shape ``(k, n)``)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != s.params.n:
        raise DomainError(f"evaluation points have dimension {pts.shape[1]}, expected {s.params.n}")
    norm = s._normalized
    xs = (pts - norm.shift) / norm.scale
    K = _centered_kernel(squared_distances(xs, norm.centers, EXT), norm.params)
    vals = K @ norm.kernel_coeffs + poly_basis(s.params.n, s.degree, xs).astype(EXT) @ norm.poly_coeffs
    vals = vals.astype(float)
    return float(vals[0]) if single else vals


def fill_distance(E: CubeDomain, X, resolution: int = 101) -> float:
    """Grid approximation of ``sup_{y in E} min_{x in X} |y - x|``.

    The supremum is taken over the ``resolution**n`` points of a uniform grid
    including the corners of `E`, so the result is a lower bound on the exact
    fill distance and falls short by at most ``sqrt(n) * side / (2 (resolution - 1))``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.size == 0:
        raise DomainError("fill distance needs a nonempty center set")
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    if X.shape[1] != E.n:
        raise DomainError("center dimension does not match the domain")
    dist, _ = cKDTree(X).query(E.grid(resolution))
    return float(dist.max())


def fill_distance_error_bound(E: CubeDomain, resolution: int) -> float:
    return math.sqrt(E.n) * E.side / (2.0 * (resolution - 1))


def load_scattered_data(path) -> ScatteredData:
    with open(path) as fh:
        return ScatteredData.from_json(json.load(fh))
