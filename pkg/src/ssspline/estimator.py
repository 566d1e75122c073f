"""scikit-learn compatible wrappers.

``ShiftedSurfaceSpline`` is a regressor: ``fit`` solves the interpolation
system, ``predict`` evaluates the interpolant. ``ShapeParameterSelector``
measures the fill distance of a centre set and applies the shape-parameter
criteria; its ``recommendation_`` holds the result.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import ValidationError
from .interp import (DEFAULT_PIVOT_FLOOR, DEFAULT_TOL_RESIDUAL, CubeDomain,
                     ScatteredData, build_interpolant, eval_interpolant,
                     fill_distance)
from .select import SelectionProblem, select_c
from .theory import KernelParams, theory_context


def _check_features(estimator, X):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != estimator.n_features_in_:
        raise ValueError(
            f"X has {X.shape[1]} features, but {type(estimator).__name__} "
            f"is expecting {estimator.n_features_in_} features as input.")
    return X


class ShiftedSurfaceSpline(RegressorMixin, BaseEstimator):
    """Exact scattered-data interpolation with the shifted surface spline.

    Parameters
    ----------
    lam : int, default=2
        Even kernel exponent; the polynomial part has degree ``lam / 2``.
    c : float, default=1.0
        Shape parameter.
    tol_residual : float, default=1e-8
        Post-solve residual tolerance relative to ``1 + max|y|``.
    pivot_floor : float, default=1e-13
        Relative pivot size below which the system is declared degenerate.

    Attributes
    ----------
    interpolant_ : Interpolant
    n_features_in_ : int
        Spatial dimension; must be even.

    Examples
    --------
    >>> import numpy as np
    >>> X = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [.5, .5]])
    >>> model = ShiftedSurfaceSpline(c=0.5).fit(X, X.sum(axis=1))
    >>> float(np.round(model.predict([[0.25, 0.75]])[0], 10))
    1.0
    """

    def __init__(self, lam=2, c=1.0, tol_residual=DEFAULT_TOL_RESIDUAL,
                 pivot_floor=DEFAULT_PIVOT_FLOOR):
        self.lam = lam
        self.c = c
        self.tol_residual = tol_residual
        self.pivot_floor = pivot_floor

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        params = KernelParams(X.shape[1], int(self.lam), float(self.c))
        self.n_features_in_ = X.shape[1]
        self.interpolant_ = build_interpolant(
            ScatteredData(X, y), params,
            tol_residual=self.tol_residual, pivot_floor=self.pivot_floor)
        return self

    def predict(self, X):
        check_is_fitted(self, "interpolant_")
        X = _check_features(self, X)
        return eval_interpolant(self.interpolant_, X)


class ShapeParameterSelector(BaseEstimator):
    """Pick the error-bound-optimal shape parameter for a set of centres.

    Parameters
    ----------
    lam : int, default=2
    sigma : float, default=1.0
        Band limit of the function to be interpolated.
    b0 : float or None, default=None
        Cube side. ``None`` uses the dilation-invariant criteria.
    domain_lower, domain_side : array-like, float, optional
        Cube over which the fill distance is measured; defaults to the
        smallest axis-aligned cube containing the centres.
    resolution : int, default=101
        Grid resolution for the fill distance.

    Notes
    -----
    With a fixed `b0`, ``fit`` raises ValidationError unless
    ``d < b0 / (4 gamma_n (m+1))``, which is the same as ``c0 < c1``.
    """

    def __init__(self, lam=2, sigma=1.0, b0=None, domain_lower=None, domain_side=None,
                 resolution=101):
        self.lam = lam
        self.sigma = sigma
        self.b0 = b0
        self.domain_lower = domain_lower
        self.domain_side = domain_side
        self.resolution = resolution

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        n = X.shape[1]
        ctx = theory_context(n, int(self.lam))
        if self.domain_lower is None:
            lower = X.min(axis=0)
            side = float(np.ptp(X, axis=0).max())
        else:
            lower, side = self.domain_lower, self.domain_side
        if not side or side <= 0:
            raise ValidationError("could not infer a cube domain with positive side")
        self.n_features_in_ = n
        self.domain_ = CubeDomain(lower, side)
        self.fill_distance_ = fill_distance(self.domain_, X, self.resolution)
        self.problem_ = SelectionProblem(ctx, self.sigma, self.fill_distance_, self.b0)
        self.recommendation_ = select_c(self.problem_)
        self.c_ = self.recommendation_.c
        return self
