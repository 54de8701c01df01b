"""Gaussian width estimation via a log-intensity parabola fit.

All width estimates in the package come from the same procedure: keep the
samples above a floor fraction of the peak, fit a parabola to the log of the
values by ordinary least squares, and read the standard deviation off the
quadratic coefficient (sigma = sqrt(-1/(2 c2))).  Uncertainties are
propagated from the coefficient covariance of the fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError

__all__ = ["GaussianFit1D", "GaussianFit2D", "fit_gaussian_1d", "fit_gaussian_2d"]


@dataclass(frozen=True)
class GaussianFit1D:
    sigma: float
    center: float
    sigma_err: float


@dataclass(frozen=True)
class GaussianFit2D:
    sigma_x: float
    sigma_y: float
    center_x: float
    center_y: float
    sigma_x_err: float
    sigma_y_err: float

    @property
    def sigma(self) -> float:
        """Geometric-mean width of the two axes."""
        return float(np.sqrt(self.sigma_x * self.sigma_y))

    @property
    def sigma_err(self) -> float:
        s = self.sigma
        return float(
            0.5
            * s
            * np.hypot(self.sigma_x_err / self.sigma_x, self.sigma_y_err / self.sigma_y)
        )


def _lstsq_with_cov(design: np.ndarray, target: np.ndarray):
    coef, residuals, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1]:
        raise FitError("degenerate design matrix in Gaussian fit")
    m, p = design.shape
    if m > p:
        ssr = residuals[0] if residuals.size else float(np.sum((design @ coef - target) ** 2))
        resvar = ssr / (m - p)
    else:
        resvar = 0.0
    cov = resvar * np.linalg.inv(design.T @ design)
    return coef, cov


def _sigma_from_quadratic(c2: float, c2_var: float) -> tuple[float, float]:
    if not c2 < 0:
        raise FitError("log-intensity parabola opens upward: no Gaussian width")
    sigma = float(np.sqrt(-1.0 / (2.0 * c2)))
    # d sigma / d c2 = sigma**3, from sigma = (-2 c2)**(-1/2)
    return sigma, float(sigma**3 * np.sqrt(max(c2_var, 0.0)))


def fit_gaussian_1d(coords, values, floor_fraction: float = 0.1) -> GaussianFit1D:
    coords = np.asarray(coords, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    peak = values.max()
    if not peak > 0:
        raise FitError("no positive samples to fit")
    mask = values > floor_fraction * peak
    if mask.sum() < 5:
        raise FitError(f"only {int(mask.sum())} samples above the fit floor; need >= 5")
    x = coords[mask]
    y = np.log(values[mask])
    design = np.column_stack([np.ones_like(x), x, x * x])
    coef, cov = _lstsq_with_cov(design, y)
    sigma, sigma_err = _sigma_from_quadratic(coef[2], cov[2, 2])
    center = float(-coef[1] / (2.0 * coef[2]))
    return GaussianFit1D(sigma=sigma, center=center, sigma_err=sigma_err)


def fit_gaussian_2d(coords_x, coords_y, values, floor_fraction: float = 0.1) -> GaussianFit2D:
    """Axis-aligned 2D Gaussian fit; values indexed [x, y]."""
    values = np.asarray(values, dtype=np.float64)
    X, Y = np.meshgrid(np.asarray(coords_x, float), np.asarray(coords_y, float), indexing="ij")
    peak = values.max()
    if not peak > 0:
        raise FitError("no positive samples to fit")
    mask = values > floor_fraction * peak
    if mask.sum() < 8:
        raise FitError(f"only {int(mask.sum())} samples above the fit floor; need >= 8")
    x = X[mask]
    y = Y[mask]
    z = np.log(values[mask])
    design = np.column_stack([np.ones_like(x), x, y, x * x, y * y])
    coef, cov = _lstsq_with_cov(design, z)
    sigma_x, err_x = _sigma_from_quadratic(coef[3], cov[3, 3])
    sigma_y, err_y = _sigma_from_quadratic(coef[4], cov[4, 4])
    return GaussianFit2D(
        sigma_x=sigma_x,
        sigma_y=sigma_y,
        center_x=float(-coef[1] / (2.0 * coef[3])),
        center_y=float(-coef[2] / (2.0 * coef[4])),
        sigma_x_err=err_x,
        sigma_y_err=err_y,
    )
