"""Zernike basis over a circular pupil, phase masks, and parity decomposition.

The first 15 polynomials of the single-index scheme are supported, matching a
40-actuator deformable mirror that gives independent control over exactly
that set.  Each polynomial has definite parity under point reflection through
the optical axis ((rho, theta) -> (rho, theta + pi)), which is what makes the
basis useful here: masks built from odd-only or even-only subsets have exact
parity.

Polynomials are evaluated as polynomials in the Cartesian pupil coordinates
x = rho cos(theta), y = rho sin(theta) rather than through trig calls of
multiples of theta.  Monomials of odd total degree negate *exactly* in IEEE
arithmetic when (x, y) -> (-x, -y), so a mask sampled on a centered grid from
odd-index coefficients satisfies phi(-k) == -phi(k) bitwise, and its
even-parity projection is exactly zero.

Indexing note: rows 8 and 9 are the sin/cos pair of first-order coma.  Some
printed single-index tables list both with sin; here j=9 is the cosine
partner, keeping the basis non-degenerate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import yaml
from scipy.ndimage import gaussian_filter

from .errors import DomainError, GeometryError, ShapeError
from .grid import Grid, Grid1D, Grid2D, reflect_array

__all__ = [
    "Parity",
    "ParityFilter",
    "PhaseMask",
    "DmConfig",
    "zernike_eval",
    "parity_of",
    "mask_from_coeffs",
    "parity_decompose",
    "random_mask",
    "filtered_noise_mask",
    "uniform_phase_mask",
    "save_dm_config",
    "load_dm_config",
    "EVEN_INDICES",
    "ODD_INDICES",
]

_SQ3 = math.sqrt(3.0)
_SQ5 = math.sqrt(5.0)
_SQ6 = math.sqrt(6.0)
_SQ8 = math.sqrt(8.0)
_SQ10 = math.sqrt(10.0)

EVEN_INDICES = frozenset({1, 4, 5, 6, 11, 12, 13, 14, 15})
ODD_INDICES = frozenset({2, 3, 7, 8, 9, 10})


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


class ParityFilter(enum.Enum):
    ALL = "all"
    EVEN_ONLY = "even"
    ODD_ONLY = "odd"


def _zernike_xy(j: int, x, y):
    """Z_j as a polynomial in pupil coordinates x, y (rho <= 1 assumed)."""
    r2 = x * x + y * y
    if j == 1:
        return np.ones_like(r2)
    if j == 2:
        return x
    if j == 3:
        return y
    if j == 4:
        return _SQ6 * 2.0 * x * y
    if j == 5:
        return _SQ3 * (2.0 * r2 - 1.0)
    if j == 6:
        return _SQ6 * (x * x - y * y)
    if j == 7:
        return _SQ8 * (3.0 * x * x * y - y * y * y)
    if j == 8:
        return _SQ8 * (3.0 * r2 - 2.0) * y
    if j == 9:
        return _SQ8 * (3.0 * r2 - 2.0) * x
    if j == 10:
        return _SQ8 * (x * x * x - 3.0 * x * y * y)
    if j == 11:
        return _SQ10 * 4.0 * x * y * (x * x - y * y)
    if j == 12:
        return _SQ10 * (4.0 * r2 - 3.0) * 2.0 * x * y
    if j == 13:
        return _SQ5 * (6.0 * r2 * r2 - 6.0 * r2 + 1.0)
    if j == 14:
        return _SQ10 * (4.0 * r2 - 3.0) * (x * x - y * y)
    if j == 15:
        x2 = x * x
        y2 = y * y
        return _SQ10 * (x2 * x2 - 6.0 * x2 * y2 + y2 * y2)
    raise DomainError(f"Zernike index must be in 1..15, got {j}")


def zernike_eval(j: int, rho, theta):
    """Evaluate Z_j at polar pupil coordinates (rho in [0, 1], theta in radians)."""
    if not 1 <= int(j) <= 15:
        raise DomainError(f"Zernike index must be in 1..15, got {j}")
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0) or np.any(rho > 1):
        raise DomainError("rho must lie in [0, 1]")
    theta = np.asarray(theta, dtype=np.float64)
    out = _zernike_xy(int(j), rho * np.cos(theta), rho * np.sin(theta))
    return float(out) if out.ndim == 0 else out


def parity_of(j: int) -> Parity:
    """Parity of Z_j under point reflection: even for m even, odd for m odd."""
    if int(j) in EVEN_INDICES:
        return Parity.EVEN
    if int(j) in ODD_INDICES:
        return Parity.ODD
    raise DomainError(f"Zernike index must be in 1..15, got {j}")


@dataclass(frozen=True)
class PhaseMask:
    """Real phase phi(k) in radians on a momentum-plane grid.

    ``pupil_radius`` (grid units) bounds the support: values vanish outside.
    ``None`` means full-aperture (no pupil), used by 1D demonstration masks
    and full-plane random disorder.
    """

    grid: Grid
    values: np.ndarray
    pupil_radius: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.shape != self.grid.shape:
            raise ShapeError(f"mask shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("mask values must be finite")
        if self.pupil_radius is not None:
            if not self.pupil_radius > 0:
                raise DomainError(f"pupil_radius must be positive, got {self.pupil_radius}")
            if np.any(vals[~_pupil_support(self.grid, self.pupil_radius)] != 0.0):
                raise DomainError("mask carries nonzero phase outside the pupil")

    def zero_like(self) -> "PhaseMask":
        return PhaseMask(self.grid, np.zeros(self.grid.shape), self.pupil_radius)


@dataclass(frozen=True)
class DmConfig:
    """Mirror-style mask recipe: Zernike coefficients (radians) over a pupil."""

    coefficients: dict[int, float] = field(default_factory=dict)
    pupil_radius: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        for j, c in self.coefficients.items():
            if not 1 <= int(j) <= 15:
                raise DomainError(f"Zernike index must be in 1..15, got {j}")
            if not math.isfinite(c):
                raise DomainError(f"coefficient for j={j} is not finite")
        if not self.pupil_radius > 0:
            raise DomainError(f"pupil_radius must be positive, got {self.pupil_radius}")


def _pupil_support(grid: Grid, pupil_radius: float) -> np.ndarray:
    if isinstance(grid, Grid1D):
        return np.abs(grid.coords) <= pupil_radius
    kx, ky = grid.mesh()
    return kx * kx + ky * ky <= pupil_radius * pupil_radius


def max_pupil_radius(grid: Grid2D) -> float:
    """Largest pupil that keeps every supported sample strictly inside the lattice.

    The unpaired edge row/column (index 0) is excluded so that the pupil
    support is symmetric under point reflection.
    """
    return min((grid.nx // 2 - 1) * grid.dkx, (grid.ny // 2 - 1) * grid.dky)


def mask_from_coeffs(cfg: DmConfig, grid: Grid2D) -> PhaseMask:
    """phi(k) = sum_j c_j Z_j(rho / pupil_radius, theta) inside the pupil, 0 outside."""
    if not isinstance(grid, Grid2D):
        raise ShapeError("Zernike masks require a 2D momentum grid")
    if cfg.pupil_radius > max_pupil_radius(grid):
        raise GeometryError(
            f"pupil radius {cfg.pupil_radius} exceeds usable grid radius "
            f"{max_pupil_radius(grid)}"
        )
    kx, ky = grid.mesh()
    x = kx / cfg.pupil_radius
    y = ky / cfg.pupil_radius
    inside = x * x + y * y <= 1.0
    phi = np.zeros(grid.shape)
    for j in sorted(cfg.coefficients):
        c = cfg.coefficients[j]
        if c != 0.0:
            phi = phi + c * _zernike_xy(int(j), x, y)
    phi = np.where(inside, phi, 0.0)
    return PhaseMask(grid, phi, cfg.pupil_radius)


def parity_decompose(mask: PhaseMask) -> tuple[PhaseMask, PhaseMask]:
    """Split phi into even and odd parts under point reflection.

    even = (phi(k) + phi(-k)) / 2, odd = (phi(k) - phi(-k)) / 2.  Both parts
    keep the original grid and pupil; even + odd reconstructs phi on interior
    samples.
    """
    refl = reflect_array(mask.values)
    even = 0.5 * (mask.values + refl)
    odd = 0.5 * (mask.values - refl)
    return (
        PhaseMask(mask.grid, even, mask.pupil_radius),
        PhaseMask(mask.grid, odd, mask.pupil_radius),
    )


def random_mask(
    parity_filter: ParityFilter,
    amplitude: float,
    seed,
    pupil_radius: float = 1.0,
) -> DmConfig:
    """Draw i.i.d. uniform [-amplitude, amplitude] coefficients on j >= 4.

    Piston and the two tilts (j = 1..3) are always excluded: piston is
    unobservable and tilts merely translate the far-field patterns, which
    would break registration-free pattern comparison.  Deterministic for a
    fixed seed.
    """
    if amplitude < 0:
        raise DomainError(f"amplitude must be >= 0, got {amplitude}")
    if parity_filter is ParityFilter.ALL:
        allowed = [j for j in range(4, 16)]
    elif parity_filter is ParityFilter.EVEN_ONLY:
        allowed = sorted(j for j in EVEN_INDICES if j >= 4)
    else:
        allowed = sorted(j for j in ODD_INDICES if j >= 4)
    rng = np.random.default_rng(seed)
    coeffs = {j: float(rng.uniform(-amplitude, amplitude)) for j in allowed}
    return DmConfig(coefficients=coeffs, pupil_radius=pupil_radius, seed=seed)


def filtered_noise_mask(
    grid: Grid,
    rms: float,
    correlation_length: float,
    seed,
    pupil_radius: float | None = None,
) -> PhaseMask:
    """Gaussian-filtered white-noise phase, rescaled to a target RMS.

    ``correlation_length`` is the smoothing sigma in samples (0 keeps the
    noise white).  The RMS is measured over the pupil support when a pupil is
    given, over the whole plane otherwise.
    """
    if rms < 0:
        raise DomainError(f"rms must be >= 0, got {rms}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape)
    if correlation_length > 0:
        noise = gaussian_filter(noise, sigma=correlation_length, mode="wrap")
    support = (
        _pupil_support(grid, pupil_radius) if pupil_radius is not None else np.ones(grid.shape, bool)
    )
    current = float(np.sqrt(np.mean(noise[support] ** 2)))
    phi = noise * (rms / current) if current > 0 and rms > 0 else np.zeros(grid.shape)
    phi = np.where(support, phi, 0.0)
    return PhaseMask(grid, phi, pupil_radius)


def uniform_phase_mask(
    grid: Grid,
    pupil_radius: float | None,
    seed,
    amplitude: float = math.pi,
) -> PhaseMask:
    """White phase, i.i.d. uniform on [-amplitude, amplitude] over the support.

    With amplitude = pi this produces fully developed speckle in the far
    field (unit contrast on average).
    """
    rng = np.random.default_rng(seed)
    phi = rng.uniform(-amplitude, amplitude, size=grid.shape)
    support = (
        _pupil_support(grid, pupil_radius) if pupil_radius is not None else np.ones(grid.shape, bool)
    )
    return PhaseMask(grid, np.where(support, phi, 0.0), pupil_radius)


def save_dm_config(cfg: DmConfig, path) -> None:
    doc = {
        "pupil_radius": float(cfg.pupil_radius),
        "seed": cfg.seed,
        "coefficients": {int(j): float(c) for j, c in sorted(cfg.coefficients.items())},
    }
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True)


def load_dm_config(path) -> DmConfig:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise DomainError(f"{path}: mirror config must be a key/value document")
    unknown = set(doc) - {"pupil_radius", "seed", "coefficients"}
    if unknown:
        raise DomainError(f"{path}: unknown keys {sorted(unknown)}")
    coeffs = {int(j): float(c) for j, c in (doc.get("coefficients") or {}).items()}
    return DmConfig(
        coefficients=coeffs,
        pupil_radius=float(doc.get("pupil_radius", 1.0)),
        seed=doc.get("seed"),
    )
