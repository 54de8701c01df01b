"""Far-field propagation through phase masks and two-photon correlation maps.

Two computation paths are provided:

* the exact pair path: apply exp(i phi(k1)) exp(i phi(k2)) to the biphoton
  amplitude, Fourier transform both photons, take |.|^2, and project onto
  the difference coordinate x1 - x2.  Cost grows as the square of the
  per-photon grid size, so a memory guard refuses oversized 2D pair grids.

* the delta-approximated path: for sigma_plus >> sigma_minus the sum-momentum
  Gaussian acts as delta(k1 + k2), collapsing the correlation to a single
  transform,

      C(d) ~ | FT_k[ exp(i 2 phi_e(k)) exp(-2 k^2 sigma_minus^2) ] (d) |^2,

  where phi_e is the even-parity part of the mask and d = x1 - x2.  The odd
  part cancels identically (phi(k) + phi(-k) drops it), which is the
  odd-parity immunity this package quantifies.

The auxiliary pump is a coherent probe at half the photon wavelength sent
through the same mask.  It accumulates the doubled phase and its momentum
samples sit at k_p = 2k, so its intensity

      I(x) ~ | FT_kp[ exp(i 2 phi(k_p)) exp(-k_p^2 sigma_minus^2 / 2) ] (x) |^2

is computed from the *same* kernel array as the delta path and differs only
in grid metadata: the pump position axis has half the spacing, realizing the
d = 2x coordinate map without interpolation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResolutionError, ResourceLimitError, ShapeError
from .grid import (
    ComplexField,
    Grid,
    Grid1D,
    Grid2D,
    fourier_transform,
    pair_histogram,
    pearson_correlation,
)
from .spdc import SigmaPair, TwoPhotonAmplitude
from .zernike import PhaseMask, parity_decompose

__all__ = [
    "CorrelationMap",
    "PumpPattern",
    "PairIntensity",
    "apply_mask_pair",
    "full_correlation",
    "difference_projection",
    "delta_approx_correlation",
    "aux_pump_intensity",
    "compare_patterns",
    "DEFAULT_MAX_PAIR_ELEMENTS",
]

# Refuse exact-path computations beyond this many pair-grid elements
# (2**26 complex128 values ~ 1 GiB); a 64^4 two-dimensional pair grid is
# well inside, 128^4 is not.
DEFAULT_MAX_PAIR_ELEMENTS = 1 << 26


@dataclass(frozen=True)
class CorrelationMap:
    """Two-photon coincidence map over the difference coordinate x1 - x2.

    values are max-normalized (peak exactly 1); raw_peak restores the
    pre-normalization scale.
    """

    grid: Grid
    values: np.ndarray
    raw_peak: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.shape != self.grid.shape:
            raise ShapeError(f"map shape {vals.shape} does not match grid {self.grid.shape}")
        if np.any(vals < 0):
            raise DomainError("correlation map values must be non-negative")


@dataclass(frozen=True)
class PumpPattern:
    """Max-normalized auxiliary-pump intensity on its position grid."""

    grid: Grid
    values: np.ndarray
    raw_peak: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.shape != self.grid.shape:
            raise ShapeError(f"pattern shape {vals.shape} does not match grid {self.grid.shape}")
        if np.any(vals < 0):
            raise DomainError("pump intensity must be non-negative")


@dataclass(frozen=True)
class PairIntensity:
    """|Psi(x1, x2)|^2 on the position pair grid, max-normalized.

    grid describes the per-photon position axis; values has pair shape
    ((n, n) or (nx, ny, nx, ny)).  raw_peak restores absolute scale, so the
    unitarity check sum(values) * raw_peak == total input power holds.
    """

    grid: Grid
    values: np.ndarray
    raw_peak: float


def apply_mask_pair(psi: TwoPhotonAmplitude, mask: PhaseMask) -> TwoPhotonAmplitude:
    """Send both photons through the mask: psi' = e^{i phi(k1)} e^{i phi(k2)} psi."""
    if mask.grid != psi.grid:
        raise ShapeError("mask grid does not match the per-photon momentum grid")
    phase = np.exp(1j * mask.values)
    if psi.dims == 1:
        out = psi.values * phase[:, None] * phase[None, :]
    else:
        out = psi.values * phase[:, :, None, None] * phase[None, None, :, :]
    return TwoPhotonAmplitude(psi.grid, out, psi.sigmas)


def full_correlation(
    psi: TwoPhotonAmplitude,
    max_elements: int = DEFAULT_MAX_PAIR_ELEMENTS,
) -> PairIntensity:
    """Exact coincidence intensity C(x1, x2) = |FT_{k1->x1} FT_{k2->x2} psi|^2."""
    if psi.values.size > max_elements:
        raise ResourceLimitError(
            f"pair grid has {psi.values.size} elements, over the {max_elements} limit; "
            "raise max_elements explicitly to proceed"
        )
    shifted = np.fft.ifftshift(psi.values)
    transformed = np.fft.fftshift(np.fft.ifftn(shifted, norm="ortho"))
    intensity = np.abs(transformed) ** 2
    peak = float(intensity.max())
    return PairIntensity(psi.grid.conjugate(), intensity / peak, peak)


def difference_projection(c: PairIntensity) -> CorrelationMap:
    """Project C(x1, x2) onto the difference coordinate: map(d) = sum_x C(x, x - d)."""
    hist = pair_histogram(c.values, "difference") * c.raw_peak
    peak = float(hist.max())
    if isinstance(c.grid, Grid1D):
        out_grid: Grid = Grid1D(2 * c.grid.n, c.grid.dk)
    else:
        out_grid = Grid2D(2 * c.grid.nx, 2 * c.grid.ny, c.grid.dkx, c.grid.dky)
    return CorrelationMap(out_grid, hist / peak, peak)


def _difference_kernel(grid: Grid, sigma_minus: float) -> np.ndarray:
    if isinstance(grid, Grid1D):
        k2 = grid.coords**2
    else:
        kx, ky = grid.mesh()
        k2 = kx * kx + ky * ky
    return np.exp(-2.0 * sigma_minus**2 * k2)


def _check_kernel_sampling(grid: Grid, sigma_minus: float) -> None:
    if not sigma_minus > 0:
        raise DomainError(f"sigma_minus must be positive, got {sigma_minus}")
    width = 1.0 / (np.sqrt(2.0) * sigma_minus)  # 1/e amplitude half-width in k
    dk_max = max(grid.spacings)
    if width < 3.0 * dk_max:
        raise ResolutionError(
            f"difference kernel 1/e half-width {width:.4g} < 3 grid samples "
            f"(dk = {dk_max:.4g}); kernel under-resolved"
        )
    k_edge = min(n * d for n, d in zip(grid.shape, grid.spacings)) / 2.0
    if width > k_edge / 2.5:
        raise ResolutionError(
            f"difference kernel 1/e half-width {width:.4g} > grid half-span/2.5 "
            f"= {k_edge / 2.5:.4g}; kernel not contained"
        )


def _warn_if_kernel_escapes_pupil(mask: PhaseMask, kernel: np.ndarray) -> None:
    if mask.pupil_radius is None:
        return
    if isinstance(mask.grid, Grid1D):
        inside = np.abs(mask.grid.coords) <= mask.pupil_radius
    else:
        kx, ky = mask.grid.mesh()
        inside = kx * kx + ky * ky <= mask.pupil_radius**2
    energy = kernel**2
    outside_fraction = float(energy[~inside].sum() / energy.sum())
    if outside_fraction > 0.01:
        warnings.warn(
            f"{outside_fraction:.1%} of the difference-kernel energy falls outside "
            "the pupil; the unmodulated rim will contaminate the pattern",
            stacklevel=3,
        )


def delta_approx_correlation(
    mask: PhaseMask,
    sigma_minus: float,
    check_sampling: bool = True,
) -> CorrelationMap:
    """Difference-coordinate correlation in the delta(k1+k2) approximation.

    Only the even-parity part of the mask enters; feeding a mask and its even
    part produces bitwise-identical output, and a purely odd mask reproduces
    the unmasked map exactly.
    """
    if check_sampling:
        _check_kernel_sampling(mask.grid, sigma_minus)
    elif not sigma_minus > 0:
        raise DomainError(f"sigma_minus must be positive, got {sigma_minus}")
    even, _ = parity_decompose(mask)
    kernel = _difference_kernel(mask.grid, sigma_minus)
    _warn_if_kernel_escapes_pupil(mask, kernel)
    field = ComplexField(mask.grid, np.exp(2j * even.values) * kernel)
    out = fourier_transform(field, sign=+1)
    intensity = np.abs(out.values) ** 2
    peak = float(intensity.max())
    return CorrelationMap(out.grid, intensity / peak, peak)


def aux_pump_intensity(
    mask: PhaseMask,
    sigma_minus: float,
    phase_multiplier: float = 2.0,
    check_sampling: bool = True,
) -> PumpPattern:
    """Far-field intensity of the coherent auxiliary pump behind the mask.

    The pump samples the mask at the same lattice sites as the photons but
    carries momentum k_p = 2k there, so its Gaussian envelope
    exp(-k_p^2 sigma_minus^2 / 2) evaluates to exp(-2 k^2 sigma_minus^2) --
    the same kernel as the delta path -- and its output grid has half the
    photon-difference spacing.  ``phase_multiplier`` defaults to 2: a photon
    of half the wavelength acquires twice the phase from the same surface.
    The caller chooses what the pump experiences (full mask, or one parity
    component).
    """
    if check_sampling:
        _check_kernel_sampling(mask.grid, sigma_minus)
    elif not sigma_minus > 0:
        raise DomainError(f"sigma_minus must be positive, got {sigma_minus}")
    kernel = _difference_kernel(mask.grid, sigma_minus)
    _warn_if_kernel_escapes_pupil(mask, kernel)
    field = ComplexField(mask.grid, np.exp(1j * phase_multiplier * mask.values) * kernel)
    out = fourier_transform(field, sign=+1)
    intensity = np.abs(out.values) ** 2
    peak = float(intensity.max())
    if isinstance(mask.grid, Grid1D):
        pump_grid: Grid = Grid1D(mask.grid.n, 2.0 * mask.grid.dk).conjugate()
    else:
        g = mask.grid
        pump_grid = Grid2D(g.nx, g.ny, 2.0 * g.dkx, 2.0 * g.dky).conjugate()
    return PumpPattern(pump_grid, intensity / peak, peak)


def compare_patterns(two_photon: CorrelationMap, pump: PumpPattern) -> float:
    """Pearson coefficient between a difference map and a pump pattern.

    The pump grid must realize the d = 2x coordinate identification: same
    sample count, half the spacing.  Both grids are centered, so samples pair
    up index-for-index and no alignment search is performed.
    """
    if pump.values.shape != two_photon.values.shape:
        raise ShapeError(
            f"pattern shapes differ: {pump.values.shape} vs {two_photon.values.shape}"
        )
    for dp, dt in zip(pump.grid.spacings, two_photon.grid.spacings):
        if abs(2.0 * dp - dt) > 1e-9 * dt:
            raise ShapeError(
                f"pump spacing {dp} is not half the difference-map spacing {dt}; "
                "the d = 2x coordinate map does not hold"
            )
    return pearson_correlation(two_photon.values, pump.values)
