"""Monte-Carlo photon-counting camera: frame synthesis and coincidence analysis.

Frames are synthesized pair-by-pair: a Poisson number of photon pairs lands
on the sensor per frame, each pixel accumulates gain electrons per photon
plus Gaussian dark/readout noise, and the whole batch is thresholded at
T = mu + sigma of the batch electron statistics -- a pixel above T counts as
exactly one photon.

Coincidences are extracted with accidental subtraction,

    Corr(x, y) = 1/(N-1) sum_i [ sum_r P_i(r) P_i(r + (x,y))
                                - sum_r P_i(r) P_{i+1}(r + (x,y)) ],

summing i = 0 .. N-2 for both terms so genuine and accidental estimates use
the same number of frame pairs (the printed i-range of the estimator would
index one frame past the end).  A static, frame-independent pattern cancels
identically.  The sum-coordinate variant histograms r1 + r2 instead of
r2 - r1 and feeds the Schmidt-number estimate K = (sigma_m / sigma_j)^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Protocol

import numpy as np

from .binio import read_array, write_array
from .errors import DomainError, InsufficientDataError, ShapeError
from .fitting import fit_gaussian_2d
from .grid import RealImage

__all__ = [
    "DetectorModel",
    "FrameStack",
    "CoincidenceMap",
    "PairSampler",
    "DifferencePairSampler",
    "AnticorrelatedPairSampler",
    "synthesize_frames",
    "threshold_frame",
    "coincidence_correlation",
    "sum_coincidence_correlation",
    "estimate_schmidt",
    "SchmidtEstimate",
    "speckle_contrast",
    "save_frame_stack",
    "load_frame_stack",
]


@dataclass(frozen=True)
class DetectorModel:
    """Sensor geometry, pair rate, and the minimal electron-domain noise model.

    gain is electrons per detected photon; dark_electron_mean and readout_std
    parameterize the per-pixel Gaussian noise floor.  poisson_pairs=False
    fixes the pair count at round(pairs_per_frame_mean) -- useful for
    degenerate sources in tests.  The photon threshold is always
    T = mu + sigma of the batch electron counts.
    """

    width: int
    height: int
    pairs_per_frame_mean: float
    dark_electron_mean: float = 0.0
    readout_std: float = 0.0
    gain: float = 1.0
    poisson_pairs: bool = True

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DomainError("sensor dimensions must be positive")
        if self.pairs_per_frame_mean < 0:
            raise DomainError("pairs_per_frame_mean must be >= 0")
        if not self.gain > 0:
            raise DomainError("gain must be positive")
        if self.readout_std < 0:
            raise DomainError("readout_std must be >= 0")


@dataclass(frozen=True)
class FrameStack:
    """Ordered binary photon maps P_i, shape (N, width, height), values 0/1."""

    frames: np.ndarray
    model: DetectorModel
    threshold: float = 0.0

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 3:
            raise ShapeError(f"frame stack must be 3D, got shape {frames.shape}")
        if frames.shape[1:] != (self.model.width, self.model.height):
            raise ShapeError(
                f"frames are {frames.shape[1:]}, detector is "
                f"{(self.model.width, self.model.height)}"
            )
        object.__setattr__(self, "frames", frames.astype(np.uint8, copy=False))
        if self.frames.max(initial=0) > 1:
            raise DomainError("thresholded frames must be binary")

    @property
    def n(self) -> int:
        return int(self.frames.shape[0])

    def photon_sum_image(self) -> np.ndarray:
        """Per-pixel photon counts accumulated over all frames."""
        return self.frames.sum(axis=0, dtype=np.int64).astype(np.float64)


@dataclass(frozen=True)
class CoincidenceMap:
    """Accidental-subtracted coincidence counts over integer pixel offsets.

    offsets_x/offsets_y label the axes: pixel-position differences for
    coincidence_correlation, absolute pixel-position sums for
    sum_coincidence_correlation.  Values may go slightly negative from
    subtraction noise.
    """

    offsets_x: np.ndarray
    offsets_y: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.offsets_x), len(self.offsets_y)):
            raise ShapeError("offset axes do not match the value array")


class PairSampler(Protocol):
    def sample(self, rng: np.random.Generator, n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
        """Return integer pixel positions (n, 2) for each photon of every pair."""
        ...


class DifferencePairSampler:
    """Pairs with a prescribed (integer) separation distribution.

    The first photon lands at a rounded Gaussian centroid, the second at an
    exact integer offset drawn from the given probability map, so the
    separation histogram reproduces the map without rounding cross-talk.
    """

    def __init__(self, offsets: np.ndarray, probabilities: np.ndarray, centroid_sigma: float, center):
        offsets = np.asarray(offsets, dtype=np.int64)
        probabilities = np.asarray(probabilities, dtype=np.float64)
        if offsets.ndim != 2 or offsets.shape[1] != 2:
            raise ShapeError(f"offsets must be (M, 2), got {offsets.shape}")
        if probabilities.shape != (offsets.shape[0],):
            raise ShapeError("one probability per offset required")
        if np.any(probabilities < 0) or probabilities.sum() <= 0:
            raise DomainError("separation probabilities must be non-negative and not all zero")
        self.offsets = offsets
        self.probabilities = probabilities / probabilities.sum()
        self.centroid_sigma = float(centroid_sigma)
        self.center = np.asarray(center, dtype=np.float64)

    @classmethod
    def from_difference_map(cls, values: np.ndarray, centroid_sigma: float, center):
        """Use a 2D difference map as the separation distribution, one bin per pixel.

        Bin (i, j) of an (nx, ny) map is the integer offset
        (i - nx//2, j - ny//2).
        """
        values = np.asarray(values, dtype=np.float64)
        nx, ny = values.shape
        ox, oy = np.meshgrid(
            np.arange(nx) - nx // 2, np.arange(ny) - ny // 2, indexing="ij"
        )
        offsets = np.column_stack([ox.ravel(), oy.ravel()])
        return cls(offsets, values.ravel(), centroid_sigma, center)

    def sample(self, rng: np.random.Generator, n_pairs: int):
        base = np.rint(
            rng.normal(self.center, self.centroid_sigma, size=(n_pairs, 2))
        ).astype(np.int64)
        picks = rng.choice(len(self.offsets), size=n_pairs, p=self.probabilities)
        return base + self.offsets[picks], base


class AnticorrelatedPairSampler:
    """Momentum-anticorrelated pairs: narrow sum, broad marginal.

    sigma_sum is the standard deviation of the coordinate sum x1 + x2 (per
    axis, pixels); sigma_marginal the standard deviation of a single photon
    coordinate.  Positions are rounded to pixels, so sub-pixel widths are
    quantization-limited.
    """

    def __init__(self, sigma_sum: float, sigma_marginal: float, center):
        if sigma_sum < 0 or sigma_marginal <= 0:
            raise DomainError("sigma_sum must be >= 0 and sigma_marginal > 0")
        half_sum_var = 0.25 * sigma_sum**2
        if sigma_marginal**2 <= half_sum_var:
            raise DomainError("sigma_marginal must exceed sigma_sum/2")
        self.sigma_sum = float(sigma_sum)
        self.sigma_half = float(np.sqrt(sigma_marginal**2 - half_sum_var))
        self.center = np.asarray(center, dtype=np.float64)

    def sample(self, rng: np.random.Generator, n_pairs: int):
        s_half = rng.normal(self.center, 0.5 * self.sigma_sum, size=(n_pairs, 2))
        t = rng.normal(0.0, self.sigma_half, size=(n_pairs, 2))
        p1 = np.rint(s_half + t).astype(np.int64)
        p2 = np.rint(s_half - t).astype(np.int64)
        return p1, p2


def threshold_frame(raw: np.ndarray, mu: float, sigma: float) -> np.ndarray:
    """Binary photon map: 1 where the electron count strictly exceeds mu + sigma."""
    return (np.asarray(raw) > mu + sigma).astype(np.uint8)


def _frame_rngs(seed, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    # One position stream and one noise stream per frame, keyed on
    # (seed, frame, channel): reproducible regardless of evaluation order,
    # and the noise stream can be regenerated alone for the threshold pass.
    return (
        np.random.default_rng([seed, index, 0]),
        np.random.default_rng([seed, index, 1]),
    )


def _deposit_photons(model: DetectorModel, sampler: PairSampler, rng) -> np.ndarray:
    if model.poisson_pairs:
        n_pairs = int(rng.poisson(model.pairs_per_frame_mean))
    else:
        n_pairs = int(round(model.pairs_per_frame_mean))
    counts = np.zeros((model.width, model.height), dtype=np.float64)
    if n_pairs:
        p1, p2 = sampler.sample(rng, n_pairs)
        pos = np.concatenate([p1, p2], axis=0)
        ok = (
            (pos[:, 0] >= 0)
            & (pos[:, 0] < model.width)
            & (pos[:, 1] >= 0)
            & (pos[:, 1] < model.height)
        )
        pos = pos[ok]
        np.add.at(counts, (pos[:, 0], pos[:, 1]), 1.0)
    return counts


def synthesize_frames(
    sampler: PairSampler,
    model: DetectorModel,
    n_frames: int,
    seed,
) -> FrameStack:
    """Generate, noise, and threshold a batch of low-light frames.

    Two passes share per-frame RNG streams: the first accumulates the batch
    electron statistics (and the photon maps), the second regenerates the
    identical noise and applies T = mu + sigma.  Out-of-sensor photons are
    dropped.
    """
    if n_frames <= 0:
        raise DomainError("n_frames must be positive")
    shape = (model.width, model.height)
    photons = np.zeros((n_frames,) + shape, dtype=np.uint8)
    total = 0.0
    total_sq = 0.0
    for i in range(n_frames):
        rng_pos, rng_noise = _frame_rngs(seed, i)
        counts = _deposit_photons(model, sampler, rng_pos)
        np.minimum(counts, 255, out=counts)
        photons[i] = counts.astype(np.uint8)
        raw = model.gain * counts + rng_noise.normal(
            model.dark_electron_mean, model.readout_std, size=shape
        )
        total += float(raw.sum())
        total_sq += float(np.sum(raw * raw))
    n_pixels = n_frames * shape[0] * shape[1]
    mu = total / n_pixels
    sigma = float(np.sqrt(max(total_sq / n_pixels - mu * mu, 0.0)))
    for i in range(n_frames):
        _, rng_noise = _frame_rngs(seed, i)
        raw = model.gain * photons[i] + rng_noise.normal(
            model.dark_electron_mean, model.readout_std, size=shape
        )
        photons[i] = threshold_frame(raw, mu, sigma)
    return FrameStack(photons, model, threshold=mu + sigma)


def _spectrum_sums(frames: np.ndarray, fft_shape: tuple[int, int]):
    """Accumulated genuine/accidental products in the half-spectrum domain."""
    n = frames.shape[0]
    genuine_corr = None
    accidental_corr = None
    genuine_sum = None
    accidental_sum = None
    prev = None
    for i in range(n):
        f_hat = np.fft.rfft2(frames[i].astype(np.float64), s=fft_shape)
        if i > 0:
            # pair (i-1, i): auto terms from frame i-1, cross terms (i-1) x i
            auto = np.conj(prev) * prev
            cross_corr = np.conj(prev) * f_hat
            auto_sum = prev * prev
            cross_sum = prev * f_hat
            if genuine_corr is None:
                genuine_corr = auto
                accidental_corr = cross_corr
                genuine_sum = auto_sum
                accidental_sum = cross_sum
            else:
                genuine_corr += auto
                accidental_corr += cross_corr
                genuine_sum += auto_sum
                accidental_sum += cross_sum
        prev = f_hat
    return genuine_corr, accidental_corr, genuine_sum, accidental_sum


def coincidence_correlation(stack: FrameStack, window: int) -> CoincidenceMap:
    """Genuine-minus-accidental coincidences over pixel offsets within +/-window."""
    n = stack.n
    if n < 2:
        raise InsufficientDataError("coincidence analysis needs at least 2 frames")
    w, h = stack.model.width, stack.model.height
    if window < 1 or window > min(w, h) - 1:
        raise DomainError(f"window must be in [1, {min(w, h) - 1}], got {window}")
    fft_shape = (2 * w, 2 * h)
    genuine, accidental, _, _ = _spectrum_sums(stack.frames, fft_shape)
    corr = np.fft.irfft2(genuine - accidental, s=fft_shape) / (n - 1)
    corr = np.fft.fftshift(corr)
    cx, cy = w, h
    values = corr[cx - window : cx + window + 1, cy - window : cy + window + 1]
    offsets = np.arange(-window, window + 1)
    return CoincidenceMap(offsets, offsets.copy(), values.copy())


def sum_coincidence_correlation(stack: FrameStack, window: int | None = None) -> CoincidenceMap:
    """Accidental-subtracted histogram of pixel-position sums (x1+x2, y1+y2).

    The full sum lattice spans [0, 2(W-1)] per axis.  If ``window`` is given
    the map is cropped to +/-window around its peak.
    """
    n = stack.n
    if n < 2:
        raise InsufficientDataError("coincidence analysis needs at least 2 frames")
    w, h = stack.model.width, stack.model.height
    fft_shape = (2 * w, 2 * h)
    _, _, genuine, accidental = _spectrum_sums(stack.frames, fft_shape)
    conv = np.fft.irfft2(genuine - accidental, s=fft_shape) / (n - 1)
    values = conv[: 2 * w - 1, : 2 * h - 1]
    ox = np.arange(2 * w - 1)
    oy = np.arange(2 * h - 1)
    if window is not None:
        px, py = np.unravel_index(np.argmax(values), values.shape)
        x0, x1 = max(0, px - window), min(values.shape[0], px + window + 1)
        y0, y1 = max(0, py - window), min(values.shape[1], py + window + 1)
        values = values[x0:x1, y0:y1]
        ox = ox[x0:x1]
        oy = oy[y0:y1]
    return CoincidenceMap(ox, oy, values.copy())


class SchmidtEstimate(NamedTuple):
    value: float
    uncertainty: float
    sigma_m: float
    sigma_j: float


def estimate_schmidt(marginal_image, sum_map: CoincidenceMap) -> SchmidtEstimate:
    """K = (sigma_m / sigma_j)^2 from Gaussian fits of the marginal and sum peaks.

    sigma_m comes from a 2D fit of the single-photon image, sigma_j from the
    sum-coincidence peak; both in pixels.  The uncertainty propagates the fit
    covariances of the two widths.
    """
    mvals = marginal_image.values if hasattr(marginal_image, "values") else np.asarray(marginal_image)
    fit_m = fit_gaussian_2d(np.arange(mvals.shape[0]), np.arange(mvals.shape[1]), mvals)
    fit_j = fit_gaussian_2d(sum_map.offsets_x, sum_map.offsets_y, sum_map.values)
    sigma_m, err_m = fit_m.sigma, fit_m.sigma_err
    sigma_j, err_j = fit_j.sigma, fit_j.sigma_err
    k = (sigma_m / sigma_j) ** 2
    uncertainty = 2.0 * k * float(np.hypot(err_m / sigma_m, err_j / sigma_j))
    return SchmidtEstimate(float(k), uncertainty, float(sigma_m), float(sigma_j))


def speckle_contrast(image, region: np.ndarray | None = None) -> float:
    """kappa = sigma_I / <I> over the analysis region (full image by default).

    The caller is responsible for excluding dark borders via ``region`` when
    the illumination does not cover the frame.
    """
    vals = np.asarray(image.values if hasattr(image, "values") else image, dtype=np.float64)
    if region is not None:
        vals = vals[region]
    mean = float(vals.mean()) if vals.size else 0.0
    if mean <= 0:
        raise DomainError("speckle contrast undefined: region mean intensity is not positive")
    return float(vals.std() / mean)


def save_frame_stack(path, stack: FrameStack):
    """Persist frames in the binary grid format (uint8, frame axis first)."""
    return write_array(path, stack.frames, (1.0, 1.0, 1.0))


def load_frame_stack(path, model: DetectorModel) -> FrameStack:
    values, _ = read_array(path)
    if values.ndim != 3:
        raise ShapeError(f"{path}: expected a 3D frame stack, got ndim={values.ndim}")
    return FrameStack(values, model)
