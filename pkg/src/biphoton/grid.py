"""Centered sampling lattices, complex fields, transforms and image statistics.

Every array in this package lives on a *centered* grid: sample ``i`` of an
even-length axis with spacing ``d`` sits at coordinate ``(i - n/2) * d``, so
the exact zero coordinate is always present at index ``n // 2``.  With that
convention index negation is a pure permutation (``i -> n - i``, with the
single unpaired sample at index 0 mapping to itself), which keeps parity
operations exact, and the discrete Fourier transform is symmetric about zero
frequency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import DomainError, ShapeError

__all__ = [
    "Grid1D",
    "Grid2D",
    "Grid",
    "ComplexField",
    "RealImage",
    "fourier_transform",
    "point_reflect",
    "reflect_array",
    "pearson_correlation",
    "pair_histogram",
]


@dataclass(frozen=True)
class Grid1D:
    """Even-length centered lattice; coordinate(i) = (i - n/2) * dk."""

    n: int
    dk: float

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise DomainError(f"grid length must be a positive even integer, got n={self.n}")
        if not self.dk > 0:
            raise DomainError(f"grid spacing must be positive, got dk={self.dk}")

    @property
    def coords(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dk

    @property
    def extent(self) -> float:
        return self.n * self.dk

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,)

    @property
    def spacings(self) -> tuple[float, ...]:
        return (self.dk,)

    def conjugate(self) -> "Grid1D":
        """Grid of the Fourier-dual axis: same n, spacing 2*pi/(n*dk)."""
        return Grid1D(self.n, 2.0 * np.pi / (self.n * self.dk))


@dataclass(frozen=True)
class Grid2D:
    """Two centered axes with independent spacings; coordinate (0,0) at (nx/2, ny/2)."""

    nx: int
    ny: int
    dkx: float
    dky: float

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if n <= 0 or n % 2:
                raise DomainError(f"grid length must be a positive even integer, got {name}={n}")
        for name, d in (("dkx", self.dkx), ("dky", self.dky)):
            if not d > 0:
                raise DomainError(f"grid spacing must be positive, got {name}={d}")

    @classmethod
    def square(cls, n: int, dk: float) -> "Grid2D":
        return cls(n, n, dk, dk)

    @property
    def coords_x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dkx

    @property
    def coords_y(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny // 2) * self.dky

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense (KX, KY) coordinate arrays, 'ij' indexing."""
        return np.meshgrid(self.coords_x, self.coords_y, indexing="ij")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx, self.ny)

    @property
    def spacings(self) -> tuple[float, ...]:
        return (self.dkx, self.dky)

    def conjugate(self) -> "Grid2D":
        return Grid2D(
            self.nx,
            self.ny,
            2.0 * np.pi / (self.nx * self.dkx),
            2.0 * np.pi / (self.ny * self.dky),
        )


Grid = Union[Grid1D, Grid2D]


def _check_shape(grid: Grid, values: np.ndarray) -> None:
    if values.shape != grid.shape:
        raise ShapeError(f"array shape {values.shape} does not match grid shape {grid.shape}")


@dataclass(frozen=True)
class ComplexField:
    """Complex amplitude sampled on a centered grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.complex128))
        _check_shape(self.grid, self.values)

    def power(self) -> float:
        """Total |f|^2 over all samples."""
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass(frozen=True)
class RealImage:
    """Non-negative real image on a centered grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        _check_shape(self.grid, self.values)
        if np.any(self.values < 0):
            raise DomainError("RealImage values must be non-negative")

    def total(self) -> float:
        return float(self.values.sum())


def fourier_transform(field: ComplexField, sign: int = +1) -> ComplexField:
    """Unitary centered DFT approximating  integral dk e^{sign i k x} f(k).

    Zero frequency sits at the array center on input and output.  With the
    unitary 1/sqrt(n)-per-axis normalization, total power is preserved
    exactly (Parseval), and the output grid spacing is dx = 2*pi/(n*dk) per
    axis.
    """
    if sign not in (+1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    shifted = np.fft.ifftshift(field.values)
    if sign < 0:
        out = np.fft.fftn(shifted, norm="ortho")
    else:
        out = np.fft.ifftn(shifted, norm="ortho")
    return ComplexField(field.grid.conjugate(), np.fft.fftshift(out))


def reflect_array(values: np.ndarray) -> np.ndarray:
    """Point reflection through the coordinate origin of a centered array.

    Maps index i -> n - i along every axis; the unpaired sample at index 0
    (maximal-negative coordinate, no mirror partner on an even grid) maps to
    itself.  A pure permutation: exact, involutive, norm-preserving.
    """
    rev = values[tuple(slice(None, None, -1) for _ in range(values.ndim))]
    return np.roll(rev, shift=(1,) * values.ndim, axis=tuple(range(values.ndim)))


def point_reflect(field: ComplexField) -> ComplexField:
    """Field sampled at the negated coordinates: output(i) = input(-coordinate(i))."""
    return ComplexField(field.grid, reflect_array(field.values))


def pearson_correlation(a, b) -> float:
    """Pearson correlation coefficient over all pixels of two same-shape images.

    Accepts RealImage or bare arrays.  Raises DomainError if either image is
    constant (the coefficient is undefined without variance).
    """
    av = np.asarray(a.values if hasattr(a, "values") else a, dtype=np.float64).ravel()
    bv = np.asarray(b.values if hasattr(b, "values") else b, dtype=np.float64).ravel()
    if av.shape != bv.shape:
        raise ShapeError(f"images have different sizes: {av.shape} vs {bv.shape}")
    da = av - av.mean()
    db = bv - bv.mean()
    sa = np.sqrt(np.dot(da, da))
    sb = np.sqrt(np.dot(db, db))
    if sa == 0.0 or sb == 0.0:
        raise DomainError("Pearson correlation undefined: at least one image is constant")
    r = float(np.dot(da, db) / (sa * sb))
    return min(1.0, max(-1.0, r))


def pair_histogram(values: np.ndarray, mode: str) -> np.ndarray:
    """Accumulate a pair-coordinate array into difference or sum bins.

    ``values`` is a joint array over two photon coordinates, shape (n, n) for
    one transverse dimension or (nx, ny, nx, ny) for two.  The output has 2n
    bins per axis with the same spacing as the input axis, centered so that
    bin index n (per axis) is coordinate-difference (or sum) zero; the single
    extreme bin that the even-length layout cannot populate stays empty.
    """
    if mode not in ("difference", "sum"):
        raise DomainError(f"mode must be 'difference' or 'sum', got {mode!r}")
    if values.ndim == 2:
        n = values.shape[0]
        if values.shape[1] != n:
            raise ShapeError(f"pair array must be square, got {values.shape}")
        out = np.zeros(2 * n, dtype=np.float64)
        if mode == "difference":
            for off in range(-(n - 1), n):
                out[n + off] = np.trace(values, offset=-off)
        else:
            flipped = values[:, ::-1]
            for m in range(2 * n - 1):
                out[m] = np.trace(flipped, offset=n - 1 - m)
        return out
    if values.ndim == 4:
        nx, ny = values.shape[:2]
        if values.shape[2:] != (nx, ny):
            raise ShapeError(f"pair array axes must pair up, got {values.shape}")
        out = np.zeros((2 * nx, 2 * ny), dtype=np.float64)
        for i2 in range(nx):
            for j2 in range(ny):
                block = values[:, :, i2, j2]
                if mode == "difference":
                    out[nx - i2 : 2 * nx - i2, ny - j2 : 2 * ny - j2] += block
                else:
                    out[i2 : i2 + nx, j2 : j2 + ny] += block
        return out
    raise ShapeError(f"pair array must be 2D or 4D, got ndim={values.ndim}")
