"""Periodic box discretization, spectral transforms, quadrature and Lebesgue norms.

The computational domain is the periodic box [-L/2, L/2)^N with a uniform
grid of M points per axis.  Integrals are discretized by the rectangle rule,
which is spectrally accurate for smooth periodic integrands, and the Fourier
transform pair is realized by the FFT with a volume-element normalization so
that coefficients approximate the continuum transform on the box.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidFieldError, ParameterError, ShapeMismatchError

__all__ = [
    "Box",
    "Field",
    "SpectralField",
    "transform",
    "inverse_transform",
    "lebesgue_norm",
    "inner_product",
    "save_field",
    "load_field",
]

_FIELD_HEADER = "fracground-field v1"


@dataclass(frozen=True)
class Box:
    """Periodic computational domain [-L/2, L/2)^N with M grid points per axis."""

    dimension: int
    side_length: float
    points_per_dim: int

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ParameterError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not self.side_length > 0:
            raise ParameterError(f"side_length must be positive, got {self.side_length}")
        m = self.points_per_dim
        if m < 8 or (m & (m - 1)) != 0:
            raise ParameterError(f"points_per_dim must be a power of two >= 8, got {m}")

    @property
    def spacing(self) -> float:
        """Grid spacing h = L/M."""
        return self.side_length / self.points_per_dim

    @property
    def shape(self) -> tuple:
        return (self.points_per_dim,) * self.dimension

    @property
    def size(self) -> int:
        return self.points_per_dim ** self.dimension

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimension

    def axis_coordinates(self) -> np.ndarray:
        """Grid coordinates along one axis: -L/2 + j*h for j = 0..M-1."""
        return -0.5 * self.side_length + self.spacing * np.arange(self.points_per_dim)

    def coordinate_grids(self):
        """N coordinate arrays of shape (M,)*N, row-major with axis 0 slowest."""
        axes = [self.axis_coordinates()] * self.dimension
        return np.meshgrid(*axes, indexing="ij")

    def axis_wavenumbers(self) -> np.ndarray:
        """Wavenumbers 2*pi*m/L in FFT order, m = 0..M/2-1, -M/2..-1."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points_per_dim, d=1.0 / self.points_per_dim) / self.side_length

    def wavenumber_norm_sq(self) -> np.ndarray:
        """|k|^2 on the full spectral grid, shape (M,)*N."""
        k = self.axis_wavenumbers()
        grids = np.meshgrid(*([k] * self.dimension), indexing="ij")
        return sum(g ** 2 for g in grids)


@dataclass(frozen=True)
class Field:
    """Real-valued samples on the grid of a box; immutable after construction."""

    box: Box
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(self.box.shape)
        if not np.all(np.isfinite(vals)):
            raise InvalidFieldError("field contains non-finite values")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a real field; conjugate-symmetric under k -> -k."""

    box: Box
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=complex).reshape(self.box.shape)
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        object.__setattr__(self, "coefficients", coeffs)


def transform(u: Field) -> SpectralField:
    """Forward spectral transform, normalized by the cell volume.

    With this normalization Plancherel reads
    ``||u||_{L2}^2 = sum_k |u_hat_k|^2 / L^N``.
    """
    coeffs = np.fft.fftn(u.values) * u.box.cell_volume
    return SpectralField(u.box, coeffs)


def inverse_transform(spec: SpectralField) -> Field:
    """Inverse of :func:`transform`; discards the (tiny) imaginary residue."""
    coeffs = np.asarray(spec.coefficients)
    if not np.all(np.isfinite(coeffs)):
        raise InvalidFieldError("spectral coefficients contain non-finite values")
    vals = np.fft.ifftn(coeffs).real / spec.box.cell_volume
    return Field(spec.box, vals)


def lebesgue_norm(u: Field, q: float) -> float:
    """Uniform-grid quadrature of the L^q norm: (h^N sum |u_i|^q)^(1/q)."""
    if q < 1:
        raise ParameterError(f"Lebesgue exponent must satisfy q >= 1, got {q}")
    return float((u.box.cell_volume * np.sum(np.abs(u.values) ** q)) ** (1.0 / q))


def inner_product(a: Field, b: Field) -> float:
    """L^2 pairing h^N sum a_i b_i on a shared box."""
    if a.box != b.box:
        raise ShapeMismatchError("fields live on different boxes")
    return float(a.box.cell_volume * np.sum(a.values * b.values))


def save_field(u: Field, path) -> None:
    """Write a field in the v1 ASCII format (header + row-major float64 values)."""
    box = u.box
    with open(path, "w") as fh:
        fh.write(f"{_FIELD_HEADER} N={box.dimension} L={box.side_length!r} M={box.points_per_dim}\n")
        for v in u.values.ravel(order="C"):
            fh.write(f"{v:.17g}\n")


def load_field(path) -> Field:
    """Read a field written by :func:`save_field`."""
    with open(path) as fh:
        header = fh.readline().strip()
        parts = header.split()
        if parts[:2] != _FIELD_HEADER.split() or len(parts) != 5:
            raise InvalidFieldError(f"unrecognized field header: {header!r}")
        try:
            meta = dict(p.split("=", 1) for p in parts[2:])
            box = Box(int(meta["N"]), float(meta["L"]), int(meta["M"]))
        except (KeyError, ValueError) as exc:
            raise InvalidFieldError(f"malformed field header: {header!r}") from exc
        vals = np.loadtxt(fh, dtype=float, ndmin=1)
    if vals.size != box.size:
        raise InvalidFieldError(f"expected {box.size} values, found {vals.size}")
    return Field(box, vals.reshape(box.shape))
