"""
Uniform grids, sampled fields and the differential operators used on them.

Two boundary kinds are supported:

``periodic``
    ``n`` samples at ``lower + j*dx`` for ``j = 0..n-1`` with
    ``dx = (upper - lower)/n``.  Derivatives are spectral.
``dirichlet``
    hard walls at ``lower`` and ``upper`` where the field vanishes.  The
    ``n`` samples are the interior points ``lower + (j+1)*dx`` with
    ``dx = (upper - lower)/(n + 1)``.  Derivatives use fourth-order finite
    differences, one-sided next to the walls.

Quadrature is the midpoint (rectangle) rule on both kinds; on a dirichlet
grid this coincides with the trapezoid rule because the wall values are 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Sequence

import numpy as np
import scipy.fft as sfft

BOUNDARIES = ("periodic", "dirichlet")
MIN_POINTS = 8


@dataclass(frozen=True)
class PhysicalParams:
    """Physical constants of the one-particle system (natural units by default).

    ``potential`` is an optional external potential sampled on the grid the
    fields live on; ``None`` means classically free.
    """

    hbar: float = 1.0
    mass: float = 1.0
    potential: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.potential is not None:
            v = np.asarray(self.potential, dtype=float)
            if not np.all(np.isfinite(v)):
                raise ValueError("external potential has non-finite values")
            object.__setattr__(self, "potential", v)

    @property
    def is_free(self) -> bool:
        return self.potential is None or not np.any(self.potential)


@dataclass(frozen=True)
class Grid:
    """Regular tensor-product grid in 1 to 3 dimensions."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    shape: tuple[int, ...]
    boundary: str = "periodic"

    def __post_init__(self):
        lower = tuple(float(a) for a in np.atleast_1d(self.lower))
        upper = tuple(float(b) for b in np.atleast_1d(self.upper))
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "shape", shape)
        if not (len(lower) == len(upper) == len(shape)):
            raise ValueError("lower, upper and shape must have the same length")
        if not 1 <= len(shape) <= 3:
            raise ValueError(f"grid dimension must be 1..3, got {len(shape)}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        for a, b, n in zip(lower, upper, shape):
            if n < MIN_POINTS:
                raise ValueError(f"need at least {MIN_POINTS} points per axis, got {n}")
            if not b > a:
                raise ValueError(f"empty extent [{a}, {b})")

    @classmethod
    def cube(cls, lower: float, upper: float, n: int, dim: int = 3,
             boundary: str = "periodic") -> "Grid":
        """Same extent and point count along every axis."""
        return cls((lower,) * dim, (upper,) * dim, (n,) * dim, boundary)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> tuple[float, ...]:
        pad = 0 if self.boundary == "periodic" else 1
        return tuple((b - a) / (n + pad) for a, b, n in zip(self.lower, self.upper, self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lower, self.upper))

    def axis(self, i: int) -> np.ndarray:
        """Sample coordinates along axis ``i``."""
        h = self.spacing[i]
        j = np.arange(self.shape[i])
        if self.boundary == "dirichlet":
            j = j + 1
        return self.lower[i] + j * h

    @property
    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.dim)]

    def mesh(self, sparse: bool = True) -> list[np.ndarray]:
        """Coordinate arrays broadcastable to ``shape`` (``indexing='ij'``)."""
        return np.meshgrid(*self.axes, indexing="ij", sparse=sparse)

    def wavenumbers(self, i: int) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.shape[i], d=self.spacing[i])

    def sub(self, axes: Sequence[int]) -> "Grid":
        """Grid made of the selected axes only."""
        axes = list(axes)
        return Grid(tuple(self.lower[i] for i in axes), tuple(self.upper[i] for i in axes),
                    tuple(self.shape[i] for i in axes), self.boundary)

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Boolean per point: inside ``[lower, upper)`` on every axis."""
        x = np.atleast_2d(x)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((x >= lo) & (x < hi), axis=-1)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "lower": list(self.lower), "upper": list(self.upper),
                "shape": list(self.shape), "boundary": self.boundary}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        grid = cls(tuple(d["lower"]), tuple(d["upper"]), tuple(d["shape"]), d["boundary"])
        if "dim" in d and int(d["dim"]) != grid.dim:
            raise ValueError("grid metadata: dim does not match shape")
        return grid


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One real (or complex) number per grid point."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class ComplexField(ScalarField):
    """Wavefunction samples; ``integral |values|^2 dV`` is 1 when normalized."""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        super().__post_init__()
        if not np.all(np.isfinite(self.values)):
            raise ValueError("wavefunction has non-finite values")

    def normalized(self) -> "ComplexField":
        return ComplexField(self.grid, self.values / np.sqrt(norm(self)))


@dataclass(frozen=True, eq=False)
class VectorField:
    """A ``dim``-vector per grid point, stored with the component axis first."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.grid.dim,) + self.grid.shape:
            raise ValueError(f"vector values shape {v.shape} does not match grid")
        object.__setattr__(self, "values", v)


# ---------------------------------------------------------------------------
# finite-difference weights
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def fd_weights(offsets: tuple[int, ...], order: int) -> np.ndarray:
    """Weights ``w`` with ``sum_k w_k f(x + s_k h) = h**order f^(order)(x) + O(h^p)``.

    Solved from the Taylor moment conditions; ``p = len(offsets) - order``.
    """
    s = np.asarray(offsets, dtype=float)
    npt = len(s)
    a = np.array([s**p / factorial(p) for p in range(npt)])
    b = np.zeros(npt)
    b[order] = 1.0
    w = np.linalg.solve(a, b)
    w.flags.writeable = False
    return w


# stencil windows (offsets relative to the evaluated row), fourth order
_CENTRAL = (-2, -1, 0, 1, 2)
_EDGE = {
    1: [(0, 1, 2, 3, 4), (-1, 0, 1, 2, 3)],
    2: [(0, 1, 2, 3, 4, 5), (-1, 0, 1, 2, 3, 4)],
}


def _fd(values: np.ndarray, axis: int, h: float, order: int) -> np.ndarray:
    v = np.moveaxis(values, axis, 0)
    n = v.shape[0]
    out = np.empty(v.shape, dtype=np.result_type(v.dtype, float))
    w = fd_weights(_CENTRAL, order)
    centre = v[2:n - 2]
    acc = np.zeros_like(out[2:n - 2])
    # differences against the centre keep constants exactly in the kernel
    for wk, s in zip(w, _CENTRAL):
        if s:
            acc += wk * (v[2 + s:n - 2 + s] - centre)
    out[2:n - 2] = acc
    for j, offs in enumerate(_EDGE[order]):
        wl = fd_weights(offs, order)
        out[j] = sum(wk * (v[j + s] - v[j]) for wk, s in zip(wl, offs) if s)
        mirrored = tuple(-s for s in offs)
        wr = fd_weights(mirrored, order)
        jr = n - 1 - j
        out[jr] = sum(wk * (v[jr + s] - v[jr]) for wk, s in zip(wr, mirrored) if s)
    return np.moveaxis(out / h**order, 0, axis)


def _spectral(values: np.ndarray, axis: int, h: float, order: int) -> np.ndarray:
    # scipy.fft keeps long-double inputs in extended precision
    n = values.shape[axis]
    # removing the first slice makes constants differentiate to exactly 0
    v = values - np.take(values, [0], axis=axis)
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    if order == 1 and n % 2 == 0:
        k[n // 2] = 0.0
    mult = (1j * k) ** order
    shape = [1] * values.ndim
    shape[axis] = n
    if np.iscomplexobj(v):
        return sfft.ifft(sfft.fft(v, axis=axis) * mult.reshape(shape), axis=axis)
    kr = 2 * np.pi * np.fft.rfftfreq(n, d=h)
    multr = (1j * kr) ** order
    if order % 2 == 1 and n % 2 == 0:
        multr[-1] = 0.0
    shape[axis] = kr.size
    return sfft.irfft(sfft.rfft(v, axis=axis) * multr.reshape(shape), n=n, axis=axis)


def derivative(values: np.ndarray, grid: Grid, axis: int, order: int = 1) -> np.ndarray:
    """Array-level partial derivative of order 1 or 2 along ``axis``."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(f"array shape {values.shape} does not match grid {grid.shape}")
    if order not in (1, 2):
        raise ValueError("only first and second derivatives are provided")
    h = grid.spacing[axis]
    if grid.boundary == "periodic":
        return _spectral(values, axis, h, order)
    return _fd(values, axis, h, order)


def _check_finite(values: np.ndarray):
    if not np.all(np.isfinite(values)):
        raise ValueError("field has non-finite values")


def gradient(f: ScalarField) -> VectorField:
    """Gradient of a scalar (or complex) field.

    Complex fields give a complex vector field.
    """
    _check_finite(f.values)
    comps = [derivative(f.values, f.grid, i, 1) for i in range(f.grid.dim)]
    return VectorField(f.grid, np.stack(comps))


def laplacian(f: ScalarField) -> ScalarField:
    _check_finite(f.values)
    out = sum(derivative(f.values, f.grid, i, 2) for i in range(f.grid.dim))
    return type(f)(f.grid, out) if isinstance(f, ComplexField) else ScalarField(f.grid, out)


def divergence(v: VectorField) -> ScalarField:
    _check_finite(v.values)
    return ScalarField(v.grid, sum(derivative(v.values[i], v.grid, i, 1)
                                   for i in range(v.grid.dim)))


def integrate(values: np.ndarray, grid: Grid) -> float:
    """Midpoint-rule integral of grid samples."""
    return float(np.sum(values) * grid.cell_volume)


def norm(psi: ComplexField) -> float:
    """``integral |psi|^2 dV`` by midpoint quadrature."""
    return integrate(np.abs(psi.values) ** 2, psi.grid)


def local_derivative(values: np.ndarray, grid: Grid, axis: int, order: int = 1) -> np.ndarray:
    """Fourth-order finite-difference derivative with a 5-point stencil.

    Unlike :func:`derivative` this never uses FFTs, so a bad value only
    contaminates its two neighbours on either side.  Periodic grids wrap.
    """
    values = np.asarray(values)
    h = grid.spacing[axis]
    if grid.boundary == "dirichlet":
        return _fd(values, axis, h, order)
    w = fd_weights(_CENTRAL, order)
    out = np.zeros(values.shape, dtype=np.result_type(values.dtype, float))
    for wk, s in zip(w, _CENTRAL):
        if s:
            out += wk * (np.roll(values, -s, axis=axis) - values)
    return out / h**order


def stencil_reach(mask: np.ndarray, grid: Grid, width: int = 2) -> np.ndarray:
    """Grow ``mask`` by ``width`` cells along every axis (wrapping if periodic)."""
    grown = mask.copy()
    for axis in range(mask.ndim):
        base = grown.copy()
        for s in range(1, width + 1):
            for sign in (-1, 1):
                if grid.boundary == "periodic":
                    grown |= np.roll(base, sign * s, axis=axis)
                else:
                    shifted = np.zeros_like(base)
                    src = [slice(None)] * mask.ndim
                    dst = [slice(None)] * mask.ndim
                    if sign > 0:
                        src[axis], dst[axis] = slice(0, -s), slice(s, None)
                    else:
                        src[axis], dst[axis] = slice(s, None), slice(0, -s)
                    shifted[tuple(dst)] = base[tuple(src)]
                    grown |= shifted
    return grown
