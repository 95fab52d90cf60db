"""Coefficient fields over a spectral catalog and the product-grid transforms.

Fields are plain real coefficient vectors in the catalog's orthonormal basis.
Synthesis/analysis go through a dense basis-value matrix on a uniform tensor
grid; the rectangle rule is spectrally exact there, so round trips on
truncated trig polynomials hold to roundoff as long as the grid satisfies
G >= 2*cutoff + 2 per axis.  Spheres carry no grid (degree/multiplicity
bookkeeping only), so synthesis is a torus/circle affair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import TORUS, SpectralCatalog

TWO_PI = 2.0 * math.pi

_INV_SQRT_2PI = 1.0 / math.sqrt(TWO_PI)
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


@dataclass
class SpectralField:
    """Real coefficients over a catalog's modes."""

    catalog: SpectralCatalog
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.shape != (self.catalog.size,):
            raise ValueError(
                f"coefficient count {self.coeffs.shape} does not match catalog size {self.catalog.size}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")

    @staticmethod
    def zeros(catalog: SpectralCatalog) -> "SpectralField":
        return SpectralField(catalog, np.zeros(catalog.size))

    def copy(self) -> "SpectralField":
        return SpectralField(self.catalog, self.coeffs.copy())

    def to_json(self):
        return {"catalog": self.catalog.digest, "coefficients": self.coeffs.tolist()}


@dataclass(frozen=True)
class ProductGrid:
    """Uniform tensor grid on [0, 2pi)^dims x [0, 2pi) with rectangle weights."""

    dims: int
    nx: int
    nt: int

    def __post_init__(self):
        if self.nx < 2 or self.nt < 2:
            raise ValueError("need at least two points per axis")

    @staticmethod
    def for_catalog(catalog: SpectralCatalog, oversample: int = 2) -> "ProductGrid":
        if catalog.domain.kind != TORUS:
            raise ValueError("grids exist only for circle/torus domains")
        if oversample < 1:
            raise ValueError("oversample must be >= 1")
        return ProductGrid(
            catalog.domain.dim,
            oversample * (2 * catalog.k_max + 2),
            oversample * (2 * catalog.l_max + 2),
        )

    @property
    def x_nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.nx) / self.nx

    @property
    def t_nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.nt) / self.nt

    @property
    def n_points(self) -> int:
        return self.nx**self.dims * self.nt

    @property
    def quad_weight(self) -> float:
        return (TWO_PI / self.nx) ** self.dims * (TWO_PI / self.nt)

    def compliant_with(self, catalog: SpectralCatalog) -> bool:
        return (
            catalog.domain.kind == TORUS
            and catalog.domain.dim == self.dims
            and self.nx >= 2 * catalog.k_max + 2
            and self.nt >= 2 * catalog.l_max + 2
        )

    def meshgrid(self):
        """Flattened coordinate arrays (x_1, ..., x_dims, t), C-order."""
        axes = [self.x_nodes] * self.dims + [self.t_nodes]
        mesh = np.meshgrid(*axes, indexing="ij")
        return [m.ravel() for m in mesh]


def _circle_basis_values(index: int, nodes: np.ndarray) -> np.ndarray:
    if index == 0:
        return np.full(len(nodes), _INV_SQRT_2PI)
    if index > 0:
        return np.cos(index * nodes) * _INV_SQRT_PI
    return np.sin(-index * nodes) * _INV_SQRT_PI


_matrix_cache: dict = {}

# dense transforms are sized for desk-scale runs; ~1 GB of basis table max
_MAX_MATRIX_ELEMENTS = 120_000_000


def basis_rows(catalog: SpectralCatalog, grid: ProductGrid, mode_indices) -> np.ndarray:
    """Basis-value table for a subset of modes, (len(idx), n_points); uncached."""
    if not grid.compliant_with(catalog):
        raise ValueError("grid too coarse (or wrong shape) for catalog")
    mode_indices = np.asarray(mode_indices, dtype=int)
    x_table = np.stack(
        [_circle_basis_values(k, grid.x_nodes) for k in range(-catalog.k_max, catalog.k_max + 1)]
    )
    t_table = np.stack(
        [_circle_basis_values(l, grid.t_nodes) for l in range(-catalog.l_max, catalog.l_max + 1)]
    )
    modes = [catalog.modes[i] for i in mode_indices]
    rows = np.ones((len(modes), 1))
    for axis in range(grid.dims):
        idx = np.array([m.space[axis] + catalog.k_max for m in modes], dtype=int)
        rows = (rows[:, :, None] * x_table[idx][:, None, :]).reshape(len(modes), -1)
    t_idx = np.array([m.l + catalog.l_max for m in modes], dtype=int)
    rows = (rows[:, :, None] * t_table[t_idx][:, None, :]).reshape(len(modes), -1)
    return rows


def basis_matrix(catalog: SpectralCatalog, grid: ProductGrid) -> np.ndarray:
    """Dense (n_modes, n_points) table of basis values; cached per pair."""
    if not grid.compliant_with(catalog):
        raise ValueError("grid too coarse (or wrong shape) for catalog")
    if catalog.size * grid.n_points > _MAX_MATRIX_ELEMENTS:
        raise ValueError(
            f"basis table would hold {catalog.size} x {grid.n_points} entries; "
            "reduce the cutoffs or the oversampling factor"
        )
    key = (catalog.digest, grid.dims, grid.nx, grid.nt)
    cached = _matrix_cache.get(key)
    if cached is not None:
        return cached
    rows = basis_rows(catalog, grid, np.arange(catalog.size))
    _matrix_cache[key] = rows
    return rows


@dataclass
class WeightField:
    """Sampled nonnegative weight q on a product grid.

    Nonnegativity is enforced here; the solver additionally rejects weights
    that vanish identically (diagnostics are allowed to probe that case).
    """

    grid: ProductGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if self.values.shape != (self.grid.n_points,):
            raise ValueError("weight values do not match grid point count")
        if np.any(self.values < 0):
            raise ValueError("weight must be nonnegative")

    @staticmethod
    def constant(grid: ProductGrid, value: float = 1.0) -> "WeightField":
        return WeightField(grid, np.full(grid.n_points, float(value)))

    @staticmethod
    def from_function(grid: ProductGrid, fn) -> "WeightField":
        coords = grid.meshgrid()
        return WeightField(grid, fn(*coords))

    def is_trivial(self) -> bool:
        return bool(np.all(self.values == 0.0))


def _smooth_indicator(x: np.ndarray, a: float, b: float, width: float) -> np.ndarray:
    """Cosine-ramped indicator of [a, b] on the circle; ramps eat into the set."""
    span = b - a
    if span >= TWO_PI * (1.0 - 1e-12):
        return np.ones_like(np.asarray(x, dtype=float))
    x = np.mod(x - a, TWO_PI)
    if width <= 0:
        return (x <= span).astype(float)
    rise = np.clip(x / width, 0.0, 1.0)
    fall = np.clip((span - x) / width, 0.0, 1.0)
    t = np.where(x <= span, np.minimum(rise, fall), 0.0)
    return 0.5 - 0.5 * np.cos(math.pi * t)


def weight_rectangle(
    grid: ProductGrid,
    x_span,
    t_span,
    inside: float = 1.0,
    outside: float = 0.0,
    smoothing: float = 0.1,
) -> WeightField:
    """Weight that is `inside` on a rectangle in (x_1, t) and `outside` elsewhere.

    For torus dims > 1 the x-interval applies to the first coordinate only.
    """
    coords = grid.meshgrid()
    bump = _smooth_indicator(coords[0], x_span[0], x_span[1], smoothing)
    bump = bump * _smooth_indicator(coords[-1], t_span[0], t_span[1], smoothing)
    return WeightField(grid, outside + (inside - outside) * bump)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

_PART_CODE = {"plus": 1, "zero": 0, "minus": -1}


def project(u: SpectralField, part: str) -> SpectralField:
    """Spectral projection P^+, P^0 or P^-: zero out the other classes."""
    code = _PART_CODE[part]
    out = np.where(u.catalog.classes == code, u.coeffs, 0.0)
    return SpectralField(u.catalog, out)


def energy_norms(u: SpectralField):
    """(norm_plus, norm_minus, norm_L2): the lambda-weighted signed norms and l2."""
    lam = u.catalog.eig
    sq = u.coeffs * u.coeffs
    plus = math.sqrt(float(np.sum(np.where(lam > 0, lam, 0.0) * sq)))
    minus = math.sqrt(float(np.sum(np.where(lam < 0, -lam, 0.0) * sq)))
    return plus, minus, math.sqrt(float(np.sum(sq)))


def synthesize(u: SpectralField, grid: ProductGrid) -> np.ndarray:
    """Pointwise values of the basis expansion on the grid (flattened, C-order)."""
    return u.coeffs @ basis_matrix(u.catalog, grid)


def analyze(values: np.ndarray, catalog: SpectralCatalog, grid: ProductGrid) -> SpectralField:
    """L2 inner products against the basis via the rectangle rule."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.shape != (grid.n_points,):
        raise ValueError("value array does not match grid")
    coeffs = basis_matrix(catalog, grid) @ values * grid.quad_weight
    return SpectralField(catalog, coeffs)


def wave_apply(u: SpectralField) -> SpectralField:
    """Diagonal action of the wave operator: multiply by the eigenvalues."""
    return SpectralField(u.catalog, u.catalog.eig * u.coeffs)


def norm_zero(u: SpectralField, q: WeightField, p: float) -> float:
    """Weighted kernel norm ( integral of q |P^0 u|^p )^(1/p)."""
    if p <= 2:
        raise ValueError("norm_zero needs p > 2")
    u0 = project(u, "zero")
    vals = synthesize(u0, q.grid)
    acc = float(np.sum(q.values * np.abs(vals) ** p)) * q.grid.quad_weight
    return acc ** (1.0 / p)


def full_norm_squared(u: SpectralField, q: WeightField, p: float) -> float:
    """The assembled space norm: ||u+||_+^2 + ||u-||_-^2 + ||u0||_0^2."""
    plus, minus, _ = energy_norms(u)
    return plus**2 + minus**2 + norm_zero(u, q, p) ** 2


def field_to_csv(u: SpectralField, grid: ProductGrid, path) -> None:
    """Grid samples as CSV rows x_1, ..., x_dims, t, value."""
    coords = grid.meshgrid()
    vals = synthesize(u, grid)
    header = ",".join([f"x{i+1}" for i in range(grid.dims)] + ["t", "value"])
    data = np.column_stack(coords + [vals])
    np.savetxt(path, data, delimiter=",", header=header, comments="")
