"""Kernel control diagnostics: q-weighted Gram spectra and 1+1 wave machinery.

The control inequality  integral |u|^2 <= C integral q |u|^2  over the
truncated kernel is checked through the Gram matrix of the q-weighted form in
the orthonormal kernel basis: its smallest eigenvalue mu_min gives the
truncated constant C = 1/mu_min.  For the classical wave on the square
cylinder the kernel splits into traveling profiles phi(x+t) + psi(x-t);
characteristic slice measures of a raster set feed the sufficient condition
for a positive continuum constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .catalog import TORUS, SpectralCatalog
from .fields import TWO_PI, ProductGrid, SpectralField, WeightField, basis_rows

_REL_FLOOR_DEFAULT = 1e-8


@dataclass
class GramReport:
    """Spectrum of the q-weighted Gram matrix on the truncated kernel."""

    dim: int
    gram: np.ndarray
    eig_min: float
    eig_max: float
    constant: float
    below_floor: list
    floor: float

    def to_json(self):
        return {
            "kernel_dim": self.dim,
            "eig_min": self.eig_min,
            "eig_max": self.eig_max,
            "constant": self.constant,
            "below_floor": list(self.below_floor),
            "floor": self.floor,
            "gram": self.gram.tolist(),
        }


def kernel_gram(
    q: WeightField,
    catalog: SpectralCatalog,
    grid: ProductGrid | None = None,
    rel_floor: float = _REL_FLOOR_DEFAULT,
) -> GramReport:
    """Assemble G_ab = integral q phi_a phi_b over the kernel basis and eigensolve.

    An empty kernel reports dim 0 with constant 0 by convention.  A
    near-singular Gram is a report state (directions below the floor listed),
    never an error.
    """
    grid = grid or q.grid
    if q.grid != grid:
        raise ValueError("weight grid mismatch")
    dim = catalog.kernel_dim()
    if dim == 0:
        return GramReport(0, np.zeros((0, 0)), 0.0, 0.0, 0.0, [], rel_floor)
    rows = basis_rows(catalog, grid, catalog.zero_idx)
    gram = (rows * (q.values * grid.quad_weight)) @ rows.T
    gram = 0.5 * (gram + gram.T)
    eigvals = np.linalg.eigvalsh(gram)
    eig_min = float(eigvals[0])
    eig_max = float(eigvals[-1])
    constant = 1.0 / eig_min if eig_min > 0 else math.inf
    floor_value = rel_floor * max(eig_max, 0.0)
    below = [int(i) for i in np.flatnonzero(eigvals <= floor_value)]
    return GramReport(dim, gram, eig_min, eig_max, constant, below, rel_floor)


def kernel_gram_basis(report: GramReport):
    """Eigenvectors of the Gram split into kept and dropped directions."""
    if report.dim == 0:
        return np.zeros((0, 0)), []
    eigvals, eigvecs = np.linalg.eigh(report.gram)
    floor_value = report.floor * max(float(eigvals[-1]), 0.0)
    keep = eigvals > floor_value
    return eigvecs[:, keep], [int(i) for i in np.flatnonzero(~keep)]


@dataclass
class CircleProfile:
    """Trig polynomial c0 + sum_k (cos_k cos(ks) + sin_k sin(ks)) on the circle."""

    const: float
    cos: np.ndarray
    sin: np.ndarray

    def __call__(self, s):
        s = np.asarray(s, dtype=np.float64)
        out = np.full(s.shape, self.const)
        for k in range(1, len(self.cos) + 1):
            out += self.cos[k - 1] * np.cos(k * s) + self.sin[k - 1] * np.sin(k * s)
        return out


def dalembert_split(u: SpectralField, atol: float = 1e-12):
    """Split a kernel field of the classical 1+1 wave into phi(x+t) + psi(x-t).

    The constant mode is shared evenly between the two profiles; the split is
    linear and exact on the truncated basis.
    """
    cat = u.catalog
    if not (cat.domain.kind == TORUS and cat.domain.dim == 1 and cat.operator.power_degree == 1):
        raise ValueError("d'Alembert split applies to the classical wave on the circle")
    off_kernel = u.coeffs[cat.classes != 0]
    if off_kernel.size and float(np.max(np.abs(off_kernel))) > atol:
        raise ValueError("input must be purely kernel-class")
    kmax = cat.k_max
    phi = CircleProfile(0.0, np.zeros(kmax), np.zeros(kmax))
    psi = CircleProfile(0.0, np.zeros(kmax), np.zeros(kmax))
    for i in cat.zero_idx:
        a = u.coeffs[i]
        if a == 0.0:
            continue
        mode = cat.modes[i]
        kx = mode.space[0]
        lt = mode.l
        k = abs(kx)
        if k == 0:
            # constant eigenfunction 1/(2pi); gauge: even split
            phi.const += a / (4.0 * math.pi)
            psi.const += a / (4.0 * math.pi)
            continue
        c = a / (2.0 * math.pi)  # 1/pi normalization, then product-to-sum 1/2
        if kx > 0 and lt > 0:  # cos cos
            phi.cos[k - 1] += c
            psi.cos[k - 1] += c
        elif kx > 0 and lt < 0:  # cos sin
            phi.sin[k - 1] += c
            psi.sin[k - 1] -= c
        elif kx < 0 and lt > 0:  # sin cos
            phi.sin[k - 1] += c
            psi.sin[k - 1] += c
        else:  # sin sin
            phi.cos[k - 1] -= c
            psi.cos[k - 1] += c
    return phi, psi


@dataclass
class RasterSet:
    """Boolean occupancy of a subset of [0, 2pi)^2 on an R x R cell raster."""

    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.ascontiguousarray(np.asarray(self.mask, dtype=np.uint8))
        if self.mask.ndim != 2 or self.mask.shape[0] != self.mask.shape[1]:
            raise ValueError("raster mask must be square")

    @property
    def resolution(self) -> int:
        return self.mask.shape[0]

    @property
    def cell_width(self) -> float:
        return TWO_PI / self.resolution

    def doubled(self) -> np.ndarray:
        """The time-doubled set: the mask stacked with its 2pi translate in t."""
        return np.concatenate([self.mask, self.mask], axis=1)

    @staticmethod
    def empty(resolution: int = 256) -> "RasterSet":
        return RasterSet(np.zeros((resolution, resolution), dtype=np.uint8))

    @staticmethod
    def full(resolution: int = 256) -> "RasterSet":
        return RasterSet(np.ones((resolution, resolution), dtype=np.uint8))

    @staticmethod
    def rectangle(x_span, t_span, resolution: int = 256) -> "RasterSet":
        r = resolution
        centers = TWO_PI * (np.arange(r) + 0.5) / r
        inx = _interval_mask(centers, *x_span)
        int_ = _interval_mask(centers, *t_span)
        return RasterSet(np.outer(inx, int_).astype(np.uint8))

    @staticmethod
    def from_weight(q: WeightField, threshold: float = 0.0) -> "RasterSet":
        grid = q.grid
        if grid.dims != 1:
            raise ValueError("raster sets live on the square cylinder")
        vals = q.values.reshape(grid.nx, grid.nt)
        return RasterSet((vals > threshold).astype(np.uint8))


def _interval_mask(points, a, b):
    # interval on the circle, b may wrap past 2pi
    rel = np.mod(points - a, TWO_PI)
    return rel <= (b - a)


def slice_profiles(omega: RasterSet):
    """Measures of characteristic slices A_xi, B_eta for offsets on the raster grid.

    Slices are traced through the doubled set; since the full x-period line at
    offset xi + 2pi stays inside the doubled strip, the lookup reduces to an
    index shift mod R.
    """
    counts_a, counts_b = _accel.char_slice_counts(omega.mask)
    h = omega.cell_width
    offsets = h * np.arange(omega.resolution)
    return offsets, counts_a * h, counts_b * h


def xi_eta_infimum(omega: RasterSet):
    """(inf_xi |A_xi|, inf_eta |B_eta|) over the rasterized offsets."""
    if omega.resolution < 64:
        raise ValueError("raster resolution must be >= 64")
    _, meas_a, meas_b = slice_profiles(omega)
    return float(meas_a.min()), float(meas_b.min())


def rectangle_margin(a1: float, b1: float, a2: float, b2: float) -> float:
    """b1 + b2 - a1 - a2 - 2pi; positive iff the rectangle criterion holds."""
    if b1 < a1 or b2 < a2:
        raise ValueError("malformed rectangle: need a_i <= b_i")
    if b1 - a1 > TWO_PI or b2 - a2 > TWO_PI:
        raise ValueError("malformed rectangle: side exceeds a full period")
    return (b1 + b2 - a1 - a2) - TWO_PI
