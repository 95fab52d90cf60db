"""Exact eigenvalue catalogs for generalized wave operators on product cylinders.

The operator P(-Laplace) + d_tt acting on M x S^1 (M a circle, flat torus or
round sphere) is diagonal in the real separated basis zeta_k (x) e_l(t), with
e_l = cos(l t) for l > 0, e_{-l} = sin(l t), e_0 = const.  A catalog is a
truncated enumeration of these modes together with their eigenvalues
P(nu_spatial) - l^2, kept as exact rationals so that the plus/kernel/minus
classification is never at the mercy of floating-point roundoff.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

TORUS = "torus"
SPHERE = "sphere"


@dataclass(frozen=True)
class DomainSpec:
    """Spatial manifold: a flat torus T^N (N=1 is the circle) or a sphere S^N."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (TORUS, SPHERE):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("spatial dimension must be >= 1")

    @staticmethod
    def circle() -> "DomainSpec":
        return DomainSpec(TORUS, 1)

    @staticmethod
    def torus(dim: int) -> "DomainSpec":
        return DomainSpec(TORUS, dim)

    @staticmethod
    def sphere(dim: int) -> "DomainSpec":
        return DomainSpec(SPHERE, dim)

    @property
    def is_circle(self) -> bool:
        return self.kind == TORUS and self.dim == 1

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim}


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    raise TypeError(f"cannot interpret {x!r} as a rational")


@dataclass(frozen=True)
class OperatorSpec:
    """Polynomial symbol P of the spatial operator P(-Laplace).

    Coefficients are rationals c_0 ... c_m with P(tau) = sum c_j tau^j; the
    leading coefficient must be positive so that P(tau) -> infinity.
    """

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(_as_fraction(c) for c in self.coefficients)
        if not coeffs or all(c == 0 for c in coeffs):
            raise ValueError("operator polynomial must be nonzero")
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if coeffs[-1] <= 0:
            raise ValueError("leading coefficient of P must be positive")
        if len(coeffs) == 1:
            raise ValueError("P must be nonconstant (P(tau) -> infinity required)")
        object.__setattr__(self, "coefficients", coeffs)

    @staticmethod
    def laplacian_power(m: int) -> "OperatorSpec":
        """P(tau) = tau^m, i.e. the operator (-Laplace)^m."""
        if m < 1:
            raise ValueError("power must be >= 1")
        return OperatorSpec((0,) * m + (1,))

    @staticmethod
    def klein_gordon(dim: int) -> "OperatorSpec":
        """P(tau) = tau + ((N-1)/2)^2, the Klein-Gordon mass shift on S^N."""
        return OperatorSpec((Fraction(dim - 1, 2) ** 2, 1))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def power_degree(self):
        """m if P(tau) = tau^m exactly, else None."""
        if self.coefficients[-1] == 1 and all(c == 0 for c in self.coefficients[:-1]):
            return self.degree
        return None

    def evaluate(self, tau) -> Fraction:
        tau = _as_fraction(tau)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * tau + c
        return acc

    def to_json(self):
        return {"coefficients": [[c.numerator, c.denominator] for c in self.coefficients]}


@dataclass(frozen=True)
class ModeKey:
    """One real eigenfunction zeta_k (x) e_l(t).

    For torus domains ``space`` is the signed wavevector: the sign of each
    component selects the cos (>= 0) or sin (< 0) branch of that circle
    factor, matching the signed temporal convention for l.  For spheres it is
    (degree, i) with 1 <= i <= multiplicity; no parity tags there.
    """

    space: tuple
    l: int


def laplace_eigenvalue(domain: DomainSpec, spatial) -> int:
    """Laplace-Beltrami eigenvalue of the spatial mode: |k|^2 or k(k+N-1)."""
    if domain.kind == TORUS:
        space = _torus_space(domain, spatial)
        return sum(int(c) * int(c) for c in space)
    degree = _sphere_degree(domain, spatial)
    return degree * (degree + domain.dim - 1)


def _torus_space(domain, spatial):
    if isinstance(spatial, (int, np.integer)):
        spatial = (int(spatial),)
    spatial = tuple(int(c) for c in spatial)
    if len(spatial) != domain.dim:
        raise ValueError(f"torus mode must have {domain.dim} components, got {spatial}")
    return spatial


def _sphere_degree(domain, spatial):
    if isinstance(spatial, (int, np.integer)):
        degree, index = int(spatial), 1
    else:
        degree, index = (int(spatial[0]), int(spatial[1]))
    if degree < 0:
        raise ValueError("sphere degree must be >= 0")
    if not 1 <= index <= sphere_multiplicity(domain.dim, degree):
        raise ValueError(f"sphere degeneracy index {index} out of range for degree {degree}")
    return degree


def eigenvalue(operator: OperatorSpec, domain: DomainSpec, spatial, l: int) -> Fraction:
    """Exact eigenvalue P(nu_spatial) - l^2 of the space-time mode."""
    nu = laplace_eigenvalue(domain, spatial)
    return operator.evaluate(nu) - Fraction(int(l) * int(l))


def sphere_multiplicity(N: int, k: int) -> int:
    """Dimension of the degree-k spherical harmonics on S^N."""
    if N < 1 or k < 0:
        raise ValueError("need N >= 1 and k >= 0")
    upper = comb(N + k, k)
    lower = comb(N + k - 2, k - 2) if k >= 2 else 0
    return upper - lower


CLASS_PLUS = 1
CLASS_ZERO = 0
CLASS_MINUS = -1

_CLASS_NAMES = {CLASS_PLUS: "plus", CLASS_ZERO: "zero", CLASS_MINUS: "minus"}
_CLASS_CODES = {v: k for k, v in _CLASS_NAMES.items()}


class SpectralCatalog:
    """Immutable truncated mode list with exact eigenvalues and sign classes."""

    def __init__(self, domain, operator, k_max, l_max, modes, eigenvalues):
        self.domain = domain
        self.operator = operator
        self.k_max = int(k_max)
        self.l_max = int(l_max)
        self.modes = tuple(modes)
        self.eigenvalues = tuple(eigenvalues)
        self.eig = np.array([float(lam) for lam in self.eigenvalues])
        classes = np.zeros(len(self.modes), dtype=np.int8)
        for i, lam in enumerate(self.eigenvalues):
            classes[i] = CLASS_PLUS if lam > 0 else (CLASS_MINUS if lam < 0 else CLASS_ZERO)
        self.classes = classes
        self.plus_idx = np.flatnonzero(classes == CLASS_PLUS)
        self.zero_idx = np.flatnonzero(classes == CLASS_ZERO)
        self.minus_idx = np.flatnonzero(classes == CLASS_MINUS)
        self._position = {mode: i for i, mode in enumerate(self.modes)}
        self.digest = hashlib.sha1(
            json.dumps(self.to_json(), sort_keys=True).encode()
        ).hexdigest()

    def __len__(self):
        return len(self.modes)

    @property
    def size(self):
        return len(self.modes)

    def index_of(self, mode: ModeKey) -> int:
        return self._position[mode]

    def class_of(self, i: int) -> str:
        return _CLASS_NAMES[int(self.classes[i])]

    def kernel_dim(self) -> int:
        return len(self.zero_idx)

    def to_json(self):
        return {
            "domain": self.domain.to_json(),
            "operator": self.operator.to_json(),
            "k_max": self.k_max,
            "l_max": self.l_max,
            "modes": [{"space": list(m.space), "l": m.l} for m in self.modes],
            "eigenvalues": [[lam.numerator, lam.denominator] for lam in self.eigenvalues],
            "classes": [_CLASS_NAMES[int(c)] for c in self.classes],
        }


def _torus_mode_iter(dim, k_max, l_max):
    rng = range(-k_max, k_max + 1)
    for l in range(-l_max, l_max + 1):
        for space in itertools.product(rng, repeat=dim):
            yield ModeKey(space, l)


def _sphere_mode_iter(dim, k_max, l_max):
    for l in range(-l_max, l_max + 1):
        for k in range(0, k_max + 1):
            for i in range(1, sphere_multiplicity(dim, k) + 1):
                yield ModeKey((k, i), l)


def _mode_sort_key(mode: ModeKey):
    # lexicographic by (|l|, parity of l, spatial magnitudes, spatial parities)
    return (
        abs(mode.l),
        0 if mode.l >= 0 else 1,
        tuple(abs(c) for c in mode.space),
        tuple(0 if c >= 0 else 1 for c in mode.space),
    )


def build_catalog(domain: DomainSpec, operator: OperatorSpec, k_max: int, l_max: int) -> SpectralCatalog:
    """Enumerate all real modes within the cutoffs, classified exactly.

    Torus cutoffs are per-component (|k_j| <= k_max); sphere cutoffs bound the
    harmonic degree.  Eigenvalue signs are decided in rational arithmetic, so
    resonances land in the kernel class exactly.
    """
    if k_max < 0 or l_max < 0:
        raise ValueError("cutoffs must be >= 0")
    if domain.kind == TORUS:
        modes = sorted(_torus_mode_iter(domain.dim, k_max, l_max), key=_mode_sort_key)
    else:
        modes = sorted(_sphere_mode_iter(domain.dim, k_max, l_max), key=_mode_sort_key)
    lams = []
    spatial_cache: dict = {}
    for mode in modes:
        if domain.kind == TORUS:
            nu_key = tuple(sorted(abs(c) for c in mode.space))
        else:
            nu_key = mode.space[0]
        nu = spatial_cache.get(nu_key)
        if nu is None:
            spatial = mode.space if domain.kind == TORUS else mode.space[0]
            nu = operator.evaluate(laplace_eigenvalue(domain, spatial))
            spatial_cache[nu_key] = nu
        lams.append(nu - mode.l * mode.l)
    return SpectralCatalog(domain, operator, k_max, l_max, modes, lams)
