"""Data model for spherically decomposed Levy measures.

A jump measure nu on R^d \ {0} is stored as a spherical part lambda on
the unit sphere together with one radial measure gamma_xi on (0, inf)
per direction xi:

    nu(A) = int_S int_0^inf 1_A(r xi) gamma_xi(dr) lambda(dxi).

The spherical part is either a finite list of weighted directions or a
density over the polar parameter box [0, pi]^(d-2) x [0, 2pi]; in the
density case lambda is the pushforward of (density . Lebesgue) under the
polar map, and the angular Jacobian lives inside the radial measures.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import report as rpt
from .quadrature import (
    CONVERGED,
    DEFAULT_CONFIG,
    DIVERGENT,
    QuadratureConfig,
    improper_integral,
    lower_tail_probe,
    upper_tail_probe,
)

_UNIT_NORM_TOL = 1e-12


def as_unit_direction(xi) -> np.ndarray:
    """Validate and return xi as a read-only unit vector."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1:
        raise ValueError("a direction must be a 1-d vector")
    norm = float(np.linalg.norm(xi))
    if abs(norm - 1.0) > _UNIT_NORM_TOL:
        raise ValueError(f"direction norm {norm} deviates from 1 beyond {_UNIT_NORM_TOL}")
    out = xi.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class RadialMeasure:
    """A sigma-finite measure on (0, inf): density part plus atoms.

    density maps an array of radii to density values; atoms is a tuple
    of (location, weight) pairs.  hints, when present, give the power
    orders (p0, pinf) of the density near 0 and infinity (density ~
    r^-p); they steer quadrature but never change the measure.
    """

    density: Callable | None = None
    atoms: tuple[tuple[float, float], ...] = ()
    hints: tuple[float, float] | None = None
    label: str = ""

    def __post_init__(self):
        for r, w in self.atoms:
            if not (r > 0 and np.isfinite(r)):
                raise ValueError("atom locations must be positive and finite")
            if not (np.isfinite(w) and w >= 0):
                raise ValueError("atom weights must be finite and nonnegative")

    @property
    def is_zero(self) -> bool:
        return self.density is None and not self.atoms

    def scaled(self, factor: float) -> "RadialMeasure":
        """The measure multiplied by a nonnegative constant."""
        if factor < 0:
            raise ValueError("scaling factor must be nonnegative")
        dens = None
        if self.density is not None:
            base = self.density
            dens = lambda r, _b=base, _f=factor: _f * _b(r)
        atoms = tuple((r, factor * w) for r, w in self.atoms)
        return replace(self, density=dens, atoms=atoms)


def power_radial(alpha: float, scale: float = 1.0) -> RadialMeasure:
    """The stable radial law scale * r^-(1+alpha) dr."""
    if not np.isfinite(alpha):
        raise ValueError("alpha must be finite")
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    p = 1.0 + alpha

    def dens(r, _p=p, _s=scale):
        r = np.asarray(r, dtype=float)
        return _s * r ** (-_p)

    return RadialMeasure(density=dens, hints=(p, p), label=f"power[{alpha}]")


def tabulated_radial(r_grid, values, hints=None) -> RadialMeasure:
    """Radial density from (r, value) pairs with linear interpolation.

    Outside the table the density is zero; hints may still be supplied
    when the table approximates a known power law.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if r_grid.ndim != 1 or r_grid.shape != values.shape:
        raise ValueError("r_grid and values must be matching 1-d arrays")
    if not np.all(np.diff(r_grid) > 0):
        raise ValueError("r_grid must be strictly increasing")
    if np.any(values < 0):
        raise ValueError("a density table cannot be negative")

    def dens(r, _g=r_grid, _v=values):
        return np.interp(np.asarray(r, dtype=float), _g, _v, left=0.0, right=0.0)

    return RadialMeasure(density=dens, hints=hints, label="tabulated")


def radial_integral(
    measure: RadialMeasure,
    weight: Callable | None = None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    lo: float = 0.0,
    hi: float = np.inf,
    weight_exponents: tuple[float, float] | None = None,
    closure: bool = True,
):
    """int weight(r) measure(dr) over (lo, hi) as an IntegralResult.

    weight_exponents (w0, winf) describe weight ~ r^w behaviour at the
    endpoints; combined with the measure's hints they seed the tail
    handling of the quadrature.
    """
    total = 0.0
    for r, w in measure.atoms:
        if lo < r <= hi or (np.isinf(hi) and r > lo):
            total += w * (1.0 if weight is None else float(weight(np.asarray([r]))[0]))

    if measure.density is None:
        return _atoms_only_result(total, lo, hi)

    dens = measure.density
    if weight is None:
        f = dens
    else:
        f = lambda r: weight(r) * dens(r)

    tails = None
    if measure.hints is not None:
        w0, winf = weight_exponents if weight_exponents is not None else (0.0, 0.0)
        tails = (measure.hints[0] - w0, measure.hints[1] - winf)

    res = improper_integral(f, cfg, lo=lo, hi=hi, closure=closure, tail_exponents=tails)
    return replace(res, value=res.value + total)


def _atoms_only_result(total, lo, hi):
    from .quadrature import IntegralResult

    return IntegralResult(total, CONVERGED, lo if lo > 0 else 0.0, hi, 0)


def radial_moment_probe(measure: RadialMeasure, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Probe int (r^2 wedge r) measure(dr): the martingale moment.

    Returns (result_low, result_high) probing r^2 on (0, 1] and r on
    [1, inf) separately, so callers can report which end fails.
    """
    atoms_low = sum(w * r * r for r, w in measure.atoms if r <= 1.0)
    atoms_high = sum(w * r for r, w in measure.atoms if r > 1.0)
    if measure.density is None:
        lowres = _atoms_only_result(atoms_low, 0.0, 1.0)
        highres = _atoms_only_result(atoms_high, 1.0, np.inf)
        return lowres, highres
    dens = measure.density
    low = lower_tail_probe(lambda r: r * r * dens(r), cfg, upper=1.0)
    high = upper_tail_probe(lambda r: r * dens(r), cfg, lower=1.0)
    low = replace(low, value=low.value + atoms_low)
    high = replace(high, value=high.value + atoms_high)
    return low, high


@dataclass(frozen=True)
class SphericalMeasure:
    """Finite measure on the unit sphere: atoms or an angular density.

    Atom form stores unit directions with positive weights.  Angular
    form stores a density over the polar box; its pushforward under the
    polar map is the spherical measure.  Construct through from_atoms /
    from_angular.
    """

    dimension: int
    directions: np.ndarray | None = None
    weights: np.ndarray | None = None
    angular_density: Callable | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if (self.directions is None) != (self.weights is None):
            raise ValueError("atom directions and weights come together")
        if self.directions is None and self.angular_density is None:
            raise ValueError("a spherical measure cannot be empty")

    @classmethod
    def from_atoms(cls, directions, weights) -> "SphericalMeasure":
        directions = np.asarray(directions, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if directions.ndim != 2 or directions.shape[0] == 0:
            raise ValueError("need a nonempty (n, d) array of directions")
        if weights.shape != (directions.shape[0],):
            raise ValueError("weights must match directions")
        directions = directions.copy()
        weights = weights.copy()
        directions.flags.writeable = False
        weights.flags.writeable = False
        return cls(int(directions.shape[1]), directions, weights, None)

    @classmethod
    def from_angular(cls, dimension: int, density: Callable) -> "SphericalMeasure":
        if dimension < 2:
            raise ValueError("angular densities need dimension >= 2")
        return cls(int(dimension), None, None, density)

    @property
    def is_atomic(self) -> bool:
        return self.directions is not None

    @property
    def n_atoms(self) -> int:
        return 0 if self.directions is None else int(self.directions.shape[0])

    def angular_box(self) -> tuple[tuple[float, float], ...]:
        """The polar parameter box [0, pi]^(d-2) x [0, 2pi]."""
        return ((0.0, np.pi),) * (self.dimension - 2) + ((0.0, 2.0 * np.pi),)

    def total_mass(self, n_nodes: int = 64) -> float:
        """lambda(S^{d-1}); for the angular form, the box integral of the density."""
        if self.is_atomic:
            return float(np.sum(self.weights))
        box = self.angular_box()
        grids = []
        wgts = []
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        for lo, hi in box:
            grids.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * x)
            wgts.append(0.5 * (hi - lo) * w)
        mesh = np.meshgrid(*grids, indexing="ij")
        angles = np.stack([m.ravel() for m in mesh], axis=-1)
        wmesh = np.meshgrid(*wgts, indexing="ij")
        wall = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
        vals = np.asarray(self.angular_density(angles), dtype=float)
        return float(np.sum(vals * wall))


@dataclass(frozen=True)
class LevySpec:
    """Levy triplet data for the driving noise: Wiener covariance plus
    the spherically decomposed jump measure.

    radial_family maps a unit direction to the RadialMeasure carried by
    that direction.  For atom-form spherical parts it is consulted only
    on the atoms; for angular form, on quadrature directions.
    """

    dimension: int
    wiener_cov: np.ndarray
    spherical: SphericalMeasure
    radial_family: Callable[[np.ndarray], RadialMeasure]

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        q = np.asarray(self.wiener_cov, dtype=float)
        if q.shape != (self.dimension, self.dimension):
            raise ValueError("wiener_cov must be (d, d)")
        if self.spherical.dimension != self.dimension:
            raise ValueError("spherical measure dimension mismatch")

    def radial(self, xi) -> RadialMeasure:
        xi = np.asarray(xi, dtype=float)
        return self.radial_family(xi)

    def jump_only(self) -> "LevySpec":
        return replace(self, wiener_cov=np.zeros((self.dimension, self.dimension)))


@dataclass(frozen=True)
class DensityLevySpec:
    """Jump measure given by a plain density g on R^d, d >= 2.

    density maps an (n, d) array of points to values; it must be
    nonnegative wherever evaluated (checked on every call).  hints are
    the power orders of g(x) ~ |x|^-p near 0 and infinity.
    """

    dimension: int
    density: Callable
    hints: tuple[float, float] | None = None

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("density form needs dimension >= 2")

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        vals = np.asarray(self.density(points), dtype=float)
        if np.any(vals < 0):
            bad = points[np.argmin(vals)]
            raise ValueError(f"jump density negative at {bad}")
        return vals


def density_spec(density, dimension, hints=None) -> DensityLevySpec:
    """Wrap a plain Cartesian jump density with its dimension and hints."""
    return DensityLevySpec(int(dimension), density, hints)


@dataclass(frozen=True)
class VolatilityFunction:
    """State-to-volatility map G: [0, inf) -> R^d.

    Calling with an array of states returns an (n, d) array.  The power
    form G(x) = x^exponent * direction keeps its parameters for exact
    downstream treatment.
    """

    func: Callable
    dimension: int
    kind: str = "custom"
    exponent: float | None = None
    direction: np.ndarray | None = None
    continuous: bool = True

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        out = np.asarray(self.func(np.atleast_1d(x)), dtype=float)
        if out.ndim != 2 or out.shape[1] != self.dimension:
            raise ValueError("volatility evaluator must return (n, d)")
        return out[0] if scalar else out

    @classmethod
    def power(cls, exponent: float, direction) -> "VolatilityFunction":
        direction = np.asarray(direction, dtype=float)
        if exponent <= 0:
            raise ValueError("power exponent must be positive")

        def g(x, _p=exponent, _v=direction):
            return np.asarray(x, dtype=float)[:, None] ** _p * _v[None, :]

        d = direction.copy()
        d.flags.writeable = False
        return cls(g, int(direction.shape[0]), "power", float(exponent), d)

    @classmethod
    def tabulated(cls, x_grid, values) -> "VolatilityFunction":
        x_grid = np.asarray(x_grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape[0] != x_grid.shape[0]:
            raise ValueError("table rows must match x grid")

        def g(x, _g=x_grid, _v=values):
            x = np.asarray(x, dtype=float)
            return np.stack(
                [np.interp(x, _g, _v[:, k]) for k in range(_v.shape[1])], axis=-1
            )

        return cls(g, int(values.shape[1]), "tabulated")


def stable_spec(alpha: float, spherical: SphericalMeasure) -> LevySpec:
    """Pure-jump alpha-stable spec: the same radial law r^-(1+alpha) at
    every direction, no Wiener part.  Requires alpha in (1, 2)."""
    if not (1.0 < alpha < 2.0):
        raise ValueError("stable index must lie in (1, 2)")
    base = power_radial(alpha)
    d = spherical.dimension
    return LevySpec(d, np.zeros((d, d)), spherical, lambda xi, _b=base: _b)


def _sample_directions(spec: LevySpec, n_angular: int = 16):
    """Representative (directions, weights) rows for structural sweeps."""
    if spec.spherical.is_atomic:
        return spec.spherical.directions, np.asarray(spec.spherical.weights, float)
    from .spherical import angular_grid  # lazy: spherical imports this module

    dirs, wgts, _ = angular_grid(spec.spherical, n_angular)
    return dirs, wgts


def validate_spec(spec: LevySpec, cfg: QuadratureConfig = DEFAULT_CONFIG) -> rpt.CheckReport:
    """Structural and integrability sweep over a LevySpec.

    Checks atom positivity and unit norms, symmetry and positive
    semidefiniteness of the Wiener covariance, and the martingale moment
    int (r^2 wedge r) gamma_xi(dr) < inf on sampled directions.  A pure
    function of its inputs: repeated calls return identical reports.
    """
    if spec.dimension < 1:
        raise ValueError("dimension must be at least 1")
    items = []

    sph = spec.spherical
    if sph.is_atomic:
        wpos = bool(np.all(sph.weights > 0))
        items.append(
            rpt.item(
                "atom_weights_positive",
                wpos,
                value=float(np.min(sph.weights)),
                detail="all spherical atom weights must be strictly positive",
            )
        )
        norms = np.linalg.norm(sph.directions, axis=1)
        norm_dev = float(np.max(np.abs(norms - 1.0)))
        items.append(
            rpt.item(
                "unit_directions",
                norm_dev <= _UNIT_NORM_TOL,
                value=norm_dev,
                tolerance=_UNIT_NORM_TOL,
            )
        )
    else:
        mass = sph.total_mass()
        items.append(
            rpt.item(
                "angular_mass_positive",
                mass > 0,
                value=mass,
                detail="angular density must carry positive mass",
            )
        )

    q = np.asarray(spec.wiener_cov, dtype=float)
    scale = max(float(np.max(np.abs(q))), 1.0)
    sym_dev = float(np.max(np.abs(q - q.T)))
    eig_min = float(np.min(np.linalg.eigvalsh(0.5 * (q + q.T))))
    items.append(rpt.item("wiener_cov_symmetric", sym_dev <= 1e-10 * scale, value=sym_dev))
    items.append(
        rpt.item(
            "wiener_cov_psd",
            eig_min >= -1e-10 * scale,
            value=eig_min,
            detail="smallest eigenvalue of the symmetrised covariance",
        )
    )

    dirs, _ = _sample_directions(spec)
    worst = None
    all_zero = True
    ok = True
    for xi in dirs:
        gamma = spec.radial(xi)
        if gamma.is_zero:
            continue
        all_zero = False
        low, high = radial_moment_probe(gamma, cfg)
        if low.status == DIVERGENT or high.status == DIVERGENT:
            ok = False
            worst = (list(map(float, xi)), low.status, high.status)
            break
        if not (low.converged and high.converged):
            ok = False
            worst = (list(map(float, xi)), low.status, high.status)
            break
        total = float(low.value + high.value)
        worst = total if worst is None else max(worst, total)
    if all_zero:
        items.append(
            rpt.CheckItem(
                "martingale_moment",
                rpt.WARN,
                value=0.0,
                detail="degenerate: every sampled radial measure is zero",
            )
        )
    else:
        items.append(
            rpt.item(
                "martingale_moment",
                ok,
                value=worst,
                detail="int (r^2 wedge r) gamma_xi(dr) finite on sampled directions",
            )
        )

    return rpt.CheckReport(tuple(items))
