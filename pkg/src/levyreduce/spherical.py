"""Polar geometry: the sphere parametrisation, induced radial measures,
and integration of functions against a decomposed jump measure.

The polar map on P = [0, pi]^(d-2) x [0, 2pi] is

    xi_1 = cos a_1
    xi_2 = sin a_1 cos a_2
    ...
    xi_d = sin a_1 ... sin a_{d-2} sin a_{d-1}

with volume Jacobian sin^{d-2}(a_1) sin^{d-3}(a_2) ... sin(a_{d-2}).
When a jump measure is given by a Cartesian density g, the convention
here pushes plain Lebesgue measure on P forward to the spherical part
and absorbs the Jacobian into the radial measures:

    gamma_xi(dr) = g(r xi) r^{d-1} prod_k sqrt(1 - (xi_1^2+...+xi_k^2)) dr,

the product running over k = 1..d-2 (empty in the plane).
"""

from __future__ import annotations

import numpy as np

from .exceptions import DivergentIntegral
from .measures import (
    DensityLevySpec,
    LevySpec,
    RadialMeasure,
    SphericalMeasure,
    as_unit_direction,
    radial_integral,
)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

_GL_X32, _GL_W32 = np.polynomial.legendre.leggauss(32)


def polar_map(angles):
    """Map polar parameters to (directions, jacobians).

    angles is (d-1,) or (m, d-1); returns ((m, d) or (d,), (m,) or float).
    The Jacobian is the product of sine powers; it is 1 in the plane.
    """
    angles = np.asarray(angles, dtype=float)
    single = angles.ndim == 1
    a = np.atleast_2d(angles)
    m, dm1 = a.shape
    d = dm1 + 1
    xi = np.empty((m, d))
    cumsin = np.ones(m)
    for j in range(dm1):
        xi[:, j] = cumsin * np.cos(a[:, j])
        cumsin = cumsin * np.sin(a[:, j])
    xi[:, d - 1] = cumsin
    jac = np.ones(m)
    for k in range(d - 2):
        jac = jac * np.sin(a[:, k]) ** (d - 2 - k)
    if single:
        return xi[0], float(jac[0])
    return xi, jac


def _sqrt_factor(xi: np.ndarray) -> float:
    """prod_{k=1}^{d-2} sqrt(1 - (xi_1^2 + ... + xi_k^2)); equals the
    angular Jacobian expressed through the direction itself."""
    d = xi.shape[0]
    out = 1.0
    s = 0.0
    for k in range(d - 2):
        s += xi[k] * xi[k]
        out *= np.sqrt(max(1.0 - s, 0.0))
    return out


def radial_from_density(dspec: DensityLevySpec, xi) -> RadialMeasure:
    """The radial measure induced on the ray through xi by a density g."""
    xi = as_unit_direction(xi)
    d = dspec.dimension
    if xi.shape != (d,):
        raise ValueError("direction dimension mismatch")
    factor = _sqrt_factor(xi)
    power = d - 1

    def dens(r, _xi=xi, _f=factor, _p=power, _g=dspec):
        r = np.asarray(r, dtype=float)
        pts = r[:, None] * _xi[None, :]
        return _g(pts) * r**_p * _f

    hints = None
    if dspec.hints is not None:
        hints = (dspec.hints[0] - power, dspec.hints[1] - power)
    return RadialMeasure(density=dens, hints=hints, label="induced")


def induced_spec(dspec: DensityLevySpec) -> LevySpec:
    """The decomposed form of a density spec: unit angular density on the
    polar box, Jacobian absorbed into the per-direction radial measures."""
    d = dspec.dimension
    sph = SphericalMeasure.from_angular(d, lambda a: np.ones(np.atleast_2d(a).shape[0]))
    return LevySpec(
        d,
        np.zeros((d, d)),
        sph,
        lambda xi, _s=dspec: radial_from_density(_s, xi),
    )


def angular_grid(measure: SphericalMeasure, n_per_dim: int = 32):
    """Gauss-Legendre tensor grid on the polar box of an angular measure.

    Returns (directions, weights, angles) where weights already include
    the angular density, so sums approximate integrals d(lambda).
    """
    if measure.is_atomic:
        raise ValueError("angular_grid applies to angular-density measures")
    x, w = np.polynomial.legendre.leggauss(n_per_dim)
    grids, wgts = [], []
    for lo, hi in measure.angular_box():
        grids.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * x)
        wgts.append(0.5 * (hi - lo) * w)
    mesh = np.meshgrid(*grids, indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=-1)
    wmesh = np.meshgrid(*wgts, indexing="ij")
    wall = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    dens = np.asarray(measure.angular_density(angles), dtype=float)
    dirs, _ = polar_map(angles)
    return dirs, wall * dens, angles


def uniform_angle_grid(dimension: int, n_per_dim: int):
    """Uniform grids over the polar box for sup/inf scans.

    Inclination axes [0, pi] include both endpoints; the periodic axis
    [0, 2pi) omits the duplicate endpoint, so even n hits 0 and pi
    exactly, which matters when scanning extremes of cosine profiles.
    """
    box = ((0.0, np.pi),) * (dimension - 2) + ((0.0, 2.0 * np.pi),)
    axes = [
        np.linspace(lo, hi, n_per_dim, endpoint=hi < 2.0 * np.pi)
        for lo, hi in box
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=-1)
    dirs, jac = polar_map(angles)
    return dirs, angles, jac


def integrate_over_directions(
    measure: SphericalMeasure,
    fn,
    *,
    rel_tol: float = 1e-8,
    n_start: int = 16,
    n_max: int = 128,
):
    """Integrate fn(xi) lambda(dxi) with one-shot angular refinement.

    fn receives an (m, d) array of directions and returns (m,) values.
    For atomic measures the sum is exact; for angular densities the
    Gauss-Legendre grid is doubled until two successive levels agree to
    rel_tol (or the cap is reached, keeping the finest value).
    """
    if measure.is_atomic:
        vals = np.asarray(fn(measure.directions), dtype=float)
        return float(np.sum(vals * measure.weights))

    n = n_start
    prev = None
    while True:
        dirs, wgts, _ = angular_grid(measure, n)
        val = float(np.sum(np.asarray(fn(dirs), dtype=float) * wgts))
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
            return val
        if n >= n_max:
            return val
        prev = val
        n *= 2


def spherical_integrate(
    f,
    spec: LevySpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """int f(y) nu(dy) for the jump measure of a decomposed spec.

    f maps an (n, d) array of points to values and may change sign; it
    must decay fast enough for the radial integrals to converge, else
    DivergentIntegral propagates.
    """

    def along_ray(xi):
        gamma = spec.radial(xi)

        def weight(r, _xi=xi):
            pts = np.asarray(r, dtype=float)[:, None] * _xi[None, :]
            return np.asarray(f(pts), dtype=float)

        res = radial_integral(gamma, weight, cfg, closure=False)
        if res.status != "converged":
            raise DivergentIntegral(
                f"radial integral along {np.round(xi, 6)} did not converge"
            )
        return res.value

    def batch(dirs):
        return np.array([along_ray(xi) for xi in dirs])

    return integrate_over_directions(
        spec.spherical, batch, rel_tol=max(cfg.rel_tol, 1e-10) * 10
    )
