"""Seedable path simulation for the short-rate equations.

Two schemes live here: an Euler scheme for the one-factor stable-CIR
equation driven by exact stable increments, and an Euler scheme for
the multivariate equation driven by a compound-Poisson approximation
that keeps jumps above a cutoff and compensates their mean.  Small
jumps below the cutoff are dropped, not Gaussian-approximated; their
variance is reported so callers can budget the bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import CutoffTooSmall
from .laplace import stable_coefficient
from .measures import LevySpec, _sample_directions, radial_integral
from .quadrature import CONVERGED, DEFAULT_CONFIG, QuadratureConfig, panel_integral
from .reduction import ReducedModel

_TABLE_CELLS_PER_DECADE = 128
_INVERSE_TABLE_SIZE = 16384
_TAIL_REMAINDER = 1e-12
_V_MAX = -np.log(_TAIL_REMAINDER)
_V_STEP = _V_MAX / (_INVERSE_TABLE_SIZE - 1)


@dataclass(frozen=True)
class RngStream:
    """Deterministic random source identified by (seed, stream).

    generator() always returns a fresh generator seeded from the pair,
    so identical identifiers reproduce identical draws regardless of
    consumption elsewhere.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.stream]))


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError("rng must be an RngStream, Generator, or integer seed")


def _seed_tag(rng):
    if isinstance(rng, RngStream):
        return (rng.seed, rng.stream)
    if isinstance(rng, (int, np.integer)):
        return (int(rng), 0)
    return None


@dataclass(frozen=True)
class PathEnsemble:
    """Simulated short-rate paths on a uniform time grid.

    values is (n_paths, n_steps+1) in float32; every entry is
    nonnegative by construction of the schemes.  clamp_frequency is the
    fraction of proposed steps that were clipped at zero.
    """

    values: np.ndarray
    dt: float
    seed: tuple | None = None
    clamp_frequency: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("values must be (n_paths, n_steps+1)")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1] - 1

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps

    def times(self) -> np.ndarray:
        return np.arange(self.values.shape[1]) * self.dt


def sample_stable(alpha: float, scale: float, dt: float, rng, size=None):
    """Increment(s) of the compensated, spectrally positive alpha-stable
    martingale over a step dt.

    The law is pinned by its Laplace transform: E exp(-u X) =
    exp(dt scale^alpha c_alpha u^alpha).  Draws use the standard
    trigonometric construction for maximally skewed stable laws, scaled
    to match that contract; the mean is zero for alpha > 1.
    """
    if not (1.0 < alpha < 2.0):
        raise ValueError("stable index must lie in (1, 2)")
    if scale <= 0 or dt <= 0:
        raise ValueError("scale and dt must be positive")
    gen = _as_generator(rng)
    n = 1 if size is None else int(size)

    v = gen.uniform(-0.5 * np.pi, 0.5 * np.pi, size=n)
    w = gen.standard_exponential(size=n)

    t = np.tan(0.5 * np.pi * alpha)
    b0 = np.arctan(t) / alpha
    s0 = (1.0 + t * t) ** (1.0 / (2.0 * alpha))
    x = (
        s0
        * np.sin(alpha * (v + b0))
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * (v + b0)) / w) ** ((1.0 - alpha) / alpha)
    )

    sigma = scale * dt ** (1.0 / alpha) * (
        stable_coefficient(alpha) * abs(np.cos(0.5 * np.pi * alpha))
    ) ** (1.0 / alpha)
    out = sigma * x
    return float(out[0]) if size is None else out


def simulate_reduced(
    model: ReducedModel,
    x0: float,
    horizon: float,
    n_steps: int,
    n_paths: int,
    rng,
) -> PathEnsemble:
    """Full-truncation Euler scheme for the one-factor stable-CIR rate.

    R <- max(0, R + (aR+b)dt + C (R v 0)^(1/alpha) dZ); the coefficient
    uses the clipped state and the state itself is clipped after every
    step, so the ensemble stays nonnegative.  model may be any object
    with fields a, b, C, alpha; C = 0 degenerates to the drift ODE.
    """
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    if n_steps < 1 or n_paths < 1:
        raise ValueError("need at least one step and one path")
    gen = _as_generator(rng)
    dt = float(horizon) / n_steps

    values = np.empty((n_paths, n_steps + 1), dtype=np.float32)
    r = np.full(n_paths, float(x0))
    values[:, 0] = r
    clamped = 0
    inv_alpha = 1.0 / model.alpha
    for k in range(n_steps):
        dz = sample_stable(model.alpha, 1.0, dt, gen, size=n_paths)
        r = r + (model.a * r + model.b) * dt + model.C * np.maximum(r, 0.0) ** inv_alpha * dz
        clamped += int(np.count_nonzero(r < 0.0))
        r = np.maximum(r, 0.0)
        values[:, k + 1] = r
    return PathEnsemble(
        values, dt, _seed_tag(rng), clamped / float(n_steps * n_paths)
    )


@dataclass(frozen=True)
class JumpSampler:
    """Compound-Poisson approximation of the jump martingale above a
    cutoff.

    Jumps land along a finite list of directions (atoms of the
    spherical part, or its quadrature discretization); radii follow the
    per-direction tail laws via inverse-CDF tables.  sample_increment
    returns compensated per-path increments, i.e. the jump sums minus
    dt times the mean flux.
    """

    directions: np.ndarray
    intensities: np.ndarray
    inverse_tables: tuple
    atom_radii: tuple
    atom_cdfs: tuple
    mean_flux: np.ndarray
    dropped_variance: float
    cutoff: float

    @property
    def intensity(self) -> float:
        return float(np.sum(self.intensities))

    def _draw_radii(self, i: int, n: int, gen) -> np.ndarray:
        inv = self.inverse_tables[i]
        if inv is None:
            u = gen.random(n)
            return np.asarray(self.atom_radii[i])[
                np.searchsorted(self.atom_cdfs[i], u, side="right").clip(
                    0, len(self.atom_radii[i]) - 1
                )
            ]
        # the table is uniform in v = -log(tail probability), so an
        # exponential draw indexes it directly; heavy tails stay resolved
        pos = gen.standard_exponential(n) * (1.0 / _V_STEP)
        pos = np.minimum(pos, len(inv) - 1.000001)
        idx = pos.astype(np.intp)
        frac = pos - idx
        return inv[idx] * (1.0 - frac) + inv[idx + 1] * frac

    def sample_increment(self, dt: float, n_paths: int, rng) -> np.ndarray:
        gen = _as_generator(rng)
        d = self.directions.shape[1]
        out = np.zeros((n_paths, d))
        for i, lam in enumerate(self.intensities):
            if lam <= 0.0:
                continue
            counts = gen.poisson(lam * dt, size=n_paths)
            total = int(counts.sum())
            if total:
                radii = self._draw_radii(i, total, gen)
                owners = np.repeat(np.arange(n_paths), counts)
                sums = np.bincount(owners, weights=radii, minlength=n_paths)
                out += sums[:, None] * self.directions[i][None, :]
        out -= dt * self.mean_flux[None, :]
        return out


def _radius_table(gamma, eps: float, cfg: QuadratureConfig) -> np.ndarray:
    """Inverse-CDF table of a radial density restricted to (eps, inf),
    tabulated uniformly in v = -log(tail probability)."""
    hint = gamma.hints[1] if gamma.hints is not None else None
    if hint is not None and hint > 1.0:
        # power tail: radius covering all but _TAIL_REMAINDER of the mass
        r_max = eps * _TAIL_REMAINDER ** (-1.0 / (hint - 1.0))
    else:
        r_max = eps * 1e8
    r_max = min(max(r_max, 10.0 * eps), cfg.r_high)
    n_cells = max(int(np.log10(r_max / eps) * _TABLE_CELLS_PER_DECADE), 16)
    grid = np.geomspace(eps, r_max, n_cells + 1)
    cells = np.array(
        [panel_integral(gamma.density, grid[j], grid[j + 1]) for j in range(n_cells)]
    )
    # survival mass from the top avoids cancellation in the deep tail
    survival = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    total = max(survival[0], 1e-300)
    with np.errstate(divide="ignore"):
        v_nodes = -np.log(np.maximum(survival / total, 1e-300))
    v_nodes = np.minimum(v_nodes, 2.0 * _V_MAX)
    v_grid = np.arange(_INVERSE_TABLE_SIZE) * _V_STEP
    return np.interp(v_grid, v_nodes, grid)


def truncated_jump_sampler(
    spec: LevySpec,
    eps: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    n_angular: int = 64,
    intensity_budget: float = 1e6,
):
    """Compound-Poisson approximation of a decomposed jump measure.

    Returns (JumpSampler, dropped_variance) where dropped_variance is
    int_{|y| <= eps} |y|^2 nu(dy), the second moment of the discarded
    small jumps.  Raises CutoffTooSmall when the total tail intensity
    exceeds the configured budget.
    """
    if eps <= 0:
        raise ValueError("cutoff must be positive")
    dirs, wgts = _sample_directions(spec, n_angular)
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    wgts = np.asarray(wgts, dtype=float)

    intensities = np.empty(len(dirs))
    fluxes = np.empty(len(dirs))
    dropped = 0.0
    tables, atom_radii, atom_cdfs = [], [], []
    for i, xi in enumerate(dirs):
        gamma = spec.radial(xi)
        mass_res = radial_integral(gamma, None, cfg, lo=eps, weight_exponents=(0.0, 0.0))
        flux_res = radial_integral(
            gamma, lambda r: np.asarray(r, float), cfg, lo=eps, weight_exponents=(1.0, 1.0)
        )
        if mass_res.status != CONVERGED or flux_res.status != CONVERGED:
            raise CutoffTooSmall(
                f"tail mass above eps={eps:g} is not finite along {np.round(xi, 6)}"
            )
        drop_res = radial_integral(
            gamma,
            lambda r: np.asarray(r, float) ** 2,
            cfg,
            hi=eps,
            weight_exponents=(2.0, 2.0),
            closure=True,
        )
        intensities[i] = wgts[i] * mass_res.value
        fluxes[i] = wgts[i] * flux_res.value
        dropped += wgts[i] * max(drop_res.value, 0.0)

        tail_atoms = [(r, w) for r, w in gamma.atoms if r > eps]
        if gamma.density is not None and mass_res.value > 0.0:
            if tail_atoms:
                raise ValueError(
                    "mixed atom and density radial tails are not supported "
                    "by the jump sampler"
                )
            tables.append(_radius_table(gamma, eps, cfg))
            atom_radii.append(None)
            atom_cdfs.append(None)
        elif tail_atoms:
            rr = np.array([r for r, _ in tail_atoms])
            ww = np.array([w for _, w in tail_atoms])
            tables.append(None)
            atom_radii.append(rr)
            atom_cdfs.append(np.cumsum(ww) / np.sum(ww))
        else:
            tables.append(None)
            atom_radii.append(np.array([eps]))
            atom_cdfs.append(np.array([1.0]))

    total = float(np.sum(intensities))
    if total > intensity_budget:
        raise CutoffTooSmall(
            f"tail intensity {total:.3e} exceeds the budget {intensity_budget:.3e}"
        )
    sampler = JumpSampler(
        directions=dirs,
        intensities=intensities,
        inverse_tables=tuple(tables),
        atom_radii=tuple(atom_radii),
        atom_cdfs=tuple(atom_cdfs),
        mean_flux=(fluxes[:, None] * dirs).sum(axis=0),
        dropped_variance=dropped,
        cutoff=float(eps),
    )
    return sampler, dropped


def simulate_original(
    G,
    spec: LevySpec,
    a: float,
    b: float,
    x0: float,
    eps: float,
    horizon: float,
    n_steps: int,
    n_paths: int,
    rng,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> PathEnsemble:
    """Euler scheme for dR = (aR+b)dt + <G(R), dZ> with truncated jumps.

    The driving increments combine the compound-Poisson approximation
    of the jump martingale with correlated Gaussian increments for a
    nonzero Wiener covariance.  States are clipped at zero and the clip
    frequency recorded.
    """
    if x0 < 0 or b < 0:
        raise ValueError("x0 and b must be nonnegative")
    if n_steps < 1 or n_paths < 1:
        raise ValueError("need at least one step and one path")
    gen = _as_generator(rng)
    dt = float(horizon) / n_steps

    sampler, _ = truncated_jump_sampler(spec, eps, cfg)

    q = np.asarray(spec.wiener_cov, dtype=float)
    if np.any(q != 0.0):
        w, vecs = np.linalg.eigh(q)
        root = vecs @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
    else:
        root = None

    values = np.empty((n_paths, n_steps + 1), dtype=np.float32)
    r = np.full(n_paths, float(x0))
    values[:, 0] = r
    clamped = 0
    for k in range(n_steps):
        dz = sampler.sample_increment(dt, n_paths, gen)
        if root is not None:
            dz += gen.standard_normal((n_paths, q.shape[0])) @ root.T * np.sqrt(dt)
        gx = np.asarray(G(np.maximum(r, 0.0)), dtype=float)
        r = r + (a * r + b) * dt + np.einsum("ij,ij->i", gx, dz)
        clamped += int(np.count_nonzero(r < 0.0))
        r = np.maximum(r, 0.0)
        values[:, k + 1] = r
    return PathEnsemble(
        values, dt, _seed_tag(rng), clamped / float(n_steps * n_paths)
    )
