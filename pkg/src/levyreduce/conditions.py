"""Hypothesis checks behind affine generation and reducibility.

Each check sweeps one assumption needed by the reduction machinery:
martingale integrability of the jump measure, infinite variation and
span of the carrying directions, sign of the jumps seen through the
volatility function, CIR affinity of the Wiener part, uniform balance
of the radial Laplace exponents, truncated-moment domination ratios,
and the density-form criteria.  Failures are reported in CheckReports,
not raised; exceptions are reserved for quantities that are genuinely
undefined (InfimumZero, DenominatorZero).
"""

from __future__ import annotations

import numpy as np

from . import report as rpt
from .exceptions import DenominatorZero, DivergentIntegral, InfimumZero
from .laplace import X_GRID_DEFAULT, laplace_radial
from .measures import (
    DensityLevySpec,
    LevySpec,
    RadialMeasure,
    _sample_directions,
    radial_integral,
)
from .quadrature import CONVERGED, DEFAULT_CONFIG, DIVERGENT, QuadratureConfig
from .quadrature import lower_tail_probe
from .spherical import induced_spec, spherical_integrate, uniform_angle_grid

BALANCE_B_GRID = np.logspace(-3.0, 3.0, 25)
EPS_GRID_DEFAULT = np.logspace(-2.0, -8.0, 13)

AFFINITY_TOL = 1e-6
_STABILIZE_TOL = 1e-3
_BALANCE_STABLE_TOL = 1e-4
_SIGN_SLACK = 1e-12


def _min_kernel(r):
    r = np.asarray(r, dtype=float)
    return np.minimum(r * r, r)


def check_martingale(
    spec: LevySpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    n_angular: int = 16,
) -> rpt.CheckReport:
    """Verify int (r^2 wedge r) gamma_xi(dr) < inf on sampled directions.

    This is the moment bound that makes the compensated jump part a
    martingale with finite first moment.  Zero jump measures pass with
    a warning so degenerate inputs remain visible.
    """
    dirs, _ = _sample_directions(spec, n_angular)
    cache: dict[int, tuple] = {}
    worst = 0.0
    bad_detail = ""
    all_zero = True
    for xi in dirs:
        gamma = spec.radial(xi)
        key = id(gamma)
        if key not in cache:
            if gamma.is_zero:
                cache[key] = (True, 0.0, "")
            else:
                res = radial_integral(
                    gamma, _min_kernel, cfg, weight_exponents=(2.0, 1.0)
                )
                ok = res.status == CONVERGED and np.isfinite(res.value)
                cache[key] = (ok, res.value if ok else np.inf, res.status)
        ok, val, status = cache[key]
        if not gamma.is_zero:
            all_zero = False
        if not ok and not bad_detail:
            bad_detail = (
                f"moment integral {status} along direction {np.round(xi, 6)}"
            )
        worst = max(worst, val)

    if all_zero:
        it = rpt.CheckItem(
            "martingale_moment",
            rpt.WARN,
            value=0.0,
            detail="jump measure is zero on all sampled directions",
        )
    else:
        it = rpt.item(
            "martingale_moment",
            not bad_detail,
            value=worst,
            detail=bad_detail or "max over sampled directions",
        )
    return rpt.CheckReport((it,))


def check_variation(
    spec: LevySpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    n_angular: int = 32,
) -> rpt.CheckReport:
    """Locate directions with non-integrable small jumps and test their
    mass and span.

    The divergent set carries int_0^1 r gamma_xi(dr) = +inf.  The first
    item requires it to have positive spherical mass; the second requires
    the located directions to span the whole space.
    """
    dirs, wgts = _sample_directions(spec, n_angular)
    cache: dict[int, bool] = {}
    divergent = np.zeros(len(dirs), dtype=bool)
    for i, xi in enumerate(dirs):
        gamma = spec.radial(xi)
        key = id(gamma)
        if key not in cache:
            if gamma.density is None:
                cache[key] = False  # atom masses on (0,1] are finite sums
            else:
                dens = gamma.density
                probe = lower_tail_probe(lambda r: r * dens(r), cfg, upper=1.0)
                cache[key] = probe.status == DIVERGENT
        divergent[i] = cache[key]

    mass = float(np.sum(np.asarray(wgts, dtype=float)[divergent]))
    items = [
        rpt.item(
            "infinite_variation_mass",
            mass > 0.0,
            value=mass,
            detail="spherical mass of directions with divergent small-jump moment",
        )
    ]
    rank = (
        int(np.linalg.matrix_rank(np.atleast_2d(dirs[divergent])))
        if np.any(divergent)
        else 0
    )
    items.append(
        rpt.item(
            "variation_span",
            rank == spec.dimension,
            value=float(rank),
            tolerance=float(spec.dimension),
            detail="rank of the divergent directions",
        )
    )
    return rpt.CheckReport(tuple(items))


def check_positive_jumps(
    G,
    spec: LevySpec,
    x_grid=None,
    n_angular: int = 64,
) -> rpt.CheckReport:
    """Require <G(x), xi> >= 0 (within slack) on the support of the
    spherical part, so the state only ever jumps upward."""
    x_grid = np.asarray(X_GRID_DEFAULT if x_grid is None else x_grid, dtype=float)
    if x_grid.ndim != 1 or x_grid.size == 0 or np.any(x_grid <= 0):
        raise ValueError("x_grid must be a nonempty grid of positive levels")
    dirs, _ = _sample_directions(spec, n_angular)

    worst = np.inf
    worst_detail = ""
    degenerate = True
    for x in x_grid:
        gx = np.asarray(G(float(x)), dtype=float)
        scale = float(np.linalg.norm(gx))
        if scale > 0.0:
            degenerate = False
        inner = dirs @ gx
        margin = inner + _SIGN_SLACK * scale
        j = int(np.argmin(margin))
        if margin[j] < worst:
            worst = float(margin[j])
            worst_detail = (
                f"min <G(x), xi> = {inner[j]:.3e} at x={x:g}, "
                f"xi={np.round(dirs[j], 6)}"
            )

    if degenerate:
        it = rpt.CheckItem(
            "jump_direction_sign",
            rpt.WARN,
            value=0.0,
            detail="G vanishes on the whole grid",
        )
    else:
        it = rpt.item(
            "jump_direction_sign",
            worst >= 0.0,
            value=worst,
            tolerance=0.0,
            detail=worst_detail,
        )
    return rpt.CheckReport((it,))


def wiener_cir_check(Q, G, x_grid=None):
    """Fit 0.5 <Q G(x), G(x)> = c x and measure the relative residual.

    Returns (c, residual, CheckReport).  The fit is through the origin;
    c is clipped at zero since a diffusion coefficient cannot be
    negative.  Affinity holds when the residual stays below 1e-6.
    """
    x = np.asarray(X_GRID_DEFAULT if x_grid is None else x_grid, dtype=float)
    if x.ndim != 1 or x.size == 0 or np.any(x <= 0):
        raise ValueError("x_grid must be a nonempty grid of positive levels")
    q = np.asarray(Q, dtype=float)
    y = np.empty_like(x)
    for i, xi_level in enumerate(x):
        g = np.asarray(G(float(xi_level)), dtype=float)
        y[i] = 0.5 * float(g @ q @ g)

    c = float(np.dot(x, y) / np.dot(x, x))
    c = max(c, 0.0)
    floor = 1e-30 * max(1.0, float(np.max(np.abs(y), initial=0.0)))
    scale = np.maximum(np.maximum(np.abs(y), c * x), floor)
    residual = float(np.max(np.abs(y - c * x) / scale))
    report = rpt.CheckReport(
        (
            rpt.item(
                "wiener_cir_affinity",
                residual < AFFINITY_TOL,
                value=residual,
                tolerance=AFFINITY_TOL,
                detail=f"fitted diffusion coefficient c={c:.6g}",
            ),
        )
    )
    return c, residual, report


def _balance_ratio(spec, dirs, b_grid, cfg):
    """max over b of sup/inf of the per-direction radial exponents."""
    measures = [spec.radial(xi) for xi in dirs]
    cache: dict[tuple[int, float], float] = {}
    worst = 1.0
    for b in b_grid:
        vals = []
        for gamma in measures:
            key = (id(gamma), float(b))
            if key not in cache:
                try:
                    cache[key] = laplace_radial(gamma, float(b), cfg)
                except DivergentIntegral:
                    cache[key] = np.inf
            vals.append(cache[key])
        lo, hi = min(vals), max(vals)
        if lo == 0.0:
            raise InfimumZero(f"radial Laplace exponent vanishes at b={b:g}")
        worst = max(worst, hi / lo)
    return worst


def radial_balance(
    spec: LevySpec,
    b_grid=None,
    xi_samples=None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
):
    """Estimate the uniform balance constant of the radial family.

    K_hat bounds sup_xi J_xi(b) <= K_hat inf_xi J_xi(b) over the grid.
    Returns (K_hat, CheckReport); the report requires K_hat finite and
    stable under refining the direction sample and extending the b
    range, which exposes families whose ratio grows without bound.
    """
    base_b = np.asarray(BALANCE_B_GRID if b_grid is None else b_grid, dtype=float)
    if np.any(base_b <= 0):
        raise ValueError("b_grid must be strictly positive")

    if xi_samples is not None:
        dirs0 = np.atleast_2d(np.asarray(xi_samples, dtype=float))
        dirs1 = dirs0
    elif spec.spherical.is_atomic:
        dirs0 = spec.spherical.directions
        dirs1 = dirs0
    else:
        n0 = 64 if spec.dimension == 2 else 16
        dirs0 = uniform_angle_grid(spec.dimension, n0)[0]
        dirs1 = uniform_angle_grid(spec.dimension, 2 * n0)[0]

    lo, hi = float(np.min(base_b)), float(np.max(base_b))
    wide_b = np.unique(
        np.concatenate(
            [base_b, np.logspace(np.log10(lo) - 1.0, np.log10(lo), 5),
             np.logspace(np.log10(hi), np.log10(hi) + 1.0, 5)]
        )
    )

    k_base = _balance_ratio(spec, dirs0, base_b, cfg)
    k_ref = _balance_ratio(spec, dirs1, wide_b, cfg)

    finite = bool(np.isfinite(k_ref))
    drift = abs(k_ref - k_base) / max(k_base, 1.0) if finite else np.inf
    items = (
        rpt.item(
            "balance_finite",
            finite,
            value=k_ref if finite else np.inf,
            detail="max_b sup/inf of radial Laplace exponents",
        ),
        rpt.item(
            "balance_stable",
            finite and drift <= _BALANCE_STABLE_TOL,
            value=drift,
            tolerance=_BALANCE_STABLE_TOL,
            detail="relative change under grid refinement and range extension",
        ),
    )
    return k_ref, rpt.CheckReport(items)


def _window_moment(measure, lo, hi, power, cfg):
    weight = (lambda r: np.asarray(r, dtype=float)) if power == 1 else (
        lambda r: np.asarray(r, dtype=float) ** power
    )
    res = radial_integral(
        measure,
        weight,
        cfg,
        lo=lo,
        hi=hi,
        weight_exponents=(float(power), float(power)),
        closure=False,
    )
    return res.value


def _limsup_estimate(values):
    """(estimate, stabilized) from ratio samples ordered by shrinking eps."""
    vals = np.asarray(values, dtype=float)
    if vals.size < 3:
        return float(np.max(vals)), False
    tail = vals[-3:]
    changes = np.abs(np.diff(tail)) / np.maximum(np.abs(tail[:-1]), 1e-300)
    return float(np.max(tail)), bool(np.all(changes < _STABILIZE_TOL))


def q_ratios(
    gamma_lower: RadialMeasure,
    gamma_upper: RadialMeasure,
    eps_grid=None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
):
    """Truncated-moment domination ratios of an upper over a lower
    radial measure.

    q0 tracks int_eps^1 r Gamma(dr) / int_eps^1 r gamma(dr) as eps
    shrinks; q_inf does the same with weight r^2 on [1, 1/eps].  Both
    are estimated as the max of the three smallest-eps samples once
    successive changes stabilize below 1e-3 relative; without
    stabilization the corresponding item is inconclusive rather than
    passed.  Returns (q0, q_inf, CheckReport).
    """
    eps = np.asarray(EPS_GRID_DEFAULT if eps_grid is None else eps_grid, dtype=float)
    eps = np.unique(eps)[::-1]
    if eps.size == 0 or np.any(eps <= 0) or np.any(eps >= 1):
        raise ValueError("eps_grid must lie strictly inside (0, 1)")

    # domination precheck on a log grid spanning both windows
    rr = np.logspace(np.log10(eps[-1]), -np.log10(eps[-1]), 201)
    lo_d = gamma_lower.density(rr) if gamma_lower.density is not None else np.zeros_like(rr)
    up_d = gamma_upper.density(rr) if gamma_upper.density is not None else np.zeros_like(rr)
    dens_ok = bool(np.all(lo_d <= up_d * (1.0 + 1e-9) + 1e-300))
    upper_atoms = {float(r): float(w) for r, w in gamma_upper.atoms}
    atom_ok = all(
        upper_atoms.get(float(r), 0.0) >= w * (1.0 - 1e-9) for r, w in gamma_lower.atoms
    )
    items = [
        rpt.item(
            "domination_order",
            dens_ok and atom_ok,
            detail="lower measure must not exceed the upper anywhere sampled",
        )
    ]

    ratios0, ratios_inf = [], []
    for e in eps:
        den0 = _window_moment(gamma_lower, e, 1.0, 1, cfg)
        den_inf = _window_moment(gamma_lower, 1.0, 1.0 / e, 2, cfg)
        if den0 <= 0.0 or den_inf <= 0.0:
            raise DenominatorZero(
                f"lower-measure window moment vanishes at eps={e:g}"
            )
        ratios0.append(_window_moment(gamma_upper, e, 1.0, 1, cfg) / den0)
        ratios_inf.append(_window_moment(gamma_upper, 1.0, 1.0 / e, 2, cfg) / den_inf)

    q0, ok0 = _limsup_estimate(ratios0)
    q_inf, ok_inf = _limsup_estimate(ratios_inf)
    for name, val, ok in (("q0_finite", q0, ok0), ("q_inf_finite", q_inf, ok_inf)):
        if not ok:
            items.append(
                rpt.CheckItem(
                    name,
                    rpt.INCONCLUSIVE,
                    value=val,
                    detail="ratio samples did not stabilize on the eps grid",
                )
            )
        else:
            items.append(
                rpt.item(
                    name,
                    np.isfinite(val),
                    value=val,
                    detail="limsup estimate from the three smallest eps",
                )
            )
    return q0, q_inf, rpt.CheckReport(tuple(items))


def _envelope_functions(dspec: DensityLevySpec, n_per_dim: int):
    """Radius-wise inf/sup of the density times the angular factor.

    In the plane the factor is identically 1, so these are plain
    extremes of g over each circle; in higher dimension the polar
    Jacobian is included, matching how the per-direction radial
    measures absorb it.
    """
    dirs, _, jac = uniform_angle_grid(dspec.dimension, n_per_dim)
    jac = np.asarray(jac, dtype=float)

    def lower(r):
        r = np.asarray(r, dtype=float)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, dspec.dimension)
        vals = np.asarray(dspec(pts), dtype=float).reshape(r.size, -1) * jac[None, :]
        return np.min(vals, axis=1)

    def upper(r):
        r = np.asarray(r, dtype=float)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, dspec.dimension)
        vals = np.asarray(dspec(pts), dtype=float).reshape(r.size, -1) * jac[None, :]
        return np.max(vals, axis=1)

    return lower, upper


def density_reducibility_check(
    dspec: DensityLevySpec,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    eps_grid=None,
) -> rpt.CheckReport:
    """Reducibility criteria for a jump measure given by a density g.

    Items, in order: integrability of (|x|^2 wedge |x|) g; span of the
    directions carrying g; positive mass of directions with divergent
    small-jump moment; and the two envelope-ratio limits with r^d and
    r^(d+1) weights.  All failures are reported, none raised.
    """
    d = dspec.dimension
    items = []

    # (a) global moment bound, integrated in decomposed form
    try:
        value_a = spherical_integrate(
            lambda pts: _min_kernel(np.linalg.norm(pts, axis=1)),
            induced_spec(dspec),
            cfg,
        )
        ok_a, detail_a = np.isfinite(value_a), ""
    except DivergentIntegral as exc:
        value_a, ok_a, detail_a = np.inf, False, str(exc)
    items.append(
        rpt.item(
            "integrability",
            ok_a,
            value=value_a,
            detail=detail_a or "int (|x|^2 wedge |x|) g(x) dx",
        )
    )

    # direction probes on a subsampled scan grid
    n_env = 512 if d == 2 else 64
    n_probe = 128 if d == 2 else 16
    probe_dirs, _, _ = uniform_angle_grid(d, n_probe)
    probe_cell = (np.pi ** (d - 2)) * 2.0 * np.pi / len(probe_dirs)
    radii = np.logspace(-3.0, 3.0, 25)

    pts = (radii[:, None, None] * probe_dirs[None, :, :]).reshape(-1, d)
    gvals = np.asarray(dspec(pts), dtype=float).reshape(radii.size, -1)
    carrying = np.any(gvals > 0.0, axis=0)
    rank = (
        int(np.linalg.matrix_rank(np.atleast_2d(probe_dirs[carrying])))
        if np.any(carrying)
        else 0
    )
    items.append(
        rpt.item(
            "span",
            rank == d,
            value=float(rank),
            tolerance=float(d),
            detail="rank of directions where g is not identically zero",
        )
    )

    # (c) Lebesgue mass (on the polar box) of divergent directions
    div_mass = 0.0
    for k, xi in enumerate(probe_dirs):
        if not carrying[k]:
            continue

        def fray(r, _xi=xi):
            r = np.asarray(r, dtype=float)
            return r**d * np.asarray(dspec(r[:, None] * _xi[None, :]), dtype=float)

        if lower_tail_probe(fray, cfg, upper=1.0).status == DIVERGENT:
            div_mass += probe_cell
    items.append(
        rpt.item(
            "small_jump_divergence",
            div_mass > 0.0,
            value=div_mass,
            detail="angular mass of directions with divergent small-jump moment",
        )
    )

    # envelopes, refined once if the two resolutions disagree
    low_f, up_f = _envelope_functions(dspec, n_env)
    low_f2, up_f2 = _envelope_functions(dspec, 2 * n_env)
    probe_r = np.logspace(-3.0, 3.0, 13)
    disagree = 0.0
    for f1, f2 in ((low_f, low_f2), (up_f, up_f2)):
        v1, v2 = f1(probe_r), f2(probe_r)
        disagree = max(
            disagree,
            float(np.max(np.abs(v1 - v2) / np.maximum(np.abs(v2), 1e-300))),
        )
    if disagree > 1e-3:
        low_f, up_f = low_f2, up_f2

    hints = None
    if dspec.hints is not None:
        hints = (dspec.hints[0] - (d - 1), dspec.hints[1] - (d - 1))
    surface = float(d - 1)

    def _env_measure(env):
        def dens(r, _env=env):
            r = np.asarray(r, dtype=float)
            return _env(r) * r**surface

        return RadialMeasure(density=dens, hints=hints, label="envelope")

    lower_m, upper_m = _env_measure(low_f), _env_measure(up_f)
    try:
        q0, q_inf, qrep = q_ratios(lower_m, upper_m, eps_grid, cfg)
        lookup = {it.name: it for it in qrep.items}
        for name, src in (("ratio_small", "q0_finite"), ("ratio_large", "q_inf_finite")):
            base = lookup[src]
            items.append(
                rpt.CheckItem(
                    name,
                    base.status,
                    value=base.value,
                    tolerance=base.tolerance,
                    detail=base.detail,
                )
            )
    except DenominatorZero as exc:
        for name in ("ratio_small", "ratio_large"):
            items.append(
                rpt.item(
                    name,
                    False,
                    value=np.inf,
                    detail=f"lower envelope carries no usable mass: {exc}",
                )
            )

    return rpt.CheckReport(tuple(items))
