"""Extraction of the one-dimensional affine model from a multivariate spec.

The pipeline regresses the joint Laplace exponent against the state
level to isolate the state-proportional jump measure, fits its exponent
as a power law, and packages the result as the one-factor stable-CIR
model.  A literal generator evaluator is included so both forms can be
compared as operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import report as rpt
from .conditions import (
    check_martingale,
    check_positive_jumps,
    check_variation,
    radial_balance,
    wiener_cir_check,
)
from .exceptions import (
    AffinityViolation,
    NegativeDirection,
    NotPowerLaw,
    PreconditionFailed,
    ResidualNuG0,
    ZeroVolatility,
)
from .laplace import (
    B_GRID_DEFAULT,
    X_GRID_DEFAULT,
    compensated_exp,
    laplace_total,
    stable_coefficient,
)
from .measures import (
    LevySpec,
    RadialMeasure,
    SphericalMeasure,
    power_radial,
    radial_integral,
)
from .quadrature import CONVERGED, DEFAULT_CONFIG, QuadratureConfig
from .spherical import integrate_over_directions

PROBE_X_DEFAULT = np.logspace(-2.0, -8.0, 13)

AFFINITY_TOL = 1e-4
FIT_TOL = 1e-4
DIRECTION_TOL = 1e-4
GAUSSIAN_BAND = (1.995, 2.005)
_SCALING_FACTORS = (2.0, 3.0)


@dataclass(frozen=True)
class GeneratingModel:
    """Parameters of a one-dimensional affine short-rate generator.

    The drift is a*x + b; c is the CIR diffusion coefficient; nu_G0 is
    the state-independent jump measure and mu the one multiplying the
    state level.
    """

    a: float
    b: float
    c: float = 0.0
    nu_G0: RadialMeasure = field(default_factory=RadialMeasure)
    mu: RadialMeasure = field(default_factory=RadialMeasure)

    def __post_init__(self):
        if self.b < 0:
            raise ValueError("constant drift term b must be nonnegative")
        if self.c < 0:
            raise ValueError("diffusion coefficient c must be nonnegative")

    def validate(self, cfg: QuadratureConfig = DEFAULT_CONFIG) -> rpt.CheckReport:
        """Integrability and drift-domination invariants as a report."""
        items = []
        res = radial_integral(
            self.mu,
            lambda v: np.minimum(np.asarray(v, float), np.asarray(v, float) ** 2),
            cfg,
            weight_exponents=(2.0, 1.0),
        )
        items.append(
            rpt.item(
                "mu_moment",
                res.status == CONVERGED and np.isfinite(res.value),
                value=res.value,
                detail="int (v wedge v^2) mu(dv)",
            )
        )
        res = radial_integral(
            self.nu_G0,
            lambda v: np.asarray(v, dtype=float),
            cfg,
            weight_exponents=(1.0, 1.0),
        )
        nu_first = res.value
        items.append(
            rpt.item(
                "nu_first_moment",
                res.status == CONVERGED and np.isfinite(nu_first),
                value=nu_first,
                detail="int v nu_G0(dv)",
            )
        )
        res = radial_integral(
            self.nu_G0,
            lambda v: np.maximum(np.asarray(v, dtype=float) - 1.0, 0.0),
            cfg,
            lo=1.0,
            weight_exponents=(1.0, 1.0),
        )
        items.append(
            rpt.item(
                "drift_dominates_tail",
                res.status == CONVERGED and self.b >= res.value - 1e-12,
                value=res.value,
                tolerance=self.b,
                detail="b must dominate int_(1,inf) (v-1) nu_G0(dv)",
            )
        )
        return rpt.CheckReport(tuple(items))


@dataclass(frozen=True)
class ReducedModel:
    """One-factor stable-CIR short rate: dR = (aR+b)dt + C R^(1/alpha) dZ.

    The driving noise is the spectrally positive alpha-stable martingale
    normalized so its Laplace exponent per unit time is c_alpha u^alpha.
    """

    a: float
    b: float
    C: float
    alpha: float

    def __post_init__(self):
        if not (1.0 < self.alpha < 2.0):
            raise ValueError("stable index must lie strictly inside (1, 2)")
        if self.C <= 0:
            raise ValueError("volatility coefficient C must be positive")
        if self.b < 0:
            raise ValueError("constant drift term b must be nonnegative")

    def to_generating(self) -> GeneratingModel:
        """The same model in generator parameters: the state-proportional
        jump measure is C^alpha v^(-1-alpha) dv, no diffusion, no
        state-independent jumps."""
        return GeneratingModel(
            self.a,
            self.b,
            0.0,
            RadialMeasure(),
            power_radial(self.alpha, scale=self.C**self.alpha),
        )


def direction_limit_at_zero(G, x_probes=None):
    """Limit direction of the volatility function at the origin.

    Returns (unit direction at the smallest probe, residual), where the
    residual is the largest deviation between normalized directions at
    the three smallest probes.  A residual above 1e-4 signals that the
    direction does not settle.
    """
    probes = np.asarray(PROBE_X_DEFAULT if x_probes is None else x_probes, dtype=float)
    if probes.ndim != 1 or probes.size < 3:
        raise ValueError("need at least three probe levels")
    if np.any(np.diff(probes) >= 0) or np.any(probes <= 0):
        raise ValueError("probes must be positive and strictly decreasing")

    units = []
    for x in probes[-3:]:
        g = np.asarray(G(float(x)), dtype=float)
        norm = float(np.linalg.norm(g))
        if norm == 0.0:
            raise ZeroVolatility(f"|G({x:g})| = 0 at a probe level")
        units.append(g / norm)
    g0 = units[-1]
    residual = max(
        float(np.linalg.norm(u - v)) for u in units for v in units
    )
    return g0, residual


def extract_affine_exponents(
    spec: LevySpec,
    G,
    b_grid=None,
    x_grid=None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
):
    """Split the Laplace exponent of <G(x), Z> into level-free and
    level-proportional parts.

    For each b the exponent evaluated at b*G(x) is regressed linearly
    against x; the slope (net of the fitted diffusion term c b^2) samples
    the state-proportional exponent and the intercept the state-free
    one.  Returns (slopes, intercepts, residual); a residual above 1e-4,
    a negative slope, or a decreasing slope profile raises
    AffinityViolation since the pair then fails the affine form.
    """
    b_grid = np.asarray(B_GRID_DEFAULT if b_grid is None else b_grid, dtype=float)
    x_grid = np.asarray(X_GRID_DEFAULT if x_grid is None else x_grid, dtype=float)
    if x_grid.size < 3:
        raise ValueError("x_grid needs at least three levels")
    if np.any(b_grid < 0):
        raise ValueError("b_grid must be nonnegative")

    c, _, _ = wiener_cir_check(spec.wiener_cov, G, x_grid)
    gvals = [np.asarray(G(float(x)), dtype=float) for x in x_grid]

    ones = np.ones_like(x_grid)
    design = np.stack([x_grid, ones], axis=1)
    slopes = np.empty_like(b_grid)
    intercepts = np.empty_like(b_grid)
    residual = 0.0
    for i, b in enumerate(b_grid):
        if b == 0.0:
            slopes[i] = 0.0
            intercepts[i] = 0.0
            continue
        y = np.array(
            [laplace_total(spec, b * g, cfg) for g in gvals], dtype=float
        )
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        fit = design @ coef
        scale = np.maximum(np.abs(y), 1e-30 * max(1.0, float(np.max(np.abs(y)))))
        residual = max(residual, float(np.max(np.abs(y - fit) / scale)))
        slopes[i] = coef[0] - c * b * b
        intercepts[i] = coef[1]

    if residual > AFFINITY_TOL:
        raise AffinityViolation(
            f"Laplace exponent is not affine in the level: residual {residual:.3e}"
        )
    slope_floor = -1e-9 * max(1.0, float(np.max(np.abs(slopes))))
    order = np.argsort(b_grid)
    monotone_slack = slope_floor * np.ones(len(order) - 1)
    if np.any(slopes < slope_floor) or np.any(
        np.diff(slopes[order]) < monotone_slack
    ):
        raise AffinityViolation(
            "extracted level-proportional exponent must be nonnegative and "
            "nondecreasing"
        )
    return slopes, intercepts, residual


def fit_power_law(b_grid, j_samples):
    """Fit j = C_tilde * b^alpha and test scale invariance of the samples.

    Returns (C_tilde, alpha, fit_residual, CheckReport).  The report
    checks that the ratios j(2b)/j(b) and j(3b)/j(b) are constant across
    the grid (two incommensurate factors pin a power law), that the
    log-log fit residual is small, and whether alpha lies in (1, 2) -
    with a warning instead of a failure inside the Gaussian boundary
    band around 2.  Ratio spread beyond tolerance raises NotPowerLaw.
    """
    b = np.asarray(b_grid, dtype=float)
    j = np.asarray(j_samples, dtype=float)
    mask = b > 0.0
    b, j = b[mask], j[mask]
    if b.size < 4:
        raise ValueError("need at least four positive sample points")
    if np.any(j <= 0.0):
        raise ValueError("power-law fit requires positive samples")

    lb, lj = np.log(b), np.log(j)
    order = np.argsort(lb)
    lb, lj = lb[order], lj[order]

    slope, logc = np.polyfit(lb, lj, 1)
    alpha, c_tilde = float(slope), float(np.exp(logc))
    fit_residual = float(np.max(np.abs(np.expm1(lj - (slope * lb + logc)))))

    items = []
    for factor in _SCALING_FACTORS:
        shift = np.log(factor)
        inside = lb[lb + shift <= lb[-1]]
        if inside.size < 2:
            raise ValueError("grid too narrow for the scaling test")
        ratios = np.exp(np.interp(inside + shift, lb, lj) - np.interp(inside, lb, lj))
        spread = float(np.max(ratios) / np.min(ratios) - 1.0)
        items.append(
            rpt.item(
                f"scaling_factor_{int(factor)}",
                spread < FIT_TOL,
                value=spread,
                tolerance=FIT_TOL,
                detail=f"spread of j({int(factor)}b)/j(b) across the grid",
            )
        )
        if spread >= FIT_TOL:
            raise NotPowerLaw(
                f"ratio at factor {factor:g} varies by {spread:.3e} across the grid"
            )
    items.append(
        rpt.item(
            "fit_residual",
            fit_residual < FIT_TOL,
            value=fit_residual,
            tolerance=FIT_TOL,
            detail="max relative deviation from the fitted power law",
        )
    )
    lo, hi = GAUSSIAN_BAND
    if lo <= alpha <= hi:
        items.append(
            rpt.CheckItem(
                "alpha_range",
                rpt.WARN,
                value=alpha,
                detail="GAUSSIAN_BOUNDARY: exponent at the diffusive edge",
            )
        )
    else:
        items.append(
            rpt.item(
                "alpha_range",
                1.0 < alpha < 2.0,
                value=alpha,
                detail="fitted exponent must lie in (1, 2)",
            )
        )
    return c_tilde, alpha, fit_residual, rpt.CheckReport(tuple(items))


def _precondition(report: rpt.CheckReport, label: str):
    if not report.overall_pass:
        names = ", ".join(i.name for i in report.failing())
        raise PreconditionFailed(f"{label} failed: {names}", report=report)


def reduce_model(
    spec: LevySpec,
    G,
    a: float = 0.0,
    b: float = 0.0,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    b_grid=None,
    x_grid=None,
):
    """Run the full reduction: hypothesis suite, exponent extraction,
    power-law fit, and assembly of the one-factor model.

    Structural preconditions (martingale moment, jump sign, balance,
    settling direction at zero, and infinite variation unless G(0)=0)
    raise PreconditionFailed.  A nonzero Wiener part is reported as a
    violation in the returned CheckReport but does not stop the jump
    extraction, which runs on the diffusion-free part of the spec.
    Returns (ReducedModel, CheckReport).
    """
    mart = check_martingale(spec, cfg)
    _precondition(mart, "martingale moment check")

    pos = check_positive_jumps(G, spec, x_grid)
    _precondition(pos, "jump sign check")

    variation = check_variation(spec, cfg)
    g_origin = np.asarray(G(0.0), dtype=float)
    origin_zero = float(np.linalg.norm(g_origin)) == 0.0
    if not variation.overall_pass and not origin_zero:
        raise PreconditionFailed(
            "assumption set unmet: neither infinite variation with full span "
            "nor G(0) = 0 is certified",
            report=variation,
        )

    k_hat, balance = radial_balance(spec, cfg=cfg)
    _precondition(balance, "radial balance check")

    g0, g0_residual = direction_limit_at_zero(G)
    if g0_residual > DIRECTION_TOL:
        raise PreconditionFailed(
            f"direction of G does not settle at zero (residual {g0_residual:.3e})"
        )

    c, wiener_residual, wiener = wiener_cir_check(spec.wiener_cov, G, x_grid)
    wiener_flag = rpt.item(
        "wiener_part_vanishes",
        c == 0.0,
        value=c,
        detail="a positive diffusion coefficient cannot reduce to a stable "
        "model with alpha < 2",
    )

    slopes, intercepts, affinity_residual = extract_affine_exponents(
        spec.jump_only(), G, b_grid, x_grid, cfg
    )
    bg = np.asarray(B_GRID_DEFAULT if b_grid is None else b_grid, dtype=float)

    slope_scale = float(np.max(np.abs(slopes), initial=0.0))
    intercept_worst = float(np.max(np.abs(intercepts), initial=0.0))
    intercept_tol = 1e-6 * max(1.0, slope_scale)
    if intercept_worst > intercept_tol:
        raise ResidualNuG0(
            f"state-independent exponent does not vanish: {intercept_worst:.3e}"
        )

    c_tilde, alpha, fit_residual, fit_report = fit_power_law(bg, slopes)
    if not (1.0 < alpha < 2.0):
        raise NotPowerLaw(f"fitted exponent {alpha:.6g} lies outside (1, 2)")

    big_c = float((c_tilde / stable_coefficient(alpha)) ** (1.0 / alpha))
    model = ReducedModel(a=a, b=b, C=big_c, alpha=alpha)

    extras = rpt.CheckReport(
        (
            wiener_flag,
            rpt.item(
                "direction_limit",
                True,
                value=g0_residual,
                tolerance=DIRECTION_TOL,
                detail=f"limit direction {np.round(g0, 6)}",
            ),
            rpt.item(
                "affinity_residual",
                True,
                value=affinity_residual,
                tolerance=AFFINITY_TOL,
            ),
            rpt.item(
                "intercept_zero",
                True,
                value=intercept_worst,
                tolerance=intercept_tol,
                detail="state-independent jump exponent",
            ),
        )
    )
    report = mart.merged(pos, variation, balance, wiener, extras, fit_report)
    return model, report


def stable_generating_condition(
    G,
    spherical: SphericalMeasure,
    alpha: float,
    x_grid=None,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
):
    """Test the closed-form generating condition for a stable spec:
    the directional moment I(x) = int <G(x), xi>^alpha lambda(dxi) must
    be linear through the origin in x.

    Returns (coefficient, CheckReport) where coefficient = c_alpha *
    slope is the coefficient of b^alpha in the level-proportional
    exponent.  Directions with negative inner products raise
    NegativeDirection.
    """
    if not (1.0 < alpha < 2.0):
        raise ValueError("stable index must lie in (1, 2)")
    x_grid = np.asarray(X_GRID_DEFAULT if x_grid is None else x_grid, dtype=float)

    moments = np.empty_like(x_grid)
    degenerate = True
    for i, x in enumerate(x_grid):
        g = np.asarray(G(float(x)), dtype=float)
        scale = float(np.linalg.norm(g))
        if scale > 0.0:
            degenerate = False

        def fn(dirs, _g=g, _s=scale):
            inner = dirs @ _g
            if np.any(inner < -1e-12 * max(_s, 1.0)):
                raise NegativeDirection(
                    "volatility direction leaves the support half-space"
                )
            return np.clip(inner, 0.0, None) ** alpha

        moments[i] = integrate_over_directions(spherical, fn)

    if degenerate:
        it = rpt.CheckItem(
            "stable_generating_linearity",
            rpt.WARN,
            value=0.0,
            detail="G vanishes on the whole grid",
        )
        return 0.0, rpt.CheckReport((it,))

    slope = float(np.dot(x_grid, moments) / np.dot(x_grid, x_grid))
    floor = 1e-30 * max(1.0, float(np.max(np.abs(moments))))
    scale = np.maximum(np.maximum(np.abs(moments), abs(slope) * x_grid), floor)
    residual = float(np.max(np.abs(moments - slope * x_grid) / scale))
    coefficient = stable_coefficient(alpha) * slope
    report = rpt.CheckReport(
        (
            rpt.item(
                "stable_generating_linearity",
                residual < 1e-6,
                value=residual,
                tolerance=1e-6,
                detail=f"directional moment slope {slope:.6g}",
            ),
        )
    )
    return coefficient, report


def apply_generator(
    model: GeneratingModel,
    lam: float,
    x: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """Apply the affine generator to the exponential f(y) = e^(-lam y)
    at the point x, integrating the jump terms by quadrature with the
    bounded truncation kernel.

    The jump integrand e^(-lam v) - 1 + lam (1 wedge v) is evaluated as
    the compensated kernel minus lam (v-1)^+ so the small-v cancellation
    stays exact; the drift correction int_(1,inf) (1-v) rho(dv) is kept
    as a separate literal term.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    f = float(np.exp(-lam * x))

    def jump_kernel(v):
        v = np.asarray(v, dtype=float)
        return compensated_exp(lam * v) - lam * np.maximum(v - 1.0, 0.0)

    def tail_drift(v):
        v = np.asarray(v, dtype=float)
        return 1.0 - v

    def integrate(measure, fn, exponents):
        if measure.is_zero:
            return 0.0
        res = radial_integral(measure, fn, cfg, weight_exponents=exponents)
        if res.status != CONVERGED:
            from .exceptions import DivergentIntegral

            raise DivergentIntegral("generator jump integral did not converge")
        return res.value

    def tail_integral(measure):
        if measure.is_zero:
            return 0.0
        res = radial_integral(
            measure, tail_drift, cfg, lo=1.0, weight_exponents=(1.0, 1.0)
        )
        if res.status != CONVERGED:
            from .exceptions import DivergentIntegral

            raise DivergentIntegral("generator drift integral did not converge")
        return res.value

    jump = integrate(model.nu_G0, jump_kernel, (2.0, 0.0)) + x * integrate(
        model.mu, jump_kernel, (2.0, 0.0)
    )
    drift = (
        model.a * x
        + model.b
        + tail_integral(model.nu_G0)
        + x * tail_integral(model.mu)
    )
    return model.c * x * lam * lam * f - lam * drift * f + jump * f
