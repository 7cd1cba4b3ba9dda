"""Adaptive quadrature: exactness on panels, improper-endpoint
handling, and divergence classification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyreduce import (
    CONVERGED,
    DIVERGENT,
    DivergentIntegral,
    QuadratureConfig,
    improper_integral,
    improper_value,
    lower_tail_probe,
    panel_integral,
    upper_tail_probe,
)


def test_panel_integral_polynomial():
    val = panel_integral(lambda x: 3.0 * x**2, 0.5, 2.0)
    assert abs(val - (8.0 - 0.125)) < 1e-11


def test_panel_integral_additive_in_range():
    f = np.cos
    whole = panel_integral(f, 0.1, 2.0)
    split = panel_integral(f, 0.1, 0.7) + panel_integral(f, 0.7, 2.0)
    assert abs(whole - split) < 1e-12
    assert abs(whole - (np.sin(2.0) - np.sin(0.1))) < 1e-11


def test_panel_integral_rejects_nonpositive_lower_edge():
    with pytest.raises(ValueError):
        panel_integral(np.cos, 0.0, 1.0)


def test_improper_integral_exponential_tail():
    res = improper_integral(lambda r: np.exp(-r), lo=0.0, hi=np.inf)
    assert res.status == CONVERGED
    assert abs(res.value - 1.0) < 1e-9


def test_improper_integral_endpoint_singularity():
    # integrable singularity r^(-1/2) over (0, 1]
    res = improper_integral(
        lambda r: r**-0.5, lo=0.0, hi=1.0, tail_exponents=(0.5, 0.5)
    )
    assert res.status == CONVERGED
    assert abs(res.value - 2.0) < 1e-8


def test_improper_integral_detects_divergence_at_zero():
    res = improper_integral(lambda r: r**-1.5, lo=0.0, hi=1.0)
    assert res.status == DIVERGENT


def test_improper_integral_detects_divergence_at_infinity():
    res = improper_integral(lambda r: 1.0 / r, lo=1.0, hi=np.inf)
    assert res.status == DIVERGENT


def test_improper_value_raises_on_divergence():
    with pytest.raises(DivergentIntegral):
        improper_value(lambda r: r**-2.0, lo=0.0, hi=1.0)


def test_finite_endpoints_honoured_exactly():
    res = improper_integral(lambda r: np.ones_like(r), lo=0.25, hi=0.75)
    assert res.status == CONVERGED
    assert abs(res.value - 0.5) < 1e-13


def test_tail_probes_classify_power_laws():
    # int_eps^1 r^(-0.5) dr converges, r^(-1.5) diverges
    assert lower_tail_probe(lambda r: r**-0.5).status == CONVERGED
    assert lower_tail_probe(lambda r: r**-1.5).status == DIVERGENT
    # mirrored at infinity
    assert upper_tail_probe(lambda r: r**-1.5).status == CONVERGED
    assert upper_tail_probe(lambda r: r**-0.5).status == DIVERGENT


def test_lower_tail_probe_value():
    res = lower_tail_probe(lambda r: r**-0.5)
    assert abs(res.value - 2.0) < 1e-6


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(eps_low=2.0)


def test_determinism():
    f = lambda r: np.exp(-r) * r**-0.3  # noqa: E731
    a = improper_integral(f, lo=0.0, hi=np.inf, tail_exponents=(0.3, np.inf))
    b = improper_integral(f, lo=0.0, hi=np.inf, tail_exponents=(0.3, np.inf))
    assert a == b


@settings(max_examples=40, deadline=None)
@given(
    p=st.floats(min_value=0.05, max_value=0.9),
    scale=st.floats(min_value=0.1, max_value=10.0),
)
def test_power_singularity_closed_form(p, scale):
    # int_0^1 s r^(-p) dr = s / (1 - p)
    res = improper_integral(
        lambda r, _s=scale, _p=p: _s * r**-_p, lo=0.0, hi=1.0, tail_exponents=(p, p)
    )
    assert res.status == CONVERGED
    assert abs(res.value - scale / (1.0 - p)) < 1e-7 * scale / (1.0 - p)
