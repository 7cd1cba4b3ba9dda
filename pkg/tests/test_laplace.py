"""Compensated-exponential kernel and Laplace exponents, against the
closed stable forms and the scaling bounds they must satisfy."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma as gamma_fn

from levyreduce import (
    LevySpec,
    NegativeDirection,
    RadialMeasure,
    SphericalMeasure,
    compensated_exp,
    improper_value,
    laplace_jump,
    laplace_radial,
    laplace_total,
    power_radial,
    stable_coefficient,
    stable_exponent,
    stable_spec,
)

from conftest import C_12, C_15


class TestKernel:
    def test_values(self):
        assert compensated_exp(0.0) == 0.0
        assert compensated_exp(1.0) == pytest.approx(np.exp(-1.0), rel=1e-15)
        assert compensated_exp(2.0) == pytest.approx(np.exp(-2.0) + 1.0, rel=1e-15)

    def test_small_argument_series(self):
        z = 1e-8
        assert compensated_exp(z) == pytest.approx(0.5 * z * z, rel=1e-6)

    def test_vectorized(self):
        z = np.array([0.0, 1e-9, 1.0, 30.0])
        vals = compensated_exp(z)
        assert vals.shape == z.shape
        assert np.all(np.diff(vals) > 0)  # strictly increasing

    @settings(max_examples=200, deadline=None)
    @given(
        z=st.floats(min_value=0.0, max_value=50.0),
        t=st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_scaling_bounds(self, z, t):
        # min(1, t^2) H(z) <= H(tz) <= max(1, t^2) H(z)
        h, ht = compensated_exp(z), compensated_exp(t * z)
        slack = 1e-12 * max(1.0, h, ht)
        assert min(1.0, t * t) * h <= ht + slack
        assert ht <= max(1.0, t * t) * h + slack


class TestStableCoefficient:
    def test_closed_forms(self):
        assert stable_coefficient(1.5) == pytest.approx(np.sqrt(np.pi) / 0.75, rel=1e-14)
        assert stable_coefficient(1.2) == pytest.approx(gamma_fn(0.8) / 0.24, rel=1e-14)
        assert stable_coefficient(1.5) == pytest.approx(C_15, rel=1e-14)
        assert stable_coefficient(1.2) == pytest.approx(C_12, rel=1e-14)

    def test_quadrature_identity(self):
        # int_0^inf H(v) v^(-1-alpha) dv reproduces the coefficient
        alpha = 1.5
        val = improper_value(
            lambda v: compensated_exp(v) * v ** (-1.0 - alpha),
            tail_exponents=(alpha - 1.0, 1.0 + alpha),
        )
        assert val == pytest.approx(stable_coefficient(alpha), rel=1e-8)

    def test_rejects_boundary(self):
        for alpha in (1.0, 2.0, 0.5, 2.5):
            with pytest.raises(ValueError):
                stable_coefficient(alpha)


class TestLaplaceRadial:
    def test_stable_closed_form(self):
        assert laplace_radial(power_radial(1.5), 1.0) == pytest.approx(C_15, rel=1e-8)

    def test_zero_argument(self):
        assert laplace_radial(power_radial(1.5), 0.0) == 0.0
        assert laplace_radial(RadialMeasure(atoms=((1.0, 1.0),)), 0.0) == 0.0

    def test_atom_exact(self):
        val = laplace_radial(RadialMeasure(atoms=((1.0, 1.0),)), 2.0)
        assert val == pytest.approx(np.exp(-2.0) + 1.0, rel=1e-14)

    def test_monotone_and_convex(self):
        b = np.linspace(0.1, 8.0, 25)
        j = np.array([laplace_radial(power_radial(1.3), bb) for bb in b])
        assert np.all(np.diff(j) > 0)
        assert np.all(np.diff(j, 2) > -1e-12)

    @pytest.mark.parametrize(
        "rho",
        [
            power_radial(1.5),
            power_radial(1.2, scale=0.7),
            RadialMeasure(atoms=((0.5, 2.0), (3.0, 0.25))),
        ],
        ids=["stable15", "stable12", "atoms"],
    )
    def test_scaling_bounds_per_measure(self, rho):
        rng = np.random.default_rng(7)
        bs = rng.uniform(0.05, 20.0, size=12)
        ts = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), size=12))
        for b, t in zip(bs, ts):
            j, jt = laplace_radial(rho, b), laplace_radial(rho, t * b)
            slack = 1e-9 * max(1.0, j, jt)
            assert min(1.0, t * t) * j <= jt + slack
            assert jt <= max(1.0, t * t) * j + slack


class TestLaplaceJump:
    def test_zero_argument(self, example_spec):
        assert laplace_jump(example_spec, np.zeros(2)) == 0.0

    def test_two_atoms_diagonal(self):
        sph = SphericalMeasure.from_atoms([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        spec = stable_spec(1.5, sph)
        val = laplace_jump(spec, np.array([1.0, 1.0]))
        assert val == pytest.approx(2.0 * C_15, rel=1e-8)

    def test_two_atoms_axis(self):
        sph = SphericalMeasure.from_atoms([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        spec = stable_spec(1.5, sph)
        val = laplace_jump(spec, np.array([2.0, 0.0]))
        assert val == pytest.approx(C_15 * 2.0**1.5, rel=1e-8)

    def test_matches_radial_slice_for_single_atom(self):
        sph = SphericalMeasure.from_atoms([[0.6, 0.8]], [1.0])
        spec = stable_spec(1.4, sph)
        xi = np.array([0.6, 0.8])
        for b in (0.3, 1.0, 5.0):
            whole = laplace_jump(spec, b * xi)
            slice_ = laplace_radial(spec.radial(xi), b)
            assert whole == pytest.approx(slice_, rel=1e-9)

    def test_negative_direction_rejected(self, example_spec):
        with pytest.raises(NegativeDirection):
            laplace_jump(example_spec, np.array([-1.0, 0.0]))


class TestLaplaceTotal:
    def test_pure_diffusion(self, two_atom_spherical):
        spec = LevySpec(2, np.eye(2), two_atom_spherical, lambda xi: RadialMeasure())
        assert laplace_total(spec, np.array([1.0, 1.0])) == pytest.approx(1.0)

    def test_no_diffusion_equals_jump(self, example_spec):
        z = np.array([0.7, 1.3])
        assert laplace_total(example_spec, z) == laplace_jump(example_spec, z)

    def test_sum_of_parts(self):
        sph = SphericalMeasure.from_atoms([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        jump_only = stable_spec(1.5, sph)
        spec = LevySpec(2, np.eye(2), sph, jump_only.radial_family)
        val = laplace_total(spec, np.array([1.0, 1.0]))
        assert val == pytest.approx(1.0 + 2.0 * C_15, rel=1e-8)


class TestStableExponent:
    def test_zero_argument(self, two_atom_spherical):
        assert stable_exponent(two_atom_spherical, 1.5, np.zeros(2)) == 0.0

    def test_two_atoms(self):
        sph = SphericalMeasure.from_atoms([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        val = stable_exponent(sph, 1.5, np.array([1.0, 1.0]))
        assert val == pytest.approx(2.0 * C_15, rel=1e-12)

    def test_matches_laplace_jump_on_stable_spec(self, two_atom_spherical):
        spec = stable_spec(1.5, two_atom_spherical)
        rng = np.random.default_rng(3)
        for _ in range(5):
            z = rng.uniform(0.1, 4.0, size=2)  # admissible: nonnegative products
            closed = stable_exponent(two_atom_spherical, 1.5, z)
            quad = laplace_jump(spec, z)
            assert quad == pytest.approx(closed, rel=1e-6)

    def test_angular_density_form(self):
        uniform = SphericalMeasure.from_angular(2, lambda a: np.ones(a.shape[0]))
        # int_0^2pi max(cos t, 0)^alpha dt for z = e1, restricted measure
        half = SphericalMeasure.from_angular(
            2, lambda a: (np.cos(a[:, 0]) > 0).astype(float)
        )
        val = stable_exponent(half, 1.5, np.array([1.0, 0.0]))
        nodes = np.linspace(-np.pi / 2, np.pi / 2, 20001)
        ref = C_15 * np.trapezoid(np.cos(nodes) ** 1.5, nodes)
        assert val == pytest.approx(ref, rel=1e-4)
        assert stable_exponent(uniform, 1.5, np.zeros(2)) == 0.0
