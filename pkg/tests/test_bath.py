"""Spectral density, memory kernel, and self-energy.

The kernel and self-energy each have two independent evaluation routes
(closed form vs direct quadrature); the tests here pin them against each
other rather than against copied constants wherever possible.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from gaah.bath import (
    BathParams,
    ResiduePrescription,
    SigmaMode,
    memory_kernel,
    memory_kernel_integral,
    self_energy,
    self_energy_closed_form,
    self_energy_eval,
    spectral_density,
    spectral_weight,
)
from gaah.errors import ParameterError

HALF = ResiduePrescription.HALF
FULL = ResiduePrescription.FULL


def kernel_by_fourier_quadrature(b: BathParams, t: float,
                                 omega_max: float = 400.0) -> complex:
    """Independent route: f(t) = int_0^W J(w) e^{-iwt} dw by oscillatory
    quadrature.  W = 400 leaves a tail below 1e-15 for the default cutoff."""
    re, _ = quad(lambda w: spectral_density(b, w), 0.0, omega_max,
                 weight="cos", wvar=t, limit=2000)
    im, _ = quad(lambda w: spectral_density(b, w), 0.0, omega_max,
                 weight="sin", wvar=t, limit=2000)
    return re - 1j * im


class TestParams:
    def test_defaults(self, bath):
        assert (bath.eta, bath.omega_c, bath.s) == (0.1, 10.0, 1.0)

    def test_validation(self):
        with pytest.raises(ParameterError, match="bath.eta"):
            BathParams(eta=-0.1)
        with pytest.raises(ParameterError, match="bath.omega_c"):
            BathParams(omega_c=0.0)
        with pytest.raises(ParameterError, match="bath.s"):
            BathParams(s=0.0)

    def test_decoupled_is_allowed(self):
        assert BathParams(eta=0.0).eta == 0.0


class TestSpectralDensity:
    def test_zero_frequency(self, bath):
        assert spectral_density(bath, 0.0) == 0.0

    def test_ohmic_value_at_cutoff(self, bath):
        # s = 1: J(omega_c) = eta * omega_c * e^-1.
        assert spectral_density(bath, 10.0) == pytest.approx(
            0.1 * 10.0 * math.exp(-1.0), rel=1e-14)

    def test_sub_ohmic_value(self):
        b = BathParams(eta=0.2, omega_c=5.0, s=0.5)
        w = 2.0
        expected = 0.2 * 5.0 ** 0.5 * w ** 0.5 * math.exp(-w / 5.0)
        assert spectral_density(b, w) == pytest.approx(expected, rel=1e-14)

    def test_array_input(self, bath):
        w = np.array([0.0, 1.0, 10.0])
        out = spectral_density(bath, w)
        assert out.shape == (3,)
        assert out[2] == pytest.approx(spectral_density(bath, 10.0), rel=1e-15)

    def test_negative_frequency_rejected(self, bath):
        with pytest.raises(ParameterError, match="omega"):
            spectral_density(bath, -0.1)

    @given(st.floats(0.0, 200.0), st.floats(0.25, 3.0))
    def test_nonnegative(self, w, s):
        assert spectral_density(BathParams(s=s), w) >= 0.0

    def test_total_weight_ohmic(self, bath):
        # int_0^inf eta w e^{-w/wc} dw = eta * wc^2 = 10.
        assert spectral_weight(bath) == pytest.approx(10.0, rel=1e-10)

    def test_truncated_weight_smaller(self, bath):
        assert spectral_weight(bath, 30.0) < spectral_weight(bath)


class TestMemoryKernel:
    def test_initial_value(self, bath):
        # f(0) = eta * Gamma(s+1) * omega_c^2 = 10 at the defaults.
        assert memory_kernel(bath, 0.0) == pytest.approx(10.0 + 0.0j, abs=1e-12)

    @pytest.mark.parametrize("t", [0.0, 0.1, 0.5, 1.0, 3.0])
    def test_closed_form_vs_fourier_quadrature_ohmic(self, bath, t):
        assert memory_kernel(bath, t) == pytest.approx(
            kernel_by_fourier_quadrature(bath, t), abs=1e-6)

    @pytest.mark.parametrize("s", [0.5, 2.0])
    def test_closed_form_vs_fourier_quadrature_other_exponents(self, s):
        b = BathParams(eta=0.3, omega_c=4.0, s=s)
        for t in (0.2, 1.5):
            assert memory_kernel(b, t) == pytest.approx(
                kernel_by_fourier_quadrature(b, t, omega_max=200.0), abs=1e-6)

    @pytest.mark.parametrize("t", [0.0, 0.3, 2.0])
    def test_truncated_kernel_vs_quadrature(self, bath, t):
        got = memory_kernel(bath, t, omega_max=80.0)
        expected = kernel_by_fourier_quadrature(bath, t, omega_max=80.0)
        assert got == pytest.approx(expected, abs=1e-6)

    def test_truncation_limit_recovers_full(self, bath):
        for t in (0.0, 0.7):
            assert memory_kernel(bath, t, omega_max=4000.0) == pytest.approx(
                memory_kernel(bath, t), abs=1e-12)

    def test_truncation_requires_ohmic(self):
        with pytest.raises(ParameterError, match="s = 1"):
            memory_kernel(BathParams(s=0.5), 1.0, omega_max=80.0)
        with pytest.raises(ParameterError, match="omega_max"):
            memory_kernel(BathParams(), 1.0, omega_max=0.0)

    def test_negative_time_rejected(self, bath):
        with pytest.raises(ParameterError, match="t >= 0"):
            memory_kernel(bath, -0.5)

    def test_array_input(self, bath):
        t = np.linspace(0.0, 2.0, 5)
        out = memory_kernel(bath, t)
        assert out.shape == (5,)
        assert out[0] == pytest.approx(10.0 + 0.0j, abs=1e-12)

    @given(st.floats(0.0, 100.0))
    def test_bounded_by_initial_value(self, t):
        b = BathParams()
        assert abs(memory_kernel(b, t)) <= abs(memory_kernel(b, 0.0)) + 1e-12

    @pytest.mark.parametrize("t", [0.4, 1.1, 5.0])
    def test_cumulative_integral(self, bath, t):
        re, _ = quad(lambda u: memory_kernel(bath, u).real, 0.0, t, limit=400)
        im, _ = quad(lambda u: memory_kernel(bath, u).imag, 0.0, t, limit=400)
        assert memory_kernel_integral(bath, t) == pytest.approx(
            re + 1j * im, abs=1e-10)


class TestSelfEnergy:
    @pytest.mark.parametrize("x", [-5.0, -0.5, 0.5, 2.9522, 6.0, 9.0])
    def test_closed_form_vs_quadrature(self, bath, x):
        # Criterion: two independent routes (exp-integral closed form vs
        # subtracted principal-value quadrature) agree to 1e-8.
        assert self_energy(bath, x, HALF) == pytest.approx(
            self_energy_closed_form(bath, x, HALF), abs=1e-8)

    def test_pinned_negative_axis_value(self, bath):
        assert self_energy(bath, -5.0, HALF) == pytest.approx(
            -0.538544683758 + 0.0j, abs=1e-9)

    def test_value_at_zero(self, bath):
        # Both routes reduce to -eta * omega_c at E = 0.
        assert self_energy(bath, 0.0, HALF) == pytest.approx(-1.0 + 0.0j, abs=1e-9)
        assert self_energy_closed_form(bath, 0.0, HALF) == pytest.approx(
            -1.0 + 0.0j, abs=1e-12)

    def test_decoupled_bath(self):
        assert self_energy(BathParams(eta=0.0), 2.0, HALF) == 0.0

    def test_negative_axis_is_real(self, bath):
        assert self_energy(bath, -3.0, HALF).imag == 0.0

    def test_residue_term_structure(self, bath):
        # At x > 0 the imaginary part is exactly -c * J(x).
        x = 2.5
        for p in (HALF, FULL):
            assert self_energy(bath, x, p).imag == pytest.approx(
                -p.residue_factor * spectral_density(bath, x), rel=1e-12)

    @given(st.floats(0.05, 50.0))
    def test_prescriptions_differ_only_by_residue_factor(self, x):
        b = BathParams()
        half = self_energy(b, x, HALF)
        full = self_energy(b, x, FULL)
        assert half.real == full.real
        assert full.imag == pytest.approx(2.0 * half.imag, rel=1e-12)
        assert half.imag < 0.0

    def test_sub_ohmic_quadrature_runs(self):
        b = BathParams(s=0.5)
        sigma = self_energy(b, 3.0, HALF)
        assert sigma.imag == pytest.approx(
            -HALF.residue_factor * spectral_density(b, 3.0), rel=1e-12)
        with pytest.raises(ParameterError, match="s = 1"):
            self_energy_closed_form(b, 3.0)

    def test_guard_range(self, bath):
        with pytest.raises(ParameterError, match="guard"):
            self_energy(bath, 150.0)
        with pytest.raises(ParameterError, match="guard"):
            self_energy_closed_form(bath, -150.0)

    def test_real_part_continuous_at_zero(self, bath):
        below = self_energy(bath, -1e-4, HALF)
        above = self_energy(bath, 1e-4, HALF)
        assert above.real == pytest.approx(below.real, abs=1e-3)


class TestSigmaMode:
    def test_auto_resolution(self):
        assert SigmaMode.AUTO.resolve(BathParams()) is SigmaMode.CONTINUED
        assert SigmaMode.AUTO.resolve(BathParams(s=1.5)) is SigmaMode.REAL_AXIS
        assert SigmaMode.REAL_AXIS.resolve(BathParams()) is SigmaMode.REAL_AXIS
        assert SigmaMode.CONTINUED.resolve(BathParams()) is SigmaMode.CONTINUED

    def test_continued_matches_real_axis_on_real_axis(self, bath):
        E = 2.9522
        a = self_energy_eval(bath, E, HALF, SigmaMode.REAL_AXIS)
        b = self_energy_eval(bath, E, HALF, SigmaMode.CONTINUED)
        assert b == pytest.approx(a, abs=1e-8)

    def test_continued_requires_ohmic(self):
        with pytest.raises(ParameterError, match="s = 1"):
            self_energy_eval(BathParams(s=0.5), 2.0, HALF, SigmaMode.CONTINUED)

    def test_continued_requires_positive_real_part(self, bath):
        with pytest.raises(ParameterError, match="Re"):
            self_energy_eval(bath, -1.0 - 0.1j, HALF, SigmaMode.CONTINUED)

    def test_continued_smooth_off_axis(self, bath):
        # Small excursions off the axis move the value only slightly.
        on = self_energy_eval(bath, 2.9522, HALF, SigmaMode.CONTINUED)
        off = self_energy_eval(bath, 2.9522 - 1e-4j, HALF, SigmaMode.CONTINUED)
        assert abs(off - on) < 1e-3
