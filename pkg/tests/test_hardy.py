"""Rational Hardy representation, projector, and Fourier utilities."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from cmzd.hardy import (
    ComplexPolynomial,
    DegreeTooHigh,
    EvalAtPole,
    PoleInUpperHalfPlane,
    RepeatedPole,
    SignMode,
    TailNotNegligible,
    evaluate,
    fourier_halfline,
    l2_norm_sq,
    make_rational,
    modulus_squared_extension,
    szego_project_pv,
)
from conftest import sample_line


# ---------------------------------------------------------------- polynomials

def test_polynomial_rejects_zero_leading_coefficient():
    with pytest.raises(ValueError):
        ComplexPolynomial([1.0, 0.0])


def test_polynomial_degree_and_horner():
    p = ComplexPolynomial([1.0, 2.0, 3.0])
    assert p.degree == 2
    assert p(2.0) == 1.0 + 4.0 + 12.0


def test_polynomial_derivative():
    p = ComplexPolynomial([1.0, 2.0, 3.0])
    assert p.derivative()(1.5) == 2.0 + 6.0 * 1.5


# -------------------------------------------------------------- construction

def test_figure1_residue_is_one(figure1):
    assert figure1.N == 1
    assert abs(figure1.residues[0] - 1.0) < 1e-14


def test_single_pole_imaginary_numerator_residue():
    u = make_rational(ComplexPolynomial([1j]), [-2j])
    assert abs(u.residues[0] - 1j) < 1e-14


def test_degree_bound_enforced():
    with pytest.raises(DegreeTooHigh):
        make_rational(ComplexPolynomial([0.0, 1.0]), [-1j])


def test_upper_half_plane_pole_param_rejected():
    with pytest.raises(PoleInUpperHalfPlane):
        make_rational(ComplexPolynomial([1.0]), [1j])


def test_repeated_pole_params_rejected():
    with pytest.raises(RepeatedPole):
        make_rational(ComplexPolynomial([1.0]), [-1j, -1j + 1e-12])


def test_pole_locations_are_lower_half_reflections(u_two_pole):
    for p, loc in zip(u_two_pole.pole_params, u_two_pole.pole_locations()):
        assert abs(loc - (-np.conj(p))) < 1e-15
        assert loc.imag < 0


# ---------------------------------------------------------------- evaluation

def test_evaluate_at_origin(figure1):
    assert abs(evaluate(figure1, 0.0) - (-1j)) < 1e-14


def test_evaluate_at_i(figure1):
    assert abs(evaluate(figure1, 1j) - (-0.5j)) < 1e-14


def test_evaluate_at_pole_raises(figure1):
    with pytest.raises(EvalAtPole):
        evaluate(figure1, -1j)


# ------------------------------------------------------------------ v0 = |u|^2

def test_modulus_squared_extension_figure1(figure1):
    v0 = modulus_squared_extension(figure1)
    assert abs(v0(0.0) - 1.0) < 1e-12
    assert abs(v0(3.0) - 0.1) < 1e-12


def test_modulus_squared_matches_abs_on_real_axis(u_three_pole):
    v0 = modulus_squared_extension(u_three_pole)
    xs = np.linspace(-7.0, 7.0, 29)
    direct = np.abs(sample_line(u_three_pole, xs)) ** 2
    assert np.max(np.abs(v0(xs) - direct)) < 1e-12


# ---------------------------------------------------------------------- mass

def test_mass_figure1_is_pi(figure1):
    oracle, _ = quad(lambda x: 1.0 / (1.0 + x * x), -np.inf, np.inf)
    assert abs(l2_norm_sq(figure1) - math.pi) < 1e-12
    assert abs(l2_norm_sq(figure1) - oracle) < 1e-10


def test_mass_scales_with_residue_magnitude():
    c = 2.0 - 1.0j
    u = make_rational(ComplexPolynomial([c]), [-1j])
    assert abs(l2_norm_sq(u) - abs(c) ** 2 * math.pi) < 1e-10


def test_figure1_is_focusing_admissible(figure1):
    assert l2_norm_sq(figure1) < 2.0 * math.pi


def test_sign_mode_orientation():
    assert SignMode.FOCUSING.orientation == 1
    assert SignMode.DEFOCUSING.orientation == -1


# ------------------------------------------------------------------ projector

def test_szego_project_lorentzian_at_origin():
    h = lambda x: 1.0 / (1.0 + x * x)
    assert abs(szego_project_pv(h, 0.0) - 0.5) < 1e-7


def test_szego_project_lorentzian_full_form():
    # projection of 1/(1+x^2) is (1+ix)/(2(1+x^2))
    h = lambda x: 1.0 / (1.0 + x * x)
    for x in (-2.0, 0.5, 3.0):
        want = (1.0 + 1j * x) / (2.0 * (1.0 + x * x))
        assert abs(szego_project_pv(h, x) - want) < 1e-7


def test_szego_fixes_hardy_function():
    h = lambda x: 1.0 / (x + 1j)
    for x in (-1.5, 0.0, 2.0):
        assert abs(szego_project_pv(h, x) - h(x)) < 1e-6


def test_szego_real_part_identity():
    # Re(projection) = h/2 for real-valued h
    h = lambda x: x / (1.0 + x ** 4)
    for x in (-1.0, 0.3, 1.7):
        assert abs(szego_project_pv(h, x).real - h(x) / 2.0) < 1e-7


def test_szego_idempotent_through_analytic_form():
    # reapply the projector to the known closed-form output; a second pass
    # must be a fixed point within quadrature tolerance
    g = lambda x: (1.0 + 1j * x) / (2.0 * (1.0 + x * x))
    for x in (-1.0, 0.0, 2.0):
        assert abs(szego_project_pv(g, x) - g(x)) < 1e-5


def test_szego_slow_tail_rejected():
    with pytest.raises(TailNotNegligible):
        szego_project_pv(math.tanh, 1.0)


# -------------------------------------------------------------------- fourier

def test_fourier_halfline_figure1_closed_form(figure1):
    xi = np.array([0.0, 0.5, 1.0, 2.0])
    got = fourier_halfline(figure1, xi)
    want = -2j * math.pi * np.exp(-xi)
    assert np.max(np.abs(got - want)) < 1e-12


def test_fourier_halfline_matches_numeric_integral(figure1):
    # one integration by parts tames the oscillatory 1/x tail: the transform
    # equals (1/(i xi)) * integral of -(x+i)^-2 e^(-i xi x); the real part of
    # the differentiated integrand is even and the imaginary part odd, so two
    # half-line QUADPACK oscillatory integrals assemble the whole thing
    # (the even/odd split matters: QUADPACK's Chebyshev moments silently drop
    # the odd component on a long symmetric window)
    T = 1e4
    fr = lambda x: -(x * x - 1.0) / (x * x + 1.0) ** 2
    fi = lambda x: 2.0 * x / (x * x + 1.0) ** 2
    for xi in (0.5, 1.0, 2.0):
        rc, _ = quad(fr, 0.0, T, weight="cos", wvar=xi, limit=4000)
        is_, _ = quad(fi, 0.0, T, weight="sin", wvar=xi, limit=4000)
        oracle = 2.0 * (rc + is_) / (1j * xi)
        assert abs(fourier_halfline(figure1, xi) - oracle) < 1e-7


def test_fourier_halfline_plancherel(figure1):
    val, _ = quad(lambda xi: abs(-2j * math.pi * np.exp(-xi)) ** 2, 0.0, np.inf)
    assert abs(val / (2.0 * math.pi) - l2_norm_sq(figure1)) < 1e-8


def test_fourier_halfline_at_zero_sums_residues(u_three_pole):
    want = -2j * math.pi * sum(u_three_pole.residues)
    assert abs(fourier_halfline(u_three_pole, 0.0) - want) < 1e-12


def test_fourier_halfline_rejects_negative_frequency(figure1):
    with pytest.raises(ValueError):
        fourier_halfline(figure1, -0.5)


def test_fft_negative_energy_small_for_quadratic_decay(u_two_pole, u_three_pole):
    # box sampling keeps negative-frequency leakage tiny once |u| ~ 1/x^2;
    # slower 1/x tails (single-pole data) need impractically large boxes
    L, M = 640.0, 8192
    x = -L / 2.0 + L * np.arange(M) / M
    k = np.fft.fftfreq(M, d=L / M)
    for u in (u_two_pole, u_three_pole):
        c = np.fft.fft(sample_line(u, x))
        frac = np.sum(np.abs(c[k < 0]) ** 2) / np.sum(np.abs(c) ** 2)
        assert frac <= 1e-8


# ------------------------------------------------------------------ property

def test_residue_reconstruction_random_inputs():
    """Partial fractions rebuild P/Q at random real points."""
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        while True:
            poles = rng.uniform(-3, 3, n) - 1j * rng.uniform(0.3, 3.0, n)
            if all(abs(poles[i] - poles[j]) >= 0.2
                   for i in range(n) for j in range(i + 1, n)):
                break
        deg = int(rng.integers(0, n))
        num = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
        if abs(num[-1]) < 1e-3:
            num[-1] += 1.0
        u = make_rational(ComplexPolynomial(num), poles)
        ys = rng.uniform(-20, 20, 100)
        direct = sample_line(u, ys)
        recon = sum(c / (ys + np.conj(p)) for c, p in zip(u.residues, poles))
        assert np.max(np.abs(recon - direct) / (1.0 + np.abs(direct))) <= 1e-10
