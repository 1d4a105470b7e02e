"""Branch polynomial, root classification, shock time, critical values."""

import math

import numpy as np
import pytest

from cmzd.branches import (
    BranchSet,
    DegenerateBranchSet,
    WindowTooNarrow,
    branch_polynomial,
    burgers_branches,
    classify,
    critical_values,
    polynomial_roots,
    scan_roots_general,
    shock_time,
)
from cmzd.hardy import ComplexPolynomial, modulus_squared_extension

SQRT2 = math.sqrt(2.0)
TSTAR_FIGURE1 = 4.0 / (3.0 * math.sqrt(3.0))


def branches_at(u, t, x, sign):
    poly = branch_polynomial(u, t, x, sign)
    return classify(polynomial_roots(poly), t, x, u, sign)


# ----------------------------------------------------------- branch polynomial

def test_branch_polynomial_coefficients_focusing(figure1, focusing):
    # (y + 3)(y^2 + 1) - 4 = y^3 + 3y^2 + y - 1
    p = branch_polynomial(figure1, 2.0, -3.0, focusing)
    assert np.allclose(p.coeffs, [-1.0, 1.0, 3.0, 1.0], atol=1e-14)
    # (y - 1)(y^2 + 1) - 4 = y^3 - y^2 + y - 5
    q = branch_polynomial(figure1, 2.0, 1.0, focusing)
    assert np.allclose(q.coeffs, [-5.0, 1.0, -1.0, 1.0], atol=1e-14)


def test_branch_polynomial_is_monic_real_odd_degree(u_three_pole, focusing, defocusing):
    for sign in (focusing, defocusing):
        p = branch_polynomial(u_three_pole, 1.7, 0.3, sign)
        assert p.degree == 2 * u_three_pole.N + 1
        assert p.coeffs[-1] == 1.0
        assert all(complex(c).imag == 0.0 for c in p.coeffs)


def test_branch_polynomial_depends_on_sign_times_t(figure1, focusing, defocusing):
    a = branch_polynomial(figure1, 1.3, 0.7, focusing)
    b = branch_polynomial(figure1, -1.3, 0.7, defocusing)
    assert np.allclose(a.coeffs, b.coeffs, atol=0.0)


# -------------------------------------------------------------------- rootfind

def test_polynomial_roots_linear_and_quadratic():
    assert abs(polynomial_roots(ComplexPolynomial([-2.0, 1.0]))[0] - 2.0) < 1e-14
    roots = sorted(polynomial_roots(ComplexPolynomial([1.0, 0.0, 1.0])), key=lambda z: z.imag)
    assert abs(roots[0] + 1j) < 1e-14
    assert abs(roots[1] - 1j) < 1e-14


def test_polynomial_roots_rejects_constant():
    with pytest.raises(ValueError):
        polynomial_roots(ComplexPolynomial([3.0]))


def test_frozen_roots_three_real_branches(figure1, focusing):
    bs = branches_at(figure1, 2.0, -3.0, focusing)
    want = (-1.0 - SQRT2, -1.0, -1.0 + SQRT2)
    assert bs.ell == 1
    assert bs.upper_roots == ()
    assert np.allclose(bs.real_roots, want, atol=1e-10)


def test_frozen_roots_single_real_branch(figure1, focusing):
    bs = branches_at(figure1, 2.0, 1.0, focusing)
    assert bs.ell == 0
    assert abs(bs.real_roots[0] - 1.8812394010763982) < 1e-10
    assert len(bs.upper_roots) == 1
    assert abs(bs.upper_roots[0] - (-0.44061970053819912 + 1.5696103218899636j)) < 1e-10


def test_zero_time_roots_are_point_plus_pole_pair(figure1, focusing):
    bs = branches_at(figure1, 0.0, 5.0, focusing)
    assert bs.real_roots == (5.0,)
    assert len(bs.upper_roots) == 1
    assert abs(bs.upper_roots[0] - 1j) < 1e-12
    assert bs.ell == 0 and not bs.degenerate


def test_classify_snaps_near_real_roots(figure1, focusing):
    bs = classify([5.0 + 1e-12j, 1j + 1e-12, -1j - 1e-12], 0.0, 5.0, figure1, focusing)
    assert bs.real_roots == (5.0,)
    assert bs.upper_roots[0].imag > 0


def test_system_nodes_count(figure1, u_three_pole, focusing):
    # N+1 nodes: even-indexed real branches plus one per conjugate pair
    bs = branches_at(figure1, 2.0, -3.0, focusing)
    assert len(bs.system_nodes()) == figure1.N + 1
    bs3 = branches_at(u_three_pole, 0.5, 0.1, focusing)
    assert len(bs3.system_nodes()) == u_three_pole.N + 1


def test_conjugates_of_upper_roots_are_roots(u_three_pole, defocusing):
    t, x = 1.1, -0.4
    poly = branch_polynomial(u_three_pole, t, x, defocusing)
    bs = classify(polynomial_roots(poly), t, x, u_three_pole, defocusing)
    scale = max(abs(c) for c in poly.coeffs)
    for y in bs.upper_roots:
        assert abs(poly(y.conjugate())) < 1e-9 * scale


def test_product_over_roots_equals_numerator_product(u_two_pole, u_three_pole, focusing, defocusing):
    # evaluating the monic branch polynomial at y = x kills the (y - x) term:
    # prod_k (x - y_k) = -orientation * 2t * P(x) * conj(P)(conj(x))
    for u in (u_two_pole, u_three_pole):
        for sign in (focusing, defocusing):
            t, x = 1.4, 0.9
            roots = polynomial_roots(branch_polynomial(u, t, x, sign))
            lhs = np.prod([x - y for y in roots])
            pbar = u.numerator.conj_reflected()
            rhs = -sign.orientation * 2.0 * t * u.numerator(x) * pbar(x)
            assert abs(lhs - rhs) < 1e-8 * max(abs(rhs), 1.0)


def test_parity_real_branches_negate_under_time_and_space_flip(figure1, focusing):
    # |u0|^2 is even for the single-pole profile, so gamma_t(y) = x maps to
    # gamma_{-t}(-y) = -x branch for branch
    rng = np.random.default_rng(7)
    for _ in range(200):
        t = float(rng.uniform(-3.0, 3.0))
        x = float(rng.uniform(-6.0, 6.0))
        a = branches_at(figure1, t, x, focusing)
        b = branches_at(figure1, -t, -x, focusing)
        assert a.ell == b.ell
        assert np.allclose(a.real_roots, tuple(-r for r in reversed(b.real_roots)), atol=1e-9)


def test_gamma_prime_signs_alternate(figure1, u_three_pole, focusing):
    # simple real roots of an eventually increasing function alternate slopes
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(300):
        u = figure1 if rng.random() < 0.5 else u_three_pole
        t = float(rng.uniform(0.0, 3.0))
        x = float(rng.uniform(-6.0, 6.0))
        bs = branches_at(u, t, x, focusing)
        if bs.degenerate:
            continue
        for k, g in enumerate(bs.gamma_prime):
            assert (g > 0.0) == (k % 2 == 0)
        checked += 1
    assert checked > 250


# ------------------------------------------------------------------- scanning

def test_scan_agrees_with_polynomial_route(figure1, focusing):
    v0 = lambda y: 1.0 / (1.0 + y * y)
    dv0 = lambda y: -2.0 * y / (1.0 + y * y) ** 2
    for t, x in ((2.0, -3.0), (2.0, 1.0), (0.3, 0.2)):
        scanned = scan_roots_general(v0, dv0, t, x, focusing)
        exact = branches_at(figure1, t, x, focusing)
        assert scanned.ell == exact.ell
        assert np.allclose(scanned.real_roots, exact.real_roots, atol=1e-8)
        assert scanned.upper_roots == ()


def test_scan_zero_time_single_root(focusing):
    v0 = lambda y: 1.0 / (1.0 + y * y)
    dv0 = lambda y: -2.0 * y / (1.0 + y * y) ** 2
    bs = scan_roots_general(v0, dv0, 0.0, 2.5, focusing)
    assert bs.ell == 0
    assert abs(bs.real_roots[0] - 2.5) < 1e-12


def test_scan_window_must_bracket(focusing):
    v0 = lambda y: 1.0 / (1.0 + y * y)
    dv0 = lambda y: -2.0 * y / (1.0 + y * y) ** 2
    with pytest.raises(WindowTooNarrow):
        scan_roots_general(v0, dv0, 2.0, 5.0, focusing, window=(-1.0, 1.0))


# ------------------------------------------------------------------ shock time

def test_shock_time_single_pole(figure1, focusing, defocusing):
    assert abs(shock_time(figure1, focusing) - TSTAR_FIGURE1) < 1e-10
    # |u0|^2 is even, so the defocusing profile steepens at the mirror point
    assert abs(shock_time(figure1, defocusing) - TSTAR_FIGURE1) < 1e-10


def test_shock_time_infinite_on_monotone_window(figure1, focusing):
    # restricted to y > 0 the focusing characteristic speed only flattens
    assert shock_time(figure1, focusing, window=(0.5, 50.0)) == math.inf


def test_past_shock_time_multivalued_region_exists(figure1, focusing):
    assert 2.0 > TSTAR_FIGURE1
    bs = branches_at(figure1, 2.0, -3.0, focusing)
    assert bs.ell >= 1


# ------------------------------------------------------------- critical values

def test_critical_values_empty_before_shock(figure1, focusing):
    assert critical_values(figure1, 0.25, focusing) == []
    assert critical_values(figure1, 0.0, focusing) == []


def test_critical_values_bracket_multivalued_region(figure1, focusing):
    vals = critical_values(figure1, 2.0, focusing)
    assert len(vals) == 2
    assert abs(vals[0] - -4.06352571742514) < 1e-9
    assert abs(vals[1] - -2.723553366099982) < 1e-9
    # the frozen three-branch point sits strictly inside
    assert vals[0] < -3.0 < vals[1]
    # ell flips moving across either endpoint
    left = branches_at(figure1, 2.0, vals[0] - 0.05, focusing)
    right = branches_at(figure1, 2.0, vals[1] + 0.05, focusing)
    assert left.ell == 0 and right.ell == 0


# ------------------------------------------------------------ burgers branches

def test_burgers_branch_values_frozen_point(figure1, focusing):
    bs = branches_at(figure1, 2.0, -3.0, focusing)
    vals = burgers_branches(bs, figure1)
    want = [1.0 / (4.0 + 2.0 * SQRT2), 0.5, 1.0 / (4.0 - 2.0 * SQRT2)]
    assert np.allclose(vals, want, atol=1e-10)
    # alternating product of the branch values is the squared limit modulus
    assert abs(vals[0] * vals[2] / vals[1] - 0.25) < 1e-10


def test_burgers_single_branch_is_initial_profile(figure1, focusing):
    bs = branches_at(figure1, 0.0, 1.25, focusing)
    v0 = modulus_squared_extension(figure1)
    vals = burgers_branches(bs, figure1)
    assert len(vals) == 1
    assert abs(vals[0] - v0(1.25).real) < 1e-12


def test_burgers_rejects_degenerate(figure1, focusing):
    bs = BranchSet(t=1.0, x=0.0, sign=focusing, real_roots=(0.0,),
                   upper_roots=(), ell=0, degenerate=True, gamma_prime=(1.0,))
    with pytest.raises(DegenerateBranchSet):
        burgers_branches(bs, figure1)
