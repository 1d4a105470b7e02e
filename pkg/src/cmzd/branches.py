"""Branch structure of the characteristic equation y -/+ 2t|u0(y)|^2 = x.

For rational data the equation clears to a monic real polynomial of degree
2N+1, so the multivalued Burgers branches at a point (t, x) are polynomial
roots: an odd number 2l+1 of simple real roots interleaved with N-l conjugate
pairs (generically).  This module builds that polynomial, finds and classifies
its roots, and locates the shock time and the finite exceptional set of
critical x-values where roots collide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .hardy import (
    ComplexPolynomial,
    RationalHardyFunction,
    SignMode,
    modulus_squared_extension,
)


class EigenSolverFailure(RuntimeError):
    """Companion-matrix eigensolve failed or the polished residual is too large."""


class UnpairedComplexRoot(RuntimeError):
    """Non-real roots failed to pair into conjugates; upstream roots are corrupt."""


class WindowTooNarrow(ValueError):
    """The scan window does not bracket all sign changes of gamma_t - x."""


class EvenRootCount(RuntimeError):
    """Sign-change scan found an even root count; resolution is insufficient."""


class DegenerateBranchSet(ValueError):
    """Branch data at this (t, x) is degenerate (collided roots or flat gamma_t)."""


# two real roots closer than this, or |gamma_t'| below it, flags degeneracy
_DEGENERACY_TOL = 1e-6


@dataclass(frozen=True)
class BranchSet:
    """Classified roots of the branch polynomial at one (t, x).

    real_roots is ascending, has odd length 2*ell + 1, and pairs with
    gamma_prime entrywise; upper_roots holds one representative (Im > 0) per
    conjugate pair.  Which member of a pair is stored is a labeling
    convention, not data: the conjugate is implied.
    """

    t: float
    x: float
    sign: SignMode
    real_roots: tuple
    upper_roots: tuple
    ell: int
    degenerate: bool
    gamma_prime: tuple

    def system_nodes(self) -> tuple:
        """Even-indexed real roots plus the upper representatives.

        These N+1 points index the rows of the rank-(N+1) linear systems
        behind the determinant and finite-rank routes.
        """
        return tuple(self.real_roots[0::2]) + self.upper_roots


def _branch_poly_coeffs(u: RationalHardyFunction, t: float, x, sign: SignMode) -> np.ndarray:
    """Ascending complex coefficients of (y - x) Q Qbar -/+ 2t P Pbar.

    x may be complex here; branch_polynomial realifies for real x, while the
    operator module evaluates at resolvent points x + i delta directly.
    """
    qq = u.denominator().multiply(u.denominator().conj_reflected())
    pp = u.numerator.multiply(u.numerator.conj_reflected())
    qq_c = np.asarray(qq.coeffs, dtype=complex)
    pp_c = np.asarray(pp.coeffs, dtype=complex)
    coeffs = np.zeros(len(qq_c) + 1, dtype=complex)
    coeffs[1:] += qq_c          # y * QQbar
    coeffs[: len(qq_c)] -= x * qq_c
    coeffs[: len(pp_c)] -= sign.orientation * 2.0 * t * pp_c
    return coeffs


def branch_polynomial(u: RationalHardyFunction, t: float, x: float, sign: SignMode) -> ComplexPolynomial:
    """Monic degree-(2N+1) real polynomial whose roots solve gamma_t(y) = x."""
    coeffs = _branch_poly_coeffs(u, t, float(x), sign)
    scale = np.max(np.abs(coeffs))
    if np.max(np.abs(coeffs.imag)) > 1e-12 * max(scale, 1.0):
        raise ArithmeticError("branch polynomial coefficients failed to realify")
    return ComplexPolynomial(tuple(coeffs.real))


def polynomial_roots(p: ComplexPolynomial) -> list:
    """All roots via companion-matrix eigenvalues plus Newton polishing.

    np.roots balances the companion matrix internally; the polish step is
    mandatory because the determinant formulas downstream amplify root error.
    """
    if p.degree < 1:
        raise ValueError("need degree >= 1")
    desc = np.asarray(p.coeffs[::-1], dtype=complex)
    try:
        roots = np.roots(desc)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(roots)):
        raise EigenSolverFailure("companion eigensolve returned non-finite roots")
    dp = p.derivative()
    polished = []
    for y in roots:
        for _ in range(3):
            d = dp(y)
            if abs(d) < 1e-300:
                break
            step = p(y) / d
            y = y - step
            if abs(step) < 1e-15 * (1.0 + abs(y)):
                break
        polished.append(y)
    norm = max(abs(c) for c in p.coeffs)
    for y in polished:
        if abs(p(y)) > 1e-10 * norm * (1.0 + abs(y)) ** p.degree:
            raise EigenSolverFailure(f"polished residual too large at root {y}")
    return polished


def _gamma_prime_at(u: RationalHardyFunction, t: float, sign: SignMode, y: float) -> float:
    v0 = modulus_squared_extension(u)
    a, b = v0.num, v0.den
    da, db = a.derivative(), b.derivative()
    dv = (da(y) * b(y) - a(y) * db(y)) / b(y) ** 2
    return float((1.0 - sign.orientation * 2.0 * t * dv).real)


def classify(
    roots: Sequence[complex],
    t: float,
    x: float,
    u: RationalHardyFunction,
    sign: SignMode,
    tol_im: float = None,
) -> BranchSet:
    """Split roots into real (snapped) and upper-half conjugate representatives.

    tol_im defaults to 1e-8 * (1 + |y|) per root.  Borderline and collided
    configurations are flagged degenerate, never repaired; the limit formulas
    hold for a.e. x, so callers exclude or nudge instead.
    """
    real_roots = []
    complex_roots = []
    for y in roots:
        tol = tol_im if tol_im is not None else 1e-8 * (1.0 + abs(y))
        if abs(y.imag) <= tol:
            real_roots.append(y.real)
        else:
            complex_roots.append(y)
    if len(complex_roots) % 2 != 0:
        raise UnpairedComplexRoot(f"odd complex-root count {len(complex_roots)}")
    upper = sorted((y for y in complex_roots if y.imag > 0), key=lambda y: y.real)
    lower = sorted((y for y in complex_roots if y.imag < 0), key=lambda y: y.real)
    if len(upper) != len(lower):
        raise UnpairedComplexRoot("upper/lower half-plane counts differ")
    for yu, yl in zip(upper, lower):
        if abs(yu - yl.conjugate()) > 1e-8 * (1.0 + abs(yu)):
            raise UnpairedComplexRoot(f"roots {yu} and {yl} are not conjugates")
    real_roots.sort()
    gamma_prime = tuple(_gamma_prime_at(u, t, sign, y) for y in real_roots)
    degenerate = any(
        real_roots[i + 1] - real_roots[i] < _DEGENERACY_TOL
        for i in range(len(real_roots) - 1)
    ) or any(abs(g) < _DEGENERACY_TOL for g in gamma_prime)
    return BranchSet(
        t=float(t),
        x=float(x),
        sign=sign,
        real_roots=tuple(real_roots),
        upper_roots=tuple(upper),
        ell=(len(real_roots) - 1) // 2,
        degenerate=degenerate,
        gamma_prime=gamma_prime,
    )


def scan_roots_general(
    v0: Callable,
    dv0: Callable,
    t: float,
    x: float,
    sign: SignMode,
    window=(-50.0, 50.0),
    n_scan: int = 20000,
) -> BranchSet:
    """Real branches of gamma_t(y) = x for general C1 data, by bracketing.

    Works from tabulated callables only, so it is the route for non-rational
    data; on rational inputs it must agree with classify to 1e-10-level.
    upper_roots stays empty: complex branches are invisible to a real scan.
    """
    a, b = float(window[0]), float(window[1])

    def gamma_shift(y):
        return y - sign.orientation * 2.0 * t * v0(y) - x

    if gamma_shift(a) >= 0.0 or gamma_shift(b) <= 0.0:
        raise WindowTooNarrow(f"gamma_t - x does not change sign across [{a}, {b}]")
    ys = np.linspace(a, b, n_scan + 1)
    vals = ys - sign.orientation * 2.0 * t * np.asarray([v0(y) for y in ys]) - x
    roots = []
    for i in range(n_scan):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(ys[i])
        elif va * vb < 0.0:
            roots.append(brentq(gamma_shift, ys[i], ys[i + 1], xtol=1e-12, rtol=8.9e-16))
    if vals[-1] == 0.0:
        roots.append(ys[-1])
    if len(roots) % 2 == 0:
        raise EvenRootCount(f"found {len(roots)} roots; raise n_scan")
    gamma_prime = tuple(1.0 - sign.orientation * 2.0 * t * dv0(y) for y in roots)
    degenerate = any(
        roots[i + 1] - roots[i] < _DEGENERACY_TOL for i in range(len(roots) - 1)
    ) or any(abs(g) < _DEGENERACY_TOL for g in gamma_prime)
    return BranchSet(
        t=float(t),
        x=float(x),
        sign=sign,
        real_roots=tuple(roots),
        upper_roots=(),
        ell=(len(roots) - 1) // 2,
        degenerate=degenerate,
        gamma_prime=gamma_prime,
    )


def shock_time(
    u: RationalHardyFunction,
    sign: SignMode,
    window=(-50.0, 50.0),
    n_scan: int = 20000,
) -> float:
    """First time gamma_t' vanishes: t* = 1 / sup_y (2 * orientation * v0'(y)).

    Returns +inf when the sup is nonpositive (that sign never shocks).
    Grid scan plus bounded local refinement around the best panel.
    """
    v0 = modulus_squared_extension(u)
    a, b = v0.num, v0.den
    da, db = a.derivative(), b.derivative()

    def steepness(y):
        return sign.orientation * 2.0 * (da(y) * b(y) - a(y) * db(y)).real / b(y).real ** 2

    ys = np.linspace(window[0], window[1], n_scan + 1)
    vals = np.asarray([steepness(y) for y in ys])
    i = int(np.argmax(vals))
    lo = ys[max(i - 1, 0)]
    hi = ys[min(i + 1, n_scan)]
    res = minimize_scalar(lambda y: -steepness(y), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    best = max(vals[i], -res.fun)
    if best <= 0.0:
        return math.inf
    return 1.0 / best


def critical_values(
    u: RationalHardyFunction,
    t: float,
    sign: SignMode,
    window=(-50.0, 50.0),
    n_scan: int = 20000,
) -> list:
    """x-values gamma_t(y*) over real critical points y* (gamma_t'(y*) = 0).

    gamma_t' clears to the polynomial B^2 - orientation*2t*(A'B - AB') with
    v0 = A/B, so the critical points come from one rootfind; n_scan is unused
    on this exact path but kept for signature parity with the scan route.
    """
    if t == 0.0:
        return []
    v0 = modulus_squared_extension(u)
    a, b = v0.num, v0.den
    da, db = a.derivative(), b.derivative()
    num_dv = np.polysub(
        np.polymul(da.coeffs[::-1], b.coeffs[::-1]),
        np.polymul(a.coeffs[::-1], db.coeffs[::-1]),
    )
    poly = np.polysub(
        np.polymul(b.coeffs[::-1], b.coeffs[::-1]),
        sign.orientation * 2.0 * t * num_dv,
    )
    poly = np.real_if_close(poly, tol=1e6)
    roots = np.roots(poly)
    out = []
    for y in roots:
        if abs(y.imag) > 1e-8 * (1.0 + abs(y)):
            continue
        yr = y.real
        if yr < window[0] or yr > window[1]:
            continue
        out.append(float(yr - sign.orientation * 2.0 * t * v0(yr).real))
    return sorted(out)


def burgers_branches(bs: BranchSet, u: RationalHardyFunction) -> list:
    """Values v0(y_k) on the real branches: the multivalued Burgers solution."""
    if bs.degenerate:
        raise DegenerateBranchSet(f"degenerate branch set at (t={bs.t}, x={bs.x})")
    v0 = modulus_squared_extension(u)
    return [float(v0(y).real) for y in bs.real_roots]
