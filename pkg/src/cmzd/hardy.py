"""Rational Hardy-space functions and half-line Fourier utilities.

Initial data lives in L2+(R): square-integrable boundary traces of functions
holomorphic in the upper half-plane, i.e. Fourier transforms supported on
[0, infinity).  We represent such data exactly as u0 = P/Q where Q(y) =
prod_k (y + pbar_k) with Im p_k < 0, so every pole of u0 sits strictly below
the real axis.  Partial-fraction residues, the L2 norm, the Szego projector,
and half-line Fourier samples all follow from residue calculus and are the
primitives the branch, limit, and operator modules build on.

Fourier convention, fixed repo-wide:  uhat(xi) = int u(x) exp(-i xi x) dx,
with inverse (1/2pi) int uhat exp(+i xi x) dxi.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad


class PoleInUpperHalfPlane(ValueError):
    """A pole parameter p_k has Im(p_k) >= 0, so u0 would leave the Hardy space."""


class RepeatedPole(ValueError):
    """Two pole parameters coincide to within the separation tolerance."""


class DegreeTooHigh(ValueError):
    """Numerator degree exceeds N-1, so u0 would not be square-integrable."""


class EvalAtPole(ValueError):
    """Evaluation point collides with a pole of u0."""


class ResidueFormulaInconsistent(ArithmeticError):
    """The residue closure for the L2 norm produced a non-real value."""


class TailNotNegligible(ValueError):
    """The projector integrand still carries mass beyond the truncation radius."""


# pole-collision guard used by make_rational and evaluate
_POLE_GAP = 1e-10
_EVAL_GAP = 1e-12


@dataclass(frozen=True)
class ComplexPolynomial:
    """Dense polynomial with complex coefficients in ascending degree order."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if len(self.coeffs) > 1 and self.coeffs[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        # Horner; supports scalars and numpy arrays alike.
        acc = 0.0 + 0.0j if np.isscalar(z) else np.zeros_like(np.asarray(z, dtype=complex))
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self) -> "ComplexPolynomial":
        if self.degree == 0:
            return ComplexPolynomial((0.0,))
        return ComplexPolynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def conj_reflected(self) -> "ComplexPolynomial":
        """Coefficient-conjugated polynomial; equals conj(p(conj(y)))."""
        return ComplexPolynomial(tuple(c.conjugate() for c in self.coeffs))

    def multiply(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        prod = np.polymul(self.coeffs[::-1], other.coeffs[::-1])[::-1]
        return ComplexPolynomial(tuple(prod))


class SignMode(enum.Enum):
    """Nonlinearity sign: focusing takes the upper sign of the equation."""

    FOCUSING = "focusing"
    DEFOCUSING = "defocusing"

    @property
    def orientation(self) -> int:
        """+1 focusing, -1 defocusing; upper-sign terms carry +orientation."""
        return 1 if self is SignMode.FOCUSING else -1


@dataclass(frozen=True)
class RationalHardyFunction:
    """u0 = P/Q with Q(y) = prod_k (y + conj(p_k)) and all Im(p_k) < 0.

    residues holds the partial-fraction coefficients c_k of
    sum_k c_k / (y + conj(p_k)); they are computed once in make_rational and
    never recomputed, so two equal inputs always carry identical residues.
    """

    numerator: ComplexPolynomial
    pole_params: tuple
    residues: tuple

    @property
    def N(self) -> int:
        return len(self.pole_params)

    def denominator(self) -> ComplexPolynomial:
        den = ComplexPolynomial((1.0,))
        for p in self.pole_params:
            den = den.multiply(ComplexPolynomial((p.conjugate(), 1.0)))
        return den

    def pole_locations(self) -> tuple:
        """Actual poles of u0, all in the lower half-plane."""
        return tuple(-p.conjugate() for p in self.pole_params)


@dataclass(frozen=True)
class RationalFunction:
    """Ratio of two polynomials; used for the real-axis extension of |u0|^2."""

    num: ComplexPolynomial
    den: ComplexPolynomial

    def __call__(self, y):
        return self.num(y) / self.den(y)

    def derivative_parts(self):
        """(num', den'); the quotient rule is left to callers that need it."""
        return self.num.derivative(), self.den.derivative()


def make_rational(numerator: ComplexPolynomial, pole_params: Sequence[complex]) -> RationalHardyFunction:
    """Validate (P, p_k) and compute the partial-fraction residues.

    Raises PoleInUpperHalfPlane, RepeatedPole, or DegreeTooHigh when the data
    would leave the admissible class.
    """
    poles = tuple(complex(p) for p in pole_params)
    if not poles:
        raise ValueError("need at least one pole parameter")
    for p in poles:
        if p.imag >= 0:
            raise PoleInUpperHalfPlane(f"Im(p) must be negative, got {p}")
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            if abs(poles[i] - poles[j]) < _POLE_GAP:
                raise RepeatedPole(f"poles {poles[i]} and {poles[j]} coincide")
    if numerator.degree > len(poles) - 1:
        raise DegreeTooHigh(
            f"deg P = {numerator.degree} exceeds N-1 = {len(poles) - 1}"
        )
    residues = []
    for k, pk in enumerate(poles):
        node = -pk.conjugate()
        denom = 1.0 + 0.0j
        for j, pj in enumerate(poles):
            if j != k:
                denom *= node + pj.conjugate()
        residues.append(numerator(node) / denom)
    return RationalHardyFunction(numerator, poles, tuple(residues))


def evaluate(u: RationalHardyFunction, z) -> complex:
    """u0(z) by Horner evaluation of P and Q; rejects z on top of a pole."""
    for loc in u.pole_locations():
        if abs(z - loc) < _EVAL_GAP:
            raise EvalAtPole(f"z = {z} hits the pole at {loc}")
    return u.numerator(z) / u.denominator()(z)


def modulus_squared_extension(u: RationalHardyFunction) -> RationalFunction:
    """The rational extension v0 = P Pbar / (Q Qbar) of |u0|^2 off the real axis.

    On real y this equals |u0(y)|^2; its coefficients are realified since the
    products are conjugation-symmetric by construction.
    """
    num = u.numerator.multiply(u.numerator.conj_reflected())
    den = u.denominator().multiply(u.denominator().conj_reflected())
    num_r = ComplexPolynomial(tuple(c.real for c in num.coeffs))
    den_r = ComplexPolynomial(tuple(c.real for c in den.coeffs))
    return RationalFunction(num_r, den_r)


def l2_norm_sq(u: RationalHardyFunction) -> float:
    """||u0||^2 via the residue closure 2 pi i sum_k conj(c_k) u0(-p_k).

    Closing int |u0|^2 over the upper half-plane picks up exactly the poles of
    conj(u0) at -p_k.  The sum must come out real; a residual imaginary part
    beyond 1e-10 signals corrupted residues.
    """
    total = 0.0 + 0.0j
    for ck, pk in zip(u.residues, u.pole_params):
        total += ck.conjugate() * evaluate(u, -pk)
    total *= 2.0j * math.pi
    if abs(total.imag) > 1e-10:
        raise ResidueFormulaInconsistent(
            f"imaginary residue remainder {total.imag:.3e}"
        )
    return total.real


def szego_project_pv(h: Callable, x: float, S: float = 200.0, tol: float = 1e-8) -> complex:
    """Projector onto L2+ by the principal-value formula.

    Pi h(x) = h(x)/2 - (i/2pi) int_0^infty (h(x+s) - h(x-s))/s ds.  The s -> 0
    integrand tends to 2 h'(x) and is finite, so plain adaptive panels suffice.
    Beyond S the integrand is modeled as a fitted power A/s^p (exact for the
    1/s^2 tails every Hardy rational produces); decay slower than s^-1.2 is
    not integrable enough to model and is rejected.
    """

    def integrand(s):
        return (h(x + s) - h(x - s)) / s

    g1 = complex(integrand(S))
    g2 = complex(integrand(2.0 * S))
    tail = 0.0 + 0.0j
    if abs(g1) > tol / S:
        if abs(g2) >= abs(g1):
            raise TailNotNegligible(
                f"integrand not decaying at S = {S}: |g(2S)| = {abs(g2):.2e}"
            )
        p = math.log2(abs(g1) / abs(g2)) if abs(g2) > 0 else 8.0
        if p <= 1.2:
            raise TailNotNegligible(
                f"integrand ~ s^-{p:.2f} beyond S = {S}; tail not integrable enough"
            )
        tail = g1 * S / (min(p, 8.0) - 1.0)

    re, _ = quad(lambda s: integrand(s).real, 0.0, S, limit=200, epsabs=tol, epsrel=tol)
    im, _ = quad(lambda s: integrand(s).imag, 0.0, S, limit=200, epsabs=tol, epsrel=tol)
    return h(x) / 2.0 - (1j / (2.0 * math.pi)) * (complex(re, im) + tail)


def fourier_halfline(u: RationalHardyFunction, xi) -> np.ndarray:
    """uhat(xi_j) = -2 pi i sum_k c_k exp(i xi_j p_k-bar) for xi_j >= 0.

    Closed form by residues; each term decays like exp(-xi Im(pbar_k)).
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("half-line samples need xi >= 0")
    out = np.zeros(xi.shape, dtype=complex)
    for ck, pk in zip(u.residues, u.pole_params):
        out += ck * np.exp(1j * xi * pk.conjugate())
    return -2j * math.pi * out
