"""Closed-form evaluation of the zero-dispersion limit ZD+/-[u0](t, x).

Three independent routes, all driven by the branch data at (t, x):

  rational     P(x) over the product of odd-indexed real roots and the
               lower-half members of the conjugate pairs;
  determinant  ratio of two (N+1)x(N+1) determinants with Cauchy-type
               columns, times the product of u0 over the system nodes;
  branch_phase modulus from the alternating product of |u0| over the real
               branches, phase from a logarithmic quadrature.

The first two are algebra on the same root set; the third needs only |u0|^2
and arg u0 as callables, so it extends to non-rational data.  Agreement of
all three on a grid is the main internal consistency check of the package.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .branches import (
    BranchSet,
    DegenerateBranchSet,
    branch_polynomial,
    classify,
    critical_values,
    polynomial_roots,
    shock_time,
)
from .hardy import RationalHardyFunction, SignMode, evaluate, modulus_squared_extension


class SingularDenominatorDeterminant(ArithmeticError):
    """The denominator determinant vanished; the Cauchy system is singular here."""


class NegativeLogArgument(ArithmeticError):
    """The phase-integrand bracket went negative beyond roundoff tolerance."""


class QuadratureNotConverged(RuntimeError):
    """Adaptive quadrature error estimate exceeds the requested tolerance."""


class StencilCrossesShock(ValueError):
    """A Burgers finite-difference stencil point lies at or beyond the shock."""


ROUTES = ("rational", "determinant", "branch_phase", "operator")

# bracket values in (-NEG_LOG_TOL, 0] are clamped to +1e-300; more negative aborts
_NEG_LOG_TOL = 1e-10
NEGATIVE_LOG_CLAMPS = 0


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature knobs for the phase integral and field evaluation."""

    cancel_eps: float = 1e-6     # offset used at the removable 0/0 radii
    crit_eps: float = 1e-4       # exclusion distance from critical x-values
    epsabs: float = 1e-11
    epsrel: float = 1e-11
    tail_bracket_tol: float = 1e-10


@dataclass(frozen=True)
class ZDSample:
    t: float
    x: float
    value: complex
    modulus: float
    phase: float
    ell: int
    route: str

    @staticmethod
    def from_value(t, x, value, ell, route) -> "ZDSample":
        if route not in ROUTES:
            raise ValueError(f"unknown route {route!r}")
        value = complex(value)
        return ZDSample(
            t=float(t),
            x=float(x),
            value=value,
            modulus=abs(value),
            phase=cmath.phase(value),
            ell=int(ell),
            route=route,
        )


@dataclass(frozen=True)
class Excluded:
    """Marker for a grid point skipped near the critical set (or on error)."""

    x: float
    critical_value: float
    reason: str


@dataclass(frozen=True)
class ZDField:
    t: float
    xs: np.ndarray
    samples: tuple

    def valid_samples(self):
        return [s for s in self.samples if isinstance(s, ZDSample)]


def zd_rational(u: RationalHardyFunction, t, x, sign: SignMode, bs: BranchSet) -> ZDSample:
    """P(x) / [prod over odd real roots (x - y) * prod over pair conjugates (x - wbar)].

    Exact whenever the branch data is; at t = 0 it collapses to u0(x) because
    the surviving factors rebuild Q(x).
    """
    if bs.degenerate:
        raise DegenerateBranchSet(f"degenerate branch set at (t={t}, x={x})")
    den = 1.0 + 0.0j
    for y in bs.real_roots[1::2]:
        den *= x - y
    for w in bs.upper_roots:
        den *= x - w.conjugate()
    value = u.numerator(x) / den
    return ZDSample.from_value(t, x, value, bs.ell, "rational")


def zd_determinant(u: RationalHardyFunction, t, x, sign: SignMode, bs: BranchSet) -> ZDSample:
    """Ratio of the two Cauchy-bordered determinants over the system nodes.

    Algebraically identical to zd_rational by Cramer elimination, but computed
    through LU determinants, so it exercises entirely different numerics.
    """
    if bs.degenerate:
        raise DegenerateBranchSet(f"degenerate branch set at (t={t}, x={x})")
    if t == 0.0:
        # the Cauchy columns hit 0/0 at the pole pairs when t vanishes
        return ZDSample.from_value(t, x, evaluate(u, x), bs.ell, "determinant")
    nodes = bs.system_nodes()
    n = len(nodes)
    if n != u.N + 1:
        raise DegenerateBranchSet(f"expected {u.N + 1} system nodes, got {n}")
    for y in nodes:
        for p in u.pole_params:
            if abs(y + p) < 1e-12:
                raise SingularDenominatorDeterminant(f"node {y} collides with -p = {-p}")
    u_at = np.array([evaluate(u, y) for y in nodes])
    cauchy = 1.0 / (np.asarray(nodes)[:, None] + np.asarray(u.pole_params)[None, :])
    m1 = np.ones((n, n), dtype=complex)
    m2 = np.ones((n, n), dtype=complex)
    m1[:, 1:] = cauchy
    m2[:, 1:] = cauchy * u_at[:, None]
    d1 = np.linalg.det(m1)
    d2 = np.linalg.det(m2)
    if d2 == 0 or not np.isfinite(d2):
        raise SingularDenominatorDeterminant(f"denominator determinant {d2} at (t={t}, x={x})")
    value = np.prod(u_at) * d1 / d2
    return ZDSample.from_value(t, x, value, bs.ell, "determinant")


def rational_branch_data(u: RationalHardyFunction):
    """(v0, arg u0) callables adapting rational data to the branch route."""
    v0 = modulus_squared_extension(u)

    def v0_real(y):
        return v0(y).real

    def arg_u0(y):
        return cmath.phase(evaluate(u, y))

    return v0_real, arg_u0


def phase_integral(
    v0: Callable,
    arg_u0: Callable,
    bs: BranchSet,
    sign: SignMode,
    quad_cfg: QuadConfig = QuadConfig(),
) -> float:
    """The phase of the branch-route formula.

    phi(t,x) = arg u0(x) + (1/2pi) * int_0^inf log(bracket(s)) / s ds where

      bracket(s) = (s - o*2t*v0(x+s)) / (-s - o*2t*v0(x-s))
                   * prod_k (x - s - y_k) / (x + s - y_k)

    with o the sign orientation and y_k the real branches.  The bracket tends
    to 1 at both ends; each radius s = |x - y_k| is a removable 0/0, evaluated
    by offsetting to distance cancel_eps and relying on continuity.
    """
    global NEGATIVE_LOG_CLAMPS
    if bs.degenerate:
        raise DegenerateBranchSet(f"degenerate branch set at (t={bs.t}, x={bs.x})")
    t, x = bs.t, bs.x
    if t == 0.0:
        return float(arg_u0(x))
    o2t = sign.orientation * 2.0 * t
    yk = bs.real_roots
    radii = sorted({abs(x - y) for y in yk})

    def bracket(s):
        num = s - o2t * v0(x + s)
        den = -s - o2t * v0(x - s)
        prod = 1.0
        for y in yk:
            prod *= (x - s - y) / (x + s - y)
        return (num / den) * prod

    def integrand(s):
        # snap away from the removable radii; bracket is continuous across them
        for r in radii:
            if abs(s - r) < quad_cfg.cancel_eps:
                s = r + quad_cfg.cancel_eps if s >= r else r - quad_cfg.cancel_eps
                break
        if s <= 0.0:
            s = quad_cfg.cancel_eps
        b = bracket(s)
        if b <= 0.0:
            if b > -_NEG_LOG_TOL:
                globals()["NEGATIVE_LOG_CLAMPS"] += 1
                warnings.warn("phase-integrand bracket clamped at roundoff zero")
                b = 1e-300
            else:
                raise NegativeLogArgument(f"bracket = {b:.3e} at s = {s}, (t={t}, x={x})")
        return math.log(b) / s

    # stability spot-check at each removable radius (continuity across the node)
    for r in radii:
        if r < quad_cfg.cancel_eps:
            continue
        lo = integrand(r - 2 * quad_cfg.cancel_eps)
        hi = integrand(r + 2 * quad_cfg.cancel_eps)
        if abs(hi - lo) > 0.5 * (1.0 + abs(hi) + abs(lo)):
            raise QuadratureNotConverged(f"integrand unstable across radius s = {r}")

    s_break = 2.0 * max(radii, default=1.0) + 10.0 * (1.0 + abs(x))
    # subdivision-limit warnings are redundant: the returned error estimates
    # are checked against the budget right below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        main, main_err = quad(
            integrand, 0.0, s_break,
            points=[r for r in radii if r < s_break],
            limit=300, epsabs=quad_cfg.epsabs, epsrel=quad_cfg.epsrel,
        )
        tail, tail_err = quad(integrand, s_break, np.inf, limit=300,
                              epsabs=quad_cfg.epsabs, epsrel=quad_cfg.epsrel)
    total = main + tail
    if main_err + tail_err > 1e-8 * (1.0 + abs(total)):
        raise QuadratureNotConverged(
            f"quadrature error {main_err + tail_err:.2e} at (t={t}, x={x})"
        )
    return float(arg_u0(x)) + total / (2.0 * math.pi)


def zd_branch(
    v0: Callable,
    arg_u0: Callable,
    bs: BranchSet,
    sign: SignMode,
    quad_cfg: QuadConfig = QuadConfig(),
) -> ZDSample:
    """Branch-and-phase product formula; the only route open to general data.

    value = exp(i phi) * (-o * i * sgn t)^ell * prod_k |u0(y_k)|^((-1)^k)
    over the real branches alone.
    """
    if bs.degenerate:
        raise DegenerateBranchSet(f"degenerate branch set at (t={bs.t}, x={bs.x})")
    t, x = bs.t, bs.x
    if t == 0.0:
        value = math.sqrt(max(v0(x), 0.0)) * cmath.exp(1j * arg_u0(x))
        return ZDSample.from_value(t, x, value, bs.ell, "branch_phase")
    modulus = 1.0
    for k, y in enumerate(bs.real_roots):
        m = math.sqrt(max(v0(y), 0.0))
        modulus = modulus * m if k % 2 == 0 else modulus / m
    phi = phase_integral(v0, arg_u0, bs, sign, quad_cfg)
    prefactor = (-sign.orientation * 1j * math.copysign(1.0, t)) ** bs.ell
    value = cmath.exp(1j * phi) * prefactor * modulus
    return ZDSample.from_value(t, x, value, bs.ell, "branch_phase")


def _sample_one(u, t, x, sign, route, quad_cfg, op=None):
    poly = branch_polynomial(u, t, x, sign)
    bs = classify(polynomial_roots(poly), t, x, u, sign)
    if route == "rational":
        return zd_rational(u, t, x, sign, bs)
    if route == "determinant":
        return zd_determinant(u, t, x, sign, bs)
    if route == "branch_phase":
        v0, arg_u0 = rational_branch_data(u)
        return zd_branch(v0, arg_u0, bs, sign, quad_cfg)
    if route == "operator":
        from .operator import build_halfline, resolve_zd_operator

        if op is None:
            op = build_halfline(u, Xi=40.0, M=1024)
        return resolve_zd_operator(op, t, x, sign)
    raise ValueError(f"unknown route {route!r}")


def zd_field(
    u: RationalHardyFunction,
    t: float,
    xs: Sequence[float],
    sign: SignMode,
    route: str = "rational",
    quad_cfg: QuadConfig = QuadConfig(),
    op=None,
) -> ZDField:
    """Evaluate one route over a grid, excluding the near-critical points.

    Exclusions and per-point failures are recorded in place of samples; the
    field never aborts wholesale.
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly ascending")
    crits = critical_values(u, t, sign)
    if route == "operator" and op is None:
        from .operator import build_halfline

        op = build_halfline(u, Xi=40.0, M=1024)
    samples = []
    for x in xs:
        near = [c for c in crits if abs(x - c) < quad_cfg.crit_eps]
        if near:
            samples.append(Excluded(float(x), near[0], "near-critical"))
            continue
        try:
            samples.append(_sample_one(u, t, float(x), sign, route, quad_cfg, op=op))
        except DegenerateBranchSet:
            nearest = min(crits, key=lambda c: abs(x - c)) if crits else math.nan
            samples.append(Excluded(float(x), nearest, "degenerate"))
        except (SingularDenominatorDeterminant, NegativeLogArgument,
                QuadratureNotConverged) as exc:
            samples.append(Excluded(float(x), math.nan, f"error:{type(exc).__name__}"))
    return ZDField(t=float(t), xs=xs, samples=tuple(samples))


def burgers_residual(
    u: RationalHardyFunction,
    sign: SignMode,
    t: float,
    xs: Sequence[float],
    h_t: float = 1e-3,
    h_x: float = 1e-3,
) -> float:
    """Max |d_t v - o*2v d_x v| over the grid, v = |ZD|^2 by central differences.

    Pre-shock v solves the dispersionless equation classically, so this is a
    pure O(h^2) consistency residual; at or beyond the shock the stencil is
    refused.
    """
    t_star = shock_time(u, sign)
    if t + h_t >= t_star:
        raise StencilCrossesShock(f"t + h_t = {t + h_t} reaches shock time {t_star}")

    def v(tt, xx):
        poly = branch_polynomial(u, tt, xx, sign)
        bs = classify(polynomial_roots(poly), tt, xx, u, sign)
        return zd_rational(u, tt, xx, sign, bs).modulus ** 2

    worst = 0.0
    for x in xs:
        dv_dt = (v(t + h_t, x) - v(t - h_t, x)) / (2.0 * h_t)
        dv_dx = (v(t, x + h_x) - v(t, x - h_x)) / (2.0 * h_x)
        r = dv_dt - sign.orientation * 2.0 * v(t, x) * dv_dx
        worst = max(worst, abs(r))
    return worst
