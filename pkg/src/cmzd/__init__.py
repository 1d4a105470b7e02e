"""Zero-dispersion limits of the Calogero-Moser derivative NLS.

The small-dispersion equation  i u_t + eps u_xx +/- 2 D Pi(|u|^2) u = 0  has a
weak L2 limit as eps -> 0 whenever the initial data lies in the Hardy space
L2+(R).  This package evaluates that limit for rational initial data by three
independent routes (rational closed form, determinant ratio, branch-and-phase
product), approximates it by a resolvent discretization on the Fourier
half-line, and cross-checks everything against a pseudospectral simulation of
the eps > 0 flow.
"""

from .hardy import (
    ComplexPolynomial,
    RationalHardyFunction,
    SignMode,
    make_rational,
    evaluate,
    modulus_squared_extension,
    l2_norm_sq,
    szego_project_pv,
    fourier_halfline,
)
from .branches import (
    BranchSet,
    branch_polynomial,
    polynomial_roots,
    classify,
    scan_roots_general,
    shock_time,
    critical_values,
    burgers_branches,
)
from .zdl import (
    ZDSample,
    ZDField,
    QuadConfig,
    zd_rational,
    zd_determinant,
    phase_integral,
    zd_branch,
    zd_field,
    burgers_residual,
)
from .operator import (
    HalfLineOperator,
    build_halfline,
    extract_I_plus,
    resolve_zd_operator,
    finite_rank_zd,
    resolve_ueps_operator,
)
from .sim import (
    SimState,
    init_sim,
    step,
    evolve,
    weak_pairings,
    epsilon_sweep,
)

__version__ = "0.1.0"
