"""opcalc: divided differences and contour-integral matrix calculus.

Dense complex matrices stand in for Banach-algebra elements; tensor-algebra
elements are Kronecker matrices.  The package evaluates matrix functions by
circle quadrature against resolvents, divided differences by four independent
routes, interpolation / perturbation expansions with tracked remainders, a
log-propagator integrator for linear matrix ODEs, and half-line operator
integrals rearranged into modular form -- each identity paired with an
independent numerical oracle.
"""

from .core import (
    Spectrum,
    TensorOperator,
    as_matrix,
    commutator,
    eigen_decompose,
    embed_slot,
    kron,
    matrix_exp,
    matrix_from_json,
    matrix_to_json,
    multikron,
    nabla,
    opnorm,
    pair,
    rel_err,
)
from .divdiff import (
    bang_shriek,
    compositions,
    dd_contour,
    dd_explicit,
    dd_hermite,
    dd_power,
    dd_recursive,
    dd_resolvent,
    dd_series_eval,
    multinomial_identity,
    simplex_moment_s,
    simplex_moment_t,
)
from .errors import OpcalcError
from .funcalc import (
    CommutingTuple,
    Contour,
    apply_function,
    apply_via_eig,
    contour_for,
    contour_for_union,
    dd_apply,
    dd_commuting,
    dd_tensor,
    funcalc_elementary,
    funcalc_n,
    genocchi_hermite_matrix,
)
from .functions import (
    Disc,
    Entire,
    HalfPlane,
    HoloFunction,
    MultivariateFunction,
    Sector,
    Strip,
    exp_function,
    log_function,
    named_function,
    power_function,
    rational_function,
    resolvent_function,
)
from .generate import gen_matrix
from .magnus import (
    BernoulliTable,
    bernoulli,
    magnus_rhs,
    magnus_solve,
    rk_reference,
)
from .ncseries import (
    ExpansionReport,
    dyson_exp,
    newton_interpolate,
    newton_recursion_check,
    nth_derivative,
    nth_derivative_fd,
    taylor_expand,
    taylor_series_ad,
)
from .rearrange import (
    ModularFamily,
    SectorConfig,
    SectorFunction,
    family_from_exponents,
    kernel_F,
    kernel_G,
    modular_family,
    power_rational,
    rearrange_lhs,
    rearrange_rhs_F,
    rearrange_rhs_G,
    sector_check,
)

__version__ = "0.1.0"
