"""Ground states of the fractional Schrodinger equation on a periodic box,
and the s -> 1 nonlocal-to-local transition experiment."""

from .domain import (
    Box,
    Field,
    SpectralField,
    inner_product,
    inverse_transform,
    lebesgue_norm,
    load_field,
    save_field,
    transform,
)
from .errors import FracgroundError
from .fractional import (
    FractionalConstants,
    FractionalOrder,
    apply_fractional_laplacian,
    constant_quadrature,
    constants,
    gagliardo_direct,
    norm_limit_check,
    seminorm_sq,
    sobolev_inequality_check,
)
from .model import (
    Model,
    Nonlinearity,
    Potential,
    constant_potential,
    cosine_perturbed_potential,
    energy_fractional,
    energy_local,
    gradient,
    nehari_residual,
    norm_s_sq,
    validate_assumptions,
)
from .nehari import FiberRoot, fiber_root, fiber_value, project, reduced_energy
from .solver import (
    GroundState,
    MinMaxReport,
    SolveOptions,
    euler_lagrange_residual,
    minmax_check,
    solve,
)
from .transition import (
    SweepRecord,
    SweepResult,
    boundedness_diagnostics,
    l2_local_error,
    recenter,
    sweep,
)

__version__ = "0.1.0"
