"""Fiber maps t -> J_s(tv), the unique Nehari root, and the reduced energy.

For every nonzero direction v the map psi(t) = ||v||_s^2 - (1/t) * integral
of f(x,tv)v is strictly decreasing under (F4), so the crossing t* is unique
and bisection on an expanding bracket is unconditionally convergent.  The
projection m_s(v) = t* v lands on the Nehari manifold and J_s(m_s(v)) is
the scale-invariant reduced energy the outer solver minimizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Field
from .errors import DegenerateDirectionError, NoRootError
from .model import Model, energy_fractional, norm_s_sq

__all__ = ["FiberRoot", "fiber_value", "fiber_root", "project", "reduced_energy"]

# relative bracket width for the fiber bisection; must sit well below the
# outer solver tolerance since fiber error enters the reduced-energy gradient
TOL_FIBER = 1e-12

_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class FiberRoot:
    t_star: float
    iterations: int
    bracket: tuple
    residual: float


def fiber_value(v: Field, t: float, s, model: Model) -> float:
    """Energy along the fiber: J_s(t*v)."""
    if t < 0:
        raise ValueError(f"fiber parameter must be nonnegative, got {t}")
    _require_nonzero(v, s, model)
    return energy_fractional(Field(v.box, t * v.values), s, model)


def _psi(v: Field, t: float, s_norm_sq: float, model: Model) -> float:
    """psi(t) = ||v||_s^2 - integral f(x,tv)v / t; strictly decreasing in t."""
    fv = model.nonlinearity.f(t * v.values, v.box)
    return s_norm_sq - float(v.box.cell_volume * np.sum(fv * v.values)) / t


def fiber_root(v: Field, s, model: Model) -> FiberRoot:
    """Unique positive root of psi by bracket expansion from t = 1 and bisection."""
    vnorm = _require_nonzero(v, s, model)
    psi = lambda t: _psi(v, t, vnorm, model)

    t_lo = t_hi = 1.0
    p1 = psi(1.0)
    if p1 > 0.0:
        for _ in range(_MAX_DOUBLINGS):
            t_hi *= 2.0
            if psi(t_hi) <= 0.0:
                break
        else:
            raise NoRootError("no sign change found expanding the bracket upward")
    elif p1 < 0.0:
        for _ in range(_MAX_DOUBLINGS):
            t_lo *= 0.5
            if psi(t_lo) >= 0.0:
                break
        else:
            raise NoRootError("no sign change found expanding the bracket downward")
    else:
        return FiberRoot(1.0, 0, (1.0, 1.0), 0.0)

    lo, hi = t_lo, t_hi
    iters = 0
    while hi - lo > TOL_FIBER * lo:
        mid = 0.5 * (lo + hi)
        if psi(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        iters += 1
        if iters > 200:
            break
    t_star = 0.5 * (lo + hi)
    # residual of the Nehari identity at the projected point
    residual = t_star * t_star * psi(t_star)
    return FiberRoot(t_star, iters, (t_lo, t_hi), residual)


def project(v: Field, s, model: Model) -> Field:
    """Nehari projection m_s(v) = t_s(v) * v."""
    root = fiber_root(v, s, model)
    return Field(v.box, root.t_star * v.values)


def reduced_energy(v: Field, s, model: Model) -> float:
    """J_s at the Nehari projection of v; invariant under rescaling of v."""
    root = fiber_root(v, s, model)
    return energy_fractional(Field(v.box, root.t_star * v.values), s, model)


def _require_nonzero(v: Field, s, model: Model) -> float:
    vnorm = norm_s_sq(v, s, model)
    if vnorm <= 0.0:
        raise DegenerateDirectionError("fiber operations need a nonzero direction")
    return vnorm
