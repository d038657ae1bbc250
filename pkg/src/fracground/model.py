"""Potentials, power nonlinearities with hypothesis validation, and the
fractional/local energy functionals with their derivatives.

The nonlinearity catalogue is restricted to (optionally modulated) pure
powers f(x,u) = a(x)|u|^(p-2)u: they satisfy the structural hypotheses
verifiably and admit closed-form fiber roots for testing.  Hypothesis
validation is by sampled evaluation at log-spaced magnitudes, not symbolic
proof; failures carry the witnessing sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .domain import Box, Field
from .errors import EnergyOverflowError, ParameterError, ShapeMismatchError
from .fractional import FractionalOrder, apply_fractional_laplacian, seminorm_sq

__all__ = [
    "Potential",
    "Nonlinearity",
    "Model",
    "HypothesisCheck",
    "validate_assumptions",
    "energy_fractional",
    "energy_local",
    "gradient",
    "nehari_residual",
    "norm_s_sq",
]


@dataclass(frozen=True)
class Potential:
    """Bounded periodic potential sampled on the box grid."""

    box: Box
    values: np.ndarray = field(repr=False)
    v_min: float = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(self.box.shape)
        if not np.all(np.isfinite(vals)):
            raise ParameterError("potential contains non-finite values")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "v_min", float(vals.min()))

    @property
    def v_mean(self) -> float:
        return float(self.values.mean())


def constant_potential(box: Box, value: float) -> Potential:
    return Potential(box, np.full(box.shape, float(value)))


def cosine_perturbed_potential(box: Box, value: float, amplitude: float, period_cells: int = 1) -> Potential:
    """V(x) = value + amplitude * prod_i cos(2*pi*cells*x_i/L), box-periodic."""
    grids = box.coordinate_grids()
    pert = np.ones(box.shape)
    for g in grids:
        pert = pert * np.cos(2.0 * np.pi * period_cells * g / box.side_length)
    return Potential(box, value + amplitude * pert)


@dataclass(frozen=True)
class Nonlinearity:
    """Pure power or modulated power nonlinearity f(x,u) = a(x)|u|^(p-2)u."""

    kind: str
    p: float
    coefficient: Optional[Field] = None

    def __post_init__(self):
        if self.kind not in ("pure_power", "modulated_power"):
            raise ParameterError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "modulated_power" and self.coefficient is None:
            raise ParameterError("modulated_power requires a coefficient field")
        if self.kind == "pure_power" and self.coefficient is not None:
            raise ParameterError("pure_power takes no coefficient field")

    def _coeff(self, box: Box):
        if self.coefficient is None:
            return 1.0
        if self.coefficient.box != box:
            raise ShapeMismatchError("modulation coefficient lives on a different box")
        return self.coefficient.values

    def f(self, u: np.ndarray, box: Box) -> np.ndarray:
        """Pointwise f(x,u)."""
        return self._coeff(box) * np.abs(u) ** (self.p - 2.0) * u

    def big_f(self, u: np.ndarray, box: Box) -> np.ndarray:
        """Pointwise primitive F(x,u) = a(x)|u|^p / p."""
        return self._coeff(box) * np.abs(u) ** self.p / self.p


@dataclass(frozen=True)
class Model:
    """Problem data: box, potential, nonlinearity, and the strict-mode flag.

    ``strict`` enforces the theory hypotheses (positive potential floor,
    p inside the uniform-embedding window) at validation time; permissive
    mode allows the wider per-s subcritical window with a warning entry in
    the validation report.
    """

    box: Box
    potential: Potential
    nonlinearity: Nonlinearity
    strict: bool = False

    def __post_init__(self):
        if self.potential.box != self.box:
            raise ShapeMismatchError("potential lives on a different box")


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str = ""


_SAMPLE_MAGNITUDES = [10.0 ** j for j in range(-6, 4)]


def validate_assumptions(model: Model) -> list:
    """Sampled verification of hypotheses (V) and (F1)-(F4).

    Returns one :class:`HypothesisCheck` per hypothesis; the report never
    raises.  Range checks that depend on the theory window are enforced
    only when ``model.strict`` is set.
    """
    nl = model.nonlinearity
    box = model.box
    n = box.dimension
    checks = []

    # (V): positive essential infimum
    vmin = model.potential.v_min
    checks.append(
        HypothesisCheck("V", vmin > 0, f"inf V = {vmin:g}")
    )

    # sample x-dependence through the modulation coefficient extremes
    if nl.coefficient is not None:
        a_vals = np.array([nl.coefficient.values.min(), nl.coefficient.values.max()])
    else:
        a_vals = np.array([1.0])
    a_ok = bool(a_vals.min() > 0)

    # (F1): growth bound |f| <= C(1+|u|^(p-1)) with C from the coefficient sup,
    # plus (strict mode) the exponent window p in (2, 2N/(N-1))
    growth_c = max(1.0, float(a_vals.max()))
    f1_ok = a_ok
    witness = ""
    for u in _SAMPLE_MAGNITUDES:
        for sign in (1.0, -1.0):
            fv = float(np.max(np.abs(a_vals * abs(u) ** (nl.p - 2.0) * (sign * u))))
            if fv > growth_c * (1.0 + abs(u) ** (nl.p - 1.0)) * (1 + 1e-12):
                f1_ok = False
                witness = f"|f({sign * u:g})| = {fv:g} exceeds growth bound"
    window_hi = 2.0 * n / (n - 1.0) if n > 1 else np.inf
    in_window = 2.0 < nl.p < window_hi
    if model.strict and not in_window:
        f1_ok = False
        witness = f"p = {nl.p:g} outside (2, {window_hi:g})"
    elif not in_window and not witness:
        witness = f"warning: p = {nl.p:g} outside the uniform window (2, {window_hi:g})"
    checks.append(HypothesisCheck("F1", f1_ok, witness))

    # (F2): f(x,u)/u -> 0 as u -> 0, sampled at u = +-10^-k
    small = [10.0 ** (-k) for k in range(1, 7)]
    ratios = [float(np.max(a_vals) * u ** (nl.p - 2.0)) for u in small]
    f2_ok = (
        all(b < a for a, b in zip(ratios, ratios[1:]))
        and ratios[-1] < 0.9 * ratios[0]
    )
    checks.append(
        HypothesisCheck("F2", f2_ok, f"f(u)/u at u=1e-6: {ratios[-1]:g}")
    )

    # (F3): F(x,u)/u^2 increasing without bound beyond the 1e3 threshold
    big = [1e3, 1e4, 1e5]
    fratios = [float(np.min(a_vals) / nl.p * u ** (nl.p - 2.0)) for u in big]
    f3_ok = all(b > a for a, b in zip(fratios, fratios[1:])) and fratios[0] > 1.0
    checks.append(
        HypothesisCheck("F3", f3_ok, f"F(u)/u^2 at u=1e3: {fratios[0]:g}")
    )

    # (F4): t -> f(x,tu)/(tu) strictly increasing in t > 0 on either half-line,
    # the monotonicity that makes the fiber root unique
    f4_ok = True
    witness = ""
    for u0 in (1.0, -1.0, 0.01, -0.01):
        prev = None
        for t in [10.0 ** j for j in range(-3, 4)]:
            val = float(np.min(a_vals)) * abs(t * u0) ** (nl.p - 2.0)
            if prev is not None and not val > prev * (1 + 1e-12):
                f4_ok = False
                witness = f"f(tu)/(tu) not strictly increasing at u={u0:g}, t={t:g}"
            prev = val
    checks.append(HypothesisCheck("F4", f4_ok, witness))
    return checks


def norm_s_sq(u: Field, s, model: Model) -> float:
    """Squared model norm: fractional seminorm plus the potential-weighted mass."""
    pot = model.potential.values
    vterm = float(u.box.cell_volume * np.sum(pot * u.values ** 2))
    return seminorm_sq(u, s) + vterm


def energy_fractional(u: Field, s, model: Model) -> float:
    """Energy (1/2)||u||_s^2 - integral of F(x,u); s = 1 gives the local energy."""
    quad = 0.5 * norm_s_sq(u, s, model)
    if not np.isfinite(quad):
        raise EnergyOverflowError("quadratic energy term is non-finite", term="quadratic")
    nonlin = float(
        u.box.cell_volume * np.sum(model.nonlinearity.big_f(u.values, u.box))
    )
    if not np.isfinite(nonlin):
        raise EnergyOverflowError("nonlinear energy term is non-finite", term="nonlinear")
    return quad - nonlin


def energy_local(u: Field, model: Model) -> float:
    """Local energy: the s = 1 multiplier path of :func:`energy_fractional`."""
    return energy_fractional(u, 1.0, model)


def gradient(u: Field, s, model: Model, metric: str = "l2") -> Field:
    """L2 or preconditioned (hs) gradient of the energy at u.

    The l2 representative is (-Delta)^s u + V u - f(x,u).  The hs metric
    applies ((-Delta)^s + mean(V))^(-1) spectrally; the mean keeps the
    preconditioner diagonal in Fourier space.
    """
    g = (
        apply_fractional_laplacian(u, s).values
        + model.potential.values * u.values
        - model.nonlinearity.f(u.values, u.box)
    )
    if metric == "l2":
        return Field(u.box, g)
    if metric == "hs":
        return _apply_preconditioner(Field(u.box, g), s, model)
    raise ParameterError(f"unknown gradient metric {metric!r}")


def _apply_preconditioner(g: Field, s, model: Model) -> Field:
    sv = s.s if isinstance(s, FractionalOrder) else float(s)
    mult = g.box.wavenumber_norm_sq() ** sv + model.potential.v_mean
    coeffs = np.fft.fftn(g.values) / mult
    return Field(g.box, np.fft.ifftn(coeffs).real)


def nehari_residual(u: Field, s, model: Model) -> float:
    """J_s'(u)(u) = ||u||_s^2 - integral of f(x,u)u; zero on the Nehari manifold."""
    fu = float(
        u.box.cell_volume * np.sum(model.nonlinearity.f(u.values, u.box) * u.values)
    )
    return norm_s_sq(u, s, model) - fu
