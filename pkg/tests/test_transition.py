import math

import numpy as np
import pytest

from fracground.domain import Box, Field, lebesgue_norm
from fracground.errors import DegenerateDirectionError, ParameterError
from fracground.model import Model, Nonlinearity, constant_potential, norm_s_sq
from fracground.solver import SolveOptions
from fracground.transition import (
    boundedness_diagnostics,
    default_radius,
    l2_local_error,
    recenter,
    sweep,
)


def _box():
    return Box(1, 40.0, 256)


def _gaussian(box, center=0.0, width=2.0):
    x = box.axis_coordinates()
    return Field(box, np.exp(-((x - center) ** 2) / (2 * width * width)))


def test_recenter_recovers_exact_lattice_shift():
    box = _box()
    ref = _gaussian(box)
    shifted = Field(box, np.roll(ref.values, 3))
    rec, z = recenter(shifted, reference=ref)
    assert z == (-3,)
    np.testing.assert_allclose(rec.values, ref.values, atol=1e-12)


def test_recenter_ball_mass_mode():
    box = _box()
    ref = _gaussian(box)
    off = Field(box, np.roll(ref.values, 17))
    rec, z = recenter(off)
    assert z == (-17,)
    np.testing.assert_allclose(rec.values, ref.values, atol=1e-12)


def test_recenter_tie_break_is_lexicographic():
    box = _box()
    ref = _gaussian(box)
    two = Field(box, ref.values + np.roll(ref.values, 64))
    _, z = recenter(two)
    assert z == (-64,)  # smallest shift vector among the tied candidates


def test_recenter_lattice_restriction():
    box = _box()
    off = Field(box, np.roll(_gaussian(box).values, 10))
    _, z = recenter(off, lattice_step=4)
    assert z[0] % 4 == 0
    with pytest.raises(ParameterError):
        recenter(off, lattice_step=3)  # does not divide M = 256


def test_recenter_rejects_zero_field():
    box = _box()
    with pytest.raises(DegenerateDirectionError):
        recenter(Field(box, np.zeros(box.shape)))


def test_recentering_is_an_isometry():
    box = _box()
    model = Model(box, constant_potential(box, 1.0), Nonlinearity("pure_power", 4.0))
    u = Field(box, np.roll(_gaussian(box).values, 9))
    rec, _ = recenter(u)
    for s in (0.7, 1.0):
        assert norm_s_sq(rec, s, model) == pytest.approx(
            norm_s_sq(u, s, model), rel=1e-12
        )
    assert lebesgue_norm(rec, 4.0) == pytest.approx(lebesgue_norm(u, 4.0), rel=1e-12)


def test_l2_local_error_ball_measure():
    box = _box()
    ones = Field(box, np.ones(box.shape))
    zero = Field(box, np.zeros(box.shape))
    # difference identically 1 on B(0, 1): error = sqrt(|ball|) = sqrt(2)
    # up to one cell of boundary quantization
    val = l2_local_error(ones, zero, 1.0)
    assert abs(val ** 2 - 2.0) <= 2.0 * box.spacing


def test_l2_local_error_radius_validation():
    box = _box()
    u = _gaussian(box)
    with pytest.raises(ParameterError):
        l2_local_error(u, u, 0.0)
    with pytest.raises(ParameterError):
        l2_local_error(u, u, 21.0)  # beyond L/2


def test_default_radius():
    assert default_radius(1) == pytest.approx(2.0)
    assert default_radius(3) == pytest.approx(1.0 + math.sqrt(3.0))


def test_sweep_input_validation():
    box = _box()
    model = Model(box, constant_potential(box, 1.0), Nonlinearity("pure_power", 4.0))
    with pytest.raises(ParameterError):
        sweep([], model)
    with pytest.raises(ParameterError):
        sweep([0.9, 0.6], model)
    with pytest.raises(ParameterError):
        sweep([0.4, 0.6], model)
    with pytest.raises(ParameterError):
        sweep([0.6, 1.0], model)


def test_small_sweep_records_and_verdicts():
    box = Box(1, 40.0, 128)
    model = Model(box, constant_potential(box, 1.0), Nonlinearity("pure_power", 4.0))
    opts = SolveOptions(seed=0, n_restarts=2)
    res = sweep([0.85, 0.95], model, opts, extra_radii=(5.0,))
    assert [r.s for r in res.records] == [0.85, 0.95]
    assert res.local_converged
    assert all(r.converged for r in res.records)
    assert res.gaps == [abs(r.energy - res.local_energy) for r in res.records]
    assert all(len(r.extra_errors) == 1 for r in res.records)
    assert all(r.level_identity_rel_err < 1e-8 for r in res.records)
    # profiles are canonically centered, so no lattice shift is needed
    assert all(r.shift == (0,) for r in res.records)
    assert res.gap_monotone() in (True, False)
    bd = boundedness_diagnostics(res)
    assert bd.positive and bd.bounded
    assert math.isinf(bd.embedding_exponent)  # N = 1 degenerates to sup


def test_single_s_sweep_verdicts_are_vacuous():
    box = Box(1, 40.0, 128)
    model = Model(box, constant_potential(box, 1.0), Nonlinearity("pure_power", 4.0))
    res = sweep([0.9], model, SolveOptions(seed=0, n_restarts=2))
    assert res.gap_monotone() is None
    assert res.l2loc_monotone() is None


def test_sweep_jobs_concurrency_matches_serial():
    box = Box(1, 40.0, 128)
    model = Model(box, constant_potential(box, 1.0), Nonlinearity("pure_power", 4.0))
    opts = SolveOptions(seed=0, n_restarts=2)
    serial = sweep([0.85, 0.95], model, opts)
    threaded = sweep([0.85, 0.95], model, opts, jobs=2)
    for a, b in zip(serial.records, threaded.records):
        assert a.energy == b.energy
        assert a.l2_local_error == b.l2_local_error
