import numpy as np
import pytest

from fracground.domain import Box, Field, lebesgue_norm
from fracground.errors import DegenerateDirectionError
from fracground.model import Model, Nonlinearity, constant_potential, norm_s_sq
from fracground.nehari import fiber_root, fiber_value, project, reduced_energy


def _model(p=4.0):
    box = Box(1, 40.0, 64)
    return Model(box, constant_potential(box, 1.0), Nonlinearity("pure_power", p))


def _bump(box, seed=0):
    rng = np.random.default_rng(seed)
    x = box.axis_coordinates()
    c = rng.uniform(-10, 10)
    w = rng.uniform(2, 6)
    return Field(box, rng.uniform(0.5, 2.0) * np.exp(-((x - c) ** 2) / (2 * w * w)))


def _closed_form_t(v, s, model):
    # pure power p: t* = (||v||_s^2 / ||v||_p^p)^(1/(p-2))
    p = model.nonlinearity.p
    return (norm_s_sq(v, s, model) / lebesgue_norm(v, p) ** p) ** (1.0 / (p - 2.0))


def test_root_matches_closed_form():
    model = _model()
    v = _bump(model.box, seed=3)
    for s in (0.6, 0.9, 1.0):
        root = fiber_root(v, s, model)
        assert root.t_star == pytest.approx(_closed_form_t(v, s, model), rel=1e-10)
        assert abs(root.residual) <= 1e-9 * norm_s_sq(v, s, model)


def test_root_homogeneity():
    model = _model(p=3.0)
    v = _bump(model.box, seed=5)
    s = 0.75
    t1 = fiber_root(v, s, model).t_star
    for alpha in (0.5, 2.0, 10.0):
        ta = fiber_root(Field(v.box, alpha * v.values), s, model).t_star
        assert ta == pytest.approx(t1 / alpha, rel=1e-9)


def test_reduced_energy_scale_invariant():
    model = _model()
    v = _bump(model.box, seed=7)
    s = 0.8
    e = reduced_energy(v, s, model)
    for alpha in (0.1, 3.0):
        ea = reduced_energy(Field(v.box, alpha * v.values), s, model)
        assert ea == pytest.approx(e, rel=1e-9)


def test_fiber_value_is_maximized_at_root():
    model = _model()
    v = _bump(model.box, seed=9)
    s = 0.7
    t_star = fiber_root(v, s, model).t_star
    e_star = fiber_value(v, t_star, s, model)
    for t in (0.5 * t_star, 0.9 * t_star, 1.1 * t_star, 2.0 * t_star):
        assert fiber_value(v, t, s, model) < e_star


def test_projection_lands_on_manifold():
    from fracground.model import nehari_residual

    model = _model()
    v = _bump(model.box, seed=11)
    u = project(v, 0.85, model)
    assert abs(nehari_residual(u, 0.85, model)) <= 1e-10 * norm_s_sq(u, 0.85, model)


def test_zero_direction_rejected():
    model = _model()
    zero = Field(model.box, np.zeros(model.box.shape))
    with pytest.raises(DegenerateDirectionError):
        fiber_root(zero, 0.7, model)
    with pytest.raises(DegenerateDirectionError):
        reduced_energy(zero, 0.7, model)


def test_negative_fiber_parameter_rejected():
    model = _model()
    v = _bump(model.box)
    with pytest.raises(ValueError):
        fiber_value(v, -1.0, 0.7, model)
