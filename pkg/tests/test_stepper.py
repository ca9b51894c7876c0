import math

import numpy as np
import pytest

from tfch.diagnostics import free_energy
from tfch.spectral_field import Field, Grid, integral, l2_norm, mean
from tfch.stepper import (NonlinearSolveConfig, PhysicalParams, RatioConstraintError, SolverState, StepFailure,
                          Variant, assemble, chemical_potential, extrapolant, history_term, picard_iterate, residual,
                          run_mesh, solve_step, step)
from tfch.fractional_kernels import l1plus_row
from tfch.time_mesh import uniform_mesh

GRID = Grid(16, 16)
PARAMS = PhysicalParams(alpha=0.5, mobility=1e-2, epsilon=0.05)


def _state(values, variant=Variant.STANDARD, params=PARAMS, **solve):
    f = values if isinstance(values, Field) else Field(GRID, np.asarray(values, dtype=float) * np.ones(GRID.shape))
    return SolverState.initial(f, params, variant, NonlinearSolveConfig(**solve) if solve else None)


def _random_field(rng, amp=0.5, mean_=0.0):
    return Field(GRID, mean_ + amp * rng.uniform(-1, 1, GRID.shape))


def test_parameter_validation():
    for bad in [dict(alpha=0.0), dict(alpha=1.0), dict(mobility=0.0), dict(epsilon=-1.0)]:
        with pytest.raises(ValueError):
            PhysicalParams(**(dict(alpha=0.5, mobility=1.0, epsilon=0.1) | bad))
    with pytest.raises(ValueError):
        NonlinearSolveConfig(tol=0.0)
    with pytest.raises(ValueError):
        NonlinearSolveConfig(damping=0.0)
    assert Variant.parse("ratio") is Variant.RATIO
    with pytest.raises(ValueError):
        Variant.parse("bdf2")
    with pytest.raises(ValueError):
        SolverState.initial(Field(GRID, np.full(GRID.shape, np.nan)), PARAMS)


def test_extrapolant_first_step_is_initial(rng):
    f = _random_field(rng)
    for variant in Variant:
        np.testing.assert_allclose(extrapolant(_state(f, variant), 0.1).values, f.values, rtol=0, atol=1e-15)


def test_extrapolant_examples():
    st = _state(0.0)
    st._push(np.full(GRID.shape, 1.0), 0.1)
    assert extrapolant(st).values[0, 0] == pytest.approx(1.5)
    rt = _state(0.0, Variant.RATIO)
    rt._push(np.full(GRID.shape, 1.0), 0.1)
    # rho = 0.1/0.2 = 0.5: 1 + 1/(2*0.5)
    assert extrapolant(rt, 0.2).values[0, 0] == pytest.approx(2.0)
    assert extrapolant(rt, 0.1).values[0, 0] == pytest.approx(1.5)
    assert extrapolant(rt, 0.05).values[0, 0] == pytest.approx(1.25)
    with pytest.raises(RatioConstraintError):
        extrapolant(rt, 0.2000001)
    with pytest.raises(ValueError):
        extrapolant(rt)


def test_chemical_potential_of_constant():
    for c in (-1.0, -0.3, 0.0, 0.5, 1.0, 2.0):
        mu = chemical_potential(Field.constant(GRID, c), _state(c), 0.1)
        np.testing.assert_allclose(mu.values, c ** 3 - c, atol=1e-14)


def test_history_term_two_steps():
    st = _state(0.0)
    st._push(np.full(GRID.shape, 0.7), 1.0)
    row = l1plus_row(st.mesh_with(1.0), 2, 0.5)
    np.testing.assert_allclose(history_term(st, row).values, 0.62318660601362418 * 0.7, rtol=1e-14)
    with pytest.raises(ValueError):
        history_term(st, l1plus_row(st.mesh_with(1.0), 1, 0.5))


def test_history_increments_telescope(rng):
    f = _random_field(rng)
    st = SolverState.initial(f, PARAMS, capacity=2)
    run_mesh(st, uniform_mesh(0.05, 5))
    np.testing.assert_allclose(st.history.sum(axis=0), st.phi - f.values, atol=1e-14)
    assert st.times == pytest.approx([0.0, 0.01, 0.02, 0.03, 0.04, 0.05])


@pytest.mark.parametrize("c", [-1.0, -0.3, 0.0, 0.5, 1.0])
@pytest.mark.parametrize("variant", list(Variant))
def test_constant_fixed_points(c, variant):
    st = _state(c, variant)
    run_mesh(st, uniform_mesh(0.5, 50))
    assert np.abs(st.phi - c).max() <= 1e-12


def test_mass_is_conserved(rng):
    f = _random_field(rng, 0.8, 0.1)
    m0 = integral(f)
    st = SolverState.initial(f, PARAMS)
    for k in range(30):
        step(st, 0.002 * (1 + (k % 3)))
        assert abs(integral(st.field) - m0) <= 1e-12 * GRID.area


def test_residual_vanishes_at_solution(rng):
    st = SolverState.initial(_random_field(rng), PARAMS, solve=NonlinearSolveConfig(tol=1e-12))
    run_mesh(st, uniform_mesh(0.03, 3))
    sys_ = assemble(st, 0.01)
    phi, iters, res = solve_step(sys_)
    r = residual(st, Field(GRID, phi), 0.01)
    assert l2_norm(r) <= 1e-10
    assert res == pytest.approx(l2_norm(r), abs=1e-11)
    # a perturbed candidate is not a solution
    assert l2_norm(residual(st, Field(GRID, phi + 1e-3 * np.cos(2 * np.pi * GRID.coords()[0])), 0.01)) > 1e-6


def test_picard_preserves_mean(rng):
    st = SolverState.initial(_random_field(rng, 0.5, 0.2), PARAMS)
    sys_ = assemble(st, 0.01)
    out = picard_iterate(_random_field(rng, 0.9, -0.4), sys_)
    assert mean(out) == pytest.approx(mean(st.field), abs=1e-15)


def test_step_refinement_is_second_order(rng):
    f = _random_field(rng, 0.6)
    errs = []
    ref = SolverState.initial(f, PARAMS, solve=NonlinearSolveConfig(tol=1e-13))
    run_mesh(ref, uniform_mesh(0.02, 64))
    for n in (4, 8, 16):
        st = SolverState.initial(f, PARAMS, solve=NonlinearSolveConfig(tol=1e-13))
        run_mesh(st, uniform_mesh(0.02, n))
        errs.append(l2_norm(Field(GRID, st.phi - ref.phi)))
    orders = [math.log2(errs[j] / errs[j + 1]) for j in range(2)]
    assert min(orders) > 1.6


def test_energy_does_not_increase(rng):
    f = _random_field(rng, 0.3)
    st = SolverState.initial(f, PARAMS)
    e0 = free_energy(f, PARAMS.epsilon)
    energies = []
    run_mesh(st, uniform_mesh(0.2, 40), lambda s: energies.append(free_energy(s.field, PARAMS.epsilon)))
    assert max(energies) <= e0 + 1e-9 * max(1.0, abs(e0))


def test_ratio_variant_rejects_large_growth(rng):
    st = SolverState.initial(_random_field(rng), PARAMS, Variant.RATIO)
    step(st, 0.01)
    with pytest.raises(RatioConstraintError):
        step(st, 0.03)
    assert st.n == 1
    step(st, 0.02)
    assert st.n == 2


def test_failed_step_leaves_state_untouched(rng):
    st = SolverState.initial(_random_field(rng), PARAMS, solve=NonlinearSolveConfig(max_iters=1))
    phi = st.phi.copy()
    with pytest.raises(StepFailure):
        step(st, 0.01)
    assert st.n == 0 and st.times == [0.0]
    np.testing.assert_array_equal(st.phi, phi)
    with pytest.raises(ValueError):
        step(st, -0.1)


def test_variants_coincide_on_uniform_mesh(rng):
    f = _random_field(rng)
    a = SolverState.initial(f, PARAMS, Variant.STANDARD)
    b = SolverState.initial(f, PARAMS, Variant.RATIO)
    mesh = uniform_mesh(0.02, 20)
    run_mesh(a, mesh)
    run_mesh(b, mesh)
    assert l2_norm(Field(GRID, a.phi - b.phi)) <= 10 * a.solve.tol
