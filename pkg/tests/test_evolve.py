import math

import numpy as np
import pytest

from aqcsim.cnf import Assignment, CnfInstance, generate_instance, solution_indices
from aqcsim.errors import SizeError
from aqcsim.evolve import (
    EvolutionConfig,
    StateVector,
    default_num_steps,
    evolve,
    initial_state,
    run,
    step,
    success_probability,
)
from aqcsim.hamiltonian import DiagonalHamiltonian, Schedule, build_final
from oracles import exact_propagate, exact_propagate_diag, fidelity


def test_initial_state_small():
    np.testing.assert_allclose(initial_state(1).amplitudes, [2 ** -0.5] * 2)
    np.testing.assert_allclose(initial_state(2).amplitudes, [0.5] * 4)


def test_initial_state_n6():
    psi = initial_state(6)
    np.testing.assert_allclose(psi.amplitudes, np.full(64, 1 / 8))
    assert psi.norm() == pytest.approx(1.0, abs=1e-15)
    assert np.all(psi.amplitudes.imag == 0)


class TestSuccessProbability:
    def test_uniform(self):
        assert success_probability(initial_state(6), [Assignment(10, 6)]) == pytest.approx(1 / 64)

    def test_basis_state(self):
        amps = np.zeros(64, dtype=complex)
        amps[10] = 1
        assert success_probability(StateVector(amps, 6), {Assignment(10, 6)}) == 1.0

    def test_empty(self):
        assert success_probability(initial_state(6), set()) == 0.0
        assert success_probability(initial_state(6), np.array([], dtype=np.int64)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            success_probability(initial_state(6), [Assignment(1, 5)])


def test_default_steps():
    assert default_num_steps(1e-6, 6, 27) == 1000
    assert default_num_steps(10.0, 6, 27) == 33_000


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(0.0)
    with pytest.raises(ValueError):
        EvolutionConfig(1.0, num_steps=0)
    with pytest.raises(ValueError):
        EvolutionConfig(1.0, stride=0)


def test_step_zero_dt_is_identity(paper):
    sched = Schedule(build_final(paper), 5.0)
    psi = initial_state(6)
    out = step(psi, sched, 1.0, 0.0)
    np.testing.assert_array_equal(out.amplitudes, psi.amplitudes)


def test_step_constant_diagonal_phases():
    # sweep pinned at s = 1: H is the constant diagonal, psi_k picks up exp(-i d_k dt)
    d = np.array([0.0, 1.0, 2.5, 4.0])
    sched = Schedule(DiagonalHamiltonian(d, 2), 1.0, sweep=lambda t, tau: 1.0)
    psi = initial_state(2)
    for dt in (0.1, 0.05):
        out = step(psi, sched, 0.0, dt).amplitudes
        exact = psi.amplitudes * np.exp(-1j * d * dt)
        err = np.abs(out - exact)
        # RK4 truncation of exp(-i z): |z|^5 / 120 plus higher order
        assert (err <= 0.5 * (d * dt) ** 5 / 120 + 1e-16).all()


def test_step_matches_kernel_path(paper):
    sched = Schedule(build_final(paper), 3.0)
    cfg = EvolutionConfig(3.0, num_steps=300, stride=1000)
    sols = solution_indices(paper)
    fast = evolve(sched, cfg, sols)
    state = initial_state(6)
    dt = 3.0 / 300
    for j in range(300):
        state = step(state, sched, j * dt, dt)
    np.testing.assert_allclose(fast.final_state.amplitudes, state.amplitudes, atol=1e-12)


def test_custom_sweep_uses_python_path(paper):
    sched = Schedule(build_final(paper), 2.0, sweep=lambda t, tau: (t / tau) ** 2)
    assert not sched.is_plain_linear
    res = evolve(sched, EvolutionConfig(2.0, num_steps=200), solution_indices(paper))
    assert res.norm_drift <= 1e-6
    assert res.s_values[-1] == pytest.approx(1.0)


def test_n2_vs_exact_propagator():
    rng = np.random.default_rng(2)
    diag = rng.integers(0, 4, size=4).astype(float)
    diag[rng.integers(4)] = 0
    sched = Schedule(DiagonalHamiltonian(diag, 2), 10.0)
    res = evolve(sched, EvolutionConfig(10.0, num_steps=1000), np.flatnonzero(diag == 0))
    exact = exact_propagate_diag(diag, 2, 10.0, 20_000)
    assert fidelity(res.final_state.amplitudes, exact) >= 1 - 1e-8


@pytest.mark.parametrize("n, tau, seed", [(3, 5.0, 0), (3, 20.0, 1), (4, 10.0, 2), (4, 20.0, 3)])
def test_vs_exact_equal_steps(n, tau, seed):
    inst = generate_instance(n, 1.5, seed)
    res = run(inst, EvolutionConfig(tau, num_steps=1000))
    exact = exact_propagate([c.to_ints() for c in inst.clauses], n, tau, 1000)
    assert fidelity(res.final_state.amplitudes, exact) >= 1 - 1e-6


def single_step_norm_error(sched, psi, t, dt):
    return abs(step(psi, sched, t, dt).norm() - 1.0)


def test_norm_error_order():
    inst = generate_instance(3, 2.0, 7)
    sched = Schedule(build_final(inst), 10.0)
    rng = np.random.default_rng(3)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi = StateVector(amps / np.linalg.norm(amps), 3)
    errors = [single_step_norm_error(sched, psi, 5.0, dt) for dt in (0.2, 0.1, 0.05)]
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    # |R(iz)|^2 = 1 - z^6/72 + ...: the norm error shrinks ~64x per halving
    assert all(r >= 12 for r in ratios), (errors, ratios)


def test_frozen_limit(paper):
    res = run(paper, EvolutionConfig(1e-6))
    assert abs(res.success_probability - 1 / 64) <= 1e-3
    assert res.norm_drift <= 1e-6


def test_frozen_limit_multiple_solutions():
    inst = CnfInstance.from_ints(4, [(1, 2, 3), (-1, 2, 4)])
    sols = solution_indices(inst)
    res = run(inst, EvolutionConfig(1e-6))
    assert abs(res.success_probability - sols.size / 16) <= 1e-3


def test_unsat_success_is_zero(unsat3):
    res = run(unsat3, EvolutionConfig(5.0))
    assert res.success_probability == 0.0
    assert res.num_solutions == 0
    assert (res.success_trace == 0).all()


def test_global_phase_invariance(paper):
    cfg = EvolutionConfig(4.0, num_steps=2000)
    base = run(paper, cfg)
    phase = np.exp(1j * 0.731)
    shifted = run(paper, cfg, psi0=StateVector(initial_state(6).amplitudes * phase, 6))
    assert abs(base.success_probability - shifted.success_probability) <= 1e-12
    np.testing.assert_allclose(base.success_trace, shifted.success_trace, atol=1e-12)


@pytest.mark.parametrize("tau, seed", [(1.0, 0), (10.0, 1), (30.0, 2)])
def test_norm_drift_default_steps(tau, seed):
    inst = generate_instance(8, 4.2, seed)
    res = run(inst, EvolutionConfig(tau))
    assert res.num_steps == default_num_steps(tau, 8, inst.num_clauses)
    assert res.norm_drift <= 1e-6


def test_success_matches_amplitude_sum(paper):
    res = run(paper, EvolutionConfig(8.0))
    amps = res.final_state.amplitudes
    assert res.success_probability == pytest.approx(abs(amps[10]) ** 2, abs=1e-9)


def test_tracking_traces(paper):
    res = run(paper, EvolutionConfig(6.0, num_steps=3000, track_gap=True, track_ground_overlap=True, stride=100))
    assert res.times.size == 31
    assert res.times[0] == 0 and res.times[-1] == pytest.approx(6.0)
    assert res.overlap_trace[0] == pytest.approx(1.0, abs=1e-12)
    assert res.gap_trace[0] == pytest.approx(1.0, abs=1e-12)
    assert res.gap_trace.min() >= 0.21 - 1e-3
    assert (res.overlap_trace <= 1 + 1e-9).all()
    assert res.success_trace[-1] == pytest.approx(res.success_probability)


def test_tracking_cap():
    inst = generate_instance(13, 4.2, 0)
    with pytest.raises(SizeError):
        run(inst, EvolutionConfig(0.01, num_steps=1, track_ground_overlap=True))


def test_evolution_csv(paper, tmp_path):
    res = run(paper, EvolutionConfig(2.0, num_steps=1000, track_gap=True, stride=250))
    path = tmp_path / "evo.csv"
    res.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,s,norm,success_probability,gap"
    assert len(lines) == 1 + 5
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 1], [0, 0.25, 0.5, 0.75, 1.0])


def test_workers_do_not_change_result(paper):
    cfg = EvolutionConfig(3.0, num_steps=1500)
    a = run(paper, cfg, num_workers=1)
    b = run(paper, cfg, num_workers=4)
    np.testing.assert_array_equal(a.final_state.amplitudes, b.final_state.amplitudes)
