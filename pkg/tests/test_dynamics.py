import numpy as np
import pytest
from scipy.linalg import expm

from src.algebra.basis import SIGMA_X, SIGMA_Y, gellmann_basis, pauli_bloch_basis
from src.algebra.cartan import CartanSplit
from src.config import preset
from src.decoupler import LEAST_SQUARES, SolverOptions, synthesize
from src.dynamics import (
    CONVERGENT,
    DIVERGED,
    Trajectory,
    coherence_metrics,
    convergence_bound_check,
    entanglement_measure,
    entanglement_series,
    integrate,
    integrate_density_oracle,
    lidar_controls,
    lidar_criterion,
    stationary_series,
    tracking_error,
)
from src.dynamics.metrics import two_qubit_correlations
from src.run import Scenario
from src.utils.errors import (
    ConfigError,
    IntegrationError,
    InvalidDimensionError,
    InvalidStateError,
    ShapeError,
    SingularityError,
)
from src.utils.integrators import rk4, validate_grid
from src.vectorizer import OpenSystemSpec, dissipation_rate, preset_system, rho_to_coherence, vectorize
from src.vectorizer.presets import ket_bra

HALF_ROOT2 = np.sqrt(2.0) / 2.0
PAPER_STATE = [HALF_ROOT2, 0.0, HALF_ROOT2]
BELL = 0.5 * np.array([[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]], dtype=complex)


def one_qubit(params=None):
    spec, basis, split = preset_system("one_qubit", params)
    return spec, vectorize(spec, basis, split)


def closed_qubit():
    spec = OpenSystemSpec(dim=2, H0=np.zeros((2, 2)), controls=(0.5 * SIGMA_X, 0.5 * SIGMA_Y))
    basis = pauli_bloch_basis()
    return spec, vectorize(spec, basis, CartanSplit(basis, (0, 1), (2,)))


def decoupled_run(gamma, t_end, n_points, step):
    _, vs = one_qubit({"gamma": gamma})
    synthesis = synthesize(vs, PAPER_STATE, SolverOptions(method="analytic_one_qubit"))
    grid = np.linspace(0.0, t_end, n_points)
    controlled = integrate(vs, PAPER_STATE, grid, u=synthesis.law, step=step)
    target = integrate(vs, PAPER_STATE, grid, kind="target", step=step)
    return vs, synthesis, controlled, target


class TestIntegrate:

    def test_closed_system_without_controls_is_static(self):
        _, vs = closed_qubit()
        traj = integrate(vs, [0.3, -0.2, 0.5], np.linspace(0.0, 2.0, 11))
        assert traj.kind == "uncontrolled"
        assert np.allclose(traj.states, [0.3, -0.2, 0.5])

    def test_target_is_free_precession(self):
        _, vs = one_qubit()
        grid = np.linspace(0.0, 3.0, 31)
        traj = integrate(vs, PAPER_STATE, grid, kind="target")
        expected = np.array([expm(vs.O0 * t) @ PAPER_STATE for t in grid])
        assert np.allclose(traj.states, expected, atol=1e-9)

    def test_uncontrolled_relaxes_to_ground_state(self):
        _, vs = one_qubit()
        traj = integrate(vs, PAPER_STATE, np.linspace(0.0, 20.0, 41), step=1e-2)
        assert np.allclose(traj.states[-1], [0.0, 0.0, -1.0], atol=1e-3)

    def test_adaptive_and_fixed_step_agree(self):
        _, vs = one_qubit()
        synthesis = synthesize(vs, PAPER_STATE, SolverOptions(method="analytic_one_qubit"))
        grid = np.linspace(0.0, 2.0, 21)
        fixed = integrate(vs, PAPER_STATE, grid, u=synthesis.law)
        adaptive = integrate(vs, PAPER_STATE, grid, u=synthesis.law, method="rk45")
        assert np.allclose(fixed.states, adaptive.states, atol=1e-6)

    def test_constant_control(self):
        _, vs = closed_qubit()
        traj = integrate(vs, [0.0, 1.0, 0.0], np.linspace(0.0, np.pi, 3), u=[2.0, 0.0])
        # u_x = 2 turns (y, z) through a full circle over pi
        assert np.allclose(traj.states[-1], [0.0, 1.0, 0.0], atol=1e-9)

    def test_decoupling_recovers_target_coherences(self):
        vs, _, controlled, target = decoupled_run(gamma=1.0, t_end=10.0, n_points=201, step=1e-3)
        error = tracking_error(controlled, target, indices=[0, 1])
        assert error[-1] < 1e-3
        assert error[0] == 0.0

    def test_weak_damping_recovers_target_later(self):
        vs, _, controlled, target = decoupled_run(gamma=0.2, t_end=60.0, n_points=301, step=1e-2)
        assert tracking_error(controlled, target, indices=[0, 1])[-1] < 1e-3

    def test_contraction_bound(self):
        vs, synthesis, controlled, _ = decoupled_run(gamma=0.2, t_end=10.0, n_points=201, step=1e-3)
        stationary = stationary_series(synthesis, controlled.times)
        d_min = dissipation_rate(vs)
        assert np.isclose(d_min, 0.1)
        assert convergence_bound_check(controlled, stationary, d_min).holds
        assert not convergence_bound_check(controlled, stationary, 2.0 * d_min).holds

    @pytest.mark.parametrize("name", ["qutrit_v", "two_qubit_mixed"])
    def test_multilevel_decoupling_contracts_toward_stationary_trajectory(self, name):
        scenario = Scenario(preset(name))
        synthesis = synthesize(scenario.vs, scenario.m0, scenario.config.solver)
        grid = np.linspace(0.0, 4.0, 41)
        controlled = integrate(scenario.vs, scenario.m0, grid, u=synthesis.law, step=1e-3)
        stationary = stationary_series(synthesis, grid)
        d_min = dissipation_rate(scenario.vs)
        assert d_min > 0.0
        report = convergence_bound_check(controlled, stationary, d_min)
        assert report.holds
        assert report.distances[0] > 0.0
        assert np.all(np.diff(report.distances) < 0.0)

    def test_stationary_series_starts_at_split_state(self):
        _, synthesis, controlled, _ = decoupled_run(gamma=1.0, t_end=1.0, n_points=11, step=1e-3)
        stationary = stationary_series(synthesis, controlled.times)
        assert stationary.kind == "stationary"
        assert np.allclose(stationary.states[0], [HALF_ROOT2, 0.0, -0.5])

    def test_controlled_needs_a_signal(self):
        _, vs = one_qubit()
        with pytest.raises(ConfigError):
            integrate(vs, PAPER_STATE, [0.0, 1.0], kind="controlled")

    @pytest.mark.parametrize("kwargs", [{"kind": "oracle"}, {"method": "euler"}])
    def test_rejects_unknown_modes(self, kwargs):
        _, vs = one_qubit()
        with pytest.raises(ConfigError):
            integrate(vs, PAPER_STATE, [0.0, 1.0], **kwargs)

    def test_rejects_wrong_state_size(self):
        _, vs = one_qubit()
        with pytest.raises(ShapeError):
            integrate(vs, [0.1, 0.2], [0.0, 1.0])


class TestOracle:

    @pytest.mark.parametrize("name", ["one_qubit", "qutrit_v", "two_qubit_mixed", "two_qubit_bell"])
    def test_matches_coherence_integration(self, name):
        scenario = Scenario(preset(name))
        synthesis = synthesize(scenario.vs, scenario.m0, scenario.config.solver)
        grid = np.linspace(0.0, 10.0, 101)
        step = scenario.config.time.step
        ours = integrate(scenario.vs, scenario.m0, grid, u=synthesis.law, step=step)
        oracle = integrate_density_oracle(scenario.spec, synthesis.law, scenario.rho0, grid, step=step)
        assert oracle.is_density
        traces = np.einsum("taa->t", oracle.states)
        assert np.abs(traces - 1.0).max() <= 1e-9
        assert min(np.linalg.eigvalsh(r).min() for r in oracle.states) >= -1e-8
        coherence = oracle.to_coherence(scenario.basis)
        assert np.abs(coherence.states - ours.states).max() < 1e-8

    def test_closed_evolution_stays_pure(self):
        spec, _ = closed_qubit()
        rho0 = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
        oracle = integrate_density_oracle(spec, [1.0, 0.5], rho0, np.linspace(0.0, 5.0, 51))
        purity = np.einsum("tab,tba->t", oracle.states, oracle.states).real
        assert np.allclose(purity, 1.0, atol=1e-9)
        assert oracle.satisfies_purity(pauli_bloch_basis())

    def test_qutrit_decays_to_ground_level(self):
        scenario = Scenario(preset("qutrit_v"))
        oracle = integrate_density_oracle(scenario.spec, None, scenario.rho0, np.linspace(0.0, 40.0, 21),
                                          step=1e-2)
        assert np.allclose(oracle.states[-1], ket_bra(3, 0, 0), atol=1e-6)

    def test_rejects_invalid_initial_state(self):
        spec, _ = one_qubit()
        with pytest.raises(InvalidStateError):
            integrate_density_oracle(spec, None, np.diag([1.5, -0.5]), [0.0, 1.0])

    def test_rejects_wrong_dimension(self):
        spec, _ = one_qubit()
        with pytest.raises(ShapeError):
            integrate_density_oracle(spec, None, np.eye(3) / 3, [0.0, 1.0])


class TestLidar:

    def test_criterion(self):
        assert not lidar_criterion(PAPER_STATE)
        assert lidar_criterion([0.3, 0.0, -0.9])
        assert not lidar_criterion([0.8, 0.0, -0.5])

    def test_worked_example_diverges(self):
        run = lidar_controls(3.0, 1.0, PAPER_STATE, np.linspace(0.0, 10.0, 201))
        assert run.status == DIVERGED
        assert run.divergence_time is not None and 0.0 < run.divergence_time < 10.0
        assert run.agrees_with_prediction
        assert run.trajectory.times[-1] <= run.divergence_time
        assert len(run.controls) == len(run.trajectory)

    def test_controls_at_start(self):
        m0 = [0.3, 0.2, -0.9]
        run = lidar_controls(3.0, 1.0, m0, np.linspace(0.0, 1.0, 11))
        assert np.allclose(run.controls[0], [-0.2 / (2 * -0.9), 0.3 / (2 * -0.9)])
        assert np.allclose(run.trajectory.states[0], m0)

    def test_convergent_run_matches_asymptotic_controls(self):
        m0 = [0.3, 0.0, -0.9]
        grid = np.linspace(0.0, 10.0, 201)
        run = lidar_controls(3.0, 1.0, m0, grid)
        assert run.status == CONVERGENT
        assert len(run.trajectory) == len(grid)
        _, vs = one_qubit({"omega": 3.0, "gamma": 1.0})
        synthesis = synthesize(vs, m0, SolverOptions(method="analytic_one_qubit"))
        ours = synthesis.controls(grid)
        assert np.linalg.norm(run.controls[-1] - ours[-1]) < 1e-3
        assert np.isclose(run.trajectory.states[-1, 2], synthesis.solution.eta[0], atol=1e-4)

    def test_precession_is_the_target(self):
        run = lidar_controls(3.0, 1.0, [0.3, 0.0, -0.9], np.linspace(0.0, 2.0, 21))
        assert np.allclose(run.trajectory.states[:, 0], 0.3 * np.cos(3.0 * run.trajectory.times))
        assert np.allclose(run.trajectory.states[:, 1], 0.3 * np.sin(3.0 * run.trajectory.times))

    @pytest.mark.parametrize("mz0", [0.0, 1e-7])
    def test_singular_start(self, mz0):
        with pytest.raises(SingularityError):
            lidar_controls(3.0, 1.0, [0.5, 0.0, mz0], np.linspace(0.0, 1.0, 11))

    def test_random_states_follow_the_criterion(self):
        rng = np.random.default_rng(31)
        grid = np.linspace(0.0, 20.0, 201)
        checked = 0
        while checked < 50:
            c2 = rng.uniform(0.0, 0.4)
            phi = rng.uniform(0.0, 2.0 * np.pi)
            z_max = np.sqrt(1.0 - c2)
            mz = rng.uniform(-z_max, z_max)
            boundary = 0.5 * (-1.0 + np.sqrt(1.0 - 2.0 * c2))
            if abs(mz - boundary) < 0.05 or abs(mz) < 0.05:
                continue
            m0 = [np.sqrt(c2) * np.cos(phi), np.sqrt(c2) * np.sin(phi), mz]
            run = lidar_controls(rng.uniform(0.5, 5.0), 1.0, m0, grid)
            assert run.agrees_with_prediction, (m0, run.status)
            checked += 1


class TestMetrics:

    def setup_method(self):
        self.grid = np.linspace(0.0, 1.0, 3)
        self.a = Trajectory(self.grid, [[0.0, 0.0, 1.0], [0.3, 0.4, 0.0], [1.0, 0.0, 0.0]], "controlled")
        self.b = Trajectory(self.grid, np.zeros((3, 3)), "target")

    def test_tracking_error(self):
        assert np.allclose(tracking_error(self.a, self.b), [1.0, 0.5, 1.0])
        assert np.allclose(tracking_error(self.a, self.b, indices=[0, 1]), [0.0, 0.5, 1.0])

    def test_grids_must_match(self):
        other = Trajectory(self.grid + 0.5, np.zeros((3, 3)), "target")
        with pytest.raises(ShapeError):
            tracking_error(self.a, other)

    def test_coherence_metrics(self):
        named = coherence_metrics(self.a, {"C": [0, 1]})
        assert np.allclose(named["C"], [0.0, 0.25, 1.0])
        unnamed = coherence_metrics(self.a, [(0, 1), (2,)])
        assert set(unnamed) == {"0+1", "2"}
        with pytest.raises(ShapeError):
            coherence_metrics(self.a, {"bad": [3]})

    def test_entanglement_reference_states(self):
        mixed = np.eye(4) / 8 + BELL / 2
        assert entanglement_measure(np.eye(4) / 4) == 0.0
        assert abs(entanglement_measure(BELL) - 1.0) < 1e-12
        assert entanglement_measure(mixed) == 0.0

    def test_entanglement_from_coherence_vector(self):
        scenario = Scenario(preset("two_qubit_bell"))
        assert np.isclose(entanglement_measure(scenario.m0.values), 1.0)

    def test_entanglement_in_any_su4_basis(self):
        gellmann = gellmann_basis(4)
        rng = np.random.default_rng(41)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        m = rho_to_coherence(rho, gellmann).values
        assert np.allclose(two_qubit_correlations(m, gellmann), two_qubit_correlations(rho), atol=1e-12)
        bell = rho_to_coherence(BELL, gellmann).values
        assert entanglement_measure(bell, gellmann) == pytest.approx(1.0)
        traj = Trajectory([0.0, 1.0], [bell, bell], "target")
        assert np.allclose(entanglement_series(traj, gellmann), 1.0)

    def test_entanglement_needs_su4_basis(self):
        with pytest.raises(InvalidDimensionError):
            entanglement_measure(np.zeros(8), gellmann_basis(3))

    def test_entanglement_rejects_other_dimensions(self):
        with pytest.raises(InvalidDimensionError):
            entanglement_measure(np.eye(2) / 2)

    def test_bell_state_is_partially_recovered(self):
        scenario = Scenario(preset("two_qubit_bell"))
        synthesis = synthesize(scenario.vs, scenario.m0, scenario.config.solver)
        assert synthesis.solution.status == LEAST_SQUARES
        grid = np.linspace(0.0, 10.0, 101)
        p = list(scenario.split.p_indices)
        target = integrate(scenario.vs, scenario.m0, grid, kind="target", step=5e-3)
        controlled = integrate(scenario.vs, scenario.m0, grid, u=synthesis.law, step=5e-3)
        uncontrolled = integrate(scenario.vs, scenario.m0, grid, step=5e-3)
        assert tracking_error(controlled, target, p)[-1] < tracking_error(uncontrolled, target, p)[-1]
        assert entanglement_series(target)[-1] == pytest.approx(1.0)


class TestTrajectoryAndGrid:

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            Trajectory([0.0, 1.0], np.zeros((2, 3)), "lab")

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            Trajectory([0.0, 1.0], np.zeros((3, 3)), "target")

    @pytest.mark.parametrize("grid", [[0.0], [0.0, 1.0, 0.5], [0.0, np.inf]])
    def test_bad_grids(self, grid):
        with pytest.raises(ShapeError):
            validate_grid(grid)

    def test_rk4_rejects_bad_step(self):
        with pytest.raises(ShapeError):
            rk4(lambda t, y: -y, [1.0], [0.0, 1.0], step=0.0)

    def test_rk4_flags_blow_up(self):
        with pytest.raises(IntegrationError):
            rk4(lambda t, y: y * np.inf, [1.0], [0.0, 1.0], step=0.1)

    def test_rk4_exponential(self):
        states = rk4(lambda t, y: -y, [1.0], np.linspace(0.0, 1.0, 5), step=1e-3)
        assert np.allclose(states[:, 0], np.exp(-np.linspace(0.0, 1.0, 5)), atol=1e-12)
