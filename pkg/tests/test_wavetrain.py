"""Tests for wave-train solving, seeding and continuation."""

import numpy as np
import pytest

from spiralspec import fourier, kinetics, wavetrain
from spiralspec.errors import (
    ContinuationStalledError,
    DegenerateSolutionError,
    InvalidWaveTrainError,
    NoConvergenceError,
)

BARKLEY = kinetics.get_model("barkley")


class TestResidual:
    def test_rest_state(self):
        assert wavetrain.residual(BARKLEY, (np.zeros(32), np.zeros(32)), 2.0, 0.7) == 0.0

    def test_excited_equilibrium(self):
        assert wavetrain.residual(BARKLEY, (np.ones(32), np.ones(32)), 1.0, 0.5) == 0.0

    def test_random_profile_is_not_a_solution(self, rng):
        assert wavetrain.residual(BARKLEY, (rng.random(32), rng.random(32)), 1.0, 0.5) > 0

    def test_odd_grid_rejected(self):
        with pytest.raises(InvalidWaveTrainError):
            wavetrain.residual(BARKLEY, (np.zeros(5), np.zeros(5)), 1.0, 1.0)


class TestSolve:
    def test_converged_barkley(self, barkley_wt):
        assert barkley_wt.residual_norm < 1e-8
        assert barkley_wt.omega > 0
        assert wavetrain.residual(BARKLEY, barkley_wt, barkley_wt.omega, barkley_wt.kappa) < 1e-8

    def test_fixed_point(self, barkley_wt):
        again = wavetrain.solve(BARKLEY, barkley_wt.kappa, barkley_wt)
        assert again.residual_norm < 1e-10
        assert np.max(np.abs(again.u - barkley_wt.u)) < 1e-8
        assert wavetrain.phase_condition(barkley_wt, again.u, again.v) == pytest.approx(0, abs=1e-10)

    def test_rotation_invariance(self, barkley_wt):
        rot = wavetrain.rotate(barkley_wt, 17)
        assert wavetrain.residual(BARKLEY, rot, rot.omega, rot.kappa) < 1e-8

    def test_constant_seed(self):
        with pytest.raises(DegenerateSolutionError):
            wavetrain.solve(BARKLEY, 0.6, (np.zeros(64), np.zeros(64)), omega=1.0)

    def test_collapsing_seed(self):
        x = fourier.grid(64, 2 * np.pi / 0.6)
        seed = (1e-3 * np.cos(0.6 * x), np.zeros(64))
        with pytest.raises((DegenerateSolutionError, NoConvergenceError)):
            wavetrain.solve(BARKLEY, 0.6, seed, omega=1.0)

    def test_grid_refinement(self, barkley_wt):
        fine = wavetrain.solve(BARKLEY, barkley_wt.kappa, wavetrain.resample(barkley_wt, 512))
        assert abs(fine.omega - barkley_wt.omega) < 1e-6

    def test_karma_wave_train(self, karma_wt):
        model = kinetics.get_model("karma")
        assert karma_wt.residual_norm < 1e-8
        assert wavetrain.residual(model, karma_wt, karma_wt.omega, karma_wt.kappa) < 1e-8


class TestSeed:
    def test_zero_time_returns_initial_pulse(self):
        p = wavetrain.simulate_seed(BARKLEY, 0.5, n=64, t_end=0.0)
        assert np.max(p.u) > 0.5 and np.argmax(p.u) == 0

    def test_barkley_seed_is_excited(self):
        p = wavetrain.simulate_seed(BARKLEY, 0.5, n=128, t_end=20.0)
        assert np.max(p.u) > 0.5

    def test_subthreshold_kinetics_decay(self):
        model = kinetics.get_model("barkley")
        p = wavetrain.simulate_seed(model, 0.5, n=64, t_end=30.0, amplitude=0.05)
        assert np.max(np.abs(p.u)) < 1e-3


class TestContinuation:
    def test_zero_length(self, barkley_wt):
        (same,) = wavetrain.continue_in_delta(BARKLEY, barkley_wt, [0.0])
        assert same.residual_norm < 1e-10
        assert np.max(np.abs(same.u - barkley_wt.u)) < 1e-8

    def test_delta_family(self, barkley_wt):
        targets = np.linspace(0.02, 0.2, 10)
        family = wavetrain.continue_in_delta(BARKLEY, barkley_wt, targets)
        assert len(family) == 10
        models = [BARKLEY.with_delta(d) for d in targets]
        assert all(wavetrain.residual(m, w, w.omega, w.kappa) < 1e-8 for m, w in zip(models, family))
        members = [barkley_wt] + family
        jumps = [np.max(np.abs(b.u - a.u)) / (b.delta - a.delta) for a, b in zip(members, members[1:])]
        assert max(jumps) <= 10 * jumps[0]
        omegas = np.array([w.omega for w in members])
        assert np.all(np.abs(np.diff(omegas)) < 0.1 * omegas[0])

    def test_negative_target(self, barkley_wt):
        with pytest.raises(ContinuationStalledError):
            wavetrain.continue_in_delta(BARKLEY, barkley_wt, [-0.1])

    def test_unbridgeable_gap(self, barkley_wt):
        with pytest.raises(ContinuationStalledError):
            wavetrain.continue_in_delta(BARKLEY, barkley_wt, [50.0], max_iter=2,
                                        delta_min_step=10.0)


class TestProfileIO:
    def test_csv_round_trip(self, barkley_wt, tmp_path):
        path = tmp_path / "p.csv"
        wavetrain.save_profile_csv(barkley_wt, path)
        p = wavetrain.load_profile_csv(path)
        assert np.array_equal(p.u, barkley_wt.u)
        assert p.kappa == pytest.approx(barkley_wt.kappa)
