import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csmimo.scene import Jammer, RadarParams, Target, sample_node_placement
from csmimo.sensing import AngleDopplerGrid, basis_matrix, generate_measurement_matrix
from csmimo.signal import (doppler_matrix, ground_truth_vector, synthesize_all, synthesize_received)
from csmimo.waveform import generate_jammer_waveform, generate_qpsk


def test_doppler_matrix_zero_is_identity():
    np.testing.assert_array_equal(doppler_matrix(0.0, 8, 1e-3), np.eye(8))


@given(st.floats(-1e5, 1e5))
def test_doppler_matrix_unitary(f):
    d = doppler_matrix(f, 16, 1 / 20e6)
    np.testing.assert_allclose(d.conj().T @ d, np.eye(16), atol=1e-12)


def test_doppler_matrix_half_turn():
    L, ts = 64, 1 / 20e6
    d = np.diag(doppler_matrix(1 / (L * ts), L, ts))
    assert d[L // 2] == pytest.approx(-1.0)
    assert d[0] == 1.0


def test_empty_scene_is_zero(params, setup_30):
    placement, x = setup_30
    z = synthesize_received(params, placement, (), x, 0, 1).snapshots
    np.testing.assert_array_equal(z, np.zeros(params.snapshots_per_pulse))


def test_dimension_mismatch(params, setup_30):
    placement, _ = setup_30
    x = generate_qpsk(params.snapshots_per_pulse, 10, rng_seed=0)
    with pytest.raises(ValueError):
        synthesize_received(params, placement, (), x, 0, 1)
    with pytest.raises(ValueError):
        synthesize_received(params, placement, (), generate_qpsk(512, 30), 0, 0)


def test_jammer_needs_waveform(params, setup_30):
    placement, x = setup_30
    with pytest.raises(ValueError):
        synthesize_received(params, placement, (), x, 0, 1, Jammer(0.1))


@pytest.mark.parametrize("speed,pulse", [(0.0, 1), (70.0, 3)])
def test_on_grid_synthesis_equals_basis_times_truth(speed, pulse):
    params = RadarParams(num_pulses=4)
    placement = sample_node_placement(params, 30, 3, 1)
    x = generate_qpsk(params.snapshots_per_pulse, 30, rng_seed=2)
    grid = AngleDopplerGrid.from_degrees(params, -2, 2, 0.2, 60, 80, 5)
    target = Target(np.radians(0.4), speed)
    s = ground_truth_vector(grid, [target], params)
    if speed == 0.0:
        grid = AngleDopplerGrid.from_degrees(params, -2, 2, 0.2)
        s = ground_truth_vector(grid, [target], params)
    assert len(s.support) == 1
    for l in range(3):
        z = synthesize_received(params, placement, [target], x, l, pulse).snapshots
        psi = basis_matrix(placement, params, x, grid, l, pulse)
        assert np.max(np.abs(z - psi @ s.values)) < 1e-12


def test_fig2_targets_on_default_grid(params):
    grid = AngleDopplerGrid.from_degrees(params, -8, 8, 0.2)
    gt = ground_truth_vector(grid, [Target(np.radians(0.2)), Target(np.radians(-0.2))], params)
    assert grid.size == 81
    assert sorted(gt.support) == [39, 41]
    assert np.count_nonzero(gt.values) == 2


def test_off_grid_target_left_out(params):
    grid = AngleDopplerGrid.from_degrees(params, -8, 8, 0.2)
    assert ground_truth_vector(grid, [Target(np.radians(0.1))], params).support == ()


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-0.1, 0.1), min_size=1, max_size=3), st.lists(st.floats(-0.1, 0.1), min_size=1, max_size=3),
       st.integers(0, 1000))
def test_linearity(a_angles, b_angles, seed):
    params = RadarParams(num_pulses=2)
    placement = sample_node_placement(params, 6, 2, seed)
    x = generate_qpsk(params.snapshots_per_pulse, 6, rng_seed=seed)
    ta = [Target(a, 20.0) for a in a_angles]
    tb = [Target(b, -10.0) for b in b_angles]
    za = synthesize_all(params, placement, ta, x, 2)
    zb = synthesize_all(params, placement, tb, x, 2)
    zab = synthesize_all(params, placement, ta + tb, x, 2)
    np.testing.assert_allclose(zab, za + zb, atol=1e-12)


def test_noise_streams_are_independent_per_node_and_pulse(params, setup_30):
    placement, x = setup_30
    z = synthesize_all(params, placement, (), x, 3, noise_variance=1.0, rng_seed=5)
    assert not np.allclose(z[0, 0], z[0, 1])
    np.testing.assert_array_equal(z, synthesize_all(params, placement, (), x, 3, noise_variance=1.0, rng_seed=5))


def test_compressed_jammer_power(params, setup_30):
    placement, x = setup_30
    L, M, beta2 = params.snapshots_per_pulse, 30, 400.0
    phi = generate_measurement_matrix("gaussian", M, L, rng_seed=0).matrix
    jammer = Jammer(np.radians(7.0), amplitude=math.sqrt(beta2))
    powers = []
    for seed in range(2000):
        jw = generate_jammer_waveform(L, 1, seed)
        z = synthesize_received(params, placement, (), x, 0, 1, jammer, jw).snapshots
        powers.append(np.sum(np.abs(phi @ z) ** 2))
    expected = beta2 * np.real(np.trace(phi @ phi.conj().T)) / L
    assert np.mean(powers) == pytest.approx(expected, rel=0.05)
