"""Smoke tests for the python bindings: small end-to-end exercises of the
main operations against numpy re-computations."""

import math

import numpy as np
import pytest

import codedlens as cl


@pytest.fixture(scope="module")
def tiny_system():
    geometry = cl.CameraGeometry()
    geometry.sensor_pixels = 16
    geometry.sensor_pitch_mm = 0.05
    geometry.mask_features = 31
    geometry.mask_pitch_mm = 0.06
    geometry.mask_distance_mm = 2.0
    geometry.baseline_mm = 30.0
    geometry.scene_angles = 8
    geometry.projector_half_fov_rad = math.atan(0.1)
    mask = cl.MaskSpec.mls(5, geometry.mask_pitch_mm)
    depths = [400.0, 500.0, 600.0]
    model = cl.build_system_matrices(geometry, mask, depths)
    return geometry, mask, depths, model


def test_version():
    assert cl.__version__


def test_mls_properties():
    bits = np.array(cl.mls_vector(9))
    assert bits.size == 511
    assert bits.sum() == 256
    pm = 2.0 * bits - 1.0
    for lag in (1, 17, 255):
        assert np.dot(pm, np.roll(pm, lag)) == -1


def test_pattern_families():
    lines = cl.shifting_lines_sequence(16, 4)
    assert len(lines) == 8
    total = sum(np.asarray(p) for p in lines.patterns)
    assert np.all(total == 2.0)

    dots = cl.shifting_dots_sequence(16, 4)
    assert len(dots) == 16
    total = sum(np.asarray(p) for p in dots.patterns)
    assert np.all(total == 1.0)


def test_predict_depth_shift_matches_arithmetic(tiny_system):
    geometry, _, _, _ = tiny_system
    geometry.baseline_mm = 50.0
    expected = abs(100.0 / 398.0 - 100.0 / 598.0)
    assert cl.predict_depth_shift(400.0, 600.0, geometry) == pytest.approx(expected, rel=1e-12)


def test_forward_matches_numpy_einsum(tiny_system):
    _, _, depths, model = tiny_system
    rng = np.random.default_rng(5)
    planes = [rng.random((8, 8)) for _ in depths]
    scene = cl.SceneVolume(planes, depths)
    sequence = cl.shifting_lines_sequence(8, 2)

    frames = cl.forward(scene, sequence, model).frames
    left = [np.asarray(l) for l in model.left]
    right = [np.asarray(r) for r in model.right]
    for i, pattern in enumerate(sequence.patterns):
        expected = sum(
            left[k] @ (np.asarray(pattern) * planes[k]) @ right[k].T for k in range(len(depths))
        )
        np.testing.assert_allclose(np.asarray(frames[i]), expected, rtol=1e-12, atol=1e-14)


def test_adjoint_identity(tiny_system):
    _, _, depths, model = tiny_system
    rng = np.random.default_rng(11)
    planes = [rng.random((8, 8)) for _ in depths]
    scene = cl.SceneVolume(planes, depths)
    sequence = cl.shifting_dots_sequence(8, 2)
    frames = [rng.random((16, 16)) for _ in range(len(sequence))]

    ax = cl.forward(scene, sequence, model).frames
    aty = cl.apply_adjoint(frames, model, sequence)
    lhs = sum(np.vdot(frames[i], np.asarray(ax[i])) for i in range(len(frames)))
    rhs = sum(np.vdot(planes[k], np.asarray(aty[k])) for k in range(len(depths)))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_noise_is_seeded(tiny_system):
    _, _, depths, model = tiny_system
    planes = [np.full((8, 8), 0.5) for _ in depths]
    scene = cl.SceneVolume(planes, depths)
    clean = cl.forward(scene, cl.uniform_sequence(8), model)
    noise = cl.NoiseModel(full_well=2e4, gain=1.0, dynamic_range_db=60.0, seed=3)
    a = cl.add_noise(clean, noise)
    b = cl.add_noise(clean, noise)
    np.testing.assert_array_equal(np.asarray(a.frames[0]), np.asarray(b.frames[0]))
    assert not np.array_equal(np.asarray(a.frames[0]), np.asarray(clean.frames[0]))


def test_solver_recovers_single_plane(tiny_system):
    geometry, _, _, _ = tiny_system
    mask = cl.MaskSpec.mls(5, geometry.mask_pitch_mm)
    model = cl.build_system_matrices(geometry, mask, [500.0])
    sequence = cl.shifting_lines_sequence(8, 2)

    truth = np.zeros((8, 8))
    truth[2:5, 2:6] = 1.0
    truth[5:7, 1:3] = 0.5
    scene = cl.SceneVolume([truth], [500.0])
    frames = cl.forward(scene, sequence, model).frames

    planes, report = cl.solve_coded(
        model, sequence, frames, 1e-8, tv_epsilon=1e-5, max_iters=300, rel_tolerance=0.0
    )
    recovered = np.asarray(planes[0])
    rel_err = np.linalg.norm(recovered - truth) / np.linalg.norm(truth)
    assert rel_err <= 1e-2
    assert report.objective_trace[-1] <= report.objective_trace[0]
    assert recovered.min() >= 0.0


def test_depth_extraction_and_metrics():
    depths = [400.0, 500.0, 600.0]
    n = 16
    planes = [np.zeros((n, n)) for _ in depths]
    for r in range(n):
        for c in range(n):
            planes[(r + c) % 3][r, c] = 1.0
    volume = cl.SceneVolume(planes, depths)
    depth_cm, valid, aif = cl.extract_depth_and_aif(volume)
    assert np.all(valid == 1)
    assert np.all(aif == 1.0)
    assert cl.depth_rmse(depth_cm, valid, depth_cm, valid) == 0.0
    shifted = depth_cm + 2.0
    assert cl.depth_rmse(depth_cm, valid, shifted, valid) == pytest.approx(2.0)

    rng = np.random.default_rng(8)
    img = rng.random((32, 32))
    assert cl.ssim(img, img, 1.0) == 1.0


def test_experiment_pipeline(tmp_path):
    config = cl.ExperimentConfig.from_text(
        """
        scene_angles = 16
        sensor_pixels = 32
        sensor_pitch_um = 38.4
        mask_order = 5
        pattern_family = shifting_lines
        pattern_k = 4
        sim_planes = 3
        recon_planes = 2
        max_iters = 10
        seed = 4
        """
    )
    truth, frames = cl.run_simulate(config, tmp_path / "sim")
    assert (tmp_path / "sim" / "measurements.llv").exists()
    assert (tmp_path / "sim" / "manifest.txt").exists()
    assert len(truth) == 3 and len(frames) == 8

    volume, report = cl.run_reconstruct(config, frames, tmp_path / "rec")
    assert (tmp_path / "rec" / "volume.llv").exists()
    assert len(volume) == 2
    assert report.iterations <= 10
    assert report.objective_trace[-1] <= report.objective_trace[0]
