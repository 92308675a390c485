from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation as ScipyRotation

from sewarm import geometry as geo


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    return geo.rodrigues(random_unit(rng), rng.uniform(-math.pi, math.pi))


def random_frame(rng: np.random.Generator) -> geo.Frame:
    return geo.Frame(orientation=random_rotation(rng), origin=rng.normal(size=3))


class TestRodrigues:
    def test_zero_angle_is_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            assert np.allclose(geo.rodrigues(random_unit(rng), 0.0), np.eye(3), atol=1e-12)

    def test_quarter_turn_about_z(self):
        r = geo.rodrigues(np.array([0.0, 0.0, 1.0]), math.pi / 2)
        assert np.allclose(r @ np.array([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)

    def test_inverse_by_negated_angle(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            axis = random_unit(rng)
            angle = rng.uniform(-math.pi, math.pi)
            prod = geo.rodrigues(axis, angle) @ geo.rodrigues(axis, -angle)
            assert np.allclose(prod, np.eye(3), atol=1e-12)

    def test_matches_matrix_form(self):
        # Componentwise expansion must equal I + s*hat + (1-c)*hat^2.
        rng = np.random.default_rng(2)
        for _ in range(50):
            axis = random_unit(rng)
            angle = rng.uniform(-2 * math.pi, 2 * math.pi)
            h = geo.hat(axis)
            ref = np.eye(3) + math.sin(angle) * h + (1 - math.cos(angle)) * (h @ h)
            assert np.allclose(geo.rodrigues(axis, angle), ref, atol=1e-12)

    def test_output_is_rotation(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            assert geo.is_rotation(geo.rodrigues(random_unit(rng), rng.uniform(-10, 10)))

    def test_period_2pi(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            axis = random_unit(rng)
            angle = rng.uniform(-math.pi, math.pi)
            a = geo.rodrigues(axis, angle)
            b = geo.rodrigues(axis, angle + 2 * math.pi)
            assert np.max(np.abs(a - b)) < 1e-12

    def test_non_unit_axis_rejected(self):
        with pytest.raises(geo.DegenerateInputError):
            geo.rodrigues(np.array([1.0, 1.0, 0.0]), 0.3)

    def test_rotate_matches_matrix(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            axis = random_unit(rng)
            angle = rng.uniform(-math.pi, math.pi)
            v = rng.normal(size=3)
            assert np.allclose(geo.rotate(axis, angle, v), geo.rodrigues(axis, angle) @ v, atol=1e-12)


class TestTransformPoint:
    def test_identical_frames_identity(self):
        rng = np.random.default_rng(6)
        f = random_frame(rng)
        v = rng.normal(size=3)
        assert np.allclose(geo.transform_point(v, f, f), v, atol=1e-12)

    def test_world_into_translated_frame(self):
        t = np.array([0.1, -0.2, 0.3])
        shifted = geo.Frame(origin=t)
        v = np.array([1.0, 2.0, 3.0])
        assert np.allclose(geo.transform_point(v, geo.WORLD_FRAME, shifted), v - t, atol=1e-15)

    def test_round_trip_random_frames(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            fa, fb = random_frame(rng), random_frame(rng)
            v = rng.normal(size=3)
            back = geo.transform_point(geo.transform_point(v, fa, fb), fb, fa)
            assert np.allclose(back, v, atol=1e-12)


class TestMakeFrame:
    def test_canonical_upright_torso(self):
        f = geo.make_frame(
            np.array([0.0, 0.25, 0.0]),
            np.array([0.0, -0.25, 0.0]),
            np.array([0.0, 0.0, -0.5]),
        )
        assert np.allclose(f.orientation, np.eye(3), atol=1e-12)
        assert np.allclose(f.origin, np.zeros(3), atol=1e-12)

    def test_swap_left_right_flips_y_keeps_det(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            k_l, k_r, k_b = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
            try:
                f = geo.make_frame(k_l, k_r, k_b)
                g = geo.make_frame(k_r, k_l, k_b)
            except geo.DegenerateInputError:
                continue
            assert np.allclose(g.orientation[:, 1], -f.orientation[:, 1], atol=1e-12)
            assert np.allclose(g.orientation[:, 0], -f.orientation[:, 0], atol=1e-12)
            assert abs(np.linalg.det(g.orientation) - 1.0) < 1e-9

    def test_collinear_raises(self):
        with pytest.raises(geo.DegenerateInputError):
            geo.make_frame(
                np.array([0.0, 0.0, 0.0]),
                np.array([1.0, 0.0, 0.0]),
                np.array([2.0, 0.0, 0.0]),
            )

    def test_columns_orthonormal(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            pts = rng.normal(size=(3, 3))
            try:
                f = geo.make_frame(*pts)
            except geo.DegenerateInputError:
                continue
            assert geo.is_rotation(f.orientation)


class TestAxisAngleAndQuat:
    def test_axis_angle_round_trip(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            axis = random_unit(rng)
            angle = rng.uniform(1e-6, math.pi - 1e-6)
            got_axis, got_angle = geo.axis_angle(geo.rodrigues(axis, angle))
            assert abs(got_angle - angle) < 1e-9
            assert np.allclose(got_axis, axis, atol=1e-6)

    def test_axis_angle_near_pi(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            axis = random_unit(rng)
            rot = geo.rodrigues(axis, math.pi)
            got_axis, got_angle = geo.axis_angle(rot)
            assert abs(got_angle - math.pi) < 1e-6
            # Axis sign is ambiguous at pi; the reconstruction must match.
            assert np.allclose(geo.rodrigues(got_axis, got_angle), rot, atol=1e-6)

    def test_quat_round_trip(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            rot = random_rotation(rng)
            assert np.allclose(geo.quat_to_rot(geo.rot_to_quat(rot)), rot, atol=1e-12)

    def test_quat_matches_scipy(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            rot = random_rotation(rng)
            q = geo.rot_to_quat(rot)
            q_ref = ScipyRotation.from_matrix(rot).as_quat()
            if q_ref[3] < 0:
                q_ref = -q_ref
            assert np.allclose(q, q_ref, atol=1e-9)


ALL_EULER_ORDERS = [
    "xyz", "xzy", "yxz", "yzx", "zxy", "zyx",
    "xyx", "xzx", "yxy", "yzy", "zxz", "zyz",
]


class TestEulerDecompose:
    @pytest.mark.parametrize("order", ALL_EULER_ORDERS)
    def test_round_trip_all_orders(self, order):
        rng = np.random.default_rng(hash(order) % 2**32)
        for _ in range(200):
            angles = rng.uniform(-math.pi + 0.01, math.pi - 0.01, size=3)
            if order[0] == order[2]:
                angles[1] = rng.uniform(0.05, math.pi - 0.05)
            else:
                angles[1] = rng.uniform(-math.pi / 2 + 0.05, math.pi / 2 - 0.05)
            rot = geo.euler_compose(order, tuple(angles))
            got = geo.euler_decompose(rot, order)
            assert np.allclose(geo.euler_compose(order, got), rot, atol=1e-10)
            assert np.allclose(got, angles, atol=1e-9)

    @pytest.mark.parametrize("order", ALL_EULER_ORDERS)
    def test_matches_scipy(self, order):
        rng = np.random.default_rng(hash(order + "s") % 2**32)
        for _ in range(50):
            rot = random_rotation(rng)
            try:
                got = geo.euler_decompose(rot, order)
            except geo.GimbalLockError:
                continue
            ref = ScipyRotation.from_matrix(rot).as_euler(order.upper())
            assert np.allclose(got, ref, atol=1e-8)

    def test_gimbal_raises(self):
        rot = geo.euler_compose("zyx", (0.3, math.pi / 2, 0.1))
        with pytest.raises(geo.GimbalLockError):
            geo.euler_decompose(rot, "zyx")
        rot = geo.euler_compose("xyx", (0.3, 0.0, 0.1))
        with pytest.raises(geo.GimbalLockError):
            geo.euler_decompose(rot, "xyx")


@given(st.floats(min_value=-50.0, max_value=50.0))
@settings(max_examples=200, deadline=None)
def test_wrap_angle_range(angle):
    wrapped = geo.wrap_angle(angle)
    assert -math.pi < wrapped <= math.pi
    assert abs(math.sin(wrapped) - math.sin(angle)) < 1e-9
    assert abs(math.cos(wrapped) - math.cos(angle)) < 1e-9
