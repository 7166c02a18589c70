import numpy as np
import pytest

from conftest import pendulum_chain, straight_chain
from dynamics.chain import (Joint, Link, Pose6, clamp_to_limits, coriolis_vector, forward_kinematics, gravity_vector,
                            jacobian, kinematics, kinetic_energy, make_chain, mass_matrix, potential_energy,
                            quasi_static_torque)
from dynamics.loader import load_chain
from geometry.rot3 import vee
from utils.error_handler import ConfigError, DimensionMismatch


def _homogeneous(position, R):
    T = np.eye(4)
    T[:3, :3] = R
    T[:3, 3] = position
    return T


def _axis_rotation(axis, a):
    axis = np.asarray(axis, dtype=float)
    cross = np.array([[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]])
    return np.cos(a) * np.eye(3) + np.sin(a) * cross + (1.0 - np.cos(a)) * np.outer(axis, axis)


def _fk_oracle(chain, q):
    T = chain.base.as_matrix()
    for joint, qi in zip(chain.joints, q):
        T = T @ joint.origin.as_matrix() @ _homogeneous(np.zeros(3), _axis_rotation(joint.axis, qi))
    return T @ chain.tip.as_matrix()


def _random_q(chain, rng):
    return rng.uniform(chain.lower, chain.upper)


class TestForwardKinematics:
    def test_straight_chain_at_zero(self):
        chain = straight_chain()
        pose = forward_kinematics(chain, np.zeros(4))
        assert np.allclose(pose.position, [0.0, 0.0, 0.20], atol=1e-15)
        assert np.allclose(pose.orientation, np.eye(3), atol=1e-15)

    def test_single_joint_quarter_turn(self):
        joint = Joint("j0", Pose6.identity(), np.array([0.0, 0.0, 1.0]), -np.pi, np.pi, 1.0)
        chain = make_chain("arm", [joint], [Link(0.1, np.zeros(3), np.eye(3) * 1e-6)],
                           tip=Pose6.from_xyz_rpy([0.1, 0.0, 0.0]))
        pose = forward_kinematics(chain, [np.pi / 2])
        assert np.allclose(pose.position, [0.0, 0.1, 0.0], atol=1e-15)

    @pytest.mark.parametrize("fixture", ["index_chain", "thumb_chain"])
    def test_matches_homogeneous_product(self, fixture, request, rng):
        chain = request.getfixturevalue(fixture)
        for _ in range(100):
            q = _random_q(chain, rng)
            pose = forward_kinematics(chain, q)
            assert np.allclose(pose.as_matrix(), _fk_oracle(chain, q), atol=1e-12)

    def test_wrong_length(self, index_chain):
        with pytest.raises(DimensionMismatch):
            forward_kinematics(index_chain, np.zeros(3))


class TestJacobian:
    def test_single_joint(self):
        joint = Joint("j0", Pose6.identity(), np.array([0.0, 0.0, 1.0]), -np.pi, np.pi, 1.0)
        chain = make_chain("arm", [joint], [Link(0.1, np.zeros(3), np.eye(3) * 1e-6)],
                           tip=Pose6.from_xyz_rpy([0.1, 0.0, 0.0]))
        J_v, J_w = jacobian(chain, [0.0])
        assert np.allclose(J_v[:, 0], [0.0, 0.1, 0.0], atol=1e-15)
        assert np.allclose(J_w[:, 0], [0.0, 0.0, 1.0], atol=1e-15)

    def test_central_differences(self, index_chain, rng):
        h = 1e-6
        for _ in range(100):
            q = _random_q(index_chain, rng)
            J_v, J_w = jacobian(index_chain, q)
            num_v = np.zeros((3, 4))
            num_w = np.zeros((3, 4))
            for i in range(4):
                dq = np.zeros(4)
                dq[i] = h
                plus, minus = forward_kinematics(index_chain, q + dq), forward_kinematics(index_chain, q - dq)
                num_v[:, i] = (plus.position - minus.position) / (2 * h)
                num_w[:, i] = vee(plus.orientation @ minus.orientation.T) / (2 * h)
            assert np.linalg.norm(num_v - J_v) <= 1e-5 * np.linalg.norm(J_v)
            assert np.linalg.norm(num_w - J_w) <= 1e-5 * np.linalg.norm(J_w)

    def test_small_displacement(self, index_chain, rng):
        for _ in range(100):
            q = _random_q(index_chain, rng)
            dq = rng.standard_normal(4)
            dq *= 1e-6 / np.linalg.norm(dq)
            J_v, _ = jacobian(index_chain, q)
            moved = forward_kinematics(index_chain, q + dq).position - forward_kinematics(index_chain, q).position
            assert np.allclose(moved, J_v @ dq, atol=1e-10)


class TestDynamics:
    def test_pendulum_mass_matrix(self):
        chain = pendulum_chain(mass=0.1, length=0.1)
        M = mass_matrix(chain, [0.3])
        assert M.shape == (1, 1)
        assert M[0, 0] == pytest.approx(0.1 * 0.1 ** 2 + 1e-6, abs=1e-15)

    def test_armature_adds_to_diagonal(self):
        bare = mass_matrix(pendulum_chain(mass=0.1, length=0.1), [0.3])
        geared = mass_matrix(pendulum_chain(mass=0.1, length=0.1, armature=0.01), [0.3])
        assert geared[0, 0] - bare[0, 0] == pytest.approx(0.01, abs=1e-15)

    def test_mass_matrix_symmetric_positive_definite(self, index_chain, rng):
        for _ in range(100):
            M = mass_matrix(index_chain, _random_q(index_chain, rng))
            assert np.max(np.abs(M - M.T)) < 1e-12
            assert np.min(np.linalg.eigvalsh(M)) > 0.0

    def test_no_gravity_torque_when_hanging_along_gravity(self, index_chain):
        assert np.allclose(gravity_vector(index_chain, np.zeros(4)), 0.0, atol=1e-15)

    def test_horizontal_pendulum_gravity(self):
        chain = pendulum_chain(mass=0.1, com=[0.1, 0.0, 0.0])
        g = gravity_vector(chain, [0.0])
        assert abs(g[0]) == pytest.approx(0.1 * 9.81 * 0.1, abs=1e-12)

    def test_gravity_is_potential_gradient(self, index_chain, rng):
        h = 1e-6
        for _ in range(50):
            q = _random_q(index_chain, rng)
            grad = np.zeros(4)
            for i in range(4):
                dq = np.zeros(4)
                dq[i] = h
                grad[i] = (potential_energy(index_chain, q + dq) - potential_energy(index_chain, q - dq)) / (2 * h)
            assert np.allclose(gravity_vector(index_chain, q), grad, atol=1e-6)

    def test_coriolis_zero_at_rest(self, index_chain, rng):
        assert np.array_equal(coriolis_vector(index_chain, _random_q(index_chain, rng), np.zeros(4)), np.zeros(4))

    def test_coriolis_power_balance(self, index_chain, rng):
        # qdot^T C qdot = 1/2 qdot^T Mdot qdot
        h = 1e-6
        for _ in range(20):
            q = _random_q(index_chain, rng)
            qdot = rng.uniform(-3.0, 3.0, 4)
            Mdot = (mass_matrix(index_chain, q + h * qdot) - mass_matrix(index_chain, q - h * qdot)) / (2 * h)
            lhs = qdot @ coriolis_vector(index_chain, q, qdot)
            rhs = 0.5 * qdot @ Mdot @ qdot
            assert lhs == pytest.approx(rhs, rel=1e-4, abs=1e-10)

    def test_kinetic_energy(self, index_chain, rng):
        q = _random_q(index_chain, rng)
        qdot = rng.standard_normal(4)
        assert kinetic_energy(index_chain, q, qdot) == pytest.approx(0.5 * qdot @ mass_matrix(index_chain, q) @ qdot)


def test_quasi_static_torque():
    J_w = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
    assert np.allclose(quasi_static_torque(J_w, [0.5, 0.25, 3.0]), [0.5, 0.5])


def test_clamp_to_limits(index_chain):
    q = np.array([1.0, 0.2, -1.0, 0.3])
    clamped, mask = clamp_to_limits(index_chain, q)
    assert np.allclose(clamped, [0.47, 0.2, -0.174, 0.3])
    assert mask.tolist() == [True, False, True, False]


class TestLoader:
    def test_reference_chains(self, index_chain, thumb_chain):
        assert index_chain.m == 4 and thumb_chain.m == 4
        assert np.allclose(index_chain.torque_limits, 0.7)

    def _write(self, tmp_path, text):
        path = tmp_path / "chain.yaml"
        path.write_text(text)
        return path

    def test_reference_chains_carry_armature(self, index_chain):
        assert np.all(index_chain.armature > 0.0)
        M = mass_matrix(index_chain, np.zeros(4))
        assert np.all(np.diag(M) > index_chain.armature)

    def test_negative_armature(self, tmp_path):
        path = self._write(tmp_path, """
joints:
  - axis: [0, 1, 0]
    limits: [-1, 1]
    torque_limit: 0.5
    armature: -0.001
    link: {mass: 0.1, inertia: [1e-6, 1e-6, 1e-6, 0, 0, 0]}
""")
        with pytest.raises(ConfigError, match="armature"):
            load_chain(path)

    def test_missing_inertia(self, tmp_path):
        path = self._write(tmp_path, """
joints:
  - axis: [0, 1, 0]
    limits: [-1, 1]
    torque_limit: 0.5
    link: {mass: 0.1, com: [0, 0, 0.02]}
""")
        with pytest.raises(ConfigError) as exc:
            load_chain(path)
        assert exc.value.details['field'] == "joints[0].link.inertia"
        assert exc.value.details['path'] == str(path)

    def test_non_unit_axis(self, tmp_path):
        path = self._write(tmp_path, """
joints:
  - axis: [0, 2, 0]
    limits: [-1, 1]
    torque_limit: 0.5
    link: {mass: 0.1, inertia: [1e-6, 1e-6, 1e-6, 0, 0, 0]}
""")
        with pytest.raises(ConfigError, match="unit-norm"):
            load_chain(path)

    def test_syntax_error_reports_line(self, tmp_path):
        path = self._write(tmp_path, "name: bad\njoints:\n  - axis: [0, 1, 0\n    limits: [-1, 1]\n")
        with pytest.raises(ConfigError) as exc:
            load_chain(path)
        assert exc.value.details['line'] is not None

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_chain(tmp_path / "nope.yaml")
