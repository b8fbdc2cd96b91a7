import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sidewalk_sim.spatial_graph import (
    Pose,
    TurnAction,
    bearing,
    forward_target,
    hop_distance,
    hop_distances_from,
    make_world,
    turn,
)

from conftest import brute_force_forward, random_connected_graph


class TestTurn:
    def test_right_small_increments(self):
        assert turn(Pose(5, 0), TurnAction.RIGHT_SMALL) == Pose(5, 1)

    def test_right_small_wraps(self):
        assert turn(Pose(5, 15), TurnAction.RIGHT_SMALL) == Pose(5, 0)

    def test_left_big_wraps_negative(self):
        assert turn(Pose(5, 2), TurnAction.LEFT_BIG) == Pose(5, 15)

    @given(st.integers(0, 15))
    def test_sixteen_right_smalls_are_identity(self, wedge):
        pose = Pose(0, wedge)
        for _ in range(16):
            pose = turn(pose, TurnAction.RIGHT_SMALL)
        assert pose.wedge == wedge

    @given(st.integers(0, 15), st.sampled_from(list(TurnAction)))
    def test_turn_is_a_bijection(self, wedge, action):
        inverse = {
            TurnAction.LEFT_BIG: TurnAction.RIGHT_BIG,
            TurnAction.RIGHT_BIG: TurnAction.LEFT_BIG,
            TurnAction.LEFT_SMALL: TurnAction.RIGHT_SMALL,
            TurnAction.RIGHT_SMALL: TurnAction.LEFT_SMALL,
        }[action]
        assert turn(turn(Pose(0, wedge), action), inverse).wedge == wedge


class TestBearing:
    def test_due_north(self):
        w = make_world([(0.0, 0.0), (0.0, 1.0)], [(0, 1)])
        assert bearing(w, 0, 1) == pytest.approx(0.0)

    def test_due_east(self):
        w = make_world([(0.0, 0.0), (1.0, 0.0)], [(0, 1)])
        assert bearing(w, 0, 1) == pytest.approx(90.0)

    def test_southwest(self):
        w = make_world([(0.0, 0.0), (-1.0, -1.0)], [(0, 1)])
        assert bearing(w, 0, 1) == pytest.approx(225.0)

    def test_coincident_nodes_error(self):
        w = make_world([(0.0, 0.0), (0.0, 0.0)], [(0, 1)])
        with pytest.raises(ValueError, match="coincident"):
            bearing(w, 0, 1)


class TestForwardTarget:
    def test_single_neighbor_due_north(self):
        w = make_world([(0.0, 0.0), (0.0, 1.0)], [(0, 1)])
        assert forward_target(w, Pose(0, 0)) == 1

    def test_neighbor_beyond_cone(self):
        b = math.radians(50.0)
        w = make_world([(0.0, 0.0), (math.sin(b), math.cos(b))], [(0, 1)])
        assert forward_target(w, Pose(0, 0)) is None

    def test_boundary_is_inclusive(self):
        b = math.radians(45.0)
        w = make_world([(0.0, 0.0), (math.sin(b), math.cos(b))], [(0, 1)])
        assert forward_target(w, Pose(0, 0)) == 1

    def test_nearest_of_two_neighbors(self):
        # bearings 30 and 340 from node 0; |-20| beats |30|
        b1, b2 = math.radians(30.0), math.radians(340.0)
        w = make_world(
            [(0.0, 0.0), (math.sin(b1), math.cos(b1)), (math.sin(b2), math.cos(b2))],
            [(0, 1), (0, 2)],
        )
        assert forward_target(w, Pose(0, 0)) == 2

    def test_matches_brute_force_on_random_worlds(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            w = random_connected_graph(rng, 30)
            for node in range(w.num_nodes):
                for wedge in range(16):
                    assert forward_target(w, Pose(node, wedge)) == brute_force_forward(
                        w, node, wedge
                    )

    def test_pure_function_of_pose(self):
        rng = np.random.default_rng(0)
        w = random_connected_graph(rng, 20)
        pose = Pose(3, 5)
        assert forward_target(w, pose) == forward_target(w, pose)


class TestHopDistance:
    def test_zero_iff_same(self):
        w = make_world([(0.0, 0.0), (0.0, 1.0)], [(0, 1)])
        assert hop_distance(w, 0, 0) == 0
        assert hop_distance(w, 0, 1) == 1

    def test_line_graph(self):
        w = make_world([(0.0, float(i)) for i in range(4)], [(0, 1), (1, 2), (2, 3)])
        assert hop_distance(w, 0, 3) == 3

    def test_unreachable_pair_errors(self):
        w = make_world([(0.0, 0.0), (0.0, 1.0), (5.0, 5.0), (5.0, 6.0)], [(0, 1), (2, 3)])
        with pytest.raises(ValueError, match="not connected"):
            hop_distance(w, 0, 3)

    def test_matches_floyd_warshall(self):
        rng = np.random.default_rng(7)
        w = random_connected_graph(rng, 50)
        n = w.num_nodes
        dist = np.full((n, n), np.inf)
        np.fill_diagonal(dist, 0.0)
        for a, b in w.edges:
            dist[a, b] = dist[b, a] = 1.0
        for k in range(n):
            dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
        for _ in range(20):
            a, b = int(rng.integers(n)), int(rng.integers(n))
            assert hop_distance(w, a, b) == int(dist[a, b])

    def test_symmetry_and_triangle_inequality(self):
        rng = np.random.default_rng(3)
        w = random_connected_graph(rng, 40)
        fields = {s: hop_distances_from(w, s) for s in range(w.num_nodes)}
        for _ in range(100):
            a, b, c = (int(x) for x in rng.integers(w.num_nodes, size=3))
            assert fields[a][b] == fields[b][a]
            assert fields[a][c] <= fields[a][b] + fields[b][c]


class TestForwardConeProperty:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.integers(0, 15))
    def test_target_within_45_degrees(self, seed, wedge):
        w = random_connected_graph(np.random.default_rng(seed % 1000), 15)
        for node in range(w.num_nodes):
            tgt = forward_target(w, Pose(node, wedge))
            if tgt is not None:
                off = abs((bearing(w, node, tgt) - wedge * 22.5 + 180.0) % 360.0 - 180.0)
                assert off <= 45.0 + 1e-9
