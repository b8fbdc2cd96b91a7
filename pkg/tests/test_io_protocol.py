import base64
import json
import math
import threading

import numpy as np
import pytest

from sidewalk_sim import oracle
from sidewalk_sim.annotations import AnnotationSet, NodeAnnotations
from sidewalk_sim.env_core import Action, Episode
from sidewalk_sim.protocol import ProtocolClient, ProtocolServer, ProtocolSession
from sidewalk_sim.rollout import bench, run_rollouts
from sidewalk_sim.spatial_graph import StreetSegment, make_world
from sidewalk_sim.synth_world import WorldSpec, generate
from sidewalk_sim.world import LoadedWorld, WorldValidationError
from sidewalk_sim.world_io import load_world, save_bundle

from conftest import FULL_W, FULL_H, black_panos, door_at_bearing


@pytest.fixture(scope="module")
def bundle(tmp_path_factory, tiny_world):
    path = tmp_path_factory.mktemp("worlds") / "tiny"
    save_bundle(tiny_world, path)
    return path


class TestBundleIO:
    def test_generate_then_load(self, bundle):
        world = load_world(bundle)
        assert world.graph.num_nodes == 15
        assert world.meta["content_hash"]

    def test_round_trip_byte_identical(self, bundle, tmp_path):
        world = load_world(bundle)
        again = save_bundle(world, tmp_path / "again")
        files = sorted(p.relative_to(bundle) for p in bundle.rglob("*") if p.is_file())
        assert files
        for rel in files:
            assert (again / rel).read_bytes() == (bundle / rel).read_bytes(), rel

    def test_flipped_byte_detected(self, bundle, tmp_path):
        import shutil

        broken = tmp_path / "broken"
        shutil.copytree(bundle, broken)
        blob = bytearray((broken / "annotations.json").read_bytes())
        blob[len(blob) // 2] ^= 0x01
        (broken / "annotations.json").write_bytes(bytes(blob))
        with pytest.raises(WorldValidationError, match="hash"):
            load_world(broken)

    def test_deleted_bridge_edge_names_stranded_node(self, tmp_path):
        # chain 0-1-2-3 with the middle edge removed: 2 and 3 are stranded
        coords = [(0.0, float(i)) for i in range(4)]
        doors = {3: door_at_bearing(0.0, 20.0)}
        graph = make_world(coords, [(0, 1), (2, 3)])
        ann = AnnotationSet({3: NodeAnnotations(doors=(doors[3],))}, FULL_W, FULL_H)
        world = LoadedWorld(graph, ann, black_panos(4), ["Main St"])
        root = save_bundle(world, tmp_path / "disconnected")
        with pytest.raises(WorldValidationError, match="node 2"):
            load_world(root)

    def test_missing_bundle(self, tmp_path):
        with pytest.raises(WorldValidationError, match="meta.json"):
            load_world(tmp_path / "nope")


class TestRollouts:
    def test_oracle_full_success(self, tiny_world):
        report = run_rollouts(tiny_world, "oracle", "AllObs", episodes=25, seed=3)
        assert report.success_rate == 1.0

    def test_same_seed_identical_reports(self, tiny_world):
        a = run_rollouts(tiny_world, "random", "AllObs", episodes=25, seed=9)
        b = run_rollouts(tiny_world, "random", "AllObs", episodes=25, seed=9)
        assert a.to_json() == b.to_json()
        assert a.to_csv() == b.to_csv()

    def test_different_seed_differs(self, tiny_world):
        a = run_rollouts(tiny_world, "random", "AllObs", episodes=25, seed=1)
        b = run_rollouts(tiny_world, "random", "AllObs", episodes=25, seed=2)
        assert a.to_json() != b.to_json()

    def test_aggregates_recomputable_from_rows(self, tiny_world):
        report = run_rollouts(tiny_world, "random", "AllObs", episodes=40, seed=5)
        rewards = [r.total_reward for r in report.rows]
        lengths = [r.length for r in report.rows]
        n = len(rewards)
        mean = sum(rewards) / n
        sd = math.sqrt(sum((x - mean) ** 2 for x in rewards) / n)
        assert abs(report.reward_mean - mean) < 1e-9 * max(1.0, abs(mean))
        assert abs(report.reward_sd - sd) < 1e-9 * max(1.0, sd)
        assert abs(report.length_mean - sum(lengths) / n) < 1e-9
        assert abs(report.success_rate - sum(r.success for r in report.rows) / n) < 1e-12

    def test_oracle_reward_positive_random_negative(self, tiny_world):
        o = run_rollouts(tiny_world, "oracle", "AllObs", episodes=25, seed=3)
        r = run_rollouts(tiny_world, "random", "AllObs", episodes=25, seed=3)
        assert o.reward_mean > r.reward_mean


class TestBench:
    @pytest.mark.slow
    def test_smoke(self, tiny_world):
        result = bench(tiny_world, steps=2000, warmup=200)
        assert result["steps_per_sec"] > 0
        assert result["peak_mem_mb"] > 0


def drive_session(session: ProtocolSession, world, seed: int, actions):
    """Run one wire episode, returning (rewards, dones)."""
    r = session.handle_line(json.dumps({"cmd": "reset", "task": "AllObs", "seed": seed}))
    assert r["ok"], r
    rewards, dones = [], []
    for a in actions:
        resp = session.handle_line(json.dumps({"cmd": "step", "action": a}))
        if not resp["ok"]:
            break
        rewards.append(resp["reward"])
        dones.append(resp["done"])
        if resp["done"]:
            break
    return rewards, dones


class TestProtocolSession:
    def test_reset_returns_first_observation(self, tiny_world):
        s = ProtocolSession(tiny_world)
        r = s.handle_line(json.dumps({"id": 7, "cmd": "reset", "task": "AllObs", "seed": 1}))
        assert r["ok"] and r["id"] == 7 and r["reward"] == 0.0 and not r["done"]
        img = r["obs"]["image"]
        assert img["shape"] == [3, 84, 84]
        raw = np.frombuffer(base64.b64decode(img["b64"]), dtype=np.uint8)
        assert raw.size == 3 * 84 * 84

    def test_step_before_reset_is_error(self, tiny_world):
        s = ProtocolSession(tiny_world)
        r = s.handle_line(json.dumps({"cmd": "step", "action": "FORWARD"}))
        assert not r["ok"] and r["error"]["code"] == "no_active_episode"

    def test_unknown_cmd_preserves_session(self, tiny_world):
        s = ProtocolSession(tiny_world)
        r = s.handle_line(json.dumps({"cmd": "frobnicate"}))
        assert not r["ok"] and r["error"]["code"] == "unknown_cmd"
        r = s.handle_line(json.dumps({"cmd": "reset", "task": "AllObs", "seed": 1}))
        assert r["ok"]

    def test_malformed_json_is_error_record(self, tiny_world):
        s = ProtocolSession(tiny_world)
        r = s.handle_line("{nope")
        assert not r["ok"] and r["error"]["code"] == "bad_request"

    def test_wire_episode_matches_in_process(self, tiny_world):
        """Full oracle episode over the wire: rewards identical to in-process."""
        ep = Episode(tiny_world, "AllObs", seed=13)
        ep.reset()
        actions, native_rewards, native_dones = [], [], []
        while True:
            a = oracle.act(tiny_world, ep.state)
            res = ep.step(a)
            actions.append(a.name)
            native_rewards.append(res.reward)
            native_dones.append(res.done)
            if res.done:
                break
        session = ProtocolSession(tiny_world)
        wire_rewards, wire_dones = drive_session(session, tiny_world, 13, actions)
        assert wire_rewards == native_rewards
        assert wire_dones == native_dones

    def test_wire_observation_matches_in_process(self, tiny_world):
        ep = Episode(tiny_world, "AllObs", seed=21)
        obs, _ = ep.reset()
        s = ProtocolSession(tiny_world)
        r = s.handle_line(json.dumps({"cmd": "reset", "task": "AllObs", "seed": 21}))
        img = r["obs"]["image"]
        wire = np.frombuffer(base64.b64decode(img["b64"]), dtype=np.uint8).reshape(img["shape"])
        np.testing.assert_array_equal(wire.astype(np.float32) / 255.0, obs.image)
        np.testing.assert_array_equal(np.array(r["obs"]["gps"], dtype=np.float32), obs.gps)
        np.testing.assert_array_equal(
            np.array(r["obs"]["house_vec"], dtype=np.float32), obs.house_vec
        )

    def test_fused_tensor_on_request(self, tiny_world):
        from sidewalk_sim.observation import fuse_tensor

        ep = Episode(tiny_world, "AllObs", seed=5)
        obs, _ = ep.reset()
        s = ProtocolSession(tiny_world)
        r = s.handle_line(json.dumps({"cmd": "reset", "task": "AllObs", "seed": 5, "fused": True}))
        doc = r["obs"]["fused"]
        assert doc["shape"] == [8, 84, 84]
        wire = np.frombuffer(base64.b64decode(doc["b64"]), dtype="<f4").reshape(doc["shape"])
        np.testing.assert_array_equal(wire, fuse_tensor(obs))

    def test_info_command(self, tiny_world):
        s = ProtocolSession(tiny_world)
        r = s.handle_line(json.dumps({"cmd": "info"}))
        assert r["ok"]
        assert r["world"]["num_nodes"] == 15
        assert "AllObs" in r["world"]["tasks"]

    def test_illegal_action_error_record(self, tiny_world):
        s = ProtocolSession(tiny_world)
        s.handle_line(json.dumps({"cmd": "reset", "task": "AllObs", "seed": 1}))
        r = s.handle_line(json.dumps({"cmd": "step", "action": "READ"}))
        assert not r["ok"] and r["error"]["code"] == "illegal_action"

    def test_close_ends_session(self, tiny_world):
        s = ProtocolSession(tiny_world)
        assert s.handle_line(json.dumps({"cmd": "close"})) is None


class TestTcpServer:
    def test_sessions_isolated_over_tcp(self, tiny_world):
        server = ProtocolServer(tiny_world, port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            host, port = server.address
            c1 = ProtocolClient(host, port)
            c2 = ProtocolClient(host, port)
            r1 = c1.request(cmd="reset", task="AllObs", seed=1)
            r2 = c2.request(cmd="step", action="FORWARD")  # c2 has no episode
            assert r1["ok"]
            assert not r2["ok"] and r2["error"]["code"] == "no_active_episode"
            r1 = c1.request(cmd="step", action="FORWARD")
            assert r1["ok"]
            c1.close()
            c2.close()
        finally:
            server.shutdown()

    def test_wire_rollout_matches_native_over_tcp(self, tiny_world):
        server = ProtocolServer(tiny_world, port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            host, port = server.address
            client = ProtocolClient(host, port)
            ep = Episode(tiny_world, "CostlyTxt", seed=31)
            ep.reset()
            client.request(cmd="reset", task="CostlyTxt", seed=31)
            rng = np.random.default_rng(2)
            legal = [a.name for a in ep.legal_actions]
            for _ in range(60):
                a = legal[int(rng.integers(len(legal)))]
                native = ep.step(a)
                wire = client.request(cmd="step", action=a)
                assert wire["reward"] == native.reward
                assert wire["done"] == native.done
                if native.done:
                    break
            client.close()
        finally:
            server.shutdown()
