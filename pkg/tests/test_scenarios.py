import json
import math
import os

import numpy as np
import pytest

from reachstl import reach as rc
from reachstl import scenarios as sc
from reachstl import setalg as sa
from reachstl.errors import ConfigError


def small_config(name, samples=400):
    raw = sc.builtin_config(name)
    raw["audit"]["samples"] = samples
    return sc.ScenarioConfig(raw)


@pytest.fixture(scope="module")
def parking_report():
    return sc.run_scenario(small_config("parking"))


@pytest.fixture(scope="module")
def heading_report():
    return sc.run_scenario(small_config("parking-heading"))


@pytest.fixture(scope="module")
def roundabout_report():
    return sc.run_scenario(small_config("roundabout"))


class TestSyntheticSystem:
    def test_zero_noise_constant_input_is_straight(self):
        system = sc.SyntheticSystem(
            1.0, [0.0, 1.0], [-math.pi, math.pi],
            sa.Zonotope([0.0, 0.0]), truth_noise_scale=1.0,
        )
        rng = np.random.default_rng(0)
        x = np.zeros(2)
        pts = [x]
        for _ in range(5):
            x = system.step(x, np.array([0.2, math.pi / 4]), rng)
            pts.append(x)
        pts = np.asarray(pts)
        d = np.diff(pts, axis=0)
        assert np.allclose(d, d[0])
        assert np.allclose(d[0], [0.2 * math.cos(math.pi / 4)] * 2)

    def test_noise_stays_inside_bound(self):
        zw = sa.Zonotope([0, 0], np.array([[0.9], [0.9]]))
        system = sc.SyntheticSystem(1.0, [0, 1], [-1, 1], zw, truth_noise_scale=0.5)
        rng = np.random.default_rng(1)
        w = system.sample_noise(1000, rng)
        assert np.max(np.abs(w)) <= 0.45 + 1e-12
        w_full = system.sample_noise(1000, rng, full=True)
        assert np.max(np.abs(w_full)) <= 0.9 + 1e-12


class TestGenerateDataset:
    def test_bitwise_deterministic(self, tmp_path):
        system = sc.SyntheticSystem(
            1.0, [0, 0.5], [-math.pi, math.pi],
            sa.Zonotope([0, 0], np.array([[0.9], [0.9]])), 0.15,
        )
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        rc.dataset_to_csv(sc.generate_dataset(system, 200, seed=5), p1)
        rc.dataset_to_csv(sc.generate_dataset(system, 200, seed=5), p2)
        assert p1.read_text() == p2.read_text()

    def test_generated_data_estimates_finite(self):
        system = sc.SyntheticSystem(
            1.0, [0, 0.5], [-math.pi, math.pi],
            sa.Zonotope([0, 0], np.array([[0.9], [0.9]])), 0.15,
        )
        data = sc.generate_dataset(system, 300, seed=3)
        lip, delta = rc.estimate_lipschitz_and_radius(data)
        assert np.isfinite(lip) and lip > 0
        assert np.isfinite(delta) and delta > 0

    def test_point_count_validated(self):
        system = sc.SyntheticSystem(
            1.0, [0, 0.5], [-1, 1], sa.Zonotope([0, 0]), 1.0
        )
        with pytest.raises(ConfigError):
            sc.generate_dataset(system, 1, seed=0)


class TestParkingPredicates:
    def test_exact_strip_parameters(self):
        table = sc.build_parking_predicates()
        h1 = table["h1"]
        assert np.allclose(h1.H, [[1.0, 0.0]])
        assert h1.y[0] == 0.2805 and h1.r[0] == 1.7175
        h5 = table["h5"]
        assert np.allclose(h5.H, [[0.0, 1.0]])
        assert h5.y[0] == -1.665 and h5.r[0] == 1.0

    def test_value_at_own_offset_equals_r(self):
        for pred in sc.build_parking_predicates().values():
            x = np.zeros(2)
            x[np.argmax(np.abs(pred.H[0]))] = pred.y[0]
            assert pred.values(x)[0] == pytest.approx(pred.r[0])


class TestRoundaboutPredicates:
    def test_circle_predicate_values(self):
        table = sc.build_roundabout_predicates()
        h2 = table["h2"]
        assert h2.values([0.307, 0.044])[0] == pytest.approx(1.429)
        boundary = [0.307 + 1.429, 0.044]
        assert h2.values(boundary)[0] == pytest.approx(0.0, abs=1e-12)

    def test_band_parameters(self):
        table = sc.build_roundabout_predicates()
        h1 = table["h1"]
        assert np.allclose(h1.H, [[0.0, 1.0]])
        assert h1.y[0] == 2.25 and h1.r[0] == 1.0


class TestHeadingRegion:
    def test_axis_aligned_square_rejected(self):
        corners = [(1, 0), (1, 1), (0, 0), (0, 1)]  # vertical edge 1-2
        with pytest.raises(ConfigError):
            sc.build_heading_region(corners)

    def test_tilted_square_vertices_on_strip_boundaries(self):
        corners = sc.heading_rectangle_corners(
            [0.0, 0.0], math.pi / 4, 0.5, 0.5
        )
        h6, h7 = sc.build_heading_region(corners)
        for corner in corners:
            v6 = h6.values(corner)[0]
            v7 = h7.values(corner)[0]
            assert min(abs(v6), abs(v7)) == pytest.approx(0.0, abs=1e-12)
            assert v6 >= -1e-12 and v7 >= -1e-12

    def test_center_is_interior(self):
        corners = sc.heading_rectangle_corners([1.0, 2.0], 0.5, 0.4, 0.2)
        h6, h7 = sc.build_heading_region(corners)
        assert h6.values([1.0, 2.0])[0] > 0
        assert h7.values([1.0, 2.0])[0] > 0

    def test_rectangle_membership_matches_strips(self):
        rng = np.random.default_rng(9)
        center = np.array([0.5, -0.3])
        theta, hl, hw = 0.7, 0.6, 0.3
        corners = sc.heading_rectangle_corners(center, theta, hl, hw)
        h6, h7 = sc.build_heading_region(corners)
        R = np.array([[math.cos(theta), -math.sin(theta)],
                      [math.sin(theta), math.cos(theta)]])
        pts = rng.uniform(-1.2, 1.2, size=(4000, 2))
        world = center + pts @ R.T
        in_rect = (np.abs(pts[:, 0]) <= hl) & (np.abs(pts[:, 1]) <= hw)
        in_strips = h6.satisfied_batch(world) & h7.satisfied_batch(world)
        assert np.array_equal(in_rect, in_strips)


class TestReference:
    def test_reference_violation_detected(self):
        # reference misses the exit box at steps 24-25 while the strips still
        # intersect the (wide) data-driven sets: a geometry error, not an
        # inconsistency diagnostic
        raw = sc.builtin_config("parking")
        raw["reference"]["waypoints"][1] = [-0.3225, -0.4]
        raw["reference"]["waypoints"][2] = [-0.3225, -0.45]
        cfg = sc.ScenarioConfig(raw)
        with pytest.raises(ConfigError) as err:
            sc.run_scenario(cfg)
        assert "step" in str(err.value)


class TestRunScenario:
    def test_parking_trends_and_audit(self, parking_report):
        rep = parking_report
        assert rep.total_violations == 0
        assert not rep.diagnostics
        un = rep.average_volume("zonotope", "none")
        zp = rep.average_volume("zonotope", "phi")
        cp = rep.average_volume("constrained_zonotope", "phi")
        assert un > zp > cp
        # constrained never looser than unconstrained at any step (linear strips)
        per_step = {}
        for k, repn, by, v in rep.volume_rows:
            per_step.setdefault(k, {})[(repn, by)] = v
        for k, vals in per_step.items():
            assert vals[("zonotope", "phi")] <= vals[("zonotope", "none")] + 1e-9
            assert (vals[("constrained_zonotope", "phi")]
                    <= vals[("zonotope", "phi")] + 1e-9)

    def test_heading_strips_shrink_hard(self, parking_report, heading_report):
        base = parking_report.average_volume("zonotope", "phi")
        heading = heading_report.average_volume("zonotope", "phi")
        assert heading < 0.5 * base
        assert heading_report.total_violations == 0

    def test_roundabout_ordering(self, roundabout_report):
        rep = roundabout_report
        assert rep.total_violations == 0
        un = rep.average_volume("zonotope", "none")
        zp = rep.average_volume("zonotope", "phi")
        cp = rep.average_volume("constrained_zonotope", "phi")
        assert un > zp > cp

    def test_report_files_deterministic(self, tmp_path):
        cfg1 = small_config("roundabout", samples=200)
        cfg2 = small_config("roundabout", samples=200)
        d1 = sc.run_scenario(cfg1).write(tmp_path / "r1", svg=False)
        d2 = sc.run_scenario(cfg2).write(tmp_path / "r2", svg=False)
        for name in ("volumes.csv", "audit.csv", "sets.json", "metadata.json"):
            a = open(os.path.join(d1, name)).read()
            b = open(os.path.join(d2, name)).read()
            assert a == b, name

    def test_report_artifacts_complete(self, tmp_path, roundabout_report):
        out = roundabout_report.write(tmp_path / "rep")
        files = set(os.listdir(out))
        assert {"sets.json", "volumes.csv", "audit.csv", "metadata.json"} <= files
        assert "step_000.svg" in files and "step_014.svg" in files
        doc = json.load(open(os.path.join(out, "sets.json")))
        assert len(doc["steps"]) == 15
        entry = doc["steps"][3]
        assert set(entry) == {"step", "data_driven", "stl_zonotope",
                              "stl_constrained"}
        svg = open(os.path.join(out, "step_003.svg")).read()
        assert svg.startswith("<svg") and "polygon" in svg

    def test_contradictory_side_information_diagnosed(self):
        raw = sc.builtin_config("roundabout")
        raw["audit"]["samples"] = 10
        # a region far away from the drive, active at steps 5-6: the
        # constrained sets there become empty and the run reports the
        # inconsistency instead of crashing or auditing
        raw["predicates"]["X"] = {
            "kind": "linear", "H": [[1.0, 0.0]], "y": [50.0], "r": [0.1],
        }
        raw["formula"] = "G[0,4](B) & G[4,10](O) & G[10,14](A) & G[5,6](X)"
        rep = sc.run_scenario(sc.ScenarioConfig(raw))
        steps = {k for k, msg in rep.diagnostics}
        assert steps == {5, 6}
        for _, msg in rep.diagnostics:
            assert msg == sc.EMPTY_SET_DIAGNOSTIC
        assert rep.audit_rows == []

    @pytest.mark.parametrize("representation", ["zonotope", "constrained"])
    def test_single_representation_filter(self, representation, tmp_path):
        raw = sc.builtin_config("roundabout")
        raw["audit"]["samples"] = 100
        raw["representation"] = representation
        rep = sc.run_scenario(sc.ScenarioConfig(raw))
        assert rep.total_violations == 0
        out = rep.write(tmp_path / representation, svg=False)
        doc = json.load(open(os.path.join(out, "sets.json")))
        keys = set(doc["steps"][2])
        if representation == "zonotope":
            assert "stl_zonotope" in keys and "stl_constrained" not in keys
        else:
            assert "stl_constrained" in keys and "stl_zonotope" not in keys

    def test_open_loop_mode_runs(self):
        raw = sc.builtin_config("roundabout")
        raw["reach"]["horizon"] = 4
        raw["reach"]["mode"] = "open_loop"
        raw["audit"]["samples"] = 100
        raw["reference"]["times"] = [0, 4]
        raw["reference"]["waypoints"] = [[0.35, 2.9], [0.31, 1.35]]
        raw["formula"] = "G[0,4](B)"
        rep = sc.run_scenario(sc.ScenarioConfig(raw))
        assert len(rep.data_driven) == 5
        assert rep.average_volume("zonotope", "none") > 0


class TestOpenLoopContainment:
    def test_unicycle_trajectories_inside_every_step(self):
        # N-step unrolled recursion contains 10^4 simulated unicycle runs
        rng = np.random.default_rng(77)
        zw = sa.Zonotope([0, 0], np.array([[0.25], [0.25]]))
        system = sc.SyntheticSystem(1.0, [0.0, 0.5], [-math.pi, math.pi], zw,
                                    truth_noise_scale=0.3)
        data = sc.generate_dataset(system, 800, seed=21,
                                   start_box=[[-3, 3], [-3, 3]])
        x0 = sa.Zonotope([0.2, -0.1], np.diag([0.1, 0.1]))
        u = sa.Zonotope([0.25, 0.8], np.diag([0.1, 0.3]))
        cfg = rc.ReachConfig(zw, u, x0, horizon=4,
                             lipschitz=1.8, covering_radius=1.5)
        seq = rc.reach_sequence(cfg, data)
        n = 10000
        x = sa.sample_zonotope(x0, n, rng)
        for k in range(1, 5):
            us = sa.sample_zonotope(u, n, rng)
            ws = system.sample_noise(n, rng, full=True)
            x = np.column_stack([
                x[:, 0] + us[:, 0] * np.cos(us[:, 1]),
                x[:, 1] + us[:, 0] * np.sin(us[:, 1]),
            ]) + ws
            inside = sa.contains_points(seq[k], x)
            assert inside.all(), f"{int((~inside).sum())} violations at step {k}"


class TestWorkerCount:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("REACHSTL_THREADS", "3")
        assert sc.worker_count() == 3
        monkeypatch.setenv("REACHSTL_THREADS", "bogus")
        assert sc.worker_count() == 1

    def test_threaded_audit_matches_sequential(self, monkeypatch):
        cfg = small_config("roundabout", samples=150)
        seq = sc.run_scenario(cfg)
        monkeypatch.setenv("REACHSTL_THREADS", "4")
        par = sc.run_scenario(small_config("roundabout", samples=150))
        assert seq.audit_rows == par.audit_rows
