import numpy as np
import pytest
from scipy.optimize import linprog

from reachstl import reach as rc
from reachstl import setalg as sa
from reachstl.errors import DataError, DimensionError
from tests.conftest import linear_dataset, make_rng

A_SYS = np.array([[0.9, 0.05], [0.0, 0.9]])
B_SYS = np.array([[0.0], [1.0]])


@pytest.fixture(scope="module")
def noiseless():
    rng = make_rng(30)
    zw = sa.Zonotope([0.0, 0.0])
    data = linear_dataset(A_SYS, B_SYS, zw, 400, 20, rng)
    mw = rc.build_noise_matrix_zonotope(zw, data.n_points)
    return data, zw, mw


@pytest.fixture(scope="module")
def noisy():
    rng = make_rng(31)
    zw = sa.Zonotope([0, 0], np.diag([0.05, 0.05]))
    data = linear_dataset(A_SYS, B_SYS, zw, 500, 25, rng)
    mw = rc.build_noise_matrix_zonotope(zw, data.n_points)
    return data, zw, mw


class TestDataset:
    def test_state_input_count_invariant(self):
        with pytest.raises(DataError):
            rc.TrajectoryDataset([([[0.0], [1.0], [2.0]], [[0.5], [0.5], [0.5]])])

    def test_matrix_shapes(self, noiseless):
        data, _, _ = noiseless
        assert data.X_minus.shape == data.X_plus.shape == (2, data.n_points)
        assert data.U_minus.shape == (1, data.n_points)

    def test_csv_round_trip_bitwise(self, noisy, tmp_path):
        data, _, _ = noisy
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        rc.dataset_to_csv(data, p1)
        again = rc.dataset_from_csv(p1)
        rc.dataset_to_csv(again, p2)
        assert p1.read_text() == p2.read_text()
        assert np.allclose(again.X_plus, data.X_plus)

    def test_csv_loader_rejects_bad_final_row(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text(
            "traj,k,x1,u1\n0,0,0.0,0.5\n0,1,1.0,0.5\n"  # final row has input
        )
        with pytest.raises(DataError):
            rc.dataset_from_csv(p)


class TestNoiseMatrixZonotope:
    def test_generator_count_and_structure(self):
        zw = sa.Zonotope([0, 0], np.array([[0.9], [0.9]]))
        mw = rc.build_noise_matrix_zonotope(zw, 3)
        assert mw.n_generators == 3  # one generator x three columns
        assert np.allclose(mw.center_matrix, 0.0)
        for j in range(3):
            g = mw.generator_matrices[j]
            assert np.allclose(g[:, j], [0.9, 0.9])
            assert np.allclose(np.delete(g, j, axis=1), 0.0)

    def test_point_noise_gives_center_only(self):
        mw = rc.build_noise_matrix_zonotope(sa.Zonotope([0.1, -0.2]), 4)
        assert mw.n_generators == 0
        assert np.allclose(mw.center_matrix, [[0.1] * 4, [-0.2] * 4])

    def test_stacked_noise_sequences_are_members(self):
        # columnwise membership: w(k) in Z_w for all k iff the stacked matrix
        # is a member of the matrix zonotope (factor per generator/column)
        rng = make_rng(32)
        zw = sa.Zonotope([0.0, 0.1], np.array([[0.9, 0.0], [0.9, 0.3]]))
        T = 5
        mw = rc.build_noise_matrix_zonotope(zw, T)
        flat_gens = mw.generator_matrices.reshape(mw.n_generators, -1).T
        for _ in range(100):
            W = sa.sample_zonotope(zw, T, rng).T   # each column in Z_w
            q = (W - mw.center_matrix).reshape(-1)
            res = linprog(np.zeros(flat_gens.shape[1]), A_eq=flat_gens, b_eq=q,
                          bounds=[(-1, 1)] * flat_gens.shape[1], method="highs")
            assert res.status == 0


class TestFitModel:
    def test_recovers_linear_system(self, noiseless):
        data, zw, mw = noiseless
        model = rc.fit_model(data, np.zeros(2), np.zeros(1), mw)
        assert np.max(np.abs(model.offset)) < 1e-9
        assert np.max(np.abs(model.state_block - A_SYS)) < 1e-9
        assert np.max(np.abs(model.input_block - B_SYS)) < 1e-9

    def test_centering_is_affine_equivariant(self, noiseless):
        data, _, mw = noiseless
        model = rc.fit_model(data, np.array([0.7, -0.3]), np.array([0.2]), mw)
        assert np.max(np.abs(model.state_block - A_SYS)) < 1e-8
        assert np.max(np.abs(model.input_block - B_SYS)) < 1e-8
        expect = A_SYS @ [0.7, -0.3] + B_SYS @ [0.2]
        assert np.allclose(model.offset, expect, atol=1e-8)

    def test_constant_transition_minimum_norm(self):
        # one repeated transition: offset reproduces it, blocks minimum-norm
        states = [[1.0, 1.0], [2.0, 0.5]]
        data = rc.TrajectoryDataset([(states, [[0.3]])] * 3)
        mw = rc.build_noise_matrix_zonotope(sa.Zonotope([0.0, 0.0]), data.n_points)
        model = rc.fit_model(data, np.array([1.0, 1.0]), np.array([0.3]), mw)
        pred = model.m_tilde @ np.concatenate([[1.0], [0.0, 0.0], [0.0]])
        assert np.allclose(pred, [2.0, 0.5], atol=1e-9)

    def test_empty_dataset_rejected(self):
        with pytest.raises(DataError):
            rc.TrajectoryDataset([])


class TestResidualZonotope:
    def test_noiseless_linear_residuals_vanish(self, noiseless):
        data, zw, mw = noiseless
        model = rc.fit_model(data, np.zeros(2), np.zeros(1), mw)
        zl = rc.residual_zonotope(data, model, mw, zw)
        assert np.max(np.abs(zl.center)) < 1e-9
        rad = np.sum(np.abs(zl.generators), axis=1) if zl.order else np.zeros(2)
        assert np.max(rad) < 1e-9

    def test_single_point_degenerate(self):
        data = rc.TrajectoryDataset([([[1.0, 0.0], [0.5, 0.5]], [[0.2]])])
        zw = sa.Zonotope([0.0, 0.0])
        mw = rc.build_noise_matrix_zonotope(zw, 1)
        model = rc.fit_model(data, np.zeros(2), np.zeros(1), mw)
        zl = rc.residual_zonotope(data, model, mw, zw)
        rad = np.sum(np.abs(zl.generators), axis=1) if zl.order else np.zeros(2)
        assert np.max(rad) < 1e-9  # max == min for one column

    def test_radii_floored_at_zero(self, noiseless):
        data, _, mw = noiseless
        model = rc.fit_model(data, np.zeros(2), np.zeros(1), mw)
        # noise set much wider than the actual residual spread
        wide = sa.Zonotope([0, 0], np.diag([10.0, 10.0]))
        zl = rc.residual_zonotope(data, model, mw, wide)
        rad = np.sum(np.abs(zl.generators), axis=1) if zl.order else np.zeros(2)
        assert np.max(rad) == 0.0
        assert np.allclose(zl.center, -wide.center, atol=1e-6)


class TestLipschitz:
    def test_zonotope_formula(self):
        z = rc.lipschitz_zonotope(2.0, 0.1, 2)
        assert np.allclose(np.sum(np.abs(z.generators), axis=1), [0.2, 0.2])

    def test_zero_radius_or_constant_is_point(self):
        assert rc.lipschitz_zonotope(2.0, 0.0, 2).order == 0
        assert rc.lipschitz_zonotope(0.0, 0.5, 2).order == 0

    def test_estimator_on_linear_map(self):
        sts = [np.array([v]) for v in np.linspace(-2, 2, 21)]
        data = rc.TrajectoryDataset([([s, 0.5 * s], [np.zeros(1)]) for s in sts])
        lip, delta = rc.estimate_lipschitz_and_radius(data)
        assert lip == pytest.approx(0.5)
        assert delta == pytest.approx(0.2)  # uniform grid spacing

    def test_duplicates_rejected(self):
        data = rc.TrajectoryDataset(
            [([[1.0], [2.0]], [[0.5]]), ([[1.0], [2.0]], [[0.5]])]
        )
        with pytest.raises(DataError):
            rc.estimate_lipschitz_and_radius(data)


class TestReachStep:
    def test_identity_model_zero_noise(self):
        x0 = sa.Zonotope([0, 0], np.eye(2))
        model = rc.LeastSquaresModel(
            np.hstack([np.zeros((2, 1)), np.eye(2), np.zeros((2, 1))]),
            np.zeros(2), np.zeros(1),
        )
        point = sa.Zonotope([0.0, 0.0])
        out = rc.reach_step(x0, sa.Zonotope([0.0]), model, point, point, point)
        assert np.allclose(out.center, x0.center)
        h1, h0 = sa.interval_hull(out), sa.interval_hull(x0)
        assert np.allclose(h1.lower, h0.lower) and np.allclose(h1.upper, h0.upper)

    def test_one_step_containment_known_linear(self, noisy):
        data, zw, mw = noisy
        rng = make_rng(33)
        x0 = sa.Zonotope([0.5, -0.5], np.diag([0.3, 0.3]))
        u = sa.Zonotope([0.0], [[1.0]])
        model = rc.fit_model(data, x0.center, u.center, mw)
        zl = rc.residual_zonotope(data, model, mw, zw)
        lip, delta = rc.estimate_lipschitz_and_radius(data)
        out = rc.reach_step(x0, u, model, zl, rc.lipschitz_zonotope(lip, delta, 2), zw)
        xs = sa.sample_zonotope(x0, 10000, rng)
        us = sa.sample_zonotope(u, 10000, rng)
        ws = sa.sample_zonotope(zw, 10000, rng)
        succ = xs @ A_SYS.T + us @ B_SYS.T + ws
        assert sa.contains_points(out, succ).all()

    def test_box_noise_grows_hull_by_its_radius(self, noisy):
        data, zw, mw = noisy
        x0 = sa.Zonotope([0.0, 0.0], np.diag([0.2, 0.2]))
        u = sa.Zonotope([0.0], [[0.5]])
        model = rc.fit_model(data, x0.center, u.center, mw)
        zl = rc.residual_zonotope(data, model, mw, zw)
        point = sa.Zonotope([0.0, 0.0])
        base = rc.reach_step(x0, u, model, zl, point, point)
        grown = rc.reach_step(
            x0, u, model, zl, point, sa.Zonotope([0, 0], np.diag([0.9, 0.9]))
        )
        hb, hg = sa.interval_hull(base), sa.interval_hull(grown)
        assert np.allclose(hg.upper - hb.upper, [0.9, 0.9], atol=1e-12)
        assert np.allclose(hb.lower - hg.lower, [0.9, 0.9], atol=1e-12)

    def test_dimension_mismatch(self, noisy):
        data, zw, mw = noisy
        model = rc.fit_model(data, np.zeros(2), np.zeros(1), mw)
        with pytest.raises(DimensionError):
            rc.reach_step(sa.Zonotope([0.0]), sa.Zonotope([0.0]), model,
                          zw, zw, zw)


class TestReachSequence:
    def test_zero_horizon(self, noisy):
        data, zw, _ = noisy
        x0 = sa.Zonotope([0.0, 0.0], np.eye(2))
        cfg = rc.ReachConfig(zw, sa.Zonotope([0.0], [[1.0]]), x0, 0,
                             lipschitz=0.0, covering_radius=0.0)
        seq = rc.reach_sequence(cfg, data)
        assert len(seq) == 1 and seq[0] is x0

    def test_identity_dynamics_stays_put(self):
        rng = make_rng(34)
        zw = sa.Zonotope([0.0, 0.0])
        data = linear_dataset(np.eye(2), np.zeros((2, 1)), zw, 300, 15, rng)
        x0 = sa.Zonotope([0.5, -0.5], np.diag([0.3, 0.3]))
        cfg = rc.ReachConfig(zw, sa.Zonotope([0.0]), x0, 5,
                             lipschitz=0.0, covering_radius=0.0)
        for zk in rc.reach_sequence(cfg, data):
            h, h0 = sa.interval_hull(zk), sa.interval_hull(x0)
            assert np.allclose(h.lower, h0.lower, atol=1e-6)
            assert np.allclose(h.upper, h0.upper, atol=1e-6)

    def test_noise_monotonicity(self, noisy):
        data, zw, _ = noisy
        x0 = sa.Zonotope([0.5, -0.5], np.diag([0.3, 0.3]))
        u = sa.Zonotope([0.0], [[1.0]])
        hulls = []
        for scale in (1.0, 2.0):
            big = sa.Zonotope(zw.center, zw.generators * scale)
            cfg = rc.ReachConfig(big, u, x0, 3, lipschitz=0.5,
                                 covering_radius=0.2)
            seq = rc.reach_sequence(cfg, data)
            hulls.append([sa.interval_hull(z) for z in seq])
        for h_small, h_big in zip(*hulls):
            assert np.all(h_big.lower <= h_small.lower + 1e-9)
            assert np.all(h_big.upper >= h_small.upper - 1e-9)

    def test_open_loop_contains_simulated_trajectories(self, noisy):
        data, zw, _ = noisy
        rng = make_rng(35)
        x0 = sa.Zonotope([0.2, 0.1], np.diag([0.2, 0.2]))
        u = sa.Zonotope([0.0], [[0.8]])
        cfg = rc.ReachConfig(zw, u, x0, 4, lipschitz="estimate",
                             covering_radius="estimate")
        seq = rc.reach_sequence(cfg, data)
        n_traj = 2000
        x = sa.sample_zonotope(x0, n_traj, rng)
        for k in range(1, 5):
            us = sa.sample_zonotope(u, n_traj, rng)
            ws = sa.sample_zonotope(zw, n_traj, rng)
            x = x @ A_SYS.T + us @ B_SYS.T + ws
            assert sa.contains_points(seq[k], x).all(), f"violation at step {k}"
