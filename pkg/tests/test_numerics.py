import numpy as np
import pytest

from energy_space.graph_core import ZChain, section_matrices
from energy_space.numerics import (
    NumericsError,
    RandomSource,
    min_eigen_spd,
    normal_samples,
    psd_root,
    rayleigh,
    solve_cg,
    solve_spd,
)

GOLDEN = {
    0: [
        -2.271884148324594, -0.701327920628698, -1.218980191079758, 0.16217155791645022,
        0.005964818724655495, -0.5899694163636463, 1.612232229200595, 2.1991464939613485,
        -0.662508356998329, -0.8594339402146326, 0.5583869464613468, -1.1204329020110229,
        0.18262745192835433, -0.6588336387828531, 1.1032411917563274, 0.7073664939202046,
    ],
    42: [
        0.9161204856345226, -0.8806796243156723, 1.1154015859369766, -0.2673977383943877,
        -0.3368142876001641, -0.16506539780760088, -0.8609401940559521, -1.5361711008219219,
        1.1591278750385419, 0.7291269380435497, -0.38545919239366855, -1.7196990287682206,
        -1.5031035030447448, 0.1467469815531636, 0.608657926543802, -0.2610796380488279,
    ],
}


def grounded_chain(lo, hi):
    order, lap, _ = section_matrices(ZChain(), range(lo, hi + 1))
    o = order.index(0)
    keep = [i for i in range(len(order)) if i != o]
    return order, keep, lap[np.ix_(keep, keep)]


class TestSolveSPD:
    def test_identity(self):
        assert np.array_equal(solve_spd(np.eye(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])

    def test_two_by_two(self):
        x = solve_spd([[2.0, -1.0], [-1.0, 2.0]], [1.0, 0.0])
        assert x == pytest.approx([2 / 3, 1 / 3], abs=1e-15)

    def test_grounded_chain_ramp(self):
        order, keep, A = grounded_chain(-10, 10)
        b = np.zeros(len(keep))
        b[[order[i] for i in keep].index(3)] = 1.0
        x = solve_spd(A, b)
        expect = [min(max(order[i], 0), 3) for i in keep]
        assert np.max(np.abs(x - expect)) < 1e-12

    def test_not_pd(self):
        with pytest.raises(NumericsError, match="not positive definite"):
            solve_spd([[1.0, 2.0], [2.0, 1.0]], [1.0, 0.0])

    @pytest.mark.parametrize("n", [5, 50, 200, 500])
    def test_residual_random(self, n):
        r = np.random.default_rng(n)
        M = r.standard_normal((n, n))
        A = M @ M.T + n * np.eye(n)
        b = r.standard_normal(n)
        x = solve_spd(A, b)
        assert np.max(np.abs(A @ x - b)) <= 1e-12 * (1 + np.max(np.abs(b)))

    def test_cg_agrees_with_dense(self):
        _, _, A = grounded_chain(-40, 40)
        b = np.random.default_rng(1).standard_normal(A.shape[0])
        assert np.max(np.abs(solve_cg(A, b) - solve_spd(A, b))) < 1e-8


class TestMinEigen:
    def test_identity(self):
        assert min_eigen_spd(np.eye(4)) == pytest.approx(1.0)

    def test_two_by_two(self):
        assert min_eigen_spd([[2.0, -1.0], [-1.0, 2.0]]) == pytest.approx(1.0, rel=1e-12)

    def test_path_dirichlet(self):
        A = 2 * np.eye(3) - np.eye(3, k=1) - np.eye(3, k=-1)
        oracle = np.linalg.eigvalsh(A).min()
        assert min_eigen_spd(A) == pytest.approx(2 - np.sqrt(2), rel=1e-9)
        assert oracle == pytest.approx(2 - np.sqrt(2), rel=1e-12)

    def test_nonsymmetric(self):
        with pytest.raises(NumericsError):
            min_eigen_spd([[1.0, 2.0], [0.0, 1.0]])

    def test_rayleigh_bound(self):
        r = np.random.default_rng(3)
        M = r.standard_normal((30, 30))
        A = M + M.T
        lam = min_eigen_spd(A)
        for _ in range(50):
            assert lam <= rayleigh(A, r.standard_normal(30)) + 1e-12


class TestRandomSource:
    def test_deterministic(self):
        a = normal_samples(RandomSource(42), 2)
        b = normal_samples(RandomSource(42), 2)
        assert np.array_equal(a, b)

    def test_seeds_differ(self):
        assert not np.array_equal(normal_samples(RandomSource(42), 8), normal_samples(RandomSource(43), 8))

    @pytest.mark.parametrize("seed", sorted(GOLDEN))
    def test_golden(self, seed):
        assert normal_samples(RandomSource(seed), 16).tolist() == GOLDEN[seed]

    def test_offset_matches_prefix(self):
        rs = RandomSource(7)
        full = rs.normals(64)
        assert np.array_equal(rs.normals(32, start=32), full[32:])

    def test_forks_are_distinct_and_reproducible(self):
        rs = RandomSource(5)
        assert np.array_equal(rs.fork(1).normals(8), RandomSource(5).fork(1).normals(8))
        assert not np.array_equal(rs.fork(1).normals(8), rs.fork(2).normals(8))
        assert not np.array_equal(rs.fork(1).normals(8), rs.normals(8))

    def test_moments(self):
        n = 10**5
        z = normal_samples(RandomSource(11), n)
        assert abs(z.mean()) < 4 / np.sqrt(n)
        assert abs(z.var() - 1) < 0.05

    def test_rejects_empty(self):
        with pytest.raises(NumericsError):
            normal_samples(RandomSource(0), 0)


def test_psd_root_semidefinite():
    v = np.array([[1.0], [2.0], [-1.0]])
    C = v @ v.T
    L = psd_root(C)
    assert np.max(np.abs(L @ L.T - C)) < 1e-12
    with pytest.raises(NumericsError):
        psd_root(-np.eye(2))
