import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risnoma import assignment as aa


def test_pad_tensor():
    q = np.ones((2, 1, 2))
    p = aa.pad_tensor(q)
    assert p.shape == (2, 2, 2)
    assert np.all(p[:, 1, :] == 0)
    sq = np.ones((3, 3, 3))
    assert aa.pad_tensor(sq) is sq


def test_rectangular_optimum_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(20):
        q = rng.uniform(size=(3, 2, 3))
        res = aa.solve_exact(q)
        # relaxation: every UE once, clusters and blocks at most once
        best = max(q[r0, 0, b0] + q[r1, 1, b1]
                   for r0 in range(3) for r1 in range(3) if r1 != r0
                   for b0 in range(3) for b1 in range(3) if b1 != b0)
        assert res.value == pytest.approx(best, abs=1e-12)
        assert aa.is_feasible(res.triples, q.shape)
        assert sorted(a for _, a, _ in res.triples if a >= 0) == [0, 1]


def test_small_exact_examples():
    res = aa.solve_exact(np.array([[[7.0]]]))
    assert res.value == 7 and res.triples == [(0, 0, 0)]
    q = np.ones((2, 2, 2))
    q[0, 0, 0] = q[1, 1, 1] = 5
    assert aa.solve_exact(q).value == 10


def test_exact_rejects_large():
    with pytest.raises(ValueError, match="9"):
        aa.solve_exact(np.zeros((9, 9, 9)))


def test_exact_matches_bruteforce():
    rng = np.random.default_rng(1)
    for _ in range(40):
        q = rng.uniform(size=(4, 4, 4))
        assert aa.solve_exact(q).value == pytest.approx(aa.solve_bruteforce(q).value, abs=1e-12)


def test_scale_invariance():
    rng = np.random.default_rng(2)
    for _ in range(20):
        q = rng.uniform(size=(4, 4, 4))
        assert sorted(aa.solve_exact(q).triples) == sorted(aa.solve_exact(3.7 * q).triples)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(1, 7), st.integers(0, 2 ** 31))
def test_heuristic_feasible_and_monotone(R, A, B, seed):
    q = np.random.default_rng(seed).uniform(size=(R, A, B))
    res = aa.solve_heuristic(q)
    assert aa.is_feasible(res.triples, q.shape)
    assert sorted(a for _, a, _ in res.triples if a >= 0) == list(range(A))
    assert all(b >= a - 1e-12 for a, b in zip(res.history, res.history[1:]))
    assert res.value == pytest.approx(aa.assignment_value(q, res.triples))
    assert res.value >= aa.solve_greedy(q).value - 1e-12


def test_block_diagonal_recovered():
    rng = np.random.default_rng(3)
    V = 6
    q = rng.uniform(0, 0.1, size=(V, V, V))
    pu, pb = rng.permutation(V), rng.permutation(V)
    for r in range(V):
        q[r, pu[r], pb[r]] = 10.0
    ex = aa.solve_exact(q)
    he = aa.solve_heuristic(q)
    assert sorted(he.triples) == sorted(ex.triples)
    assert he.value == pytest.approx(ex.value)


def test_all_equal_costs():
    res = aa.solve_heuristic(np.full((5, 5, 5), 2.5))
    assert res.value == pytest.approx(5 * 2.5)


def test_dump_load_roundtrip(tmp_path):
    q = np.random.default_rng(4).uniform(size=(3, 4, 2))
    aa.dump_tensor(q, tmp_path / "q.txt")
    np.testing.assert_array_equal(aa.load_tensor(tmp_path / "q.txt"), q)
    assert (tmp_path / "q.txt").read_text().splitlines()[0] == "3 4 2"


def test_bench_report():
    rep = aa.bench_solvers(20, 4, seed=0)
    assert rep.ratios.shape == (20,)
    assert np.all(rep.ratios <= 1 + 1e-12)
