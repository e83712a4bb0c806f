"""Three-dimensional axial assignment (cluster x UE x block), maximizing total cost.

All solvers pad the tensor to a V x V x V cube, solve the square problem and
report triples with ``-1`` in place of dummy indices.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

EXACT_MAX_DIM = 8


@dataclass
class CostTensor:
    q: np.ndarray                      # (R, A, B) rates
    iota: np.ndarray | None = None     # (R, A, B) best alignment UE per entry

    @property
    def shape(self):
        return self.q.shape


@dataclass
class Assignment3D:
    triples: list[tuple[int, int, int]]
    value: float
    history: list[float] = field(default_factory=list)


def _as_array(q) -> np.ndarray:
    q = q.q if isinstance(q, CostTensor) else q
    q = np.asarray(q, dtype=float)
    if q.ndim != 3:
        raise ValueError(f"expected a 3-D cost tensor, got shape {q.shape}")
    return q


def pad_tensor(q, fill: float = 0.0):
    """Pad every axis to V = max(R, A, B) with ``fill``.

    Accepts a CostTensor (iota padded with -1) or a bare array.
    """
    arr = _as_array(q)
    V = max(arr.shape)
    if arr.shape == (V, V, V):
        return q
    out = np.full((V, V, V), fill, dtype=float)
    R, A, B = arr.shape
    out[:R, :A, :B] = arr
    if isinstance(q, CostTensor):
        iota = None
        if q.iota is not None:
            iota = np.full((V, V, V), -1, dtype=int)
            iota[:R, :A, :B] = q.iota
        return CostTensor(out, iota)
    return out


def _strip(perm_u, perm_b, shape):
    R, A, B = shape
    out = []
    for r, (u, b) in enumerate(zip(perm_u, perm_b)):
        t = (r if r < R else -1, int(u) if u < A else -1, int(b) if b < B else -1)
        if t != (-1, -1, -1):
            out.append(t)
    return out


def assignment_value(q, triples) -> float:
    """Sum of q over triples whose indices are all real."""
    arr = _as_array(q)
    return math.fsum(arr[r, u, b] for r, u, b in triples if min(r, u, b) >= 0)


def is_feasible(triples, shape) -> bool:
    R, A, B = shape
    rs = [r for r, _, _ in triples if r >= 0]
    us = [u for _, u, _ in triples if u >= 0]
    bs = [b for _, _, b in triples if b >= 0]
    return (sorted(us) == list(range(A)) and len(set(rs)) == len(rs)
            and len(set(bs)) == len(bs) and all(r < R for r in rs) and all(b < B for b in bs))


def solve_exact(q) -> Assignment3D:
    """Globally optimal assignment by depth-first branch and bound (V <= 8).

    Clusters are fixed in index order; each node picks a (UE, block) pair.
    The bound adds, per open cluster, its best entry over free UEs and blocks.
    """
    arr = _as_array(q)
    V = max(arr.shape)
    if V > EXACT_MAX_DIM:
        raise ValueError(f"solve_exact supports V <= {EXACT_MAX_DIM}, got V={V}")
    Q = pad_tensor(arr)
    free_u = [True] * V
    free_b = [True] * V
    cur_u = [0] * V
    cur_b = [0] * V
    gu, gb = _greedy_perm(Q)
    best = (list(gu), list(gb))
    best_val = float(Q[np.arange(V), gu, gb].sum())

    def bound(r):
        fu = np.flatnonzero(free_u)
        fb = np.flatnonzero(free_b)
        if r >= V:
            return 0.0
        return float(Q[r:, :, :][:, fu][:, :, fb].max(axis=(1, 2)).sum())

    def dfs(r, val):
        nonlocal best_val, best
        if r == V:
            if val > best_val:
                best_val = val
                best = (cur_u.copy(), cur_b.copy())
            return
        if val + bound(r) <= best_val:
            return
        cand = [(Q[r, u, b], u, b) for u in range(V) if free_u[u]
                for b in range(V) if free_b[b]]
        cand.sort(key=lambda t: (-t[0], t[1], t[2]))
        for c, u, b in cand:
            free_u[u] = free_b[b] = False
            cur_u[r], cur_b[r] = u, b
            dfs(r + 1, val + c)
            free_u[u] = free_b[b] = True

    dfs(0, 0.0)
    triples = _strip(best[0], best[1], arr.shape)
    return Assignment3D(triples, float(sum(Q[r, u, b] for r, (u, b) in enumerate(zip(*best)))))


def solve_bruteforce(q) -> Assignment3D:
    """Double-permutation enumeration; exponential, for testing only."""
    Q = pad_tensor(_as_array(q))
    V = Q.shape[0]
    idx = np.arange(V)
    best_val, best = -np.inf, None
    for pu in permutations(range(V)):
        sub = Q[idx, list(pu), :]
        for pb in permutations(range(V)):
            v = sub[idx, list(pb)].sum()
            if v > best_val:
                best_val, best = v, (pu, pb)
    return Assignment3D(_strip(best[0], best[1], _as_array(q).shape), float(best_val))


def _greedy_perm(Q):
    V = Q.shape[0]
    work = Q.astype(float, copy=True)
    perm_u = np.empty(V, int)
    perm_b = np.empty(V, int)
    for _ in range(V):
        # argmax returns the lexicographically lowest (r, u, b) among ties
        r, u, b = np.unravel_index(int(np.argmax(work)), work.shape)
        perm_u[r], perm_b[r] = u, b
        work[r, :, :] = -np.inf
        work[:, u, :] = -np.inf
        work[:, :, b] = -np.inf
    return perm_u, perm_b


def solve_greedy(q) -> Assignment3D:
    """Take entries in descending cost, skipping any that reuse an index."""
    arr = _as_array(q)
    Q = pad_tensor(arr)
    perm_u, perm_b = _greedy_perm(Q)
    val = float(Q[np.arange(Q.shape[0]), perm_u, perm_b].sum())
    return Assignment3D(_strip(perm_u, perm_b, arr.shape), val)


def _greedy_repair(Q, rows, cols):
    """Give each (cluster, UE) pair a distinct block, best pairs choosing first."""
    V = Q.shape[0]
    best_b = Q[rows, cols].max(axis=1)
    used = np.zeros(V, bool)
    perm_u = np.empty(V, int)
    perm_b = np.empty(V, int)
    for k in np.argsort(-best_b, kind="stable"):
        r, u = rows[k], cols[k]
        vals = np.where(used, -np.inf, Q[r, u])
        b = int(np.argmax(vals))
        used[b] = True
        perm_u[r], perm_b[r] = u, b
    return perm_u, perm_b


def _two_swap(Q, perm_u, perm_b, history, tol):
    """Best-improvement 2-swaps of UEs, blocks, or both between two clusters."""
    V = Q.shape[0]
    r = np.arange(V)
    improved = False
    while True:
        cur = Q[r, perm_u, perm_b]
        base = cur[:, None] + cur[None, :]
        # swap UEs between clusters i and j
        su = Q[r[:, None], perm_u[None, :], perm_b[:, None]]
        gain_u = su + su.T - base
        # swap blocks
        sb = Q[r[:, None], perm_u[:, None], perm_b[None, :]]
        gain_b = sb + sb.T - base
        # swap both, i.e. exchange clusters
        sr = Q[r[:, None], perm_u[None, :], perm_b[None, :]]
        gain_r = sr + sr.T - base
        gains = np.stack([gain_u, gain_b, gain_r])
        k, i, j = np.unravel_index(int(np.argmax(gains)), gains.shape)
        if gains[k, i, j] <= tol:
            return improved
        if k in (0, 2):
            perm_u[i], perm_u[j] = perm_u[j], perm_u[i]
        if k in (1, 2):
            perm_b[i], perm_b[j] = perm_b[j], perm_b[i]
        history.append(float(Q[r, perm_u, perm_b].sum()))
        improved = True


def _rematch(Q, perm_u, perm_b, history, tol):
    """Re-solve one axis optimally with the other two paired up, axis by axis."""
    V = Q.shape[0]
    r = np.arange(V)
    improved = False
    for axis in ("u", "b", "r"):
        cur = float(Q[r, perm_u, perm_b].sum())
        if axis == "u":
            w = Q[r[:, None], r[None, :], perm_b[:, None]]
        elif axis == "b":
            w = Q[r[:, None], perm_u[:, None], r[None, :]]
        else:
            w = Q[r[:, None], perm_u[None, :], perm_b[None, :]]
        _, cols = linear_sum_assignment(w, maximize=True)
        if w[r, cols].sum() <= cur + tol:
            continue
        if axis == "u":
            perm_u[:] = cols
        elif axis == "b":
            perm_b[:] = cols
        else:
            perm_u[:], perm_b[:] = perm_u[cols], perm_b[cols]
        history.append(float(Q[r, perm_u, perm_b].sum()))
        improved = True
    return improved


def _local_search(Q, perm_u, perm_b, history):
    scale = max(float(np.abs(Q).max()), 1.0)
    tol = 1e-12 * scale
    while _rematch(Q, perm_u, perm_b, history, tol) | _two_swap(Q, perm_u, perm_b, history, tol):
        pass
    return perm_u, perm_b


def solve_heuristic(q, iterations: int = 20) -> Assignment3D:
    """Lagrangian relaxation of the block axis followed by local search.

    Each round prices blocks with multipliers mu, collapses the block axis by
    max_b (q - mu_b), solves the resulting cluster x UE assignment exactly,
    repairs block conflicts greedily and moves mu along the subgradient
    (block usage - 1) with step ~ 1/sqrt(t). Every distinct repaired point,
    plus the greedy solution, is improved by single-axis re-matching and
    2-swaps; the best local optimum is returned. ``history`` records the
    objective along the winning descent and never decreases.
    """
    arr = _as_array(q)
    Q = pad_tensor(arr)
    V = Q.shape[0]
    r_idx = np.arange(V)
    spread = float(Q.max() - Q.min())
    step0 = spread / V if spread > 0 else 1.0

    starts = [_greedy_perm(Q)]
    seen = {(tuple(starts[0][0]), tuple(starts[0][1]))}
    mu = np.zeros(V)
    for t in range(1, iterations + 1):
        reduced = Q - mu[None, None, :]
        b_star = reduced.argmax(axis=2)
        w = np.take_along_axis(reduced, b_star[..., None], axis=2)[..., 0]
        rows, cols = linear_sum_assignment(w, maximize=True)
        perm = _greedy_repair(Q, rows, cols)
        key = (tuple(perm[0]), tuple(perm[1]))
        if key not in seen:
            seen.add(key)
            starts.append(perm)
        usage = np.bincount(b_star[rows, cols], minlength=V)
        if np.all(usage == 1):
            break
        mu += step0 / math.sqrt(t) * (usage - 1)

    best_val, best, best_hist = -np.inf, None, []
    for perm_u, perm_b in starts:
        perm_u, perm_b = perm_u.copy(), perm_b.copy()
        hist = [float(Q[r_idx, perm_u, perm_b].sum())]
        _local_search(Q, perm_u, perm_b, hist)
        if hist[-1] > best_val:
            best_val, best, best_hist = hist[-1], (perm_u, perm_b), hist
    return Assignment3D(_strip(best[0], best[1], arr.shape), best_val, best_hist)


def solve(q, method: str = "auto", iterations: int = 20, exact_limit: int = 6) -> Assignment3D:
    V = max(_as_array(q).shape)
    if method == "exact" or (method == "auto" and V <= exact_limit):
        return solve_exact(q)
    return solve_heuristic(q, iterations)


def dump_tensor(q, path) -> None:
    """Plain text: header line ``R A B``, then R*A lines of B values each
    (cluster-major, then UE)."""
    arr = _as_array(q)
    R, A, B = arr.shape
    with open(Path(path), "w") as fh:
        fh.write(f"{R} {A} {B}\n")
        for r in range(R):
            for u in range(A):
                fh.write(" ".join(repr(float(x)) for x in arr[r, u]) + "\n")


def load_tensor(path) -> np.ndarray:
    with open(Path(path)) as fh:
        R, A, B = (int(x) for x in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2) if R * A else np.empty((0, B))
    return np.asarray(data, dtype=float).reshape(R, A, B)


@dataclass
class BenchReport:
    dim: int
    instances: int
    ratios: np.ndarray          # heuristic / exact value per instance
    exact_seconds: float
    heuristic_seconds: float

    def share_within(self, frac: float = 0.95) -> float:
        return float(np.mean(self.ratios >= frac - 1e-12))


def bench_solvers(instances: int = 1000, dim: int = 5, seed: int = 0,
                  iterations: int = 20) -> BenchReport:
    """Heuristic-vs-exact gap on i.i.d. uniform dim^3 tensors, with timings."""
    rng = np.random.default_rng(seed)
    ratios = np.empty(instances)
    t_exact = t_heur = 0.0
    for i in range(instances):
        q = rng.uniform(size=(dim, dim, dim))
        t0 = time.perf_counter()
        ex = solve_exact(q).value
        t1 = time.perf_counter()
        he = solve_heuristic(q, iterations).value
        t2 = time.perf_counter()
        t_exact += t1 - t0
        t_heur += t2 - t1
        ratios[i] = he / ex if ex > 0 else 1.0
    return BenchReport(dim, instances, ratios, t_exact, t_heur)
