"""Brute-force and closed-form reference computations.

Everything here deliberately avoids the iterative algorithms it is used to
check: smallest enclosing balls by support-set enumeration, tree centers by
exact per-edge piecewise-linear minimization, path metrics by graph search
on a vertex-augmented graph, energy minima by exhaustive product grids with
zooming, and the classical closed forms for moduli of convexity.
"""

from __future__ import annotations

import heapq
import itertools
import math
from typing import Sequence

import numpy as np

from busemann.harmonic import EquivariantProblem, energy
from busemann.mapspace import EquivariantMap
from busemann.spaces import Euclidean, MetricTree, TreePoint


# ---------------------------------------------------------------------------
# Smallest enclosing ball (Euclidean), by enumerating support sets
# ---------------------------------------------------------------------------


def _circumcenter_of(points: np.ndarray):
    """Center equidistant from all rows (affinely independent), or None."""
    a = points[1:] - points[0]
    b = 0.5 * np.einsum("ij,ij->i", points[1:] + points[0], points[1:] - points[0])
    try:
        sol, res, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    except np.linalg.LinAlgError:
        return None
    if rank < len(a):
        return None
    if np.max(np.abs(a @ sol - b)) > 1e-9 * (1.0 + np.max(np.abs(b))):
        return None
    return sol


def smallest_enclosing_ball_bruteforce(points: Sequence[Sequence[float]]):
    """Exact minimax ball of a small Euclidean point set.

    Enumerates candidate centers from all pairs (midpoints) and all affinely
    independent subsets of size 3..d+1 (their circumcenters), keeping the
    smallest candidate that covers every point.
    """
    pts = np.asarray([tuple(p) for p in points], dtype=float)
    n, d = pts.shape
    if n == 1:
        return tuple(pts[0]), 0.0
    best = None
    for i, j in itertools.combinations(range(n), 2):
        c = 0.5 * (pts[i] + pts[j])
        r = float(np.max(np.linalg.norm(pts - c, axis=1)))
        if best is None or r < best[1] - 1e-15:
            best = (tuple(float(x) for x in c), r)
    for k in range(3, min(n, d + 1) + 1):
        for sub in itertools.combinations(range(n), k):
            c = _circumcenter_of(pts[list(sub)])
            if c is None:
                continue
            r = float(np.max(np.linalg.norm(pts - c, axis=1)))
            if r < best[1] - 1e-15:
                best = (tuple(float(x) for x in c), r)
    return best


# ---------------------------------------------------------------------------
# Tree one-center, exact per-edge scan
# ---------------------------------------------------------------------------


def tree_one_center(tree: MetricTree, pts: Sequence[TreePoint]):
    """Exact minimax center of points in a metric tree.

    On each edge the distance to a fixed point is linear (or V-shaped when
    the point lives on that edge), so the pointwise maximum is piecewise
    linear and convex; its minimum over the edge is attained at an endpoint,
    a V-vertex, or a crossing of two pieces, all enumerated exactly.
    """

    def dist_fn_on_edge(e_idx, q):
        u, v, L = tree.edges[e_idx]
        if q.edge is not None and q.edge == e_idx:
            tq = q.offset
            return [(tq, "v")]  # V-shape |t - tq|
        du = tree.distance(tree.vertex_point(u), q)
        dv = tree.distance(tree.vertex_point(v), q)
        return [(du, dv)]  # linear from (0, du) to (L, dv)

    best = None
    for e_idx, (u, v, L) in enumerate(tree.edges):
        segs = [dist_fn_on_edge(e_idx, q) for q in pts]

        def value(t):
            worst = 0.0
            for s in segs:
                if s[0][1] == "v":
                    worst = max(worst, abs(t - s[0][0]))
                else:
                    du, dv = s[0]
                    worst = max(worst, min(du + t, dv + (L - t)))
            return worst

        cands = {0.0, L}
        for s in segs:
            if s[0][1] == "v":
                cands.add(s[0][0])
        # crossings of every pair of linear pieces (slopes in {-1, +1})
        pieces = []
        for s in segs:
            if s[0][1] == "v":
                tq = s[0][0]
                pieces.append((-1.0, tq))  # t < tq branch: tq - t
                pieces.append((1.0, -tq))  # t > tq branch: t - tq
            else:
                du, dv = s[0]
                pieces.append((1.0, du))
                pieces.append((-1.0, dv + L))
        for (s1, b1), (s2, b2) in itertools.combinations(pieces, 2):
            if s1 == s2:
                continue
            t = (b2 - b1) / (s1 - s2)
            if 0.0 <= t <= L:
                cands.add(t)
        for t in cands:
            val = value(t)
            if best is None or val < best[1] - 1e-15:
                best = (tree.point(e_idx, min(max(t, 0.0), L)), val)
    return best


# ---------------------------------------------------------------------------
# Path metric by graph search (independent of the ports formula)
# ---------------------------------------------------------------------------


def tree_distance_graph_oracle(tree: MetricTree, x: TreePoint, y: TreePoint) -> float:
    """Distance via Dijkstra on the vertex graph augmented with x and y."""
    nodes = {("v", v): {} for v in tree.vertices}
    for u, v, L in tree.edges:
        nodes[("v", u)][("v", v)] = min(L, nodes[("v", u)].get(("v", v), math.inf))
        nodes[("v", v)][("v", u)] = min(L, nodes[("v", v)].get(("v", u), math.inf))

    def attach(name, p):
        if p.vertex is not None:
            return ("v", p.vertex)
        u, v, L = tree.edges[p.edge]
        node = ("p", name)
        nodes[node] = {("v", u): p.offset, ("v", v): L - p.offset}
        nodes[("v", u)][node] = p.offset
        nodes[("v", v)][node] = L - p.offset
        return node

    # same-edge special case: the direct segment is also a path
    direct = None
    if x.edge is not None and x.edge == y.edge:
        direct = abs(x.offset - y.offset)
    sx = attach("x", x)
    sy = attach("y", y)
    dist = {sx: 0.0}
    heap = [(0.0, sx)]
    while heap:
        d, n = heapq.heappop(heap)
        if d > dist.get(n, math.inf):
            continue
        if n == sy:
            break
        for m, w in nodes[n].items():
            nd = d + w
            if nd < dist.get(m, math.inf):
                dist[m] = nd
                heapq.heappush(heap, (nd, m))
    d = dist.get(sy, math.inf)
    if direct is not None:
        d = min(d, direct)
    return d


# ---------------------------------------------------------------------------
# Exhaustive grid search over map values (1-D and tree targets)
# ---------------------------------------------------------------------------


def _grid_positions_1d(lo: float, hi: float, n: int):
    return [(float(t),) for t in np.linspace(lo, hi, n)]


def _grid_positions_tree(tree: MetricTree, per_edge: int):
    out = [tree.vertex_point(v) for v in tree.vertices]
    for i, (_, _, L) in enumerate(tree.edges):
        for t in np.linspace(0.0, L, per_edge + 2)[1:-1]:
            out.append(tree.point(i, float(t)))
    return out


def grid_minimum_energy(
    prob: EquivariantProblem,
    span: float = 2.5,
    coarse: int = 21,
    refine_rounds: int = 3,
):
    """Exhaustive product-grid minimization of the edge energy with zooming.

    Supports 1-D Euclidean and tree targets and a handful of cells.  The
    energy is convex in the map, so zooming the grid around the coarse
    argmin with a two-cell-wide window cannot lose the minimum.  Returns
    (map, energy, resolution_bound) where the bound is an upper estimate of
    how far the grid energy can sit above the true minimum.
    """
    target = prob.target
    n_cells = len(prob.model.cells)
    if isinstance(target, Euclidean) and target.dim == 1:
        lo = [-span] * n_cells
        hi = [span] * n_cells
        step = [2.0 * span / (coarse - 1)] * n_cells
        best = None
        for _ in range(refine_rounds):
            axes = [_grid_positions_1d(l, h, coarse) for l, h in zip(lo, hi)]
            for combo in itertools.product(*axes):
                e = energy(prob, EquivariantMap(prob.model, target, combo))
                if best is None or e < best[1]:
                    best = (combo, e)
            for c in range(n_cells):
                step[c] = (hi[c] - lo[c]) / (coarse - 1)
                center = best[0][c][0]
                lo[c] = center - 2.0 * step[c]
                hi[c] = center + 2.0 * step[c]
        res = max(step)
    elif isinstance(target, MetricTree):
        per_edge = coarse
        cands = _grid_positions_tree(target, per_edge)
        best = None
        for combo in itertools.product(cands, repeat=n_cells):
            e = energy(prob, EquivariantMap(prob.model, target, combo))
            if best is None or e < best[1]:
                best = (combo, e)
        res = max(L for _, _, L in target.edges) / (per_edge + 1)
    else:
        raise ValueError("grid oracle supports 1-D Euclidean and tree targets only")
    phi = EquivariantMap(prob.model, target, best[0])
    # moving every cell by at most res/2 changes each distance by at most res
    d_bound = 0.0
    idx = {c: i for i, c in enumerate(prob.model.cells)}
    for e in prob.edges:
        si, di = idx[e.src], idx[e.dst]
        dmax = target.distance(e.twist.apply(best[0][si]), best[0][di]) + res
        w = prob.model.weights[si] * e.weight
        d_bound += w * prob.p * dmax ** (prob.p - 1.0) * res
    return phi, best[1], d_bound


def grid_minimum_scalar(f, lo: float, hi: float, n: int = 2001) -> float:
    """Dense 1-D scan for scalar convex minimization checks."""
    xs = np.linspace(lo, hi, n)
    return float(min(f((float(x),)) for x in xs))


# ---------------------------------------------------------------------------
# Closed forms for moduli of convexity (validation oracles)
# ---------------------------------------------------------------------------


def hanner_modulus_ge2(p: float, eps: float) -> float:
    """Modulus of convexity of L_p for p >= 2: 1 - (1 - (eps/2)^p)^(1/p)."""
    if eps <= 0.0:
        return 0.0
    e = min(eps, 2.0)
    return 1.0 - (1.0 - (e / 2.0) ** p) ** (1.0 / p)


def hanner_modulus_le2(p: float, eps: float) -> float:
    """Modulus of convexity of L_p for 1 < p <= 2: the delta solving
    (1 - delta + eps/2)^p + |1 - delta - eps/2|^p = 2."""
    if eps <= 0.0:
        return 0.0
    e = min(eps, 2.0)
    lo, hi = 0.0, 1.0
    for _ in range(200):
        d = 0.5 * (lo + hi)
        if (1.0 - d + e / 2.0) ** p + abs(1.0 - d - e / 2.0) ** p > 2.0:
            lo = d
        else:
            hi = d
    return 0.5 * (lo + hi)


def euclidean_modulus_1d(eps: float, r: float = 1.0) -> float:
    """True modulus of the real line: eps * r / 2 (the extremal pair sits on
    one side of the ball, at chord distance exactly eps * r)."""
    return 0.5 * min(eps, 2.0) * r


def triangle_contains(vertices, q, tol: float = 1e-12) -> bool:
    """Barycentric membership test for a planar triangle."""
    a, b, c = (np.asarray(v, dtype=float) for v in vertices)
    q = np.asarray(q, dtype=float)
    m = np.column_stack([b - a, c - a])
    try:
        lam = np.linalg.solve(m, q - a)
    except np.linalg.LinAlgError:
        return False
    return bool(lam[0] >= -tol and lam[1] >= -tol and lam.sum() <= 1.0 + tol)
