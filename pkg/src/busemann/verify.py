"""Property suites: sampled verification of the library's structural claims.

Each suite returns a list of :class:`CheckResult`; the CLI ``verify``
subcommand runs them at configured budgets and reports per-check pass/fail
with the worst observed slack.  The acceptance tests run the same suites at
the pinned budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from busemann.commensurability import (
    build_cover,
    comm_energy_model,
    commensurability_energy,
    conjugate_comm_model,
    conjugate_map,
    coercivity_fit,
    cover_comm_energy_model,
    lift_map,
    subgroup_harmonic,
)
from busemann.convexity import clifford_check, modulus_estimate, parallel_check
from busemann.harmonic import minimize_energy
from busemann.mapspace import (
    EquivariantMap,
    MeasureModel,
    ScalarField,
    linear_modulus_bound,
    map_distance,
    mazur_map,
    permute_cells,
    scalar_distance,
    scalar_norm,
    uc_witness_check,
)
from busemann.models import (
    consensus_model,
    dihedral_line_model,
    dihedral_cover_model,
    translation_cover_spec,
    translation_loop_model,
    tree_consensus_model,
    tree_leafswap_model,
)
from busemann.oracles import (
    euclidean_modulus_1d,
    grid_minimum_energy,
    smallest_enclosing_ball_bruteforce,
    tree_one_center,
)
from busemann.spaces import (
    Euclidean,
    LpVector,
    Product,
    SolverError,
    EuclideanIsometry,
    householder_reflection,
    random_orthogonal,
    random_tree,
    rotation_2d,
    sample_point,
    star_tree,
    translation,
)
from busemann.convexity import circumcenter

__all__ = ["CheckResult", "SUITES", "run_suite"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str = ""


def _space_roster():
    return [
        ("euclidean2", Euclidean(2)),
        ("euclidean3", Euclidean(3)),
        ("lp(2,3)", LpVector(2, 3.0)),
        ("lp(3,1.5)", LpVector(3, 1.5)),
        ("star-tree", star_tree(3)),
        ("product(e2,tree)", Product((Euclidean(2), star_tree(3)), 2.0)),
        ("product(e1,e1;q=3)", Product((Euclidean(1), Euclidean(1)), 3.0)),
    ]


# ---------------------------------------------------------------------------
# Parallelogram suite
# ---------------------------------------------------------------------------


def _quadruple(space, rng):
    mode = rng.uniform()
    if mode < 0.55:
        return tuple(sample_point(space, rng, 2.0) for _ in range(4))
    z1 = sample_point(space, rng, 2.0)
    z2 = sample_point(space, rng, 2.0)
    if space.distance(z1, z2) == 0.0:
        return tuple(sample_point(space, rng, 2.0) for _ in range(4))
    # two sub-segments of a common geodesic, shifted copies of each other
    h = float(rng.uniform(0.05, 0.4))
    u1 = float(rng.uniform(0.0, 1.0 - h))
    u2 = float(rng.uniform(0.0, 1.0 - h))
    a = space.geodesic(z1, z2, u1)
    b = space.geodesic(z1, z2, u1 + h)
    x = space.geodesic(z1, z2, u2)
    y = space.geodesic(z1, z2, u2 + h)
    return a, b, x, y


def suite_parallelogram(samples: int = 10_000, tol: float = 1e-9, seed: int = 0):
    out = []
    for name, space in _space_roster():
        rng = np.random.default_rng(seed)
        bad = 0
        for _ in range(samples):
            a, b, x, y = _quadruple(space, rng)
            if parallel_check(space, a, b, x, y, tol) != parallel_check(
                space, a, x, b, y, tol
            ):
                bad += 1
        out.append(
            CheckResult(
                f"parallelogram[{name}]", bad == 0, float(bad), f"{samples} quadruples"
            )
        )
    return out


# ---------------------------------------------------------------------------
# Modulus suite
# ---------------------------------------------------------------------------


def suite_modulus(budget: int = 10_000, seed: int = 0):
    out = []
    eps_grid = (0.25, 0.5, 1.0, 1.5)
    for d in (2, 5):
        space = Euclidean(d)
        x = space.origin()
        worst = 0.0
        for eps in eps_grid:
            est = modulus_estimate(space, x, eps, 1.0, budget=budget, seed=seed)
            true = 1.0 - math.sqrt(1.0 - eps * eps / 4.0)
            worst = max(worst, abs(est.value - true) / true)
        out.append(
            CheckResult(f"modulus-hilbert[euclidean{d}]", worst <= 0.02, worst, "rel gap vs closed form")
        )
    # the real line: the Hilbert form does not apply, the true modulus is eps*r/2
    space = Euclidean(1)
    worst = 0.0
    for eps in eps_grid:
        est = modulus_estimate(space, space.origin(), eps, 1.0, budget=budget, seed=seed)
        true = euclidean_modulus_1d(eps)
        worst = max(worst, abs(est.value - true) / true)
    out.append(CheckResult("modulus-line[euclidean1]", worst <= 0.02, worst, "rel gap vs eps/2"))
    tree = star_tree(3)
    c = tree.vertex_point("c")
    worst = 0.0
    for eps in eps_grid:
        est = modulus_estimate(tree, c, eps, 1.0, budget=budget, seed=seed)
        true = eps / 2.0
        worst = max(worst, abs(est.value - true) / true)
    out.append(CheckResult("modulus-tripod[star-tree]", worst <= 0.02, worst, "rel gap vs eps*r/2"))
    # linear-in-r: delta(eps, r)/r independent of the scale
    for name, space, x in (
        ("euclidean2", Euclidean(2), (0.0, 0.0)),
        ("big-tree", star_tree(3, 15.0), star_tree(3, 15.0).vertex_point("c")),
    ):
        ratios = [
            modulus_estimate(space, x, 1.0, r, budget=budget // 2, seed=seed).value / r
            for r in (0.1, 1.0, 10.0)
        ]
        spread = (max(ratios) - min(ratios)) / max(ratios)
        out.append(CheckResult(f"modulus-linear-r[{name}]", spread <= 0.05, spread, f"ratios {ratios}"))
    return out


# ---------------------------------------------------------------------------
# Uniform convexity witness suite
# ---------------------------------------------------------------------------


def _uc_targets():
    return [
        ("line", Euclidean(1)),
        ("lp(3,3)", LpVector(3, 3.0)),
        ("star-tree", star_tree(3)),
    ]


def _triple_batch(target, model, samples, rng):
    """Pre-sampled (psi, phi1, phi2) map triples, batched for speed."""
    n = len(model.cells)
    if isinstance(target, (Euclidean, LpVector)):
        dim = target.dim
        arr = rng.normal(0.0, 1.0, (samples, 3, n, dim))
        for k in range(samples):
            block = arr[k]
            yield tuple(
                EquivariantMap(
                    model,
                    target,
                    tuple(tuple(float(c) for c in block[m, i]) for i in range(n)),
                )
                for m in range(3)
            )
    else:
        n_edges = len(target.edges)
        idxs = rng.integers(0, n_edges, (samples, 3, n))
        offs = rng.uniform(0.0, 1.0, (samples, 3, n))
        lengths = [e[2] for e in target.edges]
        for k in range(samples):
            yield tuple(
                EquivariantMap(
                    model,
                    target,
                    tuple(
                        target.point(int(idxs[k, m, i]), float(offs[k, m, i]) * lengths[int(idxs[k, m, i])])
                        for i in range(n)
                    ),
                )
                for m in range(3)
            )


def suite_uc_witness(samples: int = 100_000, seed: int = 0, ps=(1.5, 2.0, 3.0)):
    out = []
    model = MeasureModel(("a", "b", "c"), (0.5, 0.3, 0.2))
    for tname, target in _uc_targets():
        delta = linear_modulus_bound(target)
        for p in ps:
            rng = np.random.default_rng(seed)
            violations = 0
            min_slack = math.inf
            regime_fail = 0
            for psi, phi1, phi2 in _triple_batch(target, model, samples, rng):
                r = max(
                    map_distance(p, phi1, psi), map_distance(p, phi2, psi), 1e-9
                )
                rep = uc_witness_check(p, delta, psi, phi1, phi2, r)
                if not rep.ok:
                    violations += 1
                if not rep.small_modulus_regime:
                    regime_fail += 1
                min_slack = min(min_slack, rep.slack)
            out.append(
                CheckResult(
                    f"uc-witness[{tname},p={p}]",
                    violations == 0,
                    float(violations),
                    f"min slack {min_slack:.3e}; off-regime reports {regime_fail}",
                )
            )
    return out


# ---------------------------------------------------------------------------
# Solver-oracle suite
# ---------------------------------------------------------------------------


def _oracle_roster():
    return [
        ("consensus-2", consensus_model(2), 2.5, 21),
        ("consensus-3", consensus_model(3), 2.5, 15),
        ("dihedral-2", dihedral_line_model(2), 1.5, 21),
        ("dihedral-3", dihedral_line_model(3), 1.5, 15),
        ("translation-loop", translation_loop_model(), 2.5, 21),
        ("tree-consensus-2", tree_consensus_model(2), None, 24),
        ("tree-leafswap", tree_leafswap_model(), None, 48),
    ]


def suite_solver_oracle(seed: int = 0, tol: float = 1e-10):
    out = []
    for name, gm, span, coarse in _oracle_roster():
        prob = gm.problem
        rep = minimize_energy(prob, gm.init, tol=tol, max_sweeps=3000, seed=seed)
        if span is not None:
            _, e_grid, bound = grid_minimum_energy(prob, span=span, coarse=coarse, refine_rounds=4)
        else:
            _, e_grid, bound = grid_minimum_energy(prob, coarse=coarse)
        gap_up = rep.energy_total - (e_grid + 1e-5)
        gap_down = e_grid - (rep.energy_total + bound + 1e-5)
        exact = isinstance(prob.target, Euclidean)
        slack = 1e-15 if exact else 1e-12
        mono_bad = sum(
            1
            for i in range(len(rep.trace) - 1)
            if rep.trace[i + 1].objective
            > rep.trace[i].objective + slack * (1.0 + abs(rep.trace[i].objective))
        )
        ok = gap_up <= 0.0 and gap_down <= 0.0 and mono_bad == 0
        out.append(
            CheckResult(
                f"solver-oracle[{name}]",
                ok,
                max(gap_up, gap_down, float(mono_bad)),
                f"solver {rep.energy_total:.9f} grid {e_grid:.9f} bound {bound:.2e} mono_bad {mono_bad}",
            )
        )
    return out


# ---------------------------------------------------------------------------
# Commensurability suite
# ---------------------------------------------------------------------------


def suite_commensurability(seed: int = 0, tol: float = 1e-8):
    out = []
    base = dihedral_line_model(3).problem
    m = comm_energy_model(base)
    rep = subgroup_harmonic(m, tol=tol, seed=seed)
    out.append(
        CheckResult(
            "restart-unique[dihedral]",
            rep.extras["unique"] and rep.extras["parallel_orbits"] is False,
            rep.extras["restart_gap"],
            f"gap {rep.extras['restart_gap']:.2e}",
        )
    )
    # conjugation energy identity on a dyadic map
    e1 = base.target
    lam = translation(e1, (1.0,))
    relabel = {c: c for c in base.model.cells}
    phi = EquivariantMap(base.model, e1, ((0.25,), (-0.5,), (1.5,)))
    m_conj = conjugate_comm_model(m, lam, relabel)
    phi_conj = conjugate_map(phi, lam, relabel)
    gap = abs(commensurability_energy(m, phi) - commensurability_energy(m_conj, phi_conj))
    out.append(CheckResult("conjugation-identity", gap <= 1e-12, gap, "dyadic map, lam=t"))
    back = conjugate_map(phi_conj, lam.invert(), relabel)
    out.append(
        CheckResult(
            "conjugation-roundtrip",
            back.values == phi.values,
            0.0 if back.values == phi.values else 1.0,
            "exact restore",
        )
    )
    # normal-cover coincidence (index-2 subgroup containing the mirror)
    spec = dihedral_cover_model(2).cover_spec
    cov = build_cover(spec)
    mc = cover_comm_energy_model(spec, cov)
    rep_c = subgroup_harmonic(mc, tol=tol, seed=seed + 1)
    lifted = lift_map(spec, rep.solution, cov)
    gap = max(
        cov.target.distance(a, b)
        for a, b in zip(lifted.values, rep_c.solution.values)
    )
    out.append(CheckResult("normal-cover-coincidence", gap <= 1e-5, gap, "index-2 mirror cover"))
    # flat translation cover: non-trivial only with the norm-minimal selection
    spec_t = translation_cover_spec(3)
    cov_t = build_cover(spec_t)
    mt = cover_comm_energy_model(spec_t, cov_t)
    rep_t = subgroup_harmonic(mt, tol=tol, seed=seed + 2, norm_minimal=True)
    lifted_t = lift_map(spec_t, rep.solution, cov_t)
    gap_t = max(
        cov_t.target.distance(a, b)
        for a, b in zip(lifted_t.values, rep_t.solution.values)
    )
    out.append(
        CheckResult("normal-cover-coincidence-flat", gap_t <= 1e-5, gap_t, "translation cover, norm-minimal")
    )
    # pure translation model must report non-uniqueness, not an error
    mt2 = comm_energy_model(translation_loop_model().problem)
    try:
        rep2 = subgroup_harmonic(mt2, tol=tol, seed=seed + 3)
        ok = (not rep2.extras["unique"]) and rep2.extras["parallel_orbits"] is True
        out.append(
            CheckResult("non-uniqueness-reported[translation]", ok, rep2.extras["restart_gap"])
        )
    except SolverError:
        out.append(CheckResult("non-uniqueness-reported[translation]", False, math.inf, "raised"))
    c_fit = coercivity_fit(m, n_samples=200, seed=seed)
    out.append(CheckResult("coercivity-fit[dihedral]", c_fit > 0.0, c_fit, "I >= c*|phi|^2"))
    return out


# ---------------------------------------------------------------------------
# Mazur suite
# ---------------------------------------------------------------------------


def suite_mazur(samples: int = 100_000, seed: int = 0, pairs=((2.0, 4.0), (3.0, 1.5))):
    out = []
    model = MeasureModel(tuple(f"w{i}" for i in range(8)), (0.125,) * 8)
    for p, q in pairs:
        rng = np.random.default_rng(seed)
        worst_rt = 0.0
        worst_sphere = 0.0
        inter_ok = True
        cfit = 0.0
        exponent = min(1.0, p / q)
        n_pairs = samples
        for _ in range(n_pairs):
            vals = rng.normal(0.0, 1.0, 8)
            f = ScalarField(model, tuple(float(v) for v in vals), p)
            nf = scalar_norm(f)
            if nf == 0.0:
                continue
            f = ScalarField(model, tuple(v / nf for v in f.values), p)
            g_vals = rng.normal(0.0, 1.0, 8)
            g = ScalarField(model, tuple(float(v) for v in g_vals), p)
            ng = scalar_norm(g)
            if ng == 0.0:
                continue
            g = ScalarField(model, tuple(v / ng for v in g.values), p)
            mf = mazur_map(f, p, q)
            mg = mazur_map(g, p, q)
            back = mazur_map(mf, q, p)
            worst_rt = max(
                worst_rt, max(abs(a - b) for a, b in zip(back.values, f.values))
            )
            worst_sphere = max(worst_sphere, abs(scalar_norm(mf) - scalar_norm(f) ** (p / q)))
            df = scalar_distance(f, g)
            if df > 1e-12:
                dq = scalar_distance(mf, mg)
                cfit = max(cfit, dq / df ** exponent)
            perm = tuple(rng.permutation(8))
            if mazur_map(permute_cells(f, perm), p, q).values != permute_cells(mf, perm).values:
                inter_ok = False
        out.append(
            CheckResult(
                f"mazur-roundtrip[p={p},q={q}]", worst_rt <= 1e-12, worst_rt, f"{n_pairs} fields"
            )
        )
        out.append(
            CheckResult(f"mazur-sphere[p={p},q={q}]", worst_sphere <= 1e-12, worst_sphere)
        )
        out.append(CheckResult(f"mazur-intertwine[p={p},q={q}]", inter_ok, 0.0 if inter_ok else 1.0))
        out.append(
            CheckResult(
                f"mazur-continuity[p={p},q={q}]",
                math.isfinite(cfit) and cfit > 0.0,
                cfit,
                f"fitted C with exponent {exponent}",
            )
        )
    return out


# ---------------------------------------------------------------------------
# Clifford suite
# ---------------------------------------------------------------------------


def suite_clifford(count: int = 100, seed: int = 0, tol: float = 1e-9):
    out = []
    rng = np.random.default_rng(seed)
    for dim in (2, 3):
        space = Euclidean(dim)
        errors = 0
        worst_half = 0.0
        for _ in range(count):
            v = rng.normal(0.0, 1.0, dim)
            v = v / np.linalg.norm(v) * rng.uniform(0.1, 10.0)
            t = translation(space, tuple(float(c) for c in v))
            rep = clifford_check(space, t, tol=tol, seed=int(rng.integers(1 << 30)))
            if not (rep.is_clifford and rep.halfway_is_clifford):
                errors += 1
                continue
            worst_half = max(worst_half, abs(rep.halfway_displacement - 0.5 * rep.displacement))
        for _ in range(count):
            if dim == 2:
                lin = rotation_2d(float(rng.uniform(0.1, math.pi)))
                mat = np.asarray(lin.matrix)
            else:
                if rng.uniform() < 0.5:
                    mat = random_orthogonal(dim, rng)
                    while np.max(np.abs(mat - np.eye(dim))) < 0.1:
                        mat = random_orthogonal(dim, rng)
                else:
                    mat = np.asarray(
                        householder_reflection(tuple(float(c) for c in rng.normal(0, 1, dim))).matrix
                    )
            shift = tuple(float(c) for c in rng.normal(0.0, 2.0, dim))
            iso = EuclideanIsometry(tuple(map(tuple, mat)), shift)
            rep = clifford_check(space, iso, tol=tol, seed=int(rng.integers(1 << 30)))
            if rep.is_clifford:
                errors += 1
        out.append(
            CheckResult(
                f"clifford[euclidean{dim}]",
                errors == 0 and worst_half <= 1e-9,
                max(float(errors), worst_half),
                f"{count} translations + {count} rotations/reflections",
            )
        )
    return out


# ---------------------------------------------------------------------------
# Circumcenter-vs-oracle suite (drives the minimax certification)
# ---------------------------------------------------------------------------


def suite_circumcenter(euclid_instances: int = 200, tree_instances: int = 100, seed: int = 0):
    rng = np.random.default_rng(seed)
    space = Euclidean(2)
    worst = 0.0
    for k in range(euclid_instances):
        n = int(rng.integers(2, 6))
        pts = [tuple(float(c) for c in rng.uniform(-1.0, 1.0, 2)) for _ in range(n)]
        _, r_oracle = smallest_enclosing_ball_bruteforce(pts)
        _, r_iter = circumcenter(space, pts, tol=1e-8, seed=int(rng.integers(1 << 30)))
        worst = max(worst, abs(r_oracle - r_iter))
    res = [CheckResult("circumcenter[euclidean2]", worst <= 1e-6, worst, f"{euclid_instances} instances")]
    worst = 0.0
    for k in range(tree_instances):
        tree = random_tree(int(rng.integers(3, 8)), rng)
        pts = [sample_point(tree, rng) for _ in range(int(rng.integers(2, 6)))]
        _, r_oracle = tree_one_center(tree, pts)
        _, r_iter = circumcenter(tree, pts, tol=1e-8, seed=int(rng.integers(1 << 30)))
        worst = max(worst, abs(r_oracle - r_iter))
    res.append(
        CheckResult("circumcenter[tree]", worst <= 1e-6, worst, f"{tree_instances} random trees")
    )
    return res


SUITES = {
    "parallelogram": suite_parallelogram,
    "modulus": suite_modulus,
    "uc-witness": suite_uc_witness,
    "solver-oracle": suite_solver_oracle,
    "commensurability": suite_commensurability,
    "mazur": suite_mazur,
    "clifford": suite_clifford,
    "circumcenter": suite_circumcenter,
}


def run_suite(name: str, budgets: Optional[dict] = None):
    """Run one suite (or 'all') with optional budget overrides."""
    budgets = dict(budgets or {})
    if name == "all":
        out = []
        for n in SUITES:
            out.extend(run_suite(n, budgets))
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; known: {sorted(SUITES) + ['all']}")
    fn = SUITES[name]
    kwargs = {}
    if name == "parallelogram":
        kwargs["samples"] = int(budgets.get("samples", 2000))
    elif name == "modulus":
        kwargs["budget"] = int(budgets.get("budget", 4000))
    elif name == "uc-witness":
        kwargs["samples"] = int(budgets.get("samples", 2000))
    elif name == "mazur":
        kwargs["samples"] = int(budgets.get("samples", 5000))
    elif name == "clifford":
        kwargs["count"] = int(budgets.get("count", 25))
    elif name == "circumcenter":
        kwargs["euclid_instances"] = int(budgets.get("euclid_instances", 50))
        kwargs["tree_instances"] = int(budgets.get("tree_instances", 25))
    if "seed" in budgets:
        kwargs["seed"] = int(budgets["seed"])
    return fn(**kwargs)
