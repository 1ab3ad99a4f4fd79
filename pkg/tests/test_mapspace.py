import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from busemann.mapspace import (
    EquivariantMap,
    MeasureModel,
    ScalarField,
    banach_lp_modulus,
    const_map,
    hilbert_modulus,
    linear_modulus_bound,
    map_distance,
    map_geodesic,
    map_midpoint,
    mazur_map,
    permute_cells,
    sample_map,
    scalar_distance,
    scalar_norm,
    two_atom_modulus_search,
    uc_witness_check,
)
from busemann.oracles import hanner_modulus_ge2, hanner_modulus_le2
from busemann.spaces import (
    DomainError,
    Euclidean,
    LpVector,
    SpaceMismatchError,
    ValidationError,
    star_tree,
)

E1 = Euclidean(1)
STAR = star_tree(3)
M2 = MeasureModel(("a", "b"), (0.5, 0.5))


def emap(model, values):
    return EquivariantMap(model, E1, tuple((float(v),) for v in values))


# ---------------------------------------------------------------------------
# measure models and the map distance
# ---------------------------------------------------------------------------


def test_model_validation():
    with pytest.raises(ValidationError):
        MeasureModel(("a", "b"), (0.5, 0.6))
    with pytest.raises(ValidationError):
        MeasureModel(("a", "a"), (0.5, 0.5))
    with pytest.raises(ValidationError):
        MeasureModel(("a", "b"), (1.0, 0.0))


def test_rho_equal_weights():
    assert map_distance(2.0, emap(M2, (0, 0)), emap(M2, (2, 2))) == 2.0


def test_rho_zero_on_equal_maps():
    phi = emap(M2, (1.3, -0.2))
    assert map_distance(2.0, phi, phi) == 0.0


def test_rho_weighted():
    m = MeasureModel(("a", "b"), (0.25, 0.75))
    phi = emap(m, (0, 0))
    psi = emap(m, (4, 0))
    assert map_distance(2.0, phi, psi) == pytest.approx(2.0, abs=1e-15)


def test_rho_model_mismatch():
    other = MeasureModel(("x", "y"), (0.5, 0.5))
    with pytest.raises(SpaceMismatchError):
        map_distance(2.0, emap(M2, (0, 0)), emap(other, (0, 0)))


def test_rho_metric_axioms(rng):
    for _ in range(1000):
        phi = sample_map(M2, E1, rng)
        psi = sample_map(M2, E1, rng)
        chi = sample_map(M2, E1, rng)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        dxy = map_distance(p, phi, psi)
        assert dxy == map_distance(p, psi, phi)
        assert dxy >= 0.0
        assert map_distance(p, phi, phi) == 0.0
        assert dxy <= map_distance(p, phi, chi) + map_distance(p, chi, psi) + 1e-12


# ---------------------------------------------------------------------------
# midpoints and geodesics of maps
# ---------------------------------------------------------------------------


def test_map_midpoint_cellwise():
    mid = map_midpoint(emap(M2, (0, 0)), emap(M2, (2, 4)))
    assert mid.values == ((1.0,), (2.0,))


def test_map_midpoint_idempotent_on_equal():
    phi = emap(M2, (1, 2))
    assert map_midpoint(phi, phi).values == phi.values


def test_map_midpoint_tree_pointwise():
    phi = EquivariantMap(M2, STAR, (STAR.vertex_point("l1"), STAR.vertex_point("l2")))
    psi = const_map(M2, STAR, STAR.vertex_point("c"))
    mid = map_midpoint(phi, psi)
    assert mid.values == (STAR.point(0, 0.5), STAR.point(1, 0.5))


def test_map_midpoint_bisects_rho(rng):
    # equality for p = 2 with a CAT(0) target, inequality in general
    for p, target in ((2.0, E1), (2.0, STAR), (1.5, LpVector(2, 3.0)), (3.0, E1)):
        for _ in range(100):
            phi = sample_map(M2, target, rng)
            psi = sample_map(M2, target, rng)
            mid = map_midpoint(phi, psi)
            d = map_distance(p, phi, psi)
            dm = map_distance(p, mid, phi)
            assert dm <= 0.5 * d + 1e-12
            if p == 2.0:
                assert dm == pytest.approx(0.5 * d, abs=1e-12)
                assert map_distance(p, mid, psi) == pytest.approx(0.5 * d, abs=1e-12)


def test_map_space_bnpc_sampled(rng):
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    for p, target in ((2.0, STAR), (1.5, E1), (3.0, LpVector(2, 3.0))):
        for _ in range(100):
            phi1, phi2 = sample_map(M2, target, rng), sample_map(M2, target, rng)
            psi1, psi2 = sample_map(M2, target, rng), sample_map(M2, target, rng)
            vals = [
                map_distance(p, map_geodesic(phi1, phi2, t), map_geodesic(psi1, psi2, t))
                for t in grid
            ]
            for i in range(1, len(grid) - 1):
                assert vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-9 * (1 + max(vals))


# ---------------------------------------------------------------------------
# the L_p modulus search vs closed forms
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("eps", [0.05, 0.3, 1.0, 1.7])
def test_two_atom_search_matches_hilbert(eps):
    assert two_atom_modulus_search(2.0, eps) == pytest.approx(
        hilbert_modulus(eps), rel=1e-6
    )


@pytest.mark.parametrize("eps", [0.05, 0.3, 1.0, 1.7])
def test_two_atom_search_matches_hanner_p3(eps):
    assert two_atom_modulus_search(3.0, eps) == pytest.approx(
        hanner_modulus_ge2(3.0, eps), rel=1e-3
    )


@pytest.mark.parametrize("eps", [0.05, 0.3, 1.0, 1.7])
def test_two_atom_search_matches_hanner_p15(eps):
    assert two_atom_modulus_search(1.5, eps) == pytest.approx(
        hanner_modulus_le2(1.5, eps), rel=1e-6
    )


def test_banach_modulus_monotone_lower_lookup():
    vals = [banach_lp_modulus(2.0, e) for e in np.linspace(1e-4, 2.0, 50)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    # a lower estimate of the true modulus everywhere
    for e in (0.01, 0.2, 0.9, 1.8):
        assert banach_lp_modulus(2.0, e) <= hilbert_modulus(e) + 1e-9
    assert banach_lp_modulus(2.0, 0.0) == 0.0


def test_linear_modulus_bounds_by_space():
    assert linear_modulus_bound(E1) is hilbert_modulus
    assert linear_modulus_bound(STAR) is hilbert_modulus
    lp3 = linear_modulus_bound(LpVector(3, 3.0))
    assert lp3(1.0) == pytest.approx(hanner_modulus_ge2(3.0, 1.0), abs=1e-12)
    lp15 = linear_modulus_bound(LpVector(2, 1.5))
    assert lp15(1.0) == pytest.approx(0.5 / 8.0, abs=1e-12)
    assert lp15(1.0) <= hanner_modulus_le2(1.5, 1.0)


# ---------------------------------------------------------------------------
# uniform convexity witness
# ---------------------------------------------------------------------------


def test_uc_witness_maximal_eps():
    psi = emap(M2, (0, 0))
    phi1 = emap(M2, (1, 1))
    phi2 = emap(M2, (-1, -1))
    rep = uc_witness_check(2.0, linear_modulus_bound(E1), psi, phi1, phi2, 1.0)
    assert rep.eps == pytest.approx(2.0)
    assert rep.ok and rep.slack > 0.9  # midpoint collapses to psi


def test_uc_witness_degenerate_pair():
    psi = emap(M2, (0, 0))
    phi = emap(M2, (0.5, -0.5))
    rep = uc_witness_check(2.0, linear_modulus_bound(E1), psi, phi, phi, 1.0)
    assert rep.eps == 0.0 and rep.tau == 0.0 and rep.ok


def test_uc_witness_precondition():
    psi = emap(M2, (0, 0))
    phi = emap(M2, (5, 5))
    with pytest.raises(DomainError):
        uc_witness_check(2.0, linear_modulus_bound(E1), psi, phi, phi, 1.0)


def test_uc_witness_large_radius_regime(rng):
    # uniform convexity for large distances: sampled non-violation when the
    # radius dwarfs the sample diameter (r >= 10 * diam)
    target = E1
    delta = linear_modulus_bound(target)
    for _ in range(500):
        psi = sample_map(M2, target, rng)
        phi1 = sample_map(M2, target, rng)
        phi2 = sample_map(M2, target, rng)
        diam = max(
            map_distance(2.0, a, b)
            for a in (psi, phi1, phi2)
            for b in (psi, phi1, phi2)
        )
        r = max(10.0 * diam, 1e-6)
        rep = uc_witness_check(2.0, delta, psi, phi1, phi2, r)
        assert rep.ok


@given(
    st.lists(st.floats(-5, 5, allow_nan=False, allow_infinity=False), min_size=2, max_size=2),
    st.sampled_from([(2.0, 4.0), (3.0, 1.5), (1.5, 2.5)]),
)
def test_mazur_roundtrip_property(vals, pq):
    p, q = pq
    f = ScalarField(M2, tuple(vals), p)
    back = mazur_map(mazur_map(f, p, q), q, p)
    assert max(abs(a - b) for a, b in zip(back.values, f.values)) <= 1e-10 * (
        1.0 + max(abs(v) for v in vals)
    )


def test_uc_witness_random_l3_batch(rng):
    target = LpVector(3, 3.0)
    delta = linear_modulus_bound(target)
    model = MeasureModel(("a", "b", "c"), (0.5, 0.3, 0.2))
    for _ in range(2000):
        psi = sample_map(model, target, rng)
        phi1 = sample_map(model, target, rng)
        phi2 = sample_map(model, target, rng)
        r = max(map_distance(3.0, phi1, psi), map_distance(3.0, phi2, psi), 1e-9)
        rep = uc_witness_check(3.0, delta, psi, phi1, phi2, r)
        assert rep.ok


# ---------------------------------------------------------------------------
# Mazur map
# ---------------------------------------------------------------------------


def test_mazur_fixed_point():
    f = ScalarField(M2, (1.0, 1.0), 2.0)
    assert mazur_map(f, 2.0, 4.0).values == (1.0, 1.0)


def test_mazur_negative_value():
    m1 = MeasureModel(("a",), (1.0,))
    f = ScalarField(m1, (-4.0,), 2.0)
    out = mazur_map(f, 2.0, 1.5)
    assert out.values[0] == pytest.approx(-(4.0 ** (2.0 / 1.5)), abs=1e-12)
    assert out.p == 1.5


def test_mazur_roundtrip(rng):
    for _ in range(200):
        vals = tuple(float(v) for v in rng.normal(0, 1, 2))
        f = ScalarField(M2, vals, 2.0)
        back = mazur_map(mazur_map(f, 2.0, 4.0), 4.0, 2.0)
        assert max(abs(a - b) for a, b in zip(back.values, f.values)) <= 1e-12


def test_mazur_sphere_preservation(rng):
    for p, q in ((2.0, 4.0), (3.0, 1.5)):
        for _ in range(200):
            f = ScalarField(M2, tuple(float(v) for v in rng.normal(0, 1, 2)), p)
            assert scalar_norm(mazur_map(f, p, q)) == pytest.approx(
                scalar_norm(f) ** (p / q), abs=1e-12
            )


def test_mazur_intertwines_permutations(rng):
    m = MeasureModel(tuple("abcd"), (0.25,) * 4)
    for _ in range(100):
        f = ScalarField(m, tuple(float(v) for v in rng.normal(0, 1, 4)), 2.0)
        perm = tuple(int(i) for i in rng.permutation(4))
        left = mazur_map(permute_cells(f, perm), 2.0, 4.0)
        right = permute_cells(mazur_map(f, 2.0, 4.0), perm)
        assert left.values == right.values


def test_mazur_uniform_continuity_fit(rng):
    # |Mf - Mg|_q <= C |f - g|_p^min(1, p/q) on the unit sphere
    for p, q in ((2.0, 4.0), (3.0, 1.5)):
        expo = min(1.0, p / q)
        cfit = 0.0
        for _ in range(2000):
            f = ScalarField(M2, tuple(float(v) for v in rng.normal(0, 1, 2)), p)
            g = ScalarField(M2, tuple(float(v) for v in rng.normal(0, 1, 2)), p)
            nf, ng = scalar_norm(f), scalar_norm(g)
            if nf < 1e-9 or ng < 1e-9:
                continue
            f = ScalarField(M2, tuple(v / nf for v in f.values), p)
            g = ScalarField(M2, tuple(v / ng for v in g.values), p)
            df = scalar_distance(f, g)
            if df < 1e-12:
                continue
            dq = scalar_distance(mazur_map(f, p, q), mazur_map(g, p, q))
            cfit = max(cfit, dq / df ** expo)
        assert math.isfinite(cfit) and 0.0 < cfit < 100.0


def test_mazur_rejects_wrong_exponents():
    f = ScalarField(M2, (1.0, 2.0), 2.0)
    with pytest.raises(DomainError):
        mazur_map(f, 3.0, 2.0)
    with pytest.raises(DomainError):
        mazur_map(f, 2.0, 1.0)
