"""The space of maps from a finite weighted cell model into a target space.

A :class:`MeasureModel` is a finite probability space of cells; an
:class:`EquivariantMap` assigns a target point to each cell (the discrete
stand-in for an equivariant map restricted to a fundamental domain).  The
space of such maps carries the L_p distance

    rho(phi, psi) = (sum_w mu_w d(phi_w, psi_w)^p)^(1/p),

is complete and Busemann non-positively curved whenever the target is, and
is uniformly convex with an explicit rate: the midpoint of two maps within
distance r of a third, separated by eps * r, is at distance at most
r * (1 - tau(eps)) from it, where tau(eps) = beta_p(delta(eps/4)^4),
beta_p the modulus of convexity of the scalar L_p space and delta a linear
modulus lower bound of the target.  ``uc_witness_check`` certifies this
numerically; ``mazur_map`` implements the sphere-preserving map between
scalar L_p and L_q fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from busemann.spaces import (
    DomainError,
    Euclidean,
    LpVector,
    MetricTree,
    Product,
    SpaceMismatchError,
    ValidationError,
    midpoint,
    sample_point,
)

__all__ = [
    "MeasureModel",
    "EquivariantMap",
    "ScalarField",
    "const_map",
    "sample_map",
    "map_distance",
    "map_norm",
    "map_midpoint",
    "map_geodesic",
    "banach_lp_modulus",
    "two_atom_modulus_search",
    "hilbert_modulus",
    "linear_modulus_bound",
    "UCWitnessReport",
    "uc_witness_check",
    "mazur_map",
    "scalar_norm",
    "scalar_distance",
    "permute_cells",
]


@dataclass(frozen=True)
class MeasureModel:
    """Finite probability space: cell ids with positive weights summing to 1."""

    cells: tuple
    weights: tuple

    def __post_init__(self):
        cells = tuple(self.cells)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "weights", weights)
        if len(cells) != len(weights) or not cells:
            raise ValidationError("cells/weights length mismatch or empty model")
        if len(set(cells)) != len(cells):
            raise ValidationError("duplicate cell ids")
        if any(w <= 0.0 for w in weights):
            raise ValidationError("cell weights must be positive")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise ValidationError("cell weights must sum to 1")

    def index(self, cell) -> int:
        return self.cells.index(cell)


def uniform_model(n: int, prefix: str = "w") -> MeasureModel:
    return MeasureModel(tuple(f"{prefix}{i}" for i in range(n)), (1.0 / n,) * n)


@dataclass(frozen=True)
class EquivariantMap:
    """One target point per cell of a measure model."""

    model: MeasureModel
    target: object
    values: tuple

    def __post_init__(self):
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.model.cells):
            raise ValidationError("one value per cell required")
        for v in values:
            self.target.validate_point(v)

    def value(self, cell):
        return self.values[self.model.index(cell)]

    def with_values(self, values) -> "EquivariantMap":
        return EquivariantMap(self.model, self.target, tuple(values))


def const_map(model: MeasureModel, target, x0) -> EquivariantMap:
    return EquivariantMap(model, target, (x0,) * len(model.cells))


def sample_map(model: MeasureModel, target, rng: np.random.Generator, scale: float = 1.0) -> EquivariantMap:
    return EquivariantMap(
        model, target, tuple(sample_point(target, rng, scale) for _ in model.cells)
    )


def _check_compatible(phi: EquivariantMap, psi: EquivariantMap) -> None:
    if phi.model != psi.model or phi.target != psi.target:
        raise SpaceMismatchError("maps live over different models or targets")


def map_distance(p: float, phi: EquivariantMap, psi: EquivariantMap) -> float:
    """The L_p distance: weighted p-mean of the pointwise distances."""
    if not (1.0 < p < math.inf):
        raise DomainError("exponent p must lie in (1, inf)")
    _check_compatible(phi, psi)
    t = phi.target
    return math.fsum(
        w * t.distance(a, b) ** p
        for w, a, b in zip(phi.model.weights, phi.values, psi.values)
    ) ** (1.0 / p)


def map_norm(p: float, phi: EquivariantMap, x0) -> float:
    """Distance to the constant map at the base point x0."""
    return map_distance(p, phi, const_map(phi.model, phi.target, x0))


def map_midpoint(phi: EquivariantMap, psi: EquivariantMap) -> EquivariantMap:
    _check_compatible(phi, psi)
    t = phi.target
    return phi.with_values(midpoint(t, a, b) for a, b in zip(phi.values, psi.values))


def map_geodesic(phi: EquivariantMap, psi: EquivariantMap, s: float) -> EquivariantMap:
    _check_compatible(phi, psi)
    t = phi.target
    return phi.with_values(t.geodesic(a, b, s) for a, b in zip(phi.values, psi.values))


# ---------------------------------------------------------------------------
# Modulus of convexity of the scalar L_p space
# ---------------------------------------------------------------------------


def hilbert_modulus(eps: float) -> float:
    """Modulus of convexity of a Hilbert space, 1 - sqrt(1 - eps^2/4)."""
    if eps <= 0.0:
        return 0.0
    e = min(eps, 2.0)
    return 1.0 - math.sqrt(max(0.0, 1.0 - e * e / 4.0))


def _sphere_points(theta: np.ndarray, mu: float, nu: float, p: float):
    c, s = np.cos(theta), np.sin(theta)
    u = np.sign(c) * np.abs(c) ** (2.0 / p) / mu ** (1.0 / p)
    v = np.sign(s) * np.abs(s) ** (2.0 / p) / nu ** (1.0 / p)
    return u, v


def two_atom_modulus_search(
    p: float, eps: float, grid: int = 128, mu_values: Sequence[float] = (0.5, 0.35, 0.2, 0.08)
) -> float:
    """Modulus of convexity of L_p computed directly: minimize 1 - |(f+g)/2|
    over unit-sphere pairs f, g of a two-atom weighted L_p space subject to
    |f - g| >= eps.

    The constraint is active at the optimum, so for every direction of f the
    search bisects onto the manifold |f - g| = eps and minimizes along it,
    then zooms the f-direction around the best root.  Deterministic; uses no
    closed forms.
    """
    if eps <= 0.0:
        return 0.0
    eps = min(eps, 2.0)

    def inner(mu: float) -> float:
        nu = 1.0 - mu

        def norm(u, v):
            return (mu * np.abs(u) ** p + nu * np.abs(v) ** p) ** (1.0 / p)

        def pair(th1, th2):
            u1, v1 = _sphere_points(th1, mu, nu, p)
            u2, v2 = _sphere_points(th2, mu, nu, p)
            return norm(u1 - u2, v1 - v2), 1.0 - norm(0.5 * (u1 + u2), 0.5 * (v1 + v2))

        best = math.inf
        lo1, hi1 = 0.0, 2.0 * math.pi
        n1 = grid
        for _ in range(5):
            t1 = np.linspace(lo1, hi1, n1)
            t2 = np.linspace(0.0, 2.0 * math.pi, 4 * grid)
            sep = np.empty((len(t1), len(t2)))
            obj = np.empty_like(sep)
            for i, th in enumerate(t1):
                sep[i], obj[i] = pair(np.full_like(t2, th), t2)
            # interior-feasible grid minimum (safety net)
            masked = np.where(sep >= eps, obj, np.inf)
            k = int(np.argmin(masked))
            gbest = float(masked.flat[k]) if math.isfinite(masked.flat[k]) else math.inf
            # roots of sep == eps along each row, found by vector bisection
            sign = np.sign(sep - eps)
            rows, cols = np.nonzero(sign[:, :-1] * sign[:, 1:] < 0)
            if rows.size:
                a = t2[cols]
                b = t2[cols + 1]
                th1v = t1[rows]
                sa = sep[rows, cols] - eps
                for _ in range(60):
                    m = 0.5 * (a + b)
                    sm, _ = pair(th1v, m)
                    left = (sm - eps) * sa > 0
                    a = np.where(left, m, a)
                    b = np.where(left, b, m)
                    sa = np.where(left, sm - eps, sa)
                _, vals = pair(th1v, 0.5 * (a + b))
                j = int(np.argmin(vals))
                rbest = float(vals[j])
                best_t1 = float(th1v[j])
            else:
                rbest, best_t1 = math.inf, None
            cur = min(gbest, rbest)
            best = min(best, cur)
            if best_t1 is None or not math.isfinite(best):
                break
            w = (hi1 - lo1) / (n1 - 1)
            lo1, hi1 = best_t1 - 2.0 * w, best_t1 + 2.0 * w
            n1 = 33
        return best

    return max(0.0, min(inner(float(m)) for m in mu_values))


# Lazily-built per-exponent curves for the L_p modulus; lookups step down to
# the node below, and below the smallest node extrapolate with the known
# small-eps power max(2, p), with a 1/2 safety factor.  Both choices only
# ever under-estimate the modulus, which keeps the certified rate valid.
_MODULUS_NODES = 32
_modulus_curves: dict = {}


def _modulus_curve(p: float):
    key = round(p, 12)
    if key not in _modulus_curves:
        grid = np.geomspace(1e-3, 2.0, _MODULUS_NODES)
        vals = np.array(
            [
                two_atom_modulus_search(p, float(e), grid=64, mu_values=(0.5, 0.3, 0.12))
                for e in grid
            ]
        )
        vals = np.maximum.accumulate(vals)  # enforce monotonicity against noise
        _modulus_curves[key] = (grid, vals)
    return _modulus_curves[key]


def banach_lp_modulus(p: float, eps: float) -> float:
    """Lower estimate of the modulus of convexity of the scalar L_p space."""
    if not (1.0 < p < math.inf):
        raise DomainError("exponent p must lie in (1, inf)")
    if eps <= 0.0:
        return 0.0
    eps = min(eps, 2.0)
    grid, vals = _modulus_curve(p)
    if eps < grid[0]:
        s = max(2.0, p)
        return 0.5 * float(vals[0]) * (eps / float(grid[0])) ** s
    i = int(np.searchsorted(grid, eps, side="right")) - 1
    return float(vals[i])


def linear_modulus_bound(space) -> Callable[[float], float]:
    """A certified linear-in-r lower bound eps -> delta(eps) for the modulus
    of convexity of a supported target space."""
    if isinstance(space, (Euclidean, MetricTree)):
        return hilbert_modulus  # CAT(0) targets satisfy the Hilbert modulus
    if isinstance(space, LpVector):
        p = space.p
        if p >= 2.0:
            def hanner(eps: float) -> float:
                if eps <= 0.0:
                    return 0.0
                e = min(eps, 2.0)
                return 1.0 - (1.0 - (e / 2.0) ** p) ** (1.0 / p)
            return hanner
        def two_uniform(eps: float) -> float:
            if eps <= 0.0:
                return 0.0
            e = min(eps, 2.0)
            return (p - 1.0) * e * e / 8.0
        return two_uniform
    if isinstance(space, Product) and _is_cat0(space):
        return hilbert_modulus
    raise DomainError(f"no built-in modulus bound for {space!r}; supply delta explicitly")


def _is_cat0(space) -> bool:
    if isinstance(space, (Euclidean, MetricTree)):
        return True
    if isinstance(space, Product) and space.q == 2.0:
        return all(_is_cat0(f) for f in space.factors)
    return False


# ---------------------------------------------------------------------------
# Uniform convexity witness
# ---------------------------------------------------------------------------


@dataclass
class UCWitnessReport:
    eps: float
    tau: float
    bound: float
    rho_mid: float
    slack: float
    ok: bool
    small_modulus_regime: bool


def uc_witness_check(
    p: float,
    delta: Callable[[float], float],
    psi: EquivariantMap,
    phi1: EquivariantMap,
    phi2: EquivariantMap,
    r: float,
) -> UCWitnessReport:
    """Certify the uniform-convexity inequality of the map space on a triple.

    Preconditions: rho(phi_i, psi) <= r and delta is a linear modulus lower
    bound for the target.  Computes eps = rho(phi1, phi2) / r and checks

        rho(midpoint(phi1, phi2), psi) <= r * (1 - tau(eps)),
        tau(eps) = beta_p(delta(eps/4)^4).

    The certified rate is only meaningful when delta(eps/4) is small next to
    eps; ``small_modulus_regime`` records that side condition (reported, never
    failed on).
    """
    if r <= 0.0:
        raise DomainError("radius r must be positive")
    d1 = map_distance(p, phi1, psi)
    d2 = map_distance(p, phi2, psi)
    if d1 > r * (1.0 + 1e-12) or d2 > r * (1.0 + 1e-12):
        raise DomainError("precondition rho(phi_i, psi) <= r violated")
    eps = map_distance(p, phi1, phi2) / r
    d4 = float(delta(eps / 4.0))
    tau = banach_lp_modulus(p, d4 ** 4) if eps > 0.0 else 0.0
    bound = r * (1.0 - tau)
    rho_mid = map_distance(p, map_midpoint(phi1, phi2), psi)
    slack = bound - rho_mid
    regime = (
        2.0 * d4 ** 2 + d4 ** 4 <= eps * (1.0 - 2.0 ** (-p)) ** (1.0 / p) + 1e-15
        and (1.0 - d4 ** 2) ** (1.0 / p) <= 1.0 - d4 ** 4 + 1e-15
    )
    return UCWitnessReport(eps, tau, bound, rho_mid, slack, slack >= -1e-12 * r, regime)


# ---------------------------------------------------------------------------
# Scalar fields and the Mazur map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """A real value per cell, tagged with its integrability exponent."""

    model: MeasureModel
    values: tuple
    p: float

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.model.cells):
            raise ValidationError("one value per cell required")
        if any(not math.isfinite(v) for v in values):
            raise ValidationError("field values must be finite")
        if not (1.0 < self.p < math.inf):
            raise ValidationError("exponent p must lie in (1, inf)")


def scalar_norm(f: ScalarField) -> float:
    return math.fsum(
        w * abs(v) ** f.p for w, v in zip(f.model.weights, f.values)
    ) ** (1.0 / f.p)


def scalar_distance(f: ScalarField, g: ScalarField) -> float:
    if f.model != g.model or f.p != g.p:
        raise SpaceMismatchError("fields live in different spaces")
    return math.fsum(
        w * abs(a - b) ** f.p for w, a, b in zip(f.model.weights, f.values, g.values)
    ) ** (1.0 / f.p)


def mazur_map(f: ScalarField, p: float, q: float) -> ScalarField:
    """Cellwise |f|^(p/q) * sign(f), re-tagged from exponent p to q.

    Preserves the unit sphere: the q-norm of the image is |f|_p^(p/q).
    """
    if f.p != p:
        raise DomainError(f"field has exponent {f.p}, not {p}")
    if not (1.0 < q < math.inf):
        raise DomainError("exponent q must lie in (1, inf)")
    a = p / q
    return ScalarField(
        f.model, tuple(math.copysign(abs(v) ** a, v) if v != 0.0 else 0.0 for v in f.values), q
    )


def permute_cells(f: ScalarField, perm: Sequence[int]) -> ScalarField:
    """The field f o pi for a cell permutation pi (values[i] = f[perm[i]])."""
    if sorted(perm) != list(range(len(f.values))):
        raise DomainError("perm is not a permutation of the cells")
    return ScalarField(f.model, tuple(f.values[j] for j in perm), f.p)
