"""
Quadrature on the reference triangle K = {0 <= r2 <= r1 <= 1}.

A point of K is mapped to a physical triangle (P1, P2, P3) by
x = (1 - r1) P1 + (r1 - r2) P2 + r2 P3, so the barycentric coordinates of
the reference point are (1 - r1, r1 - r2, r2).

Separated pairs use tensor products of a collapsed Gauss-Jacobi x
Gauss-Legendre rule. Pairs sharing the whole element, an edge or a vertex
use the relative-coordinate (Sauter-Schwab) transformations of the unit
hypercube, whose Jacobians cancel the 1/r singularity.
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from screen_bie.bie.kernel import phi_of_distance
from screen_bie.helpers.errors import QuadratureFailure

# Quadrature points times pairs evaluated per numpy batch.
BATCH_POINTS = 2_000_000

PairRule = Tuple[np.ndarray, np.ndarray, np.ndarray]


class PairRelation(str, Enum):
    REGULAR = "regular"
    VERTEX = "vertex"
    EDGE = "edge"
    COINCIDENT = "coincident"


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss point counts per direction for each kind of element pair."""

    far_order: int = 5
    near_order: int = 8
    singular_order: int = 8
    near_ratio: float = 2.0
    tolerance: float = 1e-6

    def raised(self, increment: int) -> "QuadratureRule":
        return QuadratureRule(
            far_order=self.far_order + increment,
            near_order=self.near_order + increment,
            singular_order=self.singular_order + increment,
            near_ratio=self.near_ratio,
            tolerance=self.tolerance,
        )


@lru_cache(maxsize=None)
def gauss_unit(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = roots_legendre(n)
    return (x + 1) / 2, w / 2


@lru_cache(maxsize=None)
def triangle_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Collapsed n x n rule on K, exact for polynomials of degree 2n - 1.
    Weights sum to the area of K, 1/2.
    """
    x, w = roots_jacobi(n, 0, 1)
    u = (x + 1) / 2
    wu = w / 4
    v, wv = gauss_unit(n)
    r1 = np.repeat(u, n)
    r2 = r1 * np.tile(v, n)
    points = np.stack([r1, r2], axis=1)
    weights = np.outer(wu, wv).ravel()
    return points, weights


def triangle_areas(triangles: np.ndarray) -> np.ndarray:
    e1 = triangles[..., 1, :] - triangles[..., 0, :]
    e2 = triangles[..., 2, :] - triangles[..., 0, :]
    return 0.5 * np.abs(e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0])


def barycentric(points: np.ndarray) -> np.ndarray:
    r1 = points[..., 0]
    r2 = points[..., 1]
    return np.stack([1 - r1, r1 - r2, r2], axis=-1)


@lru_cache(maxsize=None)
def regular_rule(n: int) -> PairRule:
    points, weights = triangle_rule(n)
    m = points.shape[0]
    x = np.repeat(points, m, axis=0)
    y = np.tile(points, (m, 1))
    return x, y, np.outer(weights, weights).ravel()


def _hypercube(n: int) -> Tuple[np.ndarray, ...]:
    t, w = gauss_unit(n)
    grids = np.meshgrid(t, t, t, t, indexing="ij")
    weights = np.meshgrid(w, w, w, w, indexing="ij")
    xi, e1, e2, e3 = (g.ravel() for g in grids)
    weight = np.prod([g.ravel() for g in weights], axis=0)
    return xi, e1, e2, e3, weight


def _coincident_regions(
    xi: np.ndarray, e1: np.ndarray, e2: np.ndarray, e3: np.ndarray
) -> List[Tuple[np.ndarray, np.ndarray]]:
    a = np.stack([xi, xi * (1 - e1 + e1 * e2)], 1)
    b = np.stack([xi * (1 - e1 * e2 * e3), xi * (1 - e1)], 1)
    c = np.stack([xi, xi * e1 * (1 - e2 + e2 * e3)], 1)
    d = np.stack([xi * (1 - e1 * e2), xi * e1 * (1 - e2)], 1)
    e = np.stack([xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3)], 1)
    f = np.stack([xi, xi * e1 * (1 - e2)], 1)
    return [(a, b), (b, a), (c, d), (d, c), (e, f), (f, e)]


@lru_cache(maxsize=None)
def singular_rule(relation: PairRelation, n: int) -> PairRule:
    """
    Reference points (x, y) and weights for a touching pair. For EDGE the
    shared edge is P1P2 in both triangles, in the same order; for VERTEX the
    shared vertex is P1 in both. Weights integrate over K x K.
    """
    xi, e1, e2, e3, w = _hypercube(n)
    xs: List[np.ndarray] = []
    ys: List[np.ndarray] = []
    ws: List[np.ndarray] = []

    if relation is PairRelation.COINCIDENT:
        jac = w * xi**3 * e1**2 * e2
        for x, y in _coincident_regions(xi, e1, e2, e3):
            xs.append(x)
            ys.append(y)
            ws.append(jac)
    elif relation is PairRelation.EDGE:
        xs.append(np.stack([xi, xi * e1 * e3], 1))
        ys.append(np.stack([xi * (1 - e1 * e2), xi * e1 * (1 - e2)], 1))
        ws.append(w * xi**3 * e1**2)
        jac = w * xi**3 * e1**2 * e2
        regions = [
            (
                np.stack([xi, xi * e1], 1),
                np.stack([xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3)], 1),
            ),
            (
                np.stack([xi * (1 - e1 * e2), xi * e1 * (1 - e2)], 1),
                np.stack([xi, xi * e1 * e2 * e3], 1),
            ),
            (
                np.stack([xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3)], 1),
                np.stack([xi, xi * e1], 1),
            ),
            (
                np.stack([xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3)], 1),
                np.stack([xi, xi * e1 * e2], 1),
            ),
        ]
        for x, y in regions:
            xs.append(x)
            ys.append(y)
            ws.append(jac)
    elif relation is PairRelation.VERTEX:
        jac = w * xi**3 * e2
        a = np.stack([xi, xi * e1], 1)
        b = np.stack([xi * e2, xi * e2 * e3], 1)
        xs.extend([a, b])
        ys.extend([b, a])
        ws.extend([jac, jac])
    else:
        raise ValueError("Regular pairs have no singular rule")

    return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)


def integrate_pairs(
    tri_p: np.ndarray,
    tri_q: np.ndarray,
    rule: PairRule,
    k: complex,
    moments: bool = False,
    kernel: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    case: str = "regular",
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Integrate the kernel over a batch of triangle pairs, shapes (B, 3, 2).

    Returns I0[b] = int int Phi and, when `moments` is set, the (B, 3, 3)
    array I[b, a, c] = int int Phi lambda_a(x) lambda_c(y) in the vertex order
    the triangles were given in.
    """
    x_ref, y_ref, weights = rule
    bx = barycentric(x_ref)
    by = barycentric(y_ref)
    n_points = weights.shape[0]
    n_pairs = tri_p.shape[0]

    scale = 4.0 * triangle_areas(tri_p) * triangle_areas(tri_q)

    total = np.zeros(n_pairs, dtype=complex)
    moment = np.zeros((n_pairs, 3, 3), dtype=complex) if moments else None
    batch = max(1, BATCH_POINTS // n_points)
    for start in range(0, n_pairs, batch):
        sl = slice(start, start + batch)
        xp = np.einsum("na,bad->bnd", bx, tri_p[sl])
        yq = np.einsum("na,bad->bnd", by, tri_q[sl])
        r = np.sqrt(np.sum((xp - yq) ** 2, axis=-1))
        values = kernel(r) if kernel is not None else phi_of_distance(r, k)
        values = values * weights
        total[sl] = values.sum(axis=1) * scale[sl]
        if moment is not None:
            moment[sl] = np.einsum("bn,na,nc->bac", values, bx, by) * scale[sl, None, None]

    if not np.all(np.isfinite(total)):
        raise QuadratureFailure(case=case, error_estimate=float("inf"))
    return total, moment


def _shared_vertices(tp: np.ndarray, tq: np.ndarray) -> List[Tuple[int, int]]:
    return [(a, c) for a in range(3) for c in range(3) if np.array_equal(tp[a], tq[c])]


def classify_pair(tp: np.ndarray, tq: np.ndarray, rule: QuadratureRule) -> PairRelation:
    shared = len(_shared_vertices(tp, tq))
    if shared >= 3:
        return PairRelation.COINCIDENT
    if shared == 2:
        return PairRelation.EDGE
    if shared == 1:
        return PairRelation.VERTEX
    return PairRelation.REGULAR


def touching_permutations(
    shared: List[Tuple[int, int]]
) -> Tuple[List[int], List[int]]:
    """
    Vertex orders that put the shared vertices first, in the same order in
    both triangles, as the singular rules expect.
    """
    if len(shared) == 3:
        return [0, 1, 2], [shared[0][1], shared[1][1], shared[2][1]]
    if len(shared) == 2:
        (a0, c0), (a1, c1) = shared
        return [a0, a1, 3 - a0 - a1], [c0, c1, 3 - c0 - c1]
    (a0, c0) = shared[0]
    return [a0, (a0 + 1) % 3, (a0 + 2) % 3], [c0, (c0 + 1) % 3, (c0 + 2) % 3]


def regular_order(
    centroid_distance: np.ndarray, diameter: np.ndarray, rule: QuadratureRule
) -> np.ndarray:
    """Gauss order per separated pair: far pairs get the cheaper rule."""
    far = centroid_distance > rule.near_ratio * diameter
    return np.where(far, rule.far_order, rule.near_order)


def panel_pair_integral(
    tp: np.ndarray,
    tq: np.ndarray,
    k: complex,
    rule: QuadratureRule = QuadratureRule(),
    moments: bool = False,
) -> Tuple[complex, Optional[np.ndarray]]:
    """
    Integral of the kernel over one pair of physical triangles. The pair is
    put in a canonical order first, so swapping the arguments returns the
    same value (and the transposed moment matrix).
    """
    tp = np.asarray(tp, dtype=float)
    tq = np.asarray(tq, dtype=float)
    swapped = tuple(tq.ravel()) < tuple(tp.ravel())
    if swapped:
        tp, tq = tq, tp

    shared = _shared_vertices(tp, tq)
    relation = classify_pair(tp, tq, rule)
    if relation is PairRelation.REGULAR:
        distance = float(np.linalg.norm(tp.mean(0) - tq.mean(0)))
        diameter = max(
            float(np.max(np.linalg.norm(tp - np.roll(tp, 1, axis=0), axis=1))),
            float(np.max(np.linalg.norm(tq - np.roll(tq, 1, axis=0), axis=1))),
        )
        order = int(regular_order(np.array([distance]), np.array([diameter]), rule)[0])
        total, moment = integrate_pairs(
            tp[None], tq[None], regular_rule(order), k, moments, case=relation.value
        )
    else:
        perm_p, perm_q = touching_permutations(shared)
        sp = tp[perm_p][None]
        sq = tq[perm_q][None]
        total, moment = integrate_pairs(
            sp, sq, singular_rule(relation, rule.singular_order), k, moments,
            case=relation.value,
        )
        check, _ = integrate_pairs(
            sp, sq, singular_rule(relation, rule.singular_order + 2), k,
            case=relation.value,
        )
        estimate = float(abs(check[0] - total[0]) / max(abs(check[0]), 1e-300))
        if estimate > rule.tolerance:
            raise QuadratureFailure(case=relation.value, error_estimate=estimate)
        if moment is not None:
            restored = np.zeros_like(moment)
            restored[0][np.ix_(perm_p, perm_q)] = moment[0]
            moment = restored

    value = complex(total[0])
    if moment is None:
        return value, None
    matrix = moment[0]
    return value, (matrix.T if swapped else matrix)
