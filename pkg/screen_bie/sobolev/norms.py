"""
Sobolev norms of discrete densities on a screen.

The H^s(R^2) norm is evaluated from its Fourier definition

    ||u||_s^2 = int (1 + |xi|^2)^s |u^(xi)|^2 dxi,   u^(xi) = (2 pi)^-1 int e^{-i xi.x} u(x) dx,

with the transform of every element computed in closed form, so there is no
sampling grid in x. Each element carries a linear function (constant for P0),
and its transform is reduced to edge integrals:

    int_T u e^{-i xi.x} = (i/|xi|^2) [ sum_edges (xi.n L) int_0^1 u e^{-i xi.x} dt - (xi.grad u) int_T e^{-i xi.x} ].

The xi-integral runs on a polar grid: composite Gauss-Legendre on
logarithmically graded radial panels, and the periodic trapezoid rule in
angle with enough nodes to resolve the support radius.
"""
import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from she_logging import logger

from screen_bie.bie.quadrature import barycentric, gauss_unit, triangle_rule
from screen_bie.discretisation.spaces import FunctionSpace, SpaceKind
from screen_bie.helpers.errors import DomainError, TruncationWarning

# Below this value of |xi| * element diameter the closed form loses digits and
# a 3 x 3 Gauss rule is used instead.
SMALL_PHASE = 0.05
SERIES_CUTOFF = 0.5
SERIES_TERMS = 20
# Complex entries per (xi, element) batch.
BATCH_ENTRIES = 1_000_000
MIN_PANEL_POINTS = 8
TAIL_WARNING_FRACTION = 0.01


@dataclass(frozen=True)
class HsNormSpec:
    s: float = -0.5
    radius: float = 200.0
    n_radial: int = 256
    n_angular: int = 64

    def __post_init__(self) -> None:
        if not -1.0 <= self.s <= 1.0:
            raise DomainError(f"Sobolev order must lie in [-1, 1], got {self.s}")
        if self.radius < 10:
            raise DomainError(f"Truncation radius must be at least 10, got {self.radius}")
        if self.n_radial < 1 or self.n_angular < 4:
            raise DomainError("Quadrature counts are too small")


@dataclass(frozen=True)
class HsNormResult:
    value: float
    tail_bound: float
    extrapolated: float
    s: float
    radius: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "s": self.s,
            "radius": self.radius,
            "value": self.value,
            "tail_bound": self.tail_bound if math.isfinite(self.tail_bound) else None,
            "extrapolated": self.extrapolated
            if math.isfinite(self.extrapolated)
            else None,
        }


def edge_moments(beta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """g0 = int_0^1 e^{-i beta t} dt and g1 = int_0^1 t e^{-i beta t} dt."""
    beta = np.asarray(beta, dtype=float)
    small = np.abs(beta) < SERIES_CUTOFF
    safe = np.where(small, 1.0, beta)
    phase = np.exp(-1j * safe)
    g0 = (1 - phase) / (1j * safe)
    g1 = (g0 - phase) / (1j * safe)
    if np.any(small):
        z = -1j * beta[small]
        term = np.ones_like(z)
        s0 = np.zeros_like(z)
        s1 = np.zeros_like(z)
        for m in range(SERIES_TERMS):
            s0 += term / (m + 1)
            s1 += term / (m + 2)
            term = term * z / (m + 1)
        g0 = g0.astype(complex)
        g1 = g1.astype(complex)
        g0[small] = s0
        g1[small] = s1
    return g0, g1


def _closed_form(
    triangles: np.ndarray, values: np.ndarray, grad_u: np.ndarray, xi: np.ndarray
) -> np.ndarray:
    q2 = np.sum(xi**2, axis=1)[:, None]
    edge_sum = np.zeros((xi.shape[0], triangles.shape[0]), dtype=complex)
    plain_sum = np.zeros_like(edge_sum)
    for a in range(3):
        b = (a + 1) % 3
        start = triangles[:, a]
        edge = triangles[:, b] - start
        scaled_normal = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
        flux = xi @ scaled_normal.T
        phase = np.exp(-1j * (xi @ start.T))
        g0, g1 = edge_moments(xi @ edge.T)
        weight = flux * phase
        edge_sum += weight * (values[None, :, a] * (g0 - g1) + values[None, :, b] * g1)
        plain_sum += weight * g0
    plain = 1j / q2 * plain_sum
    return 1j / q2 * (edge_sum - (xi @ grad_u.T) * plain)


def _quadrature_form(
    triangles: np.ndarray, values: np.ndarray, areas: np.ndarray, xi: np.ndarray
) -> np.ndarray:
    points, weights = triangle_rule(3)
    bary = barycentric(points)
    physical = np.einsum("na,mad->mnd", bary, triangles)
    u = values @ bary.T
    phase = np.exp(-1j * np.einsum("kd,mnd->kmn", xi, physical))
    return np.einsum("kmn,mn,n->km", phase, u, weights) * (2 * areas)[None, :]


def fourier_transform(
    triangles: np.ndarray, values: np.ndarray, grads: np.ndarray, xi: np.ndarray
) -> np.ndarray:
    """
    Unitary Fourier transform at the points xi (N, 2) of the piecewise linear
    function with vertex values `values` (M, 3) on `triangles` (M, 3, 2).
    """
    e1 = triangles[:, 1] - triangles[:, 0]
    e2 = triangles[:, 2] - triangles[:, 0]
    areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    diameters = np.max(
        np.linalg.norm(triangles - np.roll(triangles, 1, axis=1), axis=2), axis=1
    )
    grad_u = np.einsum("ma,mad->md", values, grads)

    result = np.zeros(xi.shape[0], dtype=complex)
    batch = max(1, BATCH_ENTRIES // max(1, triangles.shape[0]))
    for start in range(0, xi.shape[0], batch):
        chunk = xi[start : start + batch]
        size = np.linalg.norm(chunk, axis=1)
        small = size[:, None] * diameters[None, :] < SMALL_PHASE
        with np.errstate(divide="ignore", invalid="ignore"):
            per_element = _closed_form(triangles, values, grad_u, chunk)
        if np.any(small):
            rows, cols = np.nonzero(small)
            for element in np.unique(cols):
                hit = rows[cols == element]
                per_element[hit, element] = _quadrature_form(
                    triangles[element : element + 1],
                    values[element : element + 1],
                    areas[element : element + 1],
                    chunk[hit],
                )[:, 0]
        result[start : start + batch] = per_element.sum(axis=1)
    return result / (2 * np.pi)


def radial_rule(radius: float, support: float, n_radial: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite Gauss-Legendre nodes on [0, radius]: panels doubling in width
    from 0.5, each split so that no panel is wider than pi / support.
    """
    breaks = [0.0, min(0.5, radius)]
    while breaks[-1] < radius:
        breaks.append(min(2 * breaks[-1], radius))
    widest = math.pi / max(support, 1e-12)
    panels = []
    for left, right in zip(breaks[:-1], breaks[1:]):
        pieces = max(1, math.ceil((right - left) / widest))
        cuts = np.linspace(left, right, pieces + 1)
        panels.extend(zip(cuts[:-1], cuts[1:]))
    per_panel = max(MIN_PANEL_POINTS, math.ceil(n_radial / len(panels)))
    t, w = gauss_unit(per_panel)
    nodes = np.concatenate([a + (b - a) * t for a, b in panels])
    weights = np.concatenate([(b - a) * w for a, b in panels])
    return nodes, weights


def angular_count(rho: float, support: float, n_angular: int) -> int:
    return max(n_angular, math.ceil(2.5 * rho * support) + 8)


def decay_exponent(kind: SpaceKind, s: float) -> float:
    """
    Power p with rho * int |u^|^2 (1 + rho^2)^s dtheta ~ C rho^-p: densities
    with jumps (P0) give p = 2 - 2s, continuous ones (P1) p = 4 - 2s.
    """
    return (2.0 if kind is SpaceKind.P0_JUMP else 4.0) - 2 * s


def hs_norm(
    space: FunctionSpace, coefficients: np.ndarray, spec: HsNormSpec = HsNormSpec()
) -> HsNormResult:
    values = space.element_values(coefficients)
    if not np.any(values):
        return HsNormResult(0.0, 0.0, 0.0, spec.s, spec.radius)

    mesh = space.mesh
    vertices = mesh.vertices
    centre = (vertices.min(axis=0) + vertices.max(axis=0)) / 2
    triangles = mesh.triangles - centre
    support = float(np.max(np.linalg.norm(triangles.reshape(-1, 2), axis=1)))
    grads = mesh.barycentric_gradients

    nodes, weights = radial_rule(spec.radius, support, spec.n_radial)
    shells = np.zeros(nodes.shape[0])
    for index, rho in enumerate(nodes):
        n_theta = angular_count(rho, support, spec.n_angular)
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        xi = rho * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        transform = fourier_transform(triangles, values, grads, xi)
        shells[index] = (
            rho * (1 + rho**2) ** spec.s * np.sum(np.abs(transform) ** 2) * 2 * np.pi / n_theta
        )

    squared = float(np.dot(weights, shells))

    exponent = decay_exponent(space.kind, spec.s)
    decade = nodes >= spec.radius / 10
    amplitude = float(
        np.dot(weights[decade], shells[decade] * nodes[decade] ** exponent)
        / np.sum(weights[decade])
    )
    if exponent > 1:
        tail = amplitude * spec.radius ** (1 - exponent) / (exponent - 1)
    else:
        tail = math.inf

    if tail > TAIL_WARNING_FRACTION * squared:
        warnings.warn(
            f"Fourier tail beyond |xi| = {spec.radius} is {tail:.3g}, "
            f"more than 1% of the truncated norm squared {squared:.3g}",
            TruncationWarning,
        )
    logger.debug(
        "Evaluated Sobolev norm",
        extra={"s": spec.s, "nodes": int(nodes.size), "squared": squared, "tail": tail},
    )
    return HsNormResult(
        value=math.sqrt(squared),
        tail_bound=tail,
        extrapolated=math.sqrt(squared + tail),
        s=spec.s,
        radius=spec.radius,
    )


def energy_norm(matrix: np.ndarray, coefficients: np.ndarray) -> float:
    """sqrt|c^H A c|, the norm induced by the sesquilinear form."""
    coefficients = np.asarray(coefficients)
    if matrix.shape[0] != coefficients.shape[0]:
        raise DomainError(
            f"Coefficient vector of length {coefficients.shape[0]} does not match "
            f"a {matrix.shape[0]}-dof system"
        )
    return float(np.sqrt(abs(np.vdot(coefficients, matrix @ coefficients))))
