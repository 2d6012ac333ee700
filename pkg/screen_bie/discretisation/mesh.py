"""
Uniform triangulation of panel sets.

Each panel is split into base triangles (two for a square, one for a
triangle) and every base triangle ABC is refined as the lattice
A + (i/n)(B - A) + (l/n)(C - A). Vertices are merged across panels by their
exact rational key, so panels that touch at a point share that vertex.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from she_logging import logger

from screen_bie.geometry.prefractals import ExactPoint, Lattice, PanelSet, Square
from screen_bie.helpers.errors import CapacityError, DomainError

DEFAULT_ELEMENT_CAP = 20_000


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    elements: np.ndarray
    element_panel: np.ndarray
    boundary: np.ndarray
    keys: Tuple[ExactPoint, ...]
    subdivisions: int
    lattice: Lattice = Lattice.CARTESIAN
    key_index: Dict[ExactPoint, int] = field(default_factory=dict, repr=False)

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.elements.shape[0])

    @cached_property
    def triangles(self) -> np.ndarray:
        """Vertex coordinates per element, shape (M, 3, 2)."""
        return self.vertices[self.elements]

    @cached_property
    def areas(self) -> np.ndarray:
        t = self.triangles
        e1 = t[:, 1] - t[:, 0]
        e2 = t[:, 2] - t[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.triangles.mean(axis=1)

    @cached_property
    def diameters(self) -> np.ndarray:
        t = self.triangles
        edges = np.stack([t[:, 1] - t[:, 0], t[:, 2] - t[:, 1], t[:, 0] - t[:, 2]], 1)
        return np.linalg.norm(edges, axis=2).max(axis=1)

    @property
    def h(self) -> float:
        return float(self.diameters.max()) if self.n_elements else 0.0

    @cached_property
    def barycentric_gradients(self) -> np.ndarray:
        """Gradients of the three barycentric coordinates per element, shape (M, 3, 2)."""
        t = self.triangles
        jac = np.stack([t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]], axis=1)
        inv = np.linalg.inv(jac)
        grad1 = inv[:, :, 0]
        grad2 = inv[:, :, 1]
        return np.stack([-grad1 - grad2, grad1, grad2], axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertices": self.vertices.tolist(),
            "triangles": self.elements.tolist(),
            "panel": self.element_panel.tolist(),
            "h": self.h,
        }


def _projected_elements(screen: PanelSet, n: int) -> int:
    return sum(2 * n * n if isinstance(p, Square) else n * n for p in screen.panels)


def _lattice_point(
    a: ExactPoint, b: ExactPoint, c: ExactPoint, i: int, l: int, n: int
) -> ExactPoint:
    s = Fraction(i, n)
    t = Fraction(l, n)
    return (
        a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
        a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
    )


def mesh_panels(
    screen: PanelSet,
    refine: int,
    element_cap: int = DEFAULT_ELEMENT_CAP,
    subdivisions: Optional[int] = None,
) -> Mesh:
    """
    Triangulate every panel with n = 2**refine lattice subdivisions per base
    triangle edge (or exactly `subdivisions` when given, used for superspace
    meshes aligned with a non-dyadic ratio).
    """
    if refine < 0:
        raise DomainError(f"refine must be nonnegative, got {refine}")
    if not screen.panels:
        raise DomainError("Cannot mesh an empty screen")
    n = subdivisions if subdivisions is not None else 2**refine
    projected = _projected_elements(screen, n)
    if projected > element_cap:
        raise CapacityError(
            f"Mesh would have {projected} elements, above the cap of {element_cap}"
        )

    key_index: Dict[ExactPoint, int] = {}
    keys: List[ExactPoint] = []
    boundary: List[bool] = []
    elements: List[Tuple[int, int, int]] = []
    element_panel: List[int] = []

    def vertex(key: ExactPoint, on_boundary: bool) -> int:
        index = key_index.get(key)
        if index is None:
            index = len(keys)
            key_index[key] = index
            keys.append(key)
            boundary.append(on_boundary)
        elif on_boundary:
            boundary[index] = True
        return index

    for panel_index, panel in enumerate(screen.panels):
        for (a, b, c), (edge_ab, edge_bc, edge_ca) in panel.base_triangles():
            ids: Dict[Tuple[int, int], int] = {}
            for i in range(n + 1):
                for l in range(n + 1 - i):
                    on_boundary = (
                        (edge_ab and l == 0)
                        or (edge_ca and i == 0)
                        or (edge_bc and i + l == n)
                    )
                    ids[i, l] = vertex(_lattice_point(a, b, c, i, l, n), on_boundary)
            for i in range(n):
                for l in range(n - i):
                    elements.append((ids[i, l], ids[i + 1, l], ids[i, l + 1]))
                    element_panel.append(panel_index)
                    if i + l <= n - 2:
                        elements.append(
                            (ids[i + 1, l], ids[i + 1, l + 1], ids[i, l + 1])
                        )
                        element_panel.append(panel_index)

    exact = np.array([[float(x), float(y)] for x, y in keys])
    mesh = Mesh(
        vertices=screen.lattice.to_plane(exact),
        elements=np.array(elements, dtype=np.int64),
        element_panel=np.array(element_panel, dtype=np.int64),
        boundary=np.array(boundary, dtype=bool),
        keys=tuple(keys),
        subdivisions=n,
        lattice=screen.lattice,
        key_index=key_index,
    )
    logger.debug(
        "Meshed screen",
        extra={
            "panels": len(screen.panels),
            "elements": mesh.n_elements,
            "vertices": mesh.n_vertices,
            "h": mesh.h,
        },
    )
    return mesh
