from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.spatial import cKDTree
from she_logging import logger

from screen_bie.discretisation.mesh import Mesh
from screen_bie.geometry.prefractals import PanelSet
from screen_bie.helpers.errors import DomainError, EmptySpaceError

LOCATE_TOLERANCE = 1e-10


class SpaceKind(str, Enum):
    P0_JUMP = "P0_Jump"
    P1_ZERO_TRACE = "P1_ZeroTrace"


@dataclass(frozen=True, eq=False)
class FunctionSpace:
    kind: SpaceKind
    mesh: Mesh
    screen: PanelSet
    # P1: mesh vertex index of each dof, and dof index of each vertex (-1 if none).
    dof_vertices: np.ndarray
    vertex_dofs: np.ndarray

    @property
    def dof_count(self) -> int:
        if self.kind is SpaceKind.P0_JUMP:
            return self.mesh.n_elements
        return int(self.dof_vertices.shape[0])

    @property
    def dof_points(self) -> np.ndarray:
        """Geometric anchor of each dof: element centroid (P0) or vertex (P1)."""
        if self.kind is SpaceKind.P0_JUMP:
            return self.mesh.centroids
        return self.mesh.vertices[self.dof_vertices]

    def element_values(self, coefficients: np.ndarray) -> np.ndarray:
        """Values of the density at the three vertices of every element, shape (M, 3)."""
        coefficients = np.asarray(coefficients)
        if coefficients.shape != (self.dof_count,):
            raise DomainError(
                f"Expected {self.dof_count} coefficients, got {coefficients.shape}"
            )
        if self.kind is SpaceKind.P0_JUMP:
            return np.repeat(coefficients[:, None], 3, axis=1)
        padded = np.concatenate([coefficients, np.zeros(1, dtype=coefficients.dtype)])
        return padded[self.vertex_dofs[self.mesh.elements]]

    def mean_value(self, coefficients: np.ndarray) -> complex:
        """The pairing <1, u> = integral of the density over the screen."""
        values = self.element_values(coefficients)
        return complex(np.sum(self.mesh.areas * values.mean(axis=1)))


def build_space(mesh: Mesh, kind: SpaceKind, screen: PanelSet) -> FunctionSpace:
    kind = SpaceKind(kind)
    if kind is SpaceKind.P0_JUMP:
        dof_vertices = np.zeros(0, dtype=np.int64)
        vertex_dofs = np.full(mesh.n_vertices, -1, dtype=np.int64)
    else:
        dof_vertices = np.flatnonzero(~mesh.boundary)
        if dof_vertices.size == 0:
            raise EmptySpaceError(
                "No vertex lies strictly inside a panel; increase refine"
            )
        vertex_dofs = np.full(mesh.n_vertices, -1, dtype=np.int64)
        vertex_dofs[dof_vertices] = np.arange(dof_vertices.size)

    space = FunctionSpace(
        kind=kind,
        mesh=mesh,
        screen=screen,
        dof_vertices=dof_vertices,
        vertex_dofs=vertex_dofs,
    )
    logger.debug(
        "Built function space", extra={"kind": kind.value, "dofs": space.dof_count}
    )
    return space


def locate(mesh: Mesh, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Find an element containing each point. Returns the element index (-1 for
    points outside the mesh) and the barycentric coordinates in that element.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    found = np.full(points.shape[0], -1, dtype=np.int64)
    bary = np.zeros((points.shape[0], 3))
    if points.shape[0] == 0:
        return found, bary

    tree = cKDTree(mesh.centroids)
    radius = mesh.h * (1 + 1e-9)
    candidates = tree.query_ball_point(points, r=radius)
    grads = mesh.barycentric_gradients
    origin = mesh.triangles[:, 0]
    for index, (point, elements) in enumerate(zip(points, candidates)):
        if not elements:
            continue
        elements = np.sort(np.asarray(elements, dtype=np.int64))
        offset = point - origin[elements]
        lam1 = np.einsum("ed,ed->e", grads[elements, 1], offset)
        lam2 = np.einsum("ed,ed->e", grads[elements, 2], offset)
        lam = np.stack([1 - lam1 - lam2, lam1, lam2], axis=1)
        inside = np.flatnonzero(lam.min(axis=1) >= -LOCATE_TOLERANCE)
        if inside.size:
            found[index] = elements[inside[0]]
            bary[index] = lam[inside[0]]
    return found, bary


def evaluate(space: FunctionSpace, coefficients: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Point values of a discrete density, extended by zero off the screen."""
    values = space.element_values(coefficients)
    elements, bary = locate(space.mesh, points)
    result = np.zeros(elements.shape[0], dtype=values.dtype)
    inside = elements >= 0
    result[inside] = np.einsum("pa,pa->p", values[elements[inside]], bary[inside])
    return result


def prolongation(coarse: FunctionSpace, fine: FunctionSpace) -> csr_matrix:
    """
    Sparse matrix P of shape (fine dofs, coarse dofs) with every coarse basis
    function equal to the P-combination of fine basis functions. Built by
    point location of fine dof anchors in the coarse mesh; anchors outside
    the coarse screen give zero rows.
    """
    if coarse.kind is not fine.kind:
        raise DomainError("Prolongation needs two spaces of the same kind")

    elements, bary = locate(coarse.mesh, fine.dof_points)
    rows = []
    cols = []
    vals = []
    for fine_dof, (element, lam) in enumerate(zip(elements, bary)):
        if element < 0:
            continue
        if coarse.kind is SpaceKind.P0_JUMP:
            rows.append(fine_dof)
            cols.append(element)
            vals.append(1.0)
            continue
        for local, weight in enumerate(lam):
            coarse_dof = coarse.vertex_dofs[coarse.mesh.elements[element, local]]
            if coarse_dof >= 0 and abs(weight) > LOCATE_TOLERANCE:
                rows.append(fine_dof)
                cols.append(coarse_dof)
                vals.append(float(weight))
    return csr_matrix(
        (vals, (rows, cols)), shape=(fine.dof_count, coarse.dof_count), dtype=float
    )
