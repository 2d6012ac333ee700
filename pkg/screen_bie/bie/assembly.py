"""
Dense Galerkin assembly of the screen boundary integral operators.

The single-layer form a_D(u, v) = <S u, v> is discretised on P0 densities;
the hypersingular form a_N(u, v) = <T u, v> on P1 densities vanishing on the
screen boundary, in the integration-by-parts form

    int int Phi(x, y) [grad u(y) . grad v(x) - k^2 u(y) v(x)] ds(y) ds(x),

which only involves weakly singular integrals. Matrices are indexed
A[p, q] = a(phi_q, phi_p) and are complex symmetric.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from she_logging import logger

from screen_bie.bie.data import BoundaryData
from screen_bie.bie.kernel import REFERENCE_WAVENUMBER, Wavenumber, WavenumberLike, as_wavenumber
from screen_bie.bie.quadrature import (
    PairRelation,
    QuadratureRule,
    barycentric,
    integrate_pairs,
    regular_order,
    regular_rule,
    singular_rule,
    touching_permutations,
    triangle_rule,
)
from screen_bie.discretisation.mesh import Mesh
from screen_bie.discretisation.spaces import FunctionSpace, SpaceKind, locate
from screen_bie.helpers.errors import DomainError, SpaceKindError
from screen_bie.variational.diagnostics import discrete_constants

# Element pairs handled per outer chunk.
PAIR_CHUNK = 200_000
# Points per direction of the load-vector rule (exact to degree 11).
RHS_ORDER = 6


class ProblemKind(str, Enum):
    DIRICHLET = "DirichletJump"
    NEUMANN = "NeumannJump"


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    space: FunctionSpace
    wavenumber: Wavenumber
    problem: ProblemKind
    continuity_est: float
    coercivity_est: float
    norm_matrix: np.ndarray
    rule: QuadratureRule

    @property
    def dof_count(self) -> int:
        return int(self.rhs.shape[0])


def problem_for(space: FunctionSpace) -> ProblemKind:
    return ProblemKind.DIRICHLET if space.kind is SpaceKind.P0_JUMP else ProblemKind.NEUMANN


def _touching_order(eq: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    perm_p = np.empty((eq.shape[0], 3), dtype=np.int64)
    perm_q = np.empty((eq.shape[0], 3), dtype=np.int64)
    for index, matches in enumerate(eq):
        shared = [(int(a), int(c)) for a, c in np.argwhere(matches)]
        perm_p[index], perm_q[index] = touching_permutations(shared)
    return perm_p, perm_q


def element_pair_integrals(
    mesh: Mesh,
    p: np.ndarray,
    q: np.ndarray,
    k: complex,
    rule: QuadratureRule,
    moments: bool = False,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Kernel integrals over the element pairs (p[i], q[i]) of one mesh. The
    pair relation is read off shared vertex indices, which the mesher merges
    by exact key.
    """
    n_pairs = p.shape[0]
    total = np.zeros(n_pairs, dtype=complex)
    moment = np.zeros((n_pairs, 3, 3), dtype=complex) if moments else None
    triangles = mesh.triangles
    counts = {relation.value: 0 for relation in PairRelation}

    for start in range(0, n_pairs, PAIR_CHUNK):
        chunk = np.arange(start, min(start + PAIR_CHUNK, n_pairs))
        cp = p[chunk]
        cq = q[chunk]
        eq = mesh.elements[cp][:, :, None] == mesh.elements[cq][:, None, :]
        shared = eq.sum(axis=(1, 2))

        regular = np.flatnonzero(shared == 0)
        if regular.size:
            distance = np.linalg.norm(
                mesh.centroids[cp[regular]] - mesh.centroids[cq[regular]], axis=1
            )
            diameter = np.maximum(mesh.diameters[cp[regular]], mesh.diameters[cq[regular]])
            orders = regular_order(distance, diameter, rule)
            for order in np.unique(orders):
                sel = regular[orders == order]
                values, local = integrate_pairs(
                    triangles[cp[sel]],
                    triangles[cq[sel]],
                    regular_rule(int(order)),
                    k,
                    moments,
                    case=PairRelation.REGULAR.value,
                )
                total[chunk[sel]] = values
                if moment is not None:
                    moment[chunk[sel]] = local
            counts[PairRelation.REGULAR.value] += int(regular.size)

        for relation, n_shared in (
            (PairRelation.VERTEX, 1),
            (PairRelation.EDGE, 2),
            (PairRelation.COINCIDENT, 3),
        ):
            sel = np.flatnonzero(shared == n_shared)
            if not sel.size:
                continue
            perm_p, perm_q = _touching_order(eq[sel])
            rows = np.arange(sel.size)[:, None]
            tp = triangles[cp[sel]][rows, perm_p]
            tq = triangles[cq[sel]][rows, perm_q]
            values, local = integrate_pairs(
                tp,
                tq,
                singular_rule(relation, rule.singular_order),
                k,
                moments,
                case=relation.value,
            )
            total[chunk[sel]] = values
            if moment is not None and local is not None:
                restored = np.zeros_like(local)
                restored[rows[:, :, None], perm_p[:, :, None], perm_q[:, None, :]] = local
                moment[chunk[sel]] = restored
            counts[relation.value] += int(sel.size)

    logger.debug("Integrated element pairs", extra={"pairs": counts})
    return total, moment


def assemble_single_layer(
    space: FunctionSpace, k: WavenumberLike, rule: QuadratureRule = QuadratureRule()
) -> np.ndarray:
    if space.kind is not SpaceKind.P0_JUMP:
        raise SpaceKindError("The single-layer form is assembled on P0_Jump spaces")
    kk = as_wavenumber(k).k
    n = space.mesh.n_elements
    p, q = np.triu_indices(n)
    values, _ = element_pair_integrals(space.mesh, p, q, kk, rule)
    matrix = np.zeros((n, n), dtype=complex)
    matrix[p, q] = values
    matrix[q, p] = values
    return matrix


def assemble_hypersingular(
    space: FunctionSpace, k: WavenumberLike, rule: QuadratureRule = QuadratureRule()
) -> np.ndarray:
    if space.kind is not SpaceKind.P1_ZERO_TRACE:
        raise SpaceKindError("The hypersingular form is assembled on P1_ZeroTrace spaces")
    kk = as_wavenumber(k).k
    mesh = space.mesh
    element_dofs = space.vertex_dofs[mesh.elements]
    active = np.flatnonzero((element_dofs >= 0).any(axis=1))
    ia, ib = np.triu_indices(active.size)
    p = active[ia]
    q = active[ib]

    single, moment = element_pair_integrals(mesh, p, q, kk, rule, moments=True)
    assert moment is not None
    grads = mesh.barycentric_gradients
    curls = np.einsum("bad,bcd->bac", grads[p], grads[q])
    local = curls * single[:, None, None] - kk**2 * moment

    rows = np.broadcast_to(element_dofs[p][:, :, None], local.shape)
    cols = np.broadcast_to(element_dofs[q][:, None, :], local.shape)
    keep = (rows >= 0) & (cols >= 0)
    mirror = keep & (p != q)[:, None, None]
    n = space.dof_count
    data = np.concatenate([local[keep], local[mirror]])
    r = np.concatenate([rows[keep], cols[mirror]])
    c = np.concatenate([cols[keep], rows[mirror]])
    real = coo_matrix((data.real, (r, c)), shape=(n, n)).toarray()
    imag = coo_matrix((data.imag, (r, c)), shape=(n, n)).toarray()
    matrix = real + 1j * imag
    return (matrix + matrix.T) / 2


def assemble_operator(
    space: FunctionSpace, k: WavenumberLike, rule: QuadratureRule = QuadratureRule()
) -> np.ndarray:
    if space.kind is SpaceKind.P0_JUMP:
        return assemble_single_layer(space, k, rule)
    return assemble_hypersingular(space, k, rule)


def assemble_rhs(space: FunctionSpace, data: BoundaryData, k: WavenumberLike) -> np.ndarray:
    """
    Load vector <f, psi_p> for the Dirichlet problem on P0, and -<g, psi_p>
    for the Neumann problem on P1.
    """
    kk = as_wavenumber(k).k
    mesh = space.mesh
    points, weights = triangle_rule(RHS_ORDER)
    bary = barycentric(points)
    physical = np.einsum("na,mad->mnd", bary, mesh.triangles)
    values = data(physical, kk) * weights * (2 * mesh.areas)[:, None]

    if space.kind is SpaceKind.P0_JUMP:
        return values.sum(axis=1).astype(complex)

    local = np.einsum("mn,na->ma", values, bary)
    dofs = space.vertex_dofs[mesh.elements]
    keep = dofs >= 0
    n = space.dof_count
    rhs = np.bincount(dofs[keep], weights=local[keep].real, minlength=n) + 1j * np.bincount(
        dofs[keep], weights=local[keep].imag, minlength=n
    )
    return -rhs


def assemble_system(
    space: FunctionSpace,
    data: BoundaryData,
    k: WavenumberLike,
    rule: QuadratureRule = QuadratureRule(),
    with_constants: bool = True,
) -> GalerkinSystem:
    wavenumber = as_wavenumber(k)
    matrix = assemble_operator(space, wavenumber, rule)
    if wavenumber.k == REFERENCE_WAVENUMBER.k:
        norm_matrix = matrix
    else:
        norm_matrix = assemble_operator(space, REFERENCE_WAVENUMBER, rule)
    rhs = assemble_rhs(space, data, wavenumber)
    if with_constants:
        continuity, coercivity = discrete_constants(matrix, norm_matrix)
    else:
        continuity, coercivity = float("nan"), float("nan")
    logger.info(
        "Assembled Galerkin system",
        extra={
            "space": space.kind.value,
            "dofs": space.dof_count,
            "k": str(wavenumber.k),
            "continuity": continuity,
            "coercivity": coercivity,
        },
    )
    return GalerkinSystem(
        matrix=matrix,
        rhs=rhs,
        space=space,
        wavenumber=wavenumber,
        problem=problem_for(space),
        continuity_est=continuity,
        coercivity_est=coercivity,
        norm_matrix=norm_matrix,
        rule=rule,
    )


def restrict_system(
    system: GalerkinSystem, coarse: FunctionSpace, prolong: csr_matrix
) -> GalerkinSystem:
    """
    The Galerkin system of a nested coarse space obtained by restricting the
    form: P^T A P and P^T b.
    """
    p = prolong.toarray()
    if p.shape != (system.dof_count, coarse.dof_count):
        raise DomainError("Prolongation does not match the systems being restricted")
    matrix = p.T @ system.matrix @ p
    norm_matrix = p.T @ system.norm_matrix @ p
    continuity, coercivity = discrete_constants(matrix, norm_matrix)
    return GalerkinSystem(
        matrix=matrix,
        rhs=p.T @ system.rhs,
        space=coarse,
        wavenumber=system.wavenumber,
        problem=system.problem,
        continuity_est=continuity,
        coercivity_est=coercivity,
        norm_matrix=norm_matrix,
        rule=system.rule,
    )


def assemble_cross_single_layer(
    coarse: FunctionSpace,
    fine: FunctionSpace,
    superspace: Mesh,
    k: WavenumberLike,
    rule: QuadratureRule = QuadratureRule(),
) -> np.ndarray:
    """
    B[p, q] = a_D(phi_q, chi_p) between a P0 space and a P0 space on a
    subset screen, both embedded in a common superspace mesh whose elements
    refine the coarse mesh and contain every fine element exactly. Separated
    pairs are integrated directly; near pairs are summed over the superspace
    children of the coarse element.
    """
    kk = as_wavenumber(k).k
    parents, _ = locate(coarse.mesh, superspace.centroids)
    images, _ = locate(superspace, fine.mesh.centroids)
    if np.any(images < 0):
        raise DomainError("Fine mesh is not contained in the superspace mesh")

    n_coarse = coarse.mesh.n_elements
    n_fine = fine.mesh.n_elements
    p, q = np.meshgrid(np.arange(n_coarse), np.arange(n_fine), indexing="ij")
    p = p.ravel()
    q = q.ravel()
    distance = np.linalg.norm(coarse.mesh.centroids[p] - fine.mesh.centroids[q], axis=1)
    diameter = np.maximum(coarse.mesh.diameters[p], fine.mesh.diameters[q])
    far = distance > rule.near_ratio * diameter

    block = np.zeros(n_coarse * n_fine, dtype=complex)
    far_pairs = np.flatnonzero(far)
    for start in range(0, far_pairs.size, PAIR_CHUNK):
        sel = far_pairs[start : start + PAIR_CHUNK]
        values, _ = integrate_pairs(
            coarse.mesh.triangles[p[sel]],
            fine.mesh.triangles[q[sel]],
            regular_rule(rule.far_order),
            kk,
        )
        block[sel] = values

    near_pairs = np.flatnonzero(~far)
    if near_pairs.size:
        order = np.argsort(parents, kind="stable")
        starts = np.searchsorted(parents[order], np.arange(n_coarse + 1))
        child_rows = []
        child_cols = []
        owner = []
        for pair in near_pairs:
            children = order[starts[p[pair]] : starts[p[pair] + 1]]
            child_rows.append(children)
            child_cols.append(np.full(children.size, images[q[pair]]))
            owner.append(np.full(children.size, pair))
        rows = np.concatenate(child_rows)
        cols = np.concatenate(child_cols)
        owners = np.concatenate(owner)
        values, _ = element_pair_integrals(superspace, rows, cols, kk, rule)
        block += np.bincount(owners, weights=values.real, minlength=block.size)
        block += 1j * np.bincount(owners, weights=values.imag, minlength=block.size)

    return block.reshape(n_coarse, n_fine)
