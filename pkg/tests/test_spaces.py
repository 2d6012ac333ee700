import numpy as np
import pytest

from screen_bie.discretisation.mesh import Mesh, mesh_panels
from screen_bie.discretisation.spaces import (
    FunctionSpace,
    SpaceKind,
    build_space,
    evaluate,
    locate,
    prolongation,
)
from screen_bie.geometry.prefractals import PanelSet, cantor_dust_prefractal
from screen_bie.helpers.errors import DomainError, EmptySpaceError


class TestBuildSpace:
    def test_p0_dofs_are_elements(self, p0_space: FunctionSpace) -> None:
        assert p0_space.dof_count == 8
        assert p0_space.dof_points.shape == (8, 2)

    def test_p1_dofs_are_interior_vertices(self, p1_space: FunctionSpace) -> None:
        assert p1_space.dof_count == 9
        assert not p1_space.mesh.boundary[p1_space.dof_vertices].any()

    def test_p1_without_interior_vertices(self, square: PanelSet) -> None:
        with pytest.raises(EmptySpaceError):
            build_space(mesh_panels(square, 0), SpaceKind.P1_ZERO_TRACE, square)

    def test_kind_from_string(self, square: PanelSet) -> None:
        space = build_space(mesh_panels(square, 1), "P1_ZeroTrace", square)  # type: ignore[arg-type]
        assert space.kind is SpaceKind.P1_ZERO_TRACE
        assert space.dof_count == 1


class TestValues:
    def test_hat_function_mean(self, square: PanelSet) -> None:
        space = build_space(mesh_panels(square, 1), SpaceKind.P1_ZERO_TRACE, square)
        assert space.mean_value(np.ones(1)) == pytest.approx(0.25)

    def test_p0_mean_is_area(self, p0_space: FunctionSpace) -> None:
        assert p0_space.mean_value(np.ones(8)) == pytest.approx(1.0)

    def test_wrong_length(self, p0_space: FunctionSpace) -> None:
        with pytest.raises(DomainError):
            p0_space.element_values(np.ones(3))

    def test_hat_point_values(self, square: PanelSet) -> None:
        space = build_space(mesh_panels(square, 1), SpaceKind.P1_ZERO_TRACE, square)
        points = np.array([[0.5, 0.5], [0.25, 0.5], [0.0, 0.0], [2.0, 2.0]])
        values = evaluate(space, np.ones(1), points)
        assert values == pytest.approx([1.0, 0.5, 0.0, 0.0])

    def test_locate(self, fine_square_mesh: Mesh) -> None:
        points = np.array([[0.1, 0.05], [0.9, 0.8], [1.5, 0.5]])
        elements, bary = locate(fine_square_mesh, points)
        assert elements[0] >= 0 and elements[1] >= 0
        assert elements[2] == -1
        assert bary[:2].sum(axis=1) == pytest.approx([1.0, 1.0])
        assert bary[:2].min() >= -1e-10


class TestProlongation:
    @pytest.mark.parametrize("kind", [SpaceKind.P0_JUMP, SpaceKind.P1_ZERO_TRACE])
    def test_refinement_is_nested(self, square: PanelSet, kind: SpaceKind) -> None:
        coarse = build_space(mesh_panels(square, 1), kind, square)
        fine = build_space(mesh_panels(square, 2), kind, square)
        prolong = prolongation(coarse, fine)
        assert prolong.shape == (fine.dof_count, coarse.dof_count)

        coefficients = np.linspace(1.0, 2.0, coarse.dof_count)
        lifted = prolong @ coefficients
        points = fine.mesh.centroids
        assert evaluate(fine, lifted, points) == pytest.approx(
            evaluate(coarse, coefficients, points)
        )

    def test_p0_children(self, square: PanelSet) -> None:
        coarse = build_space(mesh_panels(square, 1), SpaceKind.P0_JUMP, square)
        fine = build_space(mesh_panels(square, 2), SpaceKind.P0_JUMP, square)
        prolong = prolongation(coarse, fine).toarray()
        assert (prolong.sum(axis=1) == 1).all()
        assert (prolong.sum(axis=0) == 4).all()

    def test_subset_screen_rows(self) -> None:
        parent = cantor_dust_prefractal("1/3", 0)
        child = cantor_dust_prefractal("1/3", 1)
        coarse = build_space(mesh_panels(parent, 0, subdivisions=3), SpaceKind.P0_JUMP, parent)
        fine = build_space(mesh_panels(child, 0), SpaceKind.P0_JUMP, child)
        prolong = prolongation(coarse, fine).toarray()
        assert (prolong.sum(axis=1) == 1).all()

    def test_kinds_must_match(self, p0_space: FunctionSpace, p1_space: FunctionSpace) -> None:
        with pytest.raises(DomainError):
            prolongation(p0_space, p1_space)
