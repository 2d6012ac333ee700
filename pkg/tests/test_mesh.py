import math

import numpy as np
import pytest

from screen_bie.discretisation.mesh import Mesh, mesh_panels
from screen_bie.geometry.prefractals import (
    Family,
    Lattice,
    Openness,
    PanelSet,
    cantor_dust_prefractal,
    sierpinski_prefractal,
)
from screen_bie.helpers.errors import CapacityError, DomainError


class TestMeshPanels:
    @pytest.mark.parametrize(
        ["refine", "vertices", "elements", "boundary"],
        [(0, 4, 2, 4), (1, 9, 8, 8), (2, 25, 32, 16)],
    )
    def test_unit_square_counts(
        self,
        square: PanelSet,
        refine: int,
        vertices: int,
        elements: int,
        boundary: int,
    ) -> None:
        mesh = mesh_panels(square, refine)
        assert mesh.n_vertices == vertices
        assert mesh.n_elements == elements
        assert int(mesh.boundary.sum()) == boundary
        assert mesh.subdivisions == 2**refine

    def test_elements_are_counterclockwise_and_cover(self, fine_square_mesh: Mesh) -> None:
        assert np.all(fine_square_mesh.areas > 0)
        assert fine_square_mesh.areas.sum() == pytest.approx(1.0)

    def test_mesh_size(self, square_mesh: Mesh) -> None:
        assert square_mesh.h == pytest.approx(math.sqrt(2) / 2)

    def test_centre_is_the_only_interior_vertex(self, square_mesh: Mesh) -> None:
        interior = np.flatnonzero(~square_mesh.boundary)
        assert interior.size == 1
        assert square_mesh.vertices[interior[0]] == pytest.approx([0.5, 0.5])

    def test_gasket_vertices_are_merged(self) -> None:
        mesh = mesh_panels(sierpinski_prefractal(1), 0)
        assert mesh.n_elements == 3
        assert mesh.n_vertices == 6
        assert mesh.boundary.all()
        assert mesh.lattice is Lattice.TRIANGULAR

    def test_gasket_elements_are_equilateral(self) -> None:
        mesh = mesh_panels(sierpinski_prefractal(2), 1)
        t = mesh.triangles
        sides = np.linalg.norm(t - np.roll(t, 1, axis=1), axis=2)
        assert sides == pytest.approx(np.full(sides.shape, 1 / 8))

    def test_disjoint_squares_share_nothing(self) -> None:
        mesh = mesh_panels(cantor_dust_prefractal("1/3", 1), 1)
        assert mesh.n_vertices == 36
        assert mesh.n_elements == 32
        assert np.bincount(mesh.element_panel).tolist() == [8, 8, 8, 8]

    def test_explicit_subdivisions(self, square: PanelSet) -> None:
        mesh = mesh_panels(square, 0, subdivisions=3)
        assert mesh.n_elements == 18
        assert mesh.h == pytest.approx(math.sqrt(2) / 3)

    def test_barycentric_gradients_sum_to_zero(self, fine_square_mesh: Mesh) -> None:
        grads = fine_square_mesh.barycentric_gradients
        assert np.abs(grads.sum(axis=1)).max() < 1e-12

    def test_element_cap(self, square: PanelSet) -> None:
        with pytest.raises(CapacityError):
            mesh_panels(square, 3, element_cap=100)

    def test_negative_refine(self, square: PanelSet) -> None:
        with pytest.raises(DomainError):
            mesh_panels(square, -1)

    def test_empty_screen(self) -> None:
        empty = PanelSet(Family.CUSTOM, 0, (), Openness.OPEN_SCREEN)
        with pytest.raises(DomainError):
            mesh_panels(empty, 0)

    def test_to_dict(self, square_mesh: Mesh) -> None:
        document = square_mesh.to_dict()
        assert len(document["vertices"]) == 9
        assert len(document["triangles"]) == 8
        assert document["panel"] == [0] * 8
        assert document["h"] == pytest.approx(math.sqrt(2) / 2)
