import numpy as np
import pytest

from screen_bie.bie.assembly import element_pair_integrals
from screen_bie.bie.quadrature import (
    PairRelation,
    QuadratureRule,
    classify_pair,
    integrate_pairs,
    panel_pair_integral,
    regular_rule,
    singular_rule,
    triangle_rule,
)
from screen_bie.discretisation.mesh import mesh_panels
from screen_bie.geometry.prefractals import triangles_screen
from screen_bie.helpers.errors import QuadratureFailure

TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
NEIGHBOUR = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
CORNER = np.array([[1.0, 0.0], [2.0, 0.0], [2.0, -1.0]])
FAR = np.array([[3.0, 3.0], [3.5, 3.0], [3.0, 3.5]])


def ones(r: np.ndarray) -> np.ndarray:
    return np.ones_like(r, dtype=complex)


class TestTriangleRule:
    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_weights_sum_to_area(self, n: int) -> None:
        _, weights = triangle_rule(n)
        assert weights.sum() == pytest.approx(0.5)

    def test_polynomial_exactness(self) -> None:
        points, weights = triangle_rule(3)
        r1, r2 = points[:, 0], points[:, 1]
        assert np.dot(weights, r1**2 * r2**3) == pytest.approx(1 / 28)
        assert (r2 <= r1).all() and (r1 <= 1).all() and (r2 >= 0).all()


class TestPairRules:
    @pytest.mark.parametrize(
        "relation", [PairRelation.COINCIDENT, PairRelation.EDGE, PairRelation.VERTEX]
    )
    def test_singular_weights_integrate_one(self, relation: PairRelation) -> None:
        x, y, weights = singular_rule(relation, 4)
        assert weights.sum() == pytest.approx(0.25)
        for points in (x, y):
            assert (points[:, 1] <= points[:, 0] + 1e-15).all()
            assert (points >= -1e-15).all() and (points <= 1 + 1e-15).all()

    def test_regular_rule_integrates_one(self) -> None:
        assert regular_rule(5)[2].sum() == pytest.approx(0.25)

    def test_regular_relation_has_no_singular_rule(self) -> None:
        with pytest.raises(ValueError):
            singular_rule(PairRelation.REGULAR, 3)

    @pytest.mark.parametrize(
        ["other", "relation"],
        [
            (TRIANGLE, PairRelation.COINCIDENT),
            (NEIGHBOUR, PairRelation.EDGE),
            (CORNER, PairRelation.VERTEX),
            (FAR, PairRelation.REGULAR),
        ],
    )
    def test_classify(self, other: np.ndarray, relation: PairRelation) -> None:
        assert classify_pair(TRIANGLE, other, QuadratureRule()) is relation


class TestIntegratePairs:
    def test_constant_kernel_gives_areas(self) -> None:
        total, moment = integrate_pairs(
            TRIANGLE[None], FAR[None], regular_rule(4), 1j, moments=True, kernel=ones
        )
        assert total[0] == pytest.approx(0.5 * 0.125)
        assert moment is not None
        assert moment[0] == pytest.approx(np.full((3, 3), 0.5 * 0.125 / 9))

    def test_non_finite_values(self) -> None:
        def broken(r: np.ndarray) -> np.ndarray:
            return np.full(r.shape, np.inf, dtype=complex)

        with pytest.raises(QuadratureFailure) as error:
            integrate_pairs(
                TRIANGLE[None], FAR[None], regular_rule(2), 1j, kernel=broken
            )
        assert error.value.case == "regular"


class TestPanelPairIntegral:
    @pytest.mark.parametrize("other", [TRIANGLE, NEIGHBOUR, CORNER, FAR])
    def test_swapping_is_symmetric(self, other: np.ndarray) -> None:
        forward, forward_moment = panel_pair_integral(TRIANGLE, other, 2 + 1j, moments=True)
        backward, backward_moment = panel_pair_integral(
            other, TRIANGLE, 2 + 1j, moments=True
        )
        assert forward == pytest.approx(backward)
        assert forward_moment is not None and backward_moment is not None
        assert forward_moment == pytest.approx(backward_moment.T)

    def test_moments_add_up_to_total(self) -> None:
        total, moment = panel_pair_integral(TRIANGLE, NEIGHBOUR, 1j, moments=True)
        assert moment is not None
        assert moment.sum() == pytest.approx(total)

    @pytest.mark.parametrize("other", [TRIANGLE, NEIGHBOUR, CORNER])
    def test_singular_rule_is_converged(self, other: np.ndarray) -> None:
        rule = QuadratureRule()
        value, _ = panel_pair_integral(TRIANGLE, other, 1 + 1j, rule)
        raised, _ = panel_pair_integral(TRIANGLE, other, 1 + 1j, rule.raised(4))
        assert value == pytest.approx(raised, rel=1e-6)

    @pytest.mark.parametrize("k", [1j, 1 + 1j, 2 + 1j])
    def test_default_rule_passes_its_own_check(self, k: complex) -> None:
        assert QuadratureRule().singular_order == 8
        for other in (TRIANGLE, NEIGHBOUR, CORNER):
            value, _ = panel_pair_integral(TRIANGLE, other, k)
            assert np.isfinite(value)

    def test_tolerance_failure(self) -> None:
        strict = QuadratureRule(singular_order=1, tolerance=1e-14)
        with pytest.raises(QuadratureFailure):
            panel_pair_integral(TRIANGLE, TRIANGLE, 1j, strict)


class TestRefinementConsistency:
    @pytest.mark.parametrize("k", [1j, 3 + 0.5j])
    def test_children_add_up_to_parent(self, k: complex) -> None:
        screen = triangles_screen([[(0, 0), (1, 0), (0, 1)]])
        parent = mesh_panels(screen, 0)
        children = mesh_panels(screen, 1)
        rule = QuadratureRule()

        whole, _ = element_pair_integrals(
            parent, np.array([0]), np.array([0]), k, rule
        )
        p, q = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
        parts, _ = element_pair_integrals(children, p.ravel(), q.ravel(), k, rule)
        assert parts.sum() == pytest.approx(whole[0], rel=1e-6)

    def test_moments_match_single_pair_routine(self) -> None:
        screen = triangles_screen([[(0, 0), (1, 0), (0, 1)]])
        mesh = mesh_panels(screen, 1)
        rule = QuadratureRule()
        p, q = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
        values, moments = element_pair_integrals(
            mesh, p.ravel(), q.ravel(), 2 + 1j, rule, moments=True
        )
        assert moments is not None
        for index, (a, b) in enumerate(zip(p.ravel(), q.ravel())):
            value, moment = panel_pair_integral(
                mesh.triangles[a], mesh.triangles[b], 2 + 1j, rule, moments=True
            )
            assert values[index] == pytest.approx(value, rel=1e-6)
            assert moments[index] == pytest.approx(moment, rel=1e-5, abs=1e-9)
