import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcurv.imaging import (
    GrayImage,
    ImageError,
    grid_curvature,
    grid_from_image,
    heron,
    image_sample,
    weighted_gaussian_grid,
)


def tri_area(p, q, r):
    return 0.5 * np.linalg.norm(np.cross(q - p, r - p))


def test_gray_image_validation():
    with pytest.raises(ImageError):
        GrayImage(2, 2, np.array([0.0, 0.5, 1.0]))
    with pytest.raises(ImageError):
        GrayImage(2, 1, np.array([0.0, 1.5]))
    img = GrayImage.from_array(np.array([[0, 255], [128, 64]], dtype=np.uint8))
    assert img.intensities[1] == 1.0 and img.array.shape == (2, 2)
    with pytest.raises(ValueError):
        img.intensities[0] = 0.5


def test_constant_image():
    gc = grid_from_image(GrayImage.from_array(np.full((3, 4), 0.3)), eps_w=1e-3)
    assert np.allclose(gc.graph.edge_weights, 1e-3)
    assert np.allclose(gc.complex.face_weights, 1.0, atol=1e-15)


def test_single_white_pixel():
    A = np.zeros((2, 2))
    A[0, 0] = 1.0
    gc = grid_from_image(GrayImage.from_array(A), eps_w=1e-3)
    g = gc.graph
    for e in range(g.n_edges):
        u, v = g.edges[e]
        expected = 1.001 if 0 in (u, v) else 1e-3
        assert g.edge_weights[e] == pytest.approx(expected)


def test_topology_counts():
    for h, w in [(2, 2), (3, 5), (7, 4)]:
        gc = grid_from_image(GrayImage.from_array(np.zeros((h, w))))
        assert gc.graph.n_nodes == h * w
        assert gc.graph.n_edges == 2 * w * h - w - h
        assert len(gc.complex.face_edges) == (w - 1) * (h - 1)


def test_node_index_is_row_major():
    gc = grid_from_image(GrayImage.from_array(np.zeros((3, 4))))
    assert gc.graph.edge_between(1 * 4 + 2, 2 * 4 + 2) is not None
    assert gc.graph.edge_between(0, 5) is None


def test_face_areas_match_cross_product():
    rng = np.random.default_rng(0)
    for _ in range(5):
        A = rng.uniform(size=(4, 4))
        gc = grid_from_image(GrayImage.from_array(A))
        areas = np.asarray(gc.complex.face_weights)
        k = 0
        for r in range(3):
            for c in range(3):
                P = lambda rr, cc: np.array([cc, rr, A[rr, cc]])
                tl, tr, bl, br = P(r, c), P(r, c + 1), P(r + 1, c), P(r + 1, c + 1)
                expected = tri_area(tl, tr, br) + tri_area(tl, br, bl)
                assert areas[k] == pytest.approx(expected, abs=1e-9)
                k += 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=9, max_size=9))
def test_heron_matches_cross_product(xs):
    p = np.array(xs[0:3])
    q = np.array(xs[3:6])
    r = np.array(xs[6:9])
    a, b, c = (np.linalg.norm(q - r), np.linalg.norm(p - r), np.linalg.norm(p - q))
    assert float(heron(a, b, c)) == pytest.approx(tri_area(p, q, r), abs=1e-7)


def test_embedded_metric_lengths():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    gc = grid_from_image(GrayImage.from_array(A), embedded_metric=True)
    assert np.allclose(np.sort(gc.graph.edge_weights), [1.0, 1.0, np.sqrt(2), np.sqrt(2)], atol=1e-15)
    assert gc.metadata()["embedded_metric"] is True


# -- Gaussian ----------------------------------------------------------------


def test_gaussian_constant_is_zero():
    assert np.all(weighted_gaussian_grid(GrayImage.from_array(np.full((5, 5), 0.7))) == 0)


def test_gaussian_single_bright_pixel():
    A = np.zeros((5, 5))
    A[2, 2] = 0.5
    K = weighted_gaussian_grid(GrayImage.from_array(A)).reshape(5, 5)
    assert K[2, 2] == -2.0
    for r, c in [(1, 2), (3, 2), (2, 1), (2, 3)]:
        assert K[r, c] == 0.5
    assert K[0, 0] == 0.0


def test_gaussian_ramp_interior_is_zero():
    A = np.tile(np.linspace(0, 1, 6), (4, 1))
    K = weighted_gaussian_grid(GrayImage.from_array(A)).reshape(4, 6)
    assert np.allclose(K[:, 1:-1], 0, atol=1e-15)


def test_gaussian_periodic_sums_to_zero():
    rng = np.random.default_rng(1)
    K = weighted_gaussian_grid(GrayImage.from_array(rng.uniform(size=(7, 9))), padding="periodic")
    assert abs(K.sum()) <= 1e-9
    with pytest.raises(ValueError):
        weighted_gaussian_grid(GrayImage.from_array(np.zeros((2, 2))), padding="zero")


# -- curvature and sampling --------------------------------------------------


def test_grid_curvature_constant_image_is_flat():
    gc = grid_from_image(GrayImage.from_array(np.full((4, 4), 0.2)))
    assert np.allclose(grid_curvature(gc, "full-forman", formula="grid").values, 0.0, atol=1e-15)
    with pytest.raises(ValueError):
        grid_curvature(gc, "full-forman", formula="hex")
    assert grid_curvature(gc, "full-forman").params["grid"]["face_weight"] == "heron-split"


def test_constant_image_mask_follows_tie_order():
    gc = grid_from_image(GrayImage.from_array(np.full((4, 4), 0.5)))
    f = grid_curvature(gc, "graph-forman")
    mask = image_sample(gc, "graph-forman", retain_fraction=0.25)
    assert mask.sum() == 4
    # corners have the smallest |curvature| under graph Forman, so interior pixels win
    assert mask[1:3, 1:3].all()
    assert image_sample(gc, "graph-forman", retain_fraction=1.0).all()
    assert f.target == "edge"


def test_image_sample_rejects_edge_target():
    gc = grid_from_image(GrayImage.from_array(np.zeros((3, 3))))
    with pytest.raises(ValueError):
        image_sample(gc, "graph-forman", target="edge")


def test_general_formula_finds_a_step_edge():
    A = np.zeros((64, 64))
    A[:, 32:] = 1.0
    gc = grid_from_image(GrayImage.from_array(A))
    mask = image_sample(gc, "full-forman", retain_fraction=2 / 64, formula="general")
    cols = np.nonzero(mask)[1]
    assert mask.sum() == 128
    assert np.all((cols >= 30) & (cols <= 33))


def test_grid_formula_is_blind_to_a_vertical_step():
    # opposite quad edges have equal weight across a vertical step
    A = np.zeros((6, 6))
    A[:, 3:] = 1.0
    gc = grid_from_image(GrayImage.from_array(A))
    f = grid_curvature(gc, "full-forman")
    assert np.allclose(f.values, 0.0, atol=1e-12)
