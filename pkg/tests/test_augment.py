import numpy as np
import pytest

from gcal.augment import AugmentConfig, drop_edges, make_view, mask_features
from gcal.errors import InvalidArgument
from gcal.graph import Graph


def graph_with_edges(num_edges, n=400, seed=0):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    pick = rng.choice(len(iu), size=num_edges, replace=False)
    edges = np.stack([iu[pick], ju[pick]], axis=1)
    return Graph.from_edges(n, edges, rng.normal(size=(n, 5)))


@pytest.fixture(scope="module")
def big():
    g = graph_with_edges(10_000)
    assert g.num_edges == 10_000
    return g


def test_drop_edges_extremes(big):
    np.testing.assert_array_equal(drop_edges(big, 0.0, 1), big.edge_list())
    assert len(drop_edges(big, 1.0, 1)) == 0


def test_drop_edges_binomial(big):
    sigma = np.sqrt(10_000 * 0.2 * 0.8)
    for seed in range(20):
        kept = len(drop_edges(big, 0.2, seed))
        assert abs(kept - 8000) <= 4 * sigma


def test_drop_edges_subset_and_symmetric(big):
    view = make_view(big, AugmentConfig(p_e=0.5, p_n=0.0, seed=3))
    original = set(map(tuple, big.edge_list().tolist()))
    kept = set(map(tuple, view.graph.edge_list().tolist()))
    assert kept <= original
    a = view.graph.adjacency()
    assert (a != a.T).nnz == 0
    assert view.graph.n == big.n


def test_mask_features_extremes():
    x = np.random.default_rng(0).normal(size=(6, 4))
    out, mask = mask_features(x, 0.0, 1)
    np.testing.assert_array_equal(out, x)
    assert mask.tolist() == [1.0] * 4
    out, _ = mask_features(x, 1.0, 1)
    assert np.all(out == 0)


def test_mask_shared_across_rows():
    x = np.random.default_rng(0).normal(size=(20, 50)) + 3.0
    out, mask = mask_features(x, 0.5, 7)
    assert mask.shape == (50,)
    dead = mask == 0
    assert np.all(out[:, dead] == 0)
    np.testing.assert_array_equal(out[:, ~dead], x[:, ~dead])


def test_mask_per_node_option():
    x = np.ones((20, 50))
    out, mask = mask_features(x, 0.5, 7, per_node=True)
    assert mask.shape == (20, 50)
    np.testing.assert_array_equal(out, mask)


def test_mask_survivor_binomial():
    x = np.ones((2, 1000))
    sigma = np.sqrt(1000 * 0.3 * 0.7)
    for seed in range(20):
        _, mask = mask_features(x, 0.3, seed)
        assert abs(mask.sum() - 700) <= 4 * sigma


def test_make_view_identity_config(big):
    view = make_view(big, AugmentConfig(p_e=0.0, p_n=0.0, seed=5))
    np.testing.assert_array_equal(view.graph.indices, big.indices)
    np.testing.assert_array_equal(view.graph.indptr, big.indptr)
    np.testing.assert_array_equal(view.graph.features, big.features)


def test_make_view_determinism_and_seed_sensitivity():
    g = graph_with_edges(1000, n=200, seed=1)
    cfg = AugmentConfig(p_e=0.5, p_n=0.3, seed=11)
    a, b = make_view(g, cfg), make_view(g, cfg)
    np.testing.assert_array_equal(a.graph.indices, b.graph.indices)
    np.testing.assert_array_equal(a.graph.features, b.graph.features)
    for s in range(20):
        v1 = make_view(g, AugmentConfig(0.5, 0.3, s))
        v2 = make_view(g, AugmentConfig(0.5, 0.3, s + 1))
        assert not np.array_equal(v1.graph.edge_list(), v2.graph.edge_list())


def test_invalid_probabilities():
    with pytest.raises(InvalidArgument):
        AugmentConfig(p_e=1.5)
    with pytest.raises(InvalidArgument):
        mask_features(np.ones((2, 2)), -0.1, 0)
