import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcal.errors import InvalidArgument, NumericFailure
from gcal.graph import normalize_adjacency
from gcal.model import (
    PARAM_NAMES,
    AdamState,
    ModelParams,
    adam_step,
    backward,
    gcn_forward,
    init_params,
    load_checkpoint,
    project,
    save_checkpoint,
)
from gcal.objective import ObjectiveConfig
from gcal.train import loss_and_grads

from conftest import make_graph, random_graph
from gradcheck import finite_difference, random_instance, relative_error


def unit_params(m=1, h=1, d=1, value=1.0):
    return ModelParams(
        W1=np.full((m, h), value), W2=np.full((h, d), value),
        G1=np.eye(d), b1=np.zeros(d), G2=np.eye(d), b2=np.zeros(d),
    )


def test_forward_single_node():
    g = make_graph(1, [], features=np.array([[2.0]]))
    out = gcn_forward(normalize_adjacency(g), g.features, unit_params())
    assert out.tolist() == [[2.0]]


def test_forward_zero_features(rng):
    g = random_graph(rng, 10, 0.3, m=4)
    p = init_params(4, 6, 3, seed=0)
    out = gcn_forward(normalize_adjacency(g), np.zeros((10, 4)), p)
    assert np.all(out == 0)


def test_forward_path2():
    g = make_graph(2, [(0, 1)], features=np.array([[1.0], [3.0]]))
    out = gcn_forward(normalize_adjacency(g), g.features, unit_params())
    assert out.tolist() == [[2.0], [2.0]]


def test_forward_shape_errors(rng):
    g = random_graph(rng, 5, 0.5, m=3)
    p = init_params(4, 2, 2, seed=0)
    with pytest.raises(InvalidArgument):
        gcn_forward(normalize_adjacency(g), g.features, p)
    with pytest.raises(InvalidArgument):
        gcn_forward(normalize_adjacency(g), np.zeros((4, 4)), p)


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_forward_non_finite():
    g = make_graph(2, [(0, 1)], features=np.array([[1e200], [1e200]]))
    p = unit_params(value=1e200)
    with pytest.raises(NumericFailure):
        gcn_forward(normalize_adjacency(g), g.features, p)


def test_permutation_equivariance(rng):
    g = random_graph(rng, 15, 0.25, m=4)
    p = init_params(4, 8, 5, seed=1)
    out = gcn_forward(normalize_adjacency(g), g.features, p)
    perm = rng.permutation(g.n)
    inv = np.argsort(perm)
    edges = inv[g.edge_list()]
    gp = make_graph(g.n, edges, features=g.features[perm])
    outp = gcn_forward(normalize_adjacency(gp), gp.features, p)
    np.testing.assert_allclose(outp, out[perm], atol=1e-12)


def test_forward_deterministic(rng):
    g = random_graph(rng, 20, 0.2, m=4)
    p = init_params(4, 8, 5, seed=1)
    a = gcn_forward(normalize_adjacency(g), g.features, p)
    b = gcn_forward(normalize_adjacency(g), g.features, p)
    assert a.tobytes() == b.tobytes()


def test_project_examples():
    d = 3
    zero = ModelParams(np.zeros((2, 2)), np.zeros((2, d)), np.zeros((d, d)), np.zeros(d), np.zeros((d, d)), np.zeros(d))
    assert np.all(project(np.array([1.0, -2.0, 3.0]), zero) == 0)
    h = np.array([0.5, 0.0, 4.0])
    np.testing.assert_array_equal(project(h, unit_params(d=d)), h)
    p = ModelParams(np.ones((1, 1)), np.ones((1, 1)), np.array([[2.0]]), np.array([0.0]), np.array([[3.0]]), np.array([1.0]))
    assert project(np.array([0.5]), p).tolist() == [4.0]


def test_project_elu_branch():
    p = ModelParams(np.ones((1, 1)), np.ones((1, 1)), np.eye(1), np.zeros(1), np.eye(1), np.zeros(1))
    assert project(np.array([-1.0]), p)[0] == pytest.approx(np.exp(-1) - 1)


def test_gradient_matches_finite_differences():
    params, i1, i2, positives = random_instance(0)
    _, grads = loss_and_grads(params, i1, i2, positives, ObjectiveConfig())
    fd = finite_difference(params, i1, i2, positives)
    for name in PARAM_NAMES:
        assert relative_error(getattr(grads, name), fd[name]) < 1e-4, name


@pytest.mark.parametrize("cfg", [
    ObjectiveConfig(positive_views="both"),
    ObjectiveConfig(exclude_positives_from_negatives=True, lam=0.6, tau=0.8),
])
def test_gradient_variants(cfg):
    params, i1, i2, positives = random_instance(3)
    _, grads = loss_and_grads(params, i1, i2, positives, cfg)
    fd = finite_difference(params, i1, i2, positives, cfg)
    for name in PARAM_NAMES:
        assert relative_error(getattr(grads, name), fd[name]) < 1e-4, name


def test_masked_column_gets_zero_gradient():
    params, i1, i2, positives = random_instance(1)
    adj1, x1 = i1
    adj2, x2 = i2
    x1, x2 = x1.copy(), x2.copy()
    x1[:, 2] = 0.0
    x2[:, 2] = 0.0
    _, grads = loss_and_grads(params, (adj1, x1), (adj2, x2), positives, ObjectiveConfig())
    assert np.all(grads.W1[2] == 0.0)


def test_gradient_linear_in_loss_scale():
    params, i1, i2, positives = random_instance(2)
    from gcal.model import encode
    from gcal.objective import total_objective_and_grad
    z1, c1 = encode(*i1, params, return_cache=True)
    z2, c2 = encode(*i2, params, return_cache=True)
    _, d1, d2 = total_objective_and_grad(z1, z2, positives, ObjectiveConfig())
    g1 = backward([c1, c2], [d1, d2], params)
    g2 = backward([c1, c2], [2 * d1, 2 * d2], params)
    for name in PARAM_NAMES:
        np.testing.assert_allclose(getattr(g2, name), 2 * getattr(g1, name), rtol=1e-14, atol=0)


def test_backward_names_non_finite_parameter():
    params, i1, i2, positives = random_instance(4)
    from gcal.model import encode
    z1, c1 = encode(*i1, params, return_cache=True)
    z2, c2 = encode(*i2, params, return_cache=True)
    bad = np.full_like(z1, np.nan)
    with pytest.raises(NumericFailure) as info:
        backward([c1, c2], [bad, bad], params)
    assert info.value.parameter in PARAM_NAMES


def test_adam_zero_gradient():
    p = init_params(3, 4, 2, seed=0)
    s = AdamState.zeros_like(p)
    p2, s2 = adam_step(p, p.map(np.zeros_like), s)
    for name in PARAM_NAMES:
        np.testing.assert_array_equal(getattr(p2, name), getattr(p, name))
    assert s2.t == 1


@given(st.floats(min_value=1e-3, max_value=1e3) | st.floats(min_value=-1e3, max_value=-1e-3))
@settings(max_examples=30, deadline=None)
def test_adam_first_step_is_lr_sign(g):
    p = init_params(1, 1, 1, seed=0)
    s = AdamState.zeros_like(p, lr=0.001)
    grads = p.map(lambda a: np.full_like(a, g))
    p2, _ = adam_step(p, grads, s)
    # m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
    expected = -0.001 * g / (abs(g) + 1e-8)
    assert p2.W1[0, 0] - p.W1[0, 0] == pytest.approx(expected, rel=1e-9)
    assert abs(abs(p2.W1[0, 0] - p.W1[0, 0]) - 0.001) < 1e-8


def test_adam_is_stateful():
    p = init_params(2, 2, 2, seed=0)
    grads = p.map(np.ones_like)
    s = AdamState.zeros_like(p)
    p1, s1 = adam_step(p, grads, s)
    p2, s2 = adam_step(p1, grads, s1)
    assert s2.t == 2
    assert not np.array_equal(s2.v.W1, s1.v.W1)
    # a repeated identical gradient keeps the step size at lr
    np.testing.assert_allclose(p1.W1 - p2.W1, p.W1 - p1.W1, rtol=1e-6)


def test_checkpoint_round_trip(tmp_path):
    p = init_params(5, 4, 3, seed=2)
    s = AdamState.zeros_like(p, lr=0.01)
    p, s = adam_step(p, p.map(np.ones_like), s)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, p, s)
    p2, s2 = load_checkpoint(path)
    for name in PARAM_NAMES:
        assert getattr(p2, name).tobytes() == getattr(p, name).tobytes()
        assert getattr(s2.m, name).tobytes() == getattr(s.m, name).tobytes()
    assert (s2.t, s2.lr) == (1, 0.01)
    save_checkpoint(path, p)
    assert load_checkpoint(path)[1] is None


def test_checkpoint_layout(tmp_path):
    import json
    import struct
    p = init_params(2, 2, 2, seed=0)
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, p)
    raw = path.read_bytes()
    (size,) = struct.unpack("<Q", raw[:8])
    header = json.loads(raw[8:8 + size])
    assert [t["name"] for t in header["tensors"]] == list(PARAM_NAMES)
    assert len(raw) == 8 + size + 8 * sum(np.prod(t["shape"]) for t in header["tensors"])
    first = np.frombuffer(raw[8 + size:8 + size + 32], dtype="<f8")
    np.testing.assert_array_equal(first, p.W1.ravel())
