import numpy as np
import pytest

import tensorbudget as tb


def test_config_validation():
    c = tb.PassConfig(tensor_size_threshold=1_000_000)
    assert c.split_size == 1_000_000
    with pytest.raises(tb.Error):
        tb.PassConfig(tensor_size_threshold=100, tensor_split_size=200)


def test_kernel_mvm_split_preserves_values():
    n = 400
    g = tb.build_kernel_mvm(n, variance=1.3, lengthscale=0.7)
    out, diags = tb.run_pipeline(g, tb.PassConfig(tensor_size_threshold=100_000))
    assert diags == []
    assert out.num_loops() == 1
    assert out.max_array_bytes() <= 100_000 < g.max_array_bytes()
    rng = np.random.default_rng(0)
    inputs = [rng.uniform(-1, 1, n) for _ in range(3)]
    (want,), _ = tb.evaluate(g, inputs)
    (got,), _ = tb.evaluate(out, inputs)
    x, y, v = inputs
    k = 1.3 * np.exp(-((x[:, None] - y[None, :]) ** 2) / (2 * 0.7**2))
    np.testing.assert_allclose(want, k @ v, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)


def test_knn_matches_numpy_and_fits_budget():
    n, m, d, k = 2000, 50, 8, 5
    g = tb.build_knn(n, m, d, k)
    rng = np.random.default_rng(1)
    data, queries = rng.normal(size=(n, d)), rng.normal(size=(m, d))
    with pytest.raises(tb.BudgetExceeded):
        tb.evaluate(g, [data, queries], budget=1_000_000)
    # The data matrix (128KB) must stay under the threshold: parameters are
    # never split.
    out, diags = tb.run_pipeline(g, tb.PassConfig(tensor_size_threshold=200_000))
    assert diags == [] and out.num_loops() >= 1
    (dist, idx), peak = tb.evaluate(out, [data, queries], budget=1_000_000)
    assert peak <= 1_000_000
    ref = ((queries[:, None, :] - data[None, :, :]) ** 2).sum(-1)
    want_idx = np.argsort(ref, axis=1, kind="stable")[:, :k]
    np.testing.assert_array_equal(idx.astype(int), want_idx)
    np.testing.assert_allclose(dist, np.sort(ref, axis=1)[:, :k], rtol=1e-10)


def test_float32_and_dump():
    g = tb.build_pairwise_distance(30, 20, 4, metric="cosine", dtype="f32")
    assert g.name and len(g) > 0
    assert g.dump().strip()
    rng = np.random.default_rng(2)
    (dist,), _ = tb.evaluate(g, [rng.normal(size=(30, 4)), rng.normal(size=(20, 4))])
    assert dist.dtype == np.float32 and dist.shape == (20, 30)


def test_bad_input_count():
    g = tb.build_kernel_mvm(4)
    with pytest.raises(tb.Error):
        tb.evaluate(g, [np.zeros(4)])
