"""
Linear SSMs, attention, hybrid blocks, Jacobians and the constructive counters
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from config import JACOBIAN_REL_TOL
from services.errors import DimensionMismatchError
from services.graph_core import generate_erdos_renyi, oracle
from services.seq_models import (
    AttentionLayer,
    HybridBlock,
    LinearSsmLayer,
    attention_forward,
    attention_jacobian,
    attention_weights,
    average_pool,
    color_count_construction,
    count_colors,
    count_via_attention_sum,
    find_undercount_witness,
    finite_difference_jacobian,
    hippo_legs_matrix,
    hippo_modal_stack,
    hybrid_forward,
    hybrid_jacobian,
    random_attention,
    random_hybrid,
    relative_error,
    sensitivity_profile,
    ssm_forward,
    ssm_jacobian,
    stacked_surrogate,
    surrogate,
)
from utils.rng import make_rng


class TestSsm:
    def test_memoryless_lti_is_identity(self):
        layer = LinearSsmLayer.lti(np.zeros((2, 2)), np.eye(2), np.eye(2))
        xs = np.arange(6.0).reshape(3, 2)
        assert np.array_equal(ssm_forward(layer, xs), xs)

    def test_identity_lti_is_running_sum(self):
        layer = LinearSsmLayer.lti(np.eye(1), np.eye(1), np.eye(1))
        assert ssm_forward(layer, [1.0, 2.0, 3.0]).reshape(-1).tolist() == [1.0, 3.0, 6.0]

    def test_hippo_matches_unrolled_formula(self):
        rng = make_rng(0)
        m, n = 4, 8
        layer = LinearSsmLayer.hippo(m)
        xs = rng.normal(size=(n, 1))
        A, B = hippo_legs_matrix(m), layer.B
        expected = np.zeros(m)
        for k in range(1, n + 1):
            term = B @ xs[k - 1] / k
            for t in range(k + 1, n + 1):
                term = (np.eye(m) - A / t) @ term
            expected += term
        assert np.allclose(ssm_forward(layer, xs)[-1], expected)

    def test_legs_matrix(self):
        A = hippo_legs_matrix(3)
        assert np.allclose(np.diag(A), [1.0, 2.0, 3.0])
        assert A[2, 0] == pytest.approx(np.sqrt(5.0))
        assert A[0, 2] == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            LinearSsmLayer.lti(np.eye(2), np.ones((3, 1)), np.eye(2))

    def test_empty_sequence(self):
        with pytest.raises(DimensionMismatchError):
            ssm_forward(LinearSsmLayer.hippo(2), np.zeros((0, 1)))


class TestColorCounting:
    def test_small_sequence(self):
        assert count_colors(color_count_construction(2), [0, 0, 1]).tolist() == [2.0, 1.0]

    def test_single_color(self):
        assert count_colors(color_count_construction(3), [0] * 5).tolist() == [5.0, 0.0, 0.0]

    def test_any_order_matches_oracle(self):
        rng = make_rng(1)
        g = generate_erdos_renyi(50, 0.2, seed=1)
        g = g.with_colors(rng.integers(4, size=g.n))
        expected = list(oracle(g, "color_counts", num_colors=4).value)
        layer = color_count_construction(4)
        for _ in range(100):
            order = rng.permutation(g.n)
            assert count_colors(layer, [g.colors[v] for v in order]).tolist() == expected

    @pytest.mark.parametrize("num_colors", [2, 3])
    def test_narrow_layer_has_witness(self, num_colors):
        found = find_undercount_witness(num_colors, 6)
        assert found is not None
        assert len(found.first) != len(found.second) or sorted(found.first) != sorted(found.second)
        hist_a = np.bincount(found.first, minlength=num_colors)
        hist_b = np.bincount(found.second, minlength=num_colors)
        assert not np.array_equal(hist_a, hist_b)


class TestAttention:
    def test_single_token_is_value_projection(self):
        layer = random_attention(make_rng(2), 3, 2)
        x = make_rng(3).normal(size=(1, 3))
        assert np.allclose(attention_forward(layer, x), x @ layer.W_V)

    def test_zero_query_key_averages_values(self):
        layer = AttentionLayer(W_Q=np.zeros((2, 1)), W_K=np.zeros((2, 1)), W_V=np.eye(2))
        xs = np.array([[1.0, 0.0], [3.0, 2.0]])
        assert np.allclose(attention_forward(layer, xs), [[2.0, 1.0], [2.0, 1.0]])

    def test_causal_rows_ignore_the_future(self):
        layer = random_attention(make_rng(4), 2, 2, causal=True)
        xs = make_rng(5).normal(size=(5, 2))
        edited = xs.copy()
        edited[3:] += 10.0
        assert np.array_equal(attention_forward(layer, xs)[:3], attention_forward(layer, edited)[:3])
        assert np.allclose(np.triu(attention_weights(layer, xs), k=1), 0.0)

    @given(seed=st.integers(min_value=0, max_value=10_000), T=st.integers(min_value=1, max_value=8))
    def test_permutation_equivariance(self, seed, T):
        rng = make_rng(seed)
        layer = random_attention(rng, 3, 2)
        xs = rng.normal(size=(T, 3))
        perm = rng.permutation(T)
        assert np.allclose(attention_forward(layer, xs[perm]), attention_forward(layer, xs)[perm],
                           rtol=1e-12, atol=1e-12)

    def test_positional_encoding_width_checked(self):
        with pytest.raises(DimensionMismatchError):
            AttentionLayer(W_Q=np.eye(2), W_K=np.eye(2), W_V=np.eye(2), pe=np.zeros((4, 3)))


class TestHybrid:
    def test_matches_manual_composition(self):
        block = random_hybrid(make_rng(6), d_in=2, m=3, d=3, d_k=2, layers=2)
        xs = make_rng(7).normal(size=(5, 2))
        manual = attention_forward(block.attn, ssm_forward(block.ssm_layers[1], ssm_forward(block.ssm_layers[0], xs)))
        assert np.allclose(hybrid_forward(block, xs), manual)

    def test_single_token_is_linear(self):
        block = random_hybrid(make_rng(8), d_in=1, m=2, d=2, d_k=2, layers=1)
        ssm = block.ssm_layers[0]
        expected = (ssm.C @ (ssm.B @ np.array([2.0]))) @ block.attn.W_V
        assert np.allclose(hybrid_forward(block, [[2.0]])[0], expected)

    def test_widths_must_chain(self):
        with pytest.raises(DimensionMismatchError):
            HybridBlock(ssm_layers=(LinearSsmLayer.hippo(2),), attn=random_attention(make_rng(0), 3, 2))

    def test_average_pool(self):
        pooled = average_pool([np.array([[1.0, 1.0], [3.0, 3.0]]), np.array([[0.0, 4.0]])])
        assert pooled.tolist() == [1.0, 3.0]


class TestJacobians:
    def test_scalar_hippo_hand_unrolled(self):
        layer = LinearSsmLayer(np.ones((1, 1)), np.full((1, 1), 2.0), np.full((1, 1), 3.0), "hippo")
        n, i = 6, 2
        expected = np.prod([1 - 1 / j for j in range(i + 1, n + 1)]) / i * 6.0
        assert ssm_jacobian([layer], n, i)[0, 0] == pytest.approx(expected)

    @pytest.mark.parametrize("i", range(1, 9))
    def test_two_layer_stack_matches_finite_differences(self, i):
        rng = make_rng(9)
        stack = [LinearSsmLayer.hippo(3, B=rng.normal(size=(3, 1)), C=rng.normal(size=(2, 3))),
                 LinearSsmLayer.hippo(3, B=rng.normal(size=(3, 2)), C=rng.normal(size=(1, 3)))]
        xs = rng.normal(size=(8, 1))

        def forward(X):
            for layer in stack:
                X = ssm_forward(layer, X)
            return X

        err = relative_error(ssm_jacobian(stack, 8, i), finite_difference_jacobian(forward, xs, 8, i))
        assert err < 1e-5

    @pytest.mark.parametrize("causal", [False, True])
    def test_attention_matches_finite_differences(self, causal):
        rng = make_rng(10)
        layer = random_attention(rng, 3, 2, causal=causal)
        xs = rng.normal(size=(4, 3))
        for t in range(1, 5):
            for i in range(1, 5):
                numeric = finite_difference_jacobian(lambda X: attention_forward(layer, X), xs, t, i)
                assert relative_error(attention_jacobian(layer, xs, t, i), numeric) < JACOBIAN_REL_TOL

    def test_hybrid_matches_finite_differences(self):
        rng = make_rng(11)
        block = random_hybrid(rng, d_in=2, m=3, d=3, d_k=2, layers=2)
        xs = rng.normal(size=(5, 2))
        numeric = finite_difference_jacobian(lambda X: hybrid_forward(block, X), xs, 5, 2)
        assert relative_error(hybrid_jacobian(block, xs, 5, 2), numeric) < JACOBIAN_REL_TOL


class TestSensitivity:
    def test_surrogate_telescopes(self):
        assert surrogate(7, 1) == 0.0
        assert surrogate(7, 4) == pytest.approx(3 / 28)
        values = [surrogate(15, i) for i in range(2, 16)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_stacked_surrogate_single_layer(self):
        assert stacked_surrogate(10, 4, 1) == pytest.approx(surrogate(9, 4))

    def test_single_layer_norms_non_decreasing(self):
        profile = sensitivity_profile(hippo_modal_stack(4, 1), 16)
        norms = profile.frame["norm"].tolist()
        assert all(b >= a - 1e-9 for a, b in zip(norms, norms[1:]))
        assert list(profile.frame.columns) == ["i", "norm", "surrogate", "ratio"]

    def test_profile_rows_stop_before_last_token(self):
        n = 12
        profile = sensitivity_profile(hippo_modal_stack(4, 1), n)
        assert profile.frame["i"].tolist() == list(range(2, n))
        ratios = profile.frame["ratio"]
        assert profile.ratio_band == pytest.approx(ratios.max() / ratios.min())

    def test_norms_shrink_with_depth(self):
        n = 16
        mid = [sensitivity_profile(hippo_modal_stack(4, L), n).frame.set_index("i").loc[n // 2, "norm"]
               for L in (1, 2, 3)]
        assert mid[0] > mid[1] > mid[2]

    def test_profile_needs_three_tokens(self):
        with pytest.raises(DimensionMismatchError):
            sensitivity_profile(hippo_modal_stack(2, 1), 2)


class TestAttentionSum:
    def test_zeros(self):
        assert count_via_attention_sum([0.0, 0.0, 0.0]) == 0.0

    def test_k3_triangle_scores(self):
        assert count_via_attention_sum([1 / 3] * 3) == pytest.approx(1.0)

    def test_empty(self):
        assert count_via_attention_sum([]) == 0.0
