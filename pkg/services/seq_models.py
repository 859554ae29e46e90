"""
Global sequence encoders: linear SSMs (LTI and time-varying HiPPO-LegS),
softmax attention and the SSM+attention hybrid block, with analytic and
finite-difference Jacobians, sensitivity profiles and the constructive
color-counting / summation models
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import FINITE_DIFF_STEP, WITNESS_OUTPUT_TOL
from services.errors import DimensionMismatchError, InvalidGraphError

logger = logging.getLogger(__name__)

SSM_MODES = ("lti", "hippo")


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------

def hippo_legs_matrix(m: int) -> np.ndarray:
    """HiPPO-LegS state matrix: sqrt((2n+1)(2k+1)) below the diagonal, n+1 on it, 0 above"""
    idx = np.arange(m)
    A = np.sqrt(np.outer(2 * idx + 1, 2 * idx + 1))
    A = np.tril(A, k=-1) + np.diag(idx + 1.0)
    return A


@dataclass(frozen=True, eq=False)
class LinearSsmLayer:
    """
    h_t = A h_{t-1} + B x_t (lti) or h_t = (I - A/t) h_{t-1} + (B/t) x_t (hippo),
    y_t = C h_t, h_0 = 0, t counted from 1
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    mode: str = "lti"

    def __post_init__(self):
        if self.mode not in SSM_MODES:
            raise DimensionMismatchError(f"unknown SSM mode '{self.mode}'")
        m = self.A.shape[0]
        if self.A.shape != (m, m) or self.B.ndim != 2 or self.B.shape[0] != m or self.C.ndim != 2 or self.C.shape[1] != m:
            raise DimensionMismatchError(
                f"SSM shapes do not chain: A {self.A.shape}, B {self.B.shape}, C {self.C.shape}"
            )
        if not all(np.all(np.isfinite(x)) for x in (self.A, self.B, self.C)):
            raise DimensionMismatchError("SSM weights must be finite")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def d_in(self) -> int:
        return self.B.shape[1]

    @property
    def d_out(self) -> int:
        return self.C.shape[0]

    @classmethod
    def lti(cls, A, B, C) -> "LinearSsmLayer":
        return cls(np.asarray(A, dtype=np.float64), np.asarray(B, dtype=np.float64), np.asarray(C, dtype=np.float64), "lti")

    @classmethod
    def hippo(cls, m: int, B=None, C=None) -> "LinearSsmLayer":
        """LegS layer; B defaults to the LegS input vector sqrt(2n+1), C to the identity"""
        if B is None:
            B = np.sqrt(2 * np.arange(m) + 1.0).reshape(m, 1)
        if C is None:
            C = np.eye(m)
        return cls(hippo_legs_matrix(m), np.asarray(B, dtype=np.float64), np.asarray(C, dtype=np.float64), "hippo")


@dataclass(frozen=True, eq=False)
class AttentionLayer:
    """Single-head softmax attention on row vectors: softmax(Q K^T / sqrt(d_k)) V"""
    W_Q: np.ndarray  # (d, d_k)
    W_K: np.ndarray  # (d, d_k)
    W_V: np.ndarray  # (d, d_v)
    causal: bool = False
    pe: Optional[np.ndarray] = None  # (T, d) added to the inputs

    def __post_init__(self):
        d = self.W_Q.shape[0]
        if self.W_K.shape != self.W_Q.shape or self.W_V.shape[0] != d:
            raise DimensionMismatchError(
                f"attention shapes do not chain: W_Q {self.W_Q.shape}, W_K {self.W_K.shape}, W_V {self.W_V.shape}"
            )
        if self.pe is not None and (self.pe.ndim != 2 or self.pe.shape[1] != d):
            raise DimensionMismatchError(f"positional encodings need width {d}, got {self.pe.shape}")

    @property
    def d(self) -> int:
        return self.W_Q.shape[0]

    @property
    def d_k(self) -> int:
        return self.W_Q.shape[1]

    @property
    def d_v(self) -> int:
        return self.W_V.shape[1]


@dataclass(frozen=True, eq=False)
class HybridBlock:
    """SSM layers followed by one attention layer"""
    ssm_layers: Tuple[LinearSsmLayer, ...]
    attn: AttentionLayer

    def __post_init__(self):
        for first, second in zip(self.ssm_layers, self.ssm_layers[1:]):
            if first.d_out != second.d_in:
                raise DimensionMismatchError(f"SSM output {first.d_out} does not feed SSM input {second.d_in}")
        if self.ssm_layers and self.ssm_layers[-1].d_out != self.attn.d:
            raise DimensionMismatchError(
                f"last SSM output {self.ssm_layers[-1].d_out} does not match attention width {self.attn.d}"
            )


def _as_sequence(xs, d_in: int) -> np.ndarray:
    X = np.asarray(xs, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[0] == 0:
        raise DimensionMismatchError("input sequence is empty")
    if X.shape[1] != d_in:
        raise DimensionMismatchError(f"inputs have width {X.shape[1]}, layer expects {d_in}")
    return X


# ---------------------------------------------------------------------------
# Forward passes
# ---------------------------------------------------------------------------

def ssm_forward(layer: LinearSsmLayer, xs) -> np.ndarray:
    """Evaluate the recurrence exactly; returns (T, d_out)"""
    X = _as_sequence(xs, layer.d_in)
    eye = np.eye(layer.m)
    h = np.zeros(layer.m)
    ys = np.empty((X.shape[0], layer.d_out))
    for t, x in enumerate(X, start=1):
        if layer.mode == "hippo":
            h = (eye - layer.A / t) @ h + (layer.B @ x) / t
        else:
            h = layer.A @ h + layer.B @ x
        ys[t - 1] = layer.C @ h
    return ys


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def attention_weights(layer: AttentionLayer, xs) -> np.ndarray:
    """Row-stochastic attention matrix; causal rows only see positions <= their own"""
    X = _with_pe(layer, _as_sequence(xs, layer.d))
    Q, K = X @ layer.W_Q, X @ layer.W_K
    scale = np.sqrt(layer.d_k)
    T = X.shape[0]
    if not layer.causal:
        return _softmax(Q @ K.T / scale)
    weights = np.zeros((T, T))
    for t in range(T):
        weights[t, : t + 1] = _softmax(K[: t + 1] @ Q[t] / scale)
    return weights


def _with_pe(layer: AttentionLayer, X: np.ndarray) -> np.ndarray:
    if layer.pe is None:
        return X
    if layer.pe.shape[0] < X.shape[0]:
        raise DimensionMismatchError(f"{layer.pe.shape[0]} positional encodings for {X.shape[0]} tokens")
    return X + layer.pe[: X.shape[0]]


def attention_forward(layer: AttentionLayer, xs) -> np.ndarray:
    """
    Exact softmax attention; returns (T, d_v)

    Causal rows are computed from their own prefix only, so later tokens
    cannot change earlier outputs.
    """
    X = _with_pe(layer, _as_sequence(xs, layer.d))
    if not layer.causal:
        return attention_weights(layer, xs) @ (X @ layer.W_V)
    Q, K, V = X @ layer.W_Q, X @ layer.W_K, X @ layer.W_V
    scale = np.sqrt(layer.d_k)
    out = np.empty((X.shape[0], layer.d_v))
    for t in range(X.shape[0]):
        out[t] = _softmax(K[: t + 1] @ Q[t] / scale) @ V[: t + 1]
    return out


def hybrid_forward(block: HybridBlock, xs) -> np.ndarray:
    Z = np.asarray(xs, dtype=np.float64)
    for layer in block.ssm_layers:
        Z = ssm_forward(layer, Z)
    return attention_forward(block.attn, Z)


def average_pool(sequences: Sequence[np.ndarray]) -> np.ndarray:
    """Mean over each sequence's tokens, then mean over sequences"""
    if not sequences:
        raise DimensionMismatchError("nothing to pool")
    means = [np.asarray(s, dtype=np.float64).mean(axis=0) for s in sequences]
    if len({m.shape for m in means}) != 1:
        raise DimensionMismatchError("pooled sequences have different widths")
    return np.mean(means, axis=0)


# ---------------------------------------------------------------------------
# Jacobians
# ---------------------------------------------------------------------------

def ssm_jacobian_blocks(layer: LinearSsmLayer, n: int) -> np.ndarray:
    """
    All blocks dy_t/dx_k of one layer, shape (n, n, d_out, d_in), 0-indexed, zero above the diagonal

    hippo: C (I - A/t) ... (I - A/(k+1)) B/k; lti: C A^(t-k) B
    """
    eye = np.eye(layer.m)
    J = np.zeros((n, n, layer.d_out, layer.d_in))
    for k in range(1, n + 1):
        P = layer.B / k if layer.mode == "hippo" else layer.B.copy()
        J[k - 1, k - 1] = layer.C @ P
        for t in range(k + 1, n + 1):
            P = (eye - layer.A / t) @ P if layer.mode == "hippo" else layer.A @ P
            J[t - 1, k - 1] = layer.C @ P
    return J


def _chain(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Chain rule over intermediate positions: sum_j outer[t, j] @ inner[j, i]"""
    return np.einsum("tjab,jibc->tiac", outer, inner)


def stack_jacobian_blocks(stack: Sequence[LinearSsmLayer], n: int) -> np.ndarray:
    if not stack:
        raise DimensionMismatchError("layer stack is empty")
    for first, second in zip(stack, stack[1:]):
        if first.d_out != second.d_in:
            raise DimensionMismatchError(f"layer output {first.d_out} does not feed input {second.d_in}")
    J = ssm_jacobian_blocks(stack[0], n)
    for layer in stack[1:]:
        J = _chain(ssm_jacobian_blocks(layer, n), J)
    return J


def ssm_jacobian(stack: Sequence[LinearSsmLayer], n: int, i: int) -> np.ndarray:
    """
    Jacobian of the stack's output after n tokens with respect to token i (1-based)

    Returns:
        (d_out, d_in) matrix
    """
    if not 1 <= i <= n:
        raise DimensionMismatchError(f"position {i} outside 1..{n}")
    return stack_jacobian_blocks(stack, n)[n - 1, i - 1]


def attention_jacobian(layer: AttentionLayer, xs, t: int, i: int) -> np.ndarray:
    """
    Analytic dy_t/dx_i (1-based), shape (d_v, d)

    a_ti W_V^T + a_ti (v_i - y_t)(W_K q_t)^T / sqrt(d_k)
    + [t == i] sum_l a_tl (v_l - y_t)(W_Q k_l)^T / sqrt(d_k)
    """
    X = _with_pe(layer, _as_sequence(xs, layer.d))
    T = X.shape[0]
    if not (1 <= t <= T and 1 <= i <= T):
        raise DimensionMismatchError(f"positions ({t}, {i}) outside 1..{T}")
    t0, i0 = t - 1, i - 1
    J = np.zeros((layer.d_v, layer.d))
    if layer.causal and i0 > t0:
        return J
    visible = t0 + 1 if layer.causal else T
    Q, K, V = X @ layer.W_Q, X @ layer.W_K, X @ layer.W_V
    scale = np.sqrt(layer.d_k)
    a = _softmax(K[:visible] @ Q[t0] / scale)
    y = a @ V[:visible]
    if i0 < visible:
        J += a[i0] * layer.W_V.T
        J += a[i0] * np.outer(V[i0] - y, layer.W_K @ Q[t0]) / scale
    if i0 == t0:
        for l in range(visible):
            J += a[l] * np.outer(V[l] - y, layer.W_Q @ K[l]) / scale
    return J


def hybrid_jacobian(block: HybridBlock, xs, t: int, i: int) -> np.ndarray:
    """dy_t/dx_i through the linear SSM layers and the attention layer"""
    X = np.asarray(xs, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    T = X.shape[0]
    Z = X
    for layer in block.ssm_layers:
        Z = ssm_forward(layer, Z)
    if not block.ssm_layers:
        return attention_jacobian(block.attn, Z, t, i)
    inner = stack_jacobian_blocks(block.ssm_layers, T)
    J = np.zeros((block.attn.d_v, X.shape[1]))
    for j in range(i, T + 1):
        J += attention_jacobian(block.attn, Z, t, j) @ inner[j - 1, i - 1]
    return J


def finite_difference_jacobian(fn: Callable[[np.ndarray], np.ndarray], xs, t: int, i: int,
                               step: float = FINITE_DIFF_STEP) -> np.ndarray:
    """Central-difference dy_t/dx_i (1-based) of a sequence-to-sequence map"""
    X = np.asarray(xs, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    d_out = np.asarray(fn(X)).shape[1]
    J = np.zeros((d_out, X.shape[1]))
    for c in range(X.shape[1]):
        plus, minus = X.copy(), X.copy()
        plus[i - 1, c] += step
        minus[i - 1, c] -= step
        J[:, c] = (fn(plus)[t - 1] - fn(minus)[t - 1]) / (2 * step)
    return J


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)


# ---------------------------------------------------------------------------
# Sensitivity
# ---------------------------------------------------------------------------

def surrogate(k: int, i: int) -> float:
    """Telescoped scalar product (1 - 1/k)(1 - 1/(k-1))...(1 - 1/i) / i = (i - 1) / (i k), for 1 <= i <= k + 1"""
    if not 1 <= i <= k + 1:
        raise DimensionMismatchError(f"surrogate needs 1 <= i <= k + 1, got k={k}, i={i}")
    if k == 0:
        return 0.0
    return (i - 1) / (i * k)


def stacked_surrogate(n: int, i: int, L: int) -> float:
    """Chain-rule sum of scalar surrogates over L layers, readout after n tokens"""
    if L < 1:
        raise DimensionMismatchError(f"need at least one layer, got {L}")
    prev = {t: surrogate(t - 1, i) for t in range(i, n + 1)}
    for _ in range(L - 1):
        prev = {t: sum(surrogate(t - 1, j) * prev[j] for j in range(i, t + 1)) for t in range(i, n + 1)}
    return prev[n]


def hippo_modal_stack(m: int, L: int) -> List[LinearSsmLayer]:
    """
    L LegS layers expressed in the LegS eigenbasis

    The first layer reads a scalar through B = V 1, later layers read the
    previous layer's modal coordinates through B = V; every readout is C = V^-1.
    Each mode then evolves independently and its sensitivity to token i is
    non-negative and non-decreasing in i.
    """
    A = hippo_legs_matrix(m)
    _, V = np.linalg.eig(A)
    V = np.real(V)
    V_inv = np.linalg.inv(V)
    stack = [LinearSsmLayer(A, V @ np.ones((m, 1)), V_inv, "hippo")]
    for _ in range(L - 1):
        stack.append(LinearSsmLayer(A, V.copy(), V_inv, "hippo"))
    return stack


@dataclass(frozen=True, eq=False)
class SensitivityProfile:
    """Jacobian norms for positions 2..n-1 with the surrogate and their ratio"""
    n: int
    layers: int
    frame: pd.DataFrame = field(repr=False)  # columns: i, norm, surrogate, ratio
    first_token_norm: float  # Measured for i = 1, where the surrogate vanishes

    @property
    def ratio_band(self) -> float:
        ratios = self.frame["ratio"].to_numpy()
        return float(ratios.max() / ratios.min())


def sensitivity_profile(stack: Sequence[LinearSsmLayer], n: int) -> SensitivityProfile:
    """Spectral norms of the output-after-n Jacobian for every input position"""
    if n < 3:
        raise DimensionMismatchError(f"sensitivity profile needs n >= 3, got {n}")
    J = stack_jacobian_blocks(stack, n)
    norms = [float(np.linalg.norm(J[n - 1, i - 1], ord=2)) for i in range(1, n + 1)]
    rows = []
    for i in range(2, n):
        base = surrogate(n - 1, i)
        rows.append({"i": i, "norm": norms[i - 1], "surrogate": base, "ratio": norms[i - 1] / base})
    return SensitivityProfile(n=n, layers=len(stack), frame=pd.DataFrame(rows), first_token_norm=norms[0])


# ---------------------------------------------------------------------------
# Constructive models
# ---------------------------------------------------------------------------

def color_count_construction(num_colors: int) -> LinearSsmLayer:
    """Width-C LTI layer with A = B = C = I: fed one-hot colors, the output is the running color histogram"""
    if num_colors < 1:
        raise DimensionMismatchError(f"need at least one color, got {num_colors}")
    eye = np.eye(num_colors)
    return LinearSsmLayer.lti(eye, eye, eye)


def one_hot_colors(colors: Sequence[int], num_colors: int) -> np.ndarray:
    colors = np.asarray(colors, dtype=np.int64)
    if colors.size and (colors.min() < 0 or colors.max() >= num_colors):
        raise InvalidGraphError(f"colors must lie in 0..{num_colors - 1}")
    X = np.zeros((colors.size, num_colors))
    X[np.arange(colors.size), colors] = 1.0
    return X


def count_colors(layer: LinearSsmLayer, colors: Sequence[int]) -> np.ndarray:
    """Final output of the layer on a one-hot color sequence"""
    return ssm_forward(layer, one_hot_colors(colors, layer.d_in))[-1]


@dataclass(frozen=True, eq=False)
class UndercountWitness:
    """Two colorings with different histograms whose narrow-layer outputs coincide"""
    first: Tuple[int, ...]
    second: Tuple[int, ...]
    output: Tuple[float, ...]


def find_undercount_witness(num_colors: int, max_len: int, B: Optional[np.ndarray] = None) -> Optional[UndercountWitness]:
    """
    Search colorings of length 1..max_len for a collision of a width C-1 layer

    The layer uses A = I and C = I with the given (C-1) x C input matrix B
    (default: the identity with its last column dropped).
    """
    if num_colors < 2:
        raise DimensionMismatchError("a width C-1 layer needs C >= 2")
    m = num_colors - 1
    B = np.eye(m, num_colors) if B is None else np.asarray(B, dtype=np.float64)
    if B.shape != (m, num_colors):
        raise DimensionMismatchError(f"B must have shape ({m}, {num_colors}), got {B.shape}")
    layer = LinearSsmLayer.lti(np.eye(m), B, np.eye(m))

    # Outputs bucketed on a coarse grid; exact tolerance is checked inside a bucket
    seen: Dict[Tuple[float, ...], List[Tuple[np.ndarray, Tuple[int, ...], Tuple[int, ...]]]] = {}
    for length in range(1, max_len + 1):
        for coloring in itertools.product(range(num_colors), repeat=length):
            output = count_colors(layer, coloring)
            hist = tuple(int(x) for x in np.bincount(coloring, minlength=num_colors))
            bucket = seen.setdefault(tuple(np.round(output, 6)), [])
            for other_output, other, other_hist in bucket:
                if other_hist != hist and np.max(np.abs(other_output - output)) <= WITNESS_OUTPUT_TOL:
                    logger.debug(f"🔍 undercount witness: {other} vs {coloring}")
                    return UndercountWitness(first=other, second=coloring, output=tuple(float(x) for x in output))
            bucket.append((output, coloring, hist))
    return None


def count_via_attention_sum(scores: Sequence[float]) -> float:
    """
    Sum per-token scalars with one uniform-attention head

    Zero query/key weights make every attention row uniform, so each output is
    the mean of the values; multiplying by the length recovers the sum.
    """
    values = np.asarray(scores, dtype=np.float64).reshape(-1, 1)
    if values.shape[0] == 0:
        return 0.0
    if not np.all(np.isfinite(values)):
        raise DimensionMismatchError("scores must be finite")
    head = AttentionLayer(W_Q=np.zeros((1, 1)), W_K=np.zeros((1, 1)), W_V=np.eye(1))
    return float(attention_forward(head, values)[-1, 0] * values.shape[0])


# ---------------------------------------------------------------------------
# Random layers
# ---------------------------------------------------------------------------

def random_attention(rng: np.random.Generator, d: int, d_k: int, d_v: Optional[int] = None,
                     causal: bool = False) -> AttentionLayer:
    d_v = d if d_v is None else d_v
    return AttentionLayer(
        W_Q=rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, d_k)),
        W_K=rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, d_k)),
        W_V=rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, d_v)),
        causal=causal,
    )


def random_hybrid(rng: np.random.Generator, d_in: int, m: int, d: int, d_k: int, layers: int = 2) -> HybridBlock:
    """Hybrid block of `layers` hippo layers (random B, C) and one attention layer"""
    ssm = []
    width = d_in
    for _ in range(layers):
        ssm.append(LinearSsmLayer.hippo(m, B=rng.normal(size=(m, width)), C=rng.normal(size=(d, m)) / np.sqrt(m)))
        width = d
    return HybridBlock(ssm_layers=tuple(ssm), attn=random_attention(rng, d, d_k))
