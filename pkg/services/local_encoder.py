"""
Local encoding of tokens with a gated mean-aggregation message passer,
plus the per-node subgraph-count encoding used for motif counting
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import DEGREE_ONE_HOT_CAP
from models import EdgeToken, Graph, NodeToken, SubgraphToken, Tokenization
from services.errors import DimensionMismatchError, InvalidGraphError, TokenizationError
from services.graph_core import adjacency_mask, canonical_mask, diameter, khop_ball
from services.seq_models import count_via_attention_sum
from utils.rng import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EncoderParams:
    """
    Weights of the gated encoder

    W1, W2 have shape (d_local, d_in); the per-edge gate is
    sigmoid(gate_w . [h_v, h_u] + gate_b) with gate_w of length 2 * d_in.
    """
    W1: np.ndarray
    W2: np.ndarray
    gate_w: np.ndarray
    gate_b: float
    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise DimensionMismatchError(f"encoder depth must be >= 0, got {self.depth}")
        if self.W1.shape != self.W2.shape:
            raise DimensionMismatchError(f"W1 {self.W1.shape} and W2 {self.W2.shape} differ")
        if self.gate_w.shape != (2 * self.d_in,):
            raise DimensionMismatchError(f"gate weights need length {2 * self.d_in}, got {self.gate_w.shape}")
        if self.depth >= 2 and self.d_in != self.d_local:
            raise DimensionMismatchError(
                f"{self.depth} rounds need d_in == d_local, got {self.d_in} and {self.d_local}"
            )
        for name in ("W1", "W2", "gate_w"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DimensionMismatchError(f"{name} must be finite")

    @property
    def d_in(self) -> int:
        return self.W1.shape[1]

    @property
    def d_local(self) -> int:
        return self.W1.shape[0]


@dataclass(frozen=True, eq=False)
class EncodedSequence:
    """One vector per token of a tokenized sequence"""
    vectors: np.ndarray  # (tokens, d_local)
    provenance: str  # Fingerprint of the source graph


def default_features(g: Graph) -> np.ndarray:
    """One-hot of min(degree, DEGREE_ONE_HOT_CAP)"""
    deg = np.minimum(g.degrees(), DEGREE_ONE_HOT_CAP)
    X = np.zeros((g.n, DEGREE_ONE_HOT_CAP + 1), dtype=np.float64)
    X[np.arange(g.n), deg] = 1.0
    return X


def node_features(g: Graph) -> np.ndarray:
    X = g.feature_matrix()
    return X if X is not None else default_features(g)


def random_encoder_params(d_in: int, d_local: int, depth: int, seed: int) -> EncoderParams:
    rng = make_rng(seed)
    scale = 1.0 / np.sqrt(max(d_in, 1))
    return EncoderParams(
        W1=rng.normal(0.0, scale, size=(d_local, d_in)),
        W2=rng.normal(0.0, scale, size=(d_local, d_in)),
        gate_w=rng.normal(0.0, scale, size=2 * d_in),
        gate_b=float(rng.normal()),
        depth=depth,
    )


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def propagate(X: np.ndarray, neighbours: List[List[int]], params: EncoderParams) -> np.ndarray:
    """
    Run `depth` rounds of h'_v = relu(W1 h_v + mean_u gate(v, u) W2 h_u)

    depth 0 is the linear projection W1 x.
    """
    H = np.asarray(X, dtype=np.float64)
    if H.shape[1] != params.d_in:
        raise DimensionMismatchError(f"features have dimension {H.shape[1]}, encoder expects {params.d_in}")
    if params.depth == 0:
        return H @ params.W1.T

    d = params.d_in
    for _ in range(params.depth):
        messages = H @ params.W2.T
        self_term = H @ params.W1.T
        gate_self = H @ params.gate_w[:d]
        gate_other = H @ params.gate_w[d:]
        out = np.empty((H.shape[0], params.d_local))
        for v, nbrs in enumerate(neighbours):
            if nbrs:
                gates = _sigmoid(gate_self[v] + gate_other[nbrs] + params.gate_b)
                agg = (gates[:, None] * messages[nbrs]).mean(axis=0)
            else:
                agg = 0.0
            out[v] = np.maximum(self_term[v] + agg, 0.0)
        H = out
    return H


def encode_tokens(g: Graph, tok: Tokenization, params: EncoderParams) -> List[EncodedSequence]:
    """
    Vectorize every token of a tokenization

    Node tokens use their encoding on g; edge tokens average their endpoints;
    subgraph tokens average member encodings computed on the induced subgraph;
    empty markers are zero vectors.
    """
    fp = g.fingerprint()
    if tok.graph_fingerprint and tok.graph_fingerprint != fp:
        raise TokenizationError("tokenization was produced from a different graph")

    X = node_features(g)
    neighbour_sets = g.neighbour_sets()
    full = propagate(X, g.adjacency(), params)
    cache: Dict[Tuple[int, ...], np.ndarray] = {}

    def subgraph_vector(members: Tuple[int, ...]) -> np.ndarray:
        if members not in cache:
            local = {v: i for i, v in enumerate(members)}
            sub_neighbours = [sorted(local[w] for w in neighbour_sets[v] if w in local) for v in members]
            cache[members] = propagate(X[list(members)], sub_neighbours, params).mean(axis=0)
        return cache[members]

    out = []
    for seq in tok.sequences:
        rows = np.zeros((len(seq), params.d_local), dtype=np.float64)
        for j, token in enumerate(seq):
            if isinstance(token, NodeToken):
                if not 0 <= token.node < g.n:
                    raise TokenizationError(f"node token {token.node} outside 0..{g.n - 1}")
                rows[j] = full[token.node]
            elif isinstance(token, EdgeToken):
                if not 0 <= token.edge < g.num_edges:
                    raise TokenizationError(f"edge token {token.edge} outside 0..{g.num_edges - 1}")
                u, v = g.edges[token.edge]
                rows[j] = 0.5 * (full[u] + full[v])
            elif not token.empty:
                if token.subgraph[-1] >= g.n:
                    raise TokenizationError(f"subgraph token references node {token.subgraph[-1]} outside the graph")
                rows[j] = subgraph_vector(token.subgraph)
        out.append(EncodedSequence(vectors=rows, provenance=fp))
    logger.debug(f"🧮 encoded {len(out)} sequences ({len(cache)} distinct subgraphs)")
    return out


def subgraph_count_encoding(g: Graph, pattern: Graph, k: int) -> np.ndarray:
    """
    Per-node normalized count of induced pattern occurrences inside the k-hop ball

    s_i = #{V' within ball(i, k), i in V', G[V'] isomorphic to pattern} / |V(pattern)|,
    so the s_i sum to the exact number of occurrences in g.

    Raises:
        InvalidGraphError: pattern diameter exceeds k
    """
    size = pattern.n
    if diameter(pattern) > k:
        raise InvalidGraphError(f"pattern diameter {diameter(pattern)} exceeds hop radius {k}")
    target = canonical_mask(size, adjacency_mask(size, pattern.edges))
    neighbours = g.adjacency()
    neighbour_sets = [set(row) for row in neighbours]

    scores = np.zeros(g.n, dtype=np.float64)
    for i in range(g.n):
        others = [v for v in khop_ball(g, i, k, neighbours) if v != i]
        count = 0
        for rest in itertools.combinations(others, size - 1):
            subset = (i,) + rest
            local_edges = [
                (a, b)
                for a in range(size)
                for b in range(a + 1, size)
                if subset[b] in neighbour_sets[subset[a]]
            ]
            if len(local_edges) != pattern.num_edges:
                continue
            if canonical_mask(size, adjacency_mask(size, local_edges)) == target:
                count += 1
        scores[i] = count / size
    return scores


def motif_count(g: Graph, pattern: Graph, k: Optional[int] = None) -> int:
    """Occurrences of pattern via local count encoding then an attention sum"""
    k = diameter(pattern) if k is None else k
    total = count_via_attention_sum(subgraph_count_encoding(g, pattern, k))
    return int(round(total))
