"""
Graph tokenizers: node, edge, edge+node, k-hop and random-walk sequences,
node locality of edge orders, and the mixture-of-tokenization router
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models import EdgeToken, Graph, MotAssignment, NodeToken, RouterWeights, SubgraphToken, Tokenization
from services.errors import ConfigError, DimensionMismatchError, TokenizationError
from utils.rng import make_rng

logger = logging.getLogger(__name__)


def _check_permutation(order: Sequence[int], size: int, what: str) -> List[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(size)):
        raise TokenizationError(f"{what} must be a permutation of 0..{size - 1}")
    return order


def node_tokenize(g: Graph, node_order: Optional[Sequence[int]] = None) -> Tokenization:
    """One single-token sequence per node, in node-id order unless node_order is given"""
    order = list(range(g.n)) if node_order is None else _check_permutation(node_order, g.n, "node order")
    return Tokenization(
        tokenizer="node",
        params={},
        graph_fingerprint=g.fingerprint(),
        sequences=tuple((NodeToken(node=v),) for v in order),
    )


def edge_tokenize(g: Graph, order: Optional[Sequence[int]] = None) -> Tokenization:
    """
    A single sequence of edge tokens

    Args:
        g: Graph with at least one edge
        order: Permutation of edge indices (default: stored order)
    """
    if g.num_edges == 0:
        raise TokenizationError("edge tokenization of a graph without edges yields an empty sequence")
    order = list(range(g.num_edges)) if order is None else _check_permutation(order, g.num_edges, "edge order")
    params = {} if order == list(range(g.num_edges)) else {"order": order}
    return Tokenization(
        tokenizer="edge",
        params=params,
        graph_fingerprint=g.fingerprint(),
        sequences=(tuple(EdgeToken(edge=i) for i in order),),
    )


def edge_node_tokenize(g: Graph) -> Tokenization:
    """All node tokens followed by all edge tokens, as one sequence"""
    tokens = [NodeToken(node=v) for v in range(g.n)]
    tokens += [EdgeToken(edge=i) for i in range(g.num_edges)]
    return Tokenization(
        tokenizer="edge-node",
        params={},
        graph_fingerprint=g.fingerprint(),
        sequences=(tuple(tokens),),
    )


def hop_rings(g: Graph, v: int, K: int, neighbours: Optional[List[List[int]]] = None) -> List[Tuple[int, ...]]:
    """Exact-distance rings around v for hops 0..K (empty tuples where the ring is empty)"""
    neighbours = neighbours if neighbours is not None else g.adjacency()
    rings = [(v,)]
    seen = {v}
    frontier = [v]
    for _ in range(K):
        ring = set()
        for u in frontier:
            for w in neighbours[u]:
                if w not in seen:
                    ring.add(w)
        seen |= ring
        frontier = sorted(ring)
        rings.append(tuple(frontier))
    return rings


def khop_tokenize(g: Graph, K: int) -> Tokenization:
    """
    Per node: [hop-0 ring, hop-1 ring, ..., hop-K ring]

    Empty rings become an empty-marker token holding only the centre node, so
    every sequence has length K + 1.
    """
    if K < 0:
        raise TokenizationError(f"hop count must be >= 0, got {K}")
    neighbours = g.adjacency()
    sequences = []
    for v in range(g.n):
        tokens = []
        for ring in hop_rings(g, v, K, neighbours):
            if ring:
                tokens.append(SubgraphToken(subgraph=ring))
            else:
                tokens.append(SubgraphToken(subgraph=(v,), empty=True))
        sequences.append(tuple(tokens))
    return Tokenization(
        tokenizer="khop",
        params={"k": K},
        graph_fingerprint=g.fingerprint(),
        sequences=tuple(sequences),
    )


def random_walk_tokenize(g: Graph, walk_len: int, walks_per_node: int, seed: int) -> Tokenization:
    """
    Uniform random walks, walks_per_node from each node in node-major order

    A walk stuck on an isolated node repeats that node.
    """
    if walk_len < 1:
        raise TokenizationError(f"walk length must be >= 1, got {walk_len}")
    if walks_per_node < 1:
        raise TokenizationError(f"walks per node must be >= 1, got {walks_per_node}")
    rng = make_rng(seed)
    neighbours = g.adjacency()
    sequences = []
    for start in range(g.n):
        for _ in range(walks_per_node):
            walk = [start]
            while len(walk) < walk_len:
                options = neighbours[walk[-1]]
                walk.append(options[int(rng.integers(len(options)))] if options else walk[-1])
            sequences.append(tuple(NodeToken(node=v) for v in walk))
    return Tokenization(
        tokenizer="random-walk",
        params={"walk_len": walk_len, "walks_per_node": walks_per_node, "seed": seed},
        graph_fingerprint=g.fingerprint(),
        sequences=tuple(sequences),
    )


def node_locality_of_edges(edges: Sequence[Tuple[int, int]]) -> int:
    """Max over nodes of (last position - first position) among the edges touching it"""
    first = {}
    span = 0
    for position, (u, v) in enumerate(edges):
        for x in (u, v):
            if x not in first:
                first[x] = position
            else:
                span = max(span, position - first[x])
    return span


def node_locality(g: Graph, edge_order: Optional[Sequence[int]] = None) -> int:
    """Node locality of g's edges taken in edge_order (default: stored order)"""
    if edge_order is None:
        return node_locality_of_edges(g.edges)
    order = _check_permutation(edge_order, g.num_edges, "edge order")
    return node_locality_of_edges([g.edges[i] for i in order])


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def router_scores(features: np.ndarray, weights: RouterWeights) -> np.ndarray:
    """S = sigmoid(X W_r)"""
    X = np.asarray(features, dtype=np.float64)
    W = np.asarray(weights.weights, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != W.shape[0]:
        raise DimensionMismatchError(f"features of shape {X.shape} do not match router weights {W.shape}")
    return _sigmoid(X @ W)


def mot_route(features: np.ndarray, weights: RouterWeights, candidates: Sequence[str]) -> MotAssignment:
    """
    Pick the top-2 candidate tokenizers per node

    Ties go to the lower candidate index.

    Raises:
        ConfigError: fewer than 2 candidates or candidate count differs from the router width
        DimensionMismatchError: feature dimension differs from the router input size
    """
    candidates = tuple(candidates)
    if len(candidates) < 2:
        raise ConfigError(f"mixture of tokenization needs at least 2 candidates, got {len(candidates)}")
    if weights.shape[1] != len(candidates):
        raise ConfigError(f"router has {weights.shape[1]} outputs but {len(candidates)} candidates were given")
    scores = router_scores(features, weights)
    ranked = np.argsort(-scores, axis=1, kind="stable")
    top2 = tuple((int(row[0]), int(row[1])) for row in ranked)
    return MotAssignment(candidates=candidates, top2=top2)


def mot_concatenate(
    assignment: MotAssignment,
    encodings: Sequence[np.ndarray],
    projection: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Concatenate each node's two routed encodings

    Args:
        assignment: Router output
        encodings: Per candidate, an (n, d) matrix of per-node encodings
        projection: Optional (2d, d_out) matrix applied to the concatenation

    Returns:
        (n, 2d) matrix, or (n, d_out) when projected
    """
    if len(encodings) != len(assignment.candidates):
        raise DimensionMismatchError(f"expected {len(assignment.candidates)} encoding matrices, got {len(encodings)}")
    mats = [np.asarray(e, dtype=np.float64) for e in encodings]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"candidate encodings have different shapes {sorted(shapes)}")
    n = mats[0].shape[0]
    if n != len(assignment.top2):
        raise DimensionMismatchError(f"{n} encoded nodes but {len(assignment.top2)} routed nodes")
    out = np.stack([np.concatenate([mats[a][v], mats[b][v]]) for v, (a, b) in enumerate(assignment.top2)])
    if projection is not None:
        P = np.asarray(projection, dtype=np.float64)
        if P.shape[0] != out.shape[1]:
            raise DimensionMismatchError(f"projection expects {P.shape[0]} inputs, got {out.shape[1]}")
        out = out @ P
    return out
