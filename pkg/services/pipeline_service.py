"""
End-to-end pipeline behind `run`: generate instances, push them through the
constructive models and score every answer against the exact oracle
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import MOT_CANDIDATES
from models import Graph, LayerSpec, MetricRow, MotAssignment, PipelineConfig, StreamReport, Tokenization
from services.connectivity_stream import edge_order_from_node_order, hybrid_connectivity, run_stream
from services.errors import ConfigError
from services.graph_core import (
    generate,
    generate_erdos_renyi,
    generate_factored,
    is_connected,
    oracle,
    pattern_graph,
    count_induced_subgraphs,
)
from services.hac import bfs_tokenize, build_hac, dfs_tokenize, edge_costs_from_features
from services.local_encoder import default_features, encode_tokens, motif_count, node_features, random_encoder_params
from services.seq_models import (
    AttentionLayer,
    HybridBlock,
    LinearSsmLayer,
    average_pool,
    color_count_construction,
    count_colors,
    hybrid_forward,
    random_attention,
)
from services.tokenizers import khop_tokenize, mot_concatenate, node_locality, node_tokenize
from utils.naming import require_name
from utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

RUN_TASKS = ("color_counts", "triangle_count", "motif", "connectivity", "hybrid_connectivity", "embedding")


@dataclass
class InstanceOutcome:
    correct: bool
    window: int = 0
    stream: Optional[StreamReport] = None  # Set by the streaming connectivity task


@dataclass
class PipelineResult:
    rows: List[MetricRow]
    stream_reports: List[StreamReport]


@dataclass(frozen=True, eq=False)
class EmbeddingResult:
    vector: np.ndarray
    layers: List[Union[LinearSsmLayer, AttentionLayer]]
    provenance: str


def hac_costs(g: Graph, metric: str = "euclidean") -> np.ndarray:
    """Edge costs from the graph's features, or from degree one-hots when it has none"""
    if g.features is None:
        g = g.with_features(default_features(g))
    return edge_costs_from_features(g, metric)


def build_global_encoder(specs: Sequence[LayerSpec], d: int, seed: int) -> HybridBlock:
    """
    Random hybrid block from layer specs: any number of SSM layers, then exactly one attention layer

    Raises:
        ConfigError: attention missing, repeated or not last; unknown layer kind
    """
    kinds = [spec.kind for spec in specs]
    for kind in kinds:
        require_name(kind, ("lti", "hippo", "attention"), "layer kind")
    if not kinds or kinds[-1] != "attention" or kinds.count("attention") != 1:
        raise ConfigError(f"model must end in exactly one attention layer, got {kinds}")

    rng = make_rng(seed)
    ssm = []
    for spec in specs[:-1]:
        m = spec.state_width
        if m < 1:
            raise ConfigError(f"state width must be >= 1, got {m}")
        B = rng.normal(size=(m, d))
        C = rng.normal(size=(d, m)) / np.sqrt(m)
        if spec.kind == "hippo":
            ssm.append(LinearSsmLayer.hippo(m, B=B, C=C))
        else:
            A = np.diag(rng.uniform(0.5, 0.95, size=m))
            ssm.append(LinearSsmLayer.lti(A, B, C))
    attn = random_attention(rng, d, d, causal=specs[-1].causal)
    return HybridBlock(ssm_layers=tuple(ssm), attn=attn)


def _instance_graph(config: PipelineConfig, index: int) -> Graph:
    return generate(config.generator, derive_seed(config.seed, index), **config.generator_params)


def _color_counts(config: PipelineConfig, index: int) -> InstanceOutcome:
    if config.colors < 1:
        raise ConfigError(f"color_counts needs at least one color, got {config.colors}")
    rng = make_rng(derive_seed(config.seed, index, 1))
    g = _instance_graph(config, index)
    g = g.with_colors(rng.integers(config.colors, size=g.n))
    order = rng.permutation(g.n)
    counts = count_colors(color_count_construction(config.colors), [g.colors[v] for v in order])
    expected = oracle(g, "color_counts", num_colors=config.colors).value
    return InstanceOutcome(correct=tuple(int(round(x)) for x in counts) == expected)


def _motif(config: PipelineConfig, index: int) -> InstanceOutcome:
    g = _instance_graph(config, index)
    pattern = pattern_graph(config.pattern)
    if config.task == "triangle_count":
        if config.pattern != "triangle":
            raise ConfigError(f"triangle_count counts triangles, not '{config.pattern}'")
        expected = oracle(g, "triangle_count").value
    else:
        expected = count_induced_subgraphs(g, pattern)
    return InstanceOutcome(correct=motif_count(g, pattern) == expected)


def _connectivity(config: PipelineConfig, index: int) -> InstanceOutcome:
    g = _instance_graph(config, index)
    tree = build_hac(g, hac_costs(g))
    order = edge_order_from_node_order(g, tree.leaf_order)
    k = node_locality(g, order)
    report = run_stream([g.edges[i] for i in order], k, strict=True, num_nodes=g.n)
    correct = not report.violations and report.connected == is_connected(g)
    return InstanceOutcome(correct=correct, window=report.max_window, stream=report)


def _hybrid(config: PipelineConfig, index: int) -> InstanceOutcome:
    params = config.generator_params
    kernel_n = int(params.get("n", 5))
    n_prime = int(params.get("n_prime", 8))
    k = int(params.get("k", 2))
    seed = derive_seed(config.seed, index)
    kernel = generate_erdos_renyi(kernel_n, float(params.get("p", 0.4)), seed)
    g, order = generate_factored(kernel, n_prime, k, derive_seed(seed, 1))
    answer = hybrid_connectivity(g, order, k, n_prime, kernel_n=kernel.n)
    return InstanceOutcome(correct=answer == is_connected(g), window=k + 1)


TASK_RUNNERS: Dict[str, Tuple[str, Callable[[PipelineConfig, int], InstanceOutcome]]] = {
    "color_counts": ("ssm-color-count", _color_counts),
    "triangle_count": ("local-count+attention-sum", _motif),
    "motif": ("local-count+attention-sum", _motif),
    "connectivity": ("stream-hac-bfs", _connectivity),
    "hybrid_connectivity": ("stream+reachability", _hybrid),
}


def execute_pipeline(config: PipelineConfig) -> PipelineResult:
    """
    Score one task over config.instances seeded instances

    Returns:
        A single metrics row (wall_time_s only when config.timing is set) plus,
        for the connectivity task, the stream report of every instance
    """
    require_name(config.task, RUN_TASKS, "task")
    if config.task == "embedding":
        raise ConfigError("the embedding task produces a vector, use run_embedding")
    if config.instances < 1:
        raise ConfigError(f"instances must be >= 1, got {config.instances}")

    method, runner = TASK_RUNNERS[config.task]
    logger.info(f"🚀 {config.task}: {config.instances} instances via {method}")
    started = time.perf_counter()
    outcomes = [runner(config, index) for index in range(config.instances)]
    elapsed = time.perf_counter() - started

    hits = sum(o.correct for o in outcomes)
    if hits < len(outcomes):
        logger.warning(f"⚠️ {config.task}: {len(outcomes) - hits} of {len(outcomes)} instances disagree with the oracle")
    else:
        logger.info(f"✅ {config.task}: all {len(outcomes)} instances exact")
    row = MetricRow(
        task=config.task,
        method=method,
        instances=len(outcomes),
        exact_match_rate=hits / len(outcomes),
        peak_window=max(o.window for o in outcomes),
        wall_time_s=round(elapsed, 6) if config.timing else None,
    )
    return PipelineResult(rows=[row], stream_reports=[o.stream for o in outcomes if o.stream is not None])


def run_pipeline(config: PipelineConfig) -> List[MetricRow]:
    return execute_pipeline(config).rows


def run_embedding(config: PipelineConfig) -> EmbeddingResult:
    """
    Graph embedding: HAC-BFS tokens -> local encoder -> hybrid block per level -> average pool
    """
    g = _instance_graph(config, 0)
    tree = build_hac(g, hac_costs(g))
    tok = bfs_tokenize(tree, g.fingerprint())
    d_in = g.feature_dim if g.feature_dim is not None else default_features(g).shape[1]
    params = random_encoder_params(d_in, config.encoder.d_local, config.encoder.depth, derive_seed(config.seed, 1))
    encoded = encode_tokens(g, tok, params)
    block = build_global_encoder(config.model, config.encoder.d_local, derive_seed(config.seed, 2))
    vector = average_pool([hybrid_forward(block, seq.vectors) for seq in encoded])
    logger.info(f"✅ embedded graph n={g.n} over {len(encoded)} HAC levels into {vector.shape[0]} dims")
    return EmbeddingResult(vector=vector, layers=[*block.ssm_layers, block.attn], provenance=g.fingerprint())


def candidate_tokenization(g: Graph, name: str, k: int = 2, metric: str = "euclidean") -> Tokenization:
    """One of the per-node tokenizers the router chooses between; sequence v belongs to node v"""
    require_name(name, MOT_CANDIDATES, "mot candidate")
    if name == "node":
        return node_tokenize(g)
    if name == "khop":
        return khop_tokenize(g, k)
    return dfs_tokenize(build_hac(g, hac_costs(g, metric)), g.fingerprint())


def mot_encode(
    g: Graph,
    assignment: MotAssignment,
    d_local: int,
    depth: int,
    seed: int,
    k: int = 2,
    metric: str = "euclidean",
    projection: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Per-node mixture-of-tokenization vectors

    Every candidate is tokenized and locally encoded with the same parameters,
    each node's sequence is mean-pooled, and the router's two picks are concatenated.
    """
    params = random_encoder_params(node_features(g).shape[1], d_local, depth, seed)
    per_candidate = []
    for name in assignment.candidates:
        encoded = encode_tokens(g, candidate_tokenization(g, name, k, metric), params)
        per_candidate.append(np.stack([seq.vectors.mean(axis=0) for seq in encoded]))
    out = mot_concatenate(assignment, per_candidate, projection)
    logger.info(f"✅ mot: {g.n} nodes, {len(assignment.candidates)} candidates -> {out.shape[1]} dims")
    return out
