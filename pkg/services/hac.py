"""
Hierarchical affinity clustering (Boruvka rounds), HAC-tree tokenizations
and hierarchical positional encodings
"""

import logging
from collections import deque
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from config import UNREACHABLE
from models import Graph, HacNode, HacTree, SubgraphToken, Tokenization
from services.errors import DimensionMismatchError, InvalidGraphError, MissingDataError
from utils.disjoint_set import DisjointSet
from utils.naming import require_name

logger = logging.getLogger(__name__)

COST_METRICS = ("euclidean", "neg_cosine")


def _check_costs(g: Graph, cost: Optional[Sequence[float]]) -> np.ndarray:
    if cost is None:
        return np.zeros(g.num_edges, dtype=np.float64)
    costs = np.asarray(cost, dtype=np.float64).reshape(-1)
    if costs.shape[0] != g.num_edges:
        raise DimensionMismatchError(f"{costs.shape[0]} costs for {g.num_edges} edges")
    if not np.all(np.isfinite(costs)):
        raise InvalidGraphError("edge costs must be finite")
    return costs


def edge_costs_from_features(g: Graph, metric: str = "euclidean") -> np.ndarray:
    """
    Per-edge cost from endpoint features

    euclidean: ||x_u - x_v||; neg_cosine: 1 - cos(x_u, x_v), with zero vectors
    treated as orthogonal to everything.
    """
    require_name(metric, COST_METRICS, "cost metric")
    X = g.feature_matrix()
    if X is None:
        raise MissingDataError("edge costs need node features")
    if g.num_edges == 0:
        return np.zeros(0, dtype=np.float64)
    U = X[[u for u, _ in g.edges]]
    V = X[[v for _, v in g.edges]]
    if metric == "euclidean":
        return np.linalg.norm(U - V, axis=1)
    norms = np.linalg.norm(U, axis=1) * np.linalg.norm(V, axis=1)
    dots = np.einsum("ij,ij->i", U, V)
    similarity = np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)
    return 1.0 - similarity


def build_hac(g: Graph, cost: Optional[Sequence[float]] = None) -> HacTree:
    """
    Boruvka-style affinity clustering

    Each round, every cluster picks its cheapest outgoing edge (ties: lowest
    edge index) and the clusters chained by the picked edges merge into one
    parent at level = round number. Components that finish early are joined
    under a synthetic root one level above the highest component root.

    Args:
        g: Input graph
        cost: Per-edge costs (default: all zero, so edge index decides)

    Returns:
        HacTree whose nodes 0..n-1 are the leaves
    """
    costs = _check_costs(g, cost)
    nodes: List[HacNode] = [HacNode(level=0, members=(v,)) for v in range(g.n)]
    clusters = DisjointSet(range(g.n))
    tree_id: Dict[int, int] = {v: v for v in range(g.n)}

    level = 0
    while True:
        best: Dict[int, Tuple[float, int]] = {}
        for idx, (u, v) in enumerate(g.edges):
            cu, cv = clusters.find(u), clusters.find(v)
            if cu == cv:
                continue
            key = (costs[idx], idx)
            for c in (cu, cv):
                if c not in best or key < best[c]:
                    best[c] = key
        if not best:
            break

        level += 1
        merge = DisjointSet(best.keys())
        for _, idx in best.values():
            u, v = g.edges[idx]
            merge.union(clusters.find(u), clusters.find(v))

        groups = sorted(
            (sorted(group, key=lambda c: nodes[tree_id[c]].members[0]) for group in merge.itersets()),
            key=lambda group: nodes[tree_id[group[0]]].members[0],
        )
        for group in groups:
            children = tuple(tree_id[c] for c in group)
            members = tuple(sorted(m for child in children for m in nodes[child].members))
            nodes.append(HacNode(level=level, members=members, children=children))
            new_id = len(nodes) - 1
            for c in group[1:]:
                clusters.union(group[0], c)
            tree_id[clusters.find(group[0])] = new_id
        logger.debug(f"🔗 HAC round {level}: {len(groups)} merges")

    roots = sorted({tree_id[clusters.find(v)] for v in range(g.n)}, key=lambda t: nodes[t].members[0])
    if len(roots) == 1:
        root = roots[0]
    else:
        top = max(nodes[t].level for t in roots) + 1
        nodes.append(HacNode(level=top, members=tuple(range(g.n)), children=tuple(roots)))
        root = len(nodes) - 1

    leaf_order: List[int] = []
    stack = [root]
    while stack:
        t = stack.pop()
        if not nodes[t].children:
            leaf_order.append(t)
        else:
            stack.extend(reversed(nodes[t].children))

    return HacTree(depth=nodes[root].level, nodes=tuple(nodes), root=root, leaf_order=tuple(leaf_order))


def level_partitions(tree: HacTree) -> List[List[Tuple[int, ...]]]:
    """
    Cluster partitions for BFS levels 1..depth+1, root level first

    A cluster appears at every level from its own round up to (excluding) its
    parent's round, so clusters that stop splitting early are carried down.
    """
    parents = tree.parents()
    position = {v: i for i, v in enumerate(tree.leaf_order)}
    partitions = []
    for round_level in range(tree.depth, -1, -1):
        present = []
        for t, node in enumerate(tree.nodes):
            upper = tree.nodes[parents[t]].level if t in parents else tree.depth + 1
            if node.level <= round_level < upper:
                present.append(node.members)
        present.sort(key=lambda members: min(position[m] for m in members))
        partitions.append(present)
    return partitions


def bfs_tokenize(tree: HacTree, graph_fingerprint: str = "") -> Tokenization:
    """One sequence per tree level; the deepest lists every node, similar nodes adjacent"""
    sequences = tuple(
        tuple(SubgraphToken(subgraph=members) for members in partition)
        for partition in level_partitions(tree)
    )
    return Tokenization(
        tokenizer="hac-bfs",
        params={"depth": tree.depth},
        graph_fingerprint=graph_fingerprint,
        sequences=sequences,
    )


def dfs_tokenize(tree: HacTree, graph_fingerprint: str = "") -> Tokenization:
    """Per node: the clusters on its root-to-leaf path, root first"""
    sequences = tuple(
        tuple(SubgraphToken(subgraph=tree.nodes[t].members) for t in tree.root_path(v))
        for v in range(tree.num_graph_nodes)
    )
    return Tokenization(
        tokenizer="hac-dfs",
        params={"depth": tree.depth},
        graph_fingerprint=graph_fingerprint,
        sequences=sequences,
    )


def _cluster_distances(g: Graph, partition: List[Tuple[int, ...]]) -> Tuple[np.ndarray, np.ndarray]:
    """Cluster id per node and all-pairs BFS distances in the cluster graph"""
    owner = np.empty(g.n, dtype=np.int64)
    for c, members in enumerate(partition):
        owner[list(members)] = c
    size = len(partition)
    neighbours: List[set] = [set() for _ in range(size)]
    for u, v in g.edges:
        a, b = int(owner[u]), int(owner[v])
        if a != b:
            neighbours[a].add(b)
            neighbours[b].add(a)
    dist = np.full((size, size), UNREACHABLE, dtype=np.int64)
    for source in range(size):
        dist[source, source] = 0
        queue = deque([source])
        while queue:
            a = queue.popleft()
            for b in neighbours[a]:
                if dist[source, b] == UNREACHABLE:
                    dist[source, b] = dist[source, a] + 1
                    queue.append(b)
    return owner, dist


def hierarchical_pe_matrix(tree: HacTree, g: Graph) -> np.ndarray:
    """All-pairs hierarchical PE, shape (n, n, depth + 1), root level first"""
    if tree.num_graph_nodes != g.n:
        raise DimensionMismatchError(f"tree covers {tree.num_graph_nodes} nodes, graph has {g.n}")
    partitions = level_partitions(tree)
    pe = np.empty((g.n, g.n, len(partitions)), dtype=np.int64)
    for level, partition in enumerate(partitions):
        owner, dist = _cluster_distances(g, partition)
        pe[:, :, level] = dist[np.ix_(owner, owner)]
    return pe


def hierarchical_pe(tree: HacTree, g: Graph, u: int, v: int) -> Tuple[int, ...]:
    """
    Relative positional encoding of u and v

    Entry i is the cluster-graph distance between the level-i clusters holding
    u and v (0 when they share a cluster, UNREACHABLE when disconnected).
    """
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise InvalidGraphError(f"nodes ({u}, {v}) outside 0..{g.n - 1}")
    out = []
    for partition in level_partitions(tree):
        owner, dist = _cluster_distances(g, partition)
        out.append(int(dist[owner[u], owner[v]]))
    return tuple(out)


def _rank_costs(costs: np.ndarray) -> np.ndarray:
    """Replace costs by their rank under (cost, edge index), making them distinct"""
    order = sorted(range(len(costs)), key=lambda i: (costs[i], i))
    ranks = np.empty(len(costs), dtype=np.float64)
    for rank, idx in enumerate(order):
        ranks[idx] = float(rank)
    return ranks


def mst_edges(g: Graph, cost: Optional[Sequence[float]] = None) -> List[int]:
    """Indices of a minimum spanning forest (Kruskal on rank-distinct costs)"""
    ranks = _rank_costs(_check_costs(g, cost))
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(range(g.n))
    for idx, (u, v) in enumerate(g.edges):
        nx_graph.add_edge(u, v, weight=ranks[idx], index=idx)
    forest = nx.minimum_spanning_edges(nx_graph, algorithm="kruskal", weight="weight", data=True)
    return sorted(data["index"] for _, _, data in forest)


def hac_on_mst_equivalence(g: Graph, cost: Optional[Sequence[float]] = None) -> bool:
    """True iff HAC on g and HAC on its minimum spanning forest give the same partition at every level"""
    ranks = _rank_costs(_check_costs(g, cost))
    keep = mst_edges(g, ranks)
    forest = Graph(n=g.n, edges=tuple(g.edges[i] for i in keep))
    full_tree = build_hac(g, ranks)
    forest_tree = build_hac(forest, ranks[keep])
    full_levels = [sorted(p) for p in level_partitions(full_tree)]
    forest_levels = [sorted(p) for p in level_partitions(forest_tree)]
    return full_tree.depth == forest_tree.depth and full_levels == forest_levels
