"""
Single-pass streaming connectivity over k-local edge orders, and the
two-phase (per-block stream, then kernel reachability) hybrid solver
"""

import logging
import math
from collections import deque
from typing import Deque, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from models import Graph, StreamReport
from services.errors import ConfigError, FactoredStructureError, LocalityViolationError, TokenizationError

logger = logging.getLogger(__name__)


class StreamState:
    """
    Hidden state of the connectivity automaton

    The window keeps the last k+1 edges with a component label each. Labels
    come from 0..k and are recycled once no window edge carries them. When an
    evicted edge's label no longer appears in the window its component can
    never grow again (any later edge touching it would break k-locality), so
    `alive` drops to False if anything else follows.

    Terminals are optional node ids tracked through the labels; a component
    that closes while holding terminals is remembered as a frozen anchor.
    """

    def __init__(self, k: int, strict: bool = False, terminals: Sequence[int] = ()):
        if k < 0:
            raise ConfigError(f"window size must be >= 0, got {k}")
        self.k = k
        self.strict = strict
        self.terminals: FrozenSet[int] = frozenset(terminals)
        self.window: Deque[Tuple[Tuple[int, int], int]] = deque()
        self.alive = True
        self.position = 0
        self.max_window = 0
        self.peak_labels = 0
        self.label_terminals: Dict[int, FrozenSet[int]] = {}
        self.anchors: List[FrozenSet[int]] = []  # Terminal sets of closed components
        # Strict mode only: O(|V|) bookkeeping for locality violations
        self.retired: Set[int] = set()
        self.seen: Set[int] = set()
        self.violations: List[int] = []

    @property
    def labels(self) -> List[int]:
        return [label for _, label in self.window]

    def _window_nodes(self) -> Set[int]:
        return {x for (u, v), _ in self.window for x in (u, v)}

    def _evict(self) -> None:
        (u, v), label = self.window.popleft()
        if label not in self.labels:
            held = self.label_terminals.pop(label, frozenset())
            if held:
                self.anchors.append(held)
            self.alive = False
        if self.strict:
            remaining = self._window_nodes()
            self.retired.update(x for x in (u, v) if x not in remaining)

    def step(self, edge: Tuple[int, int]) -> None:
        """Consume one edge"""
        u, v = int(edge[0]), int(edge[1])
        if len(self.window) == self.k + 1:
            self._evict()

        if self.strict:
            if u in self.retired or v in self.retired:
                self.violations.append(self.position)
            self.seen.update((u, v))

        touching = {label for (a, b), label in self.window if a in (u, v) or b in (u, v)}
        if touching:
            label = min(touching)
            held = frozenset().union(*(self.label_terminals.get(t, frozenset()) for t in touching))
            self.window = deque(
                (e, label if existing in touching else existing) for e, existing in self.window
            )
            for t in touching:
                self.label_terminals.pop(t, None)
        else:
            used = set(self.labels)
            label = next(x for x in range(self.k + 1) if x not in used)
            held = frozenset()
        held |= self.terminals & {u, v}
        if held:
            self.label_terminals[label] = held

        self.window.append(((u, v), label))
        self.position += 1
        self.max_window = max(self.max_window, len(self.window))
        self.peak_labels = max(self.peak_labels, len(set(self.labels)))

    def connected(self, num_nodes: Optional[int] = None) -> bool:
        """Final answer: alive and one label left (strict mode also needs every node seen)"""
        if not self.window:
            return not (self.strict and num_nodes is not None and num_nodes > 1)
        if not self.alive or len(set(self.labels)) != 1:
            return False
        if self.strict and num_nodes is not None and len(self.seen) != num_nodes:
            return False
        return True

    def terminals_joined(self) -> bool:
        """Whether some component (closed or still open) holds every terminal"""
        groups = self.anchors + list(self.label_terminals.values())
        return any(group >= self.terminals for group in groups)


def run_stream(edge_seq: Sequence[Tuple[int, int]], k: int, strict: bool = False,
               num_nodes: Optional[int] = None, terminals: Sequence[int] = ()) -> StreamReport:
    state = StreamState(k, strict=strict, terminals=terminals)
    for edge in edge_seq:
        state.step(edge)
    return StreamReport(
        connected=state.connected(num_nodes),
        violations=list(state.violations),
        max_window=state.max_window,
        peak_labels=state.peak_labels,
    )


def stream_connectivity(edge_seq: Sequence[Tuple[int, int]], k: int, strict: bool = False,
                        num_nodes: Optional[int] = None) -> bool:
    """
    Decide connectivity of an edge stream in one pass with an O(k) window

    Args:
        edge_seq: Edges in stream order
        k: Window size; the answer is exact when the order's node locality is <= k
        strict: Track retired nodes and fail on the first locality violation
        num_nodes: Node count for the strict-mode isolated-node check

    Raises:
        LocalityViolationError: strict mode, a retired node reappeared
    """
    report = run_stream(edge_seq, k, strict=strict, num_nodes=num_nodes)
    if report.violations:
        raise LocalityViolationError(report.violations[0])
    return report.connected


def edge_order_from_node_order(g: Graph, node_order: Sequence[int]) -> List[int]:
    """Edges sorted by (later endpoint position, earlier endpoint position, edge index)"""
    order = [int(v) for v in node_order]
    if sorted(order) != list(range(g.n)):
        raise TokenizationError(f"node order must be a permutation of 0..{g.n - 1}")
    position = {v: i for i, v in enumerate(order)}

    def key(idx: int):
        pu, pv = position[g.edges[idx][0]], position[g.edges[idx][1]]
        return max(pu, pv), min(pu, pv), idx

    return sorted(range(g.num_edges), key=key)


def _kernel_size(blocks: int) -> int:
    size = int(round((1 + math.sqrt(1 + 4 * blocks)) / 2))
    if size * (size - 1) != blocks:
        raise FactoredStructureError(f"{blocks} blocks is not n(n-1) for any kernel size n")
    return size


def kernel_reachability(adjacency: np.ndarray) -> np.ndarray:
    """Transitive closure by repeated boolean squaring (ceil(log2 n) rounds)"""
    size = adjacency.shape[0]
    reach = adjacency.astype(bool) | np.eye(size, dtype=bool)
    for _ in range(max(1, math.ceil(math.log2(max(size, 2))))):
        reach = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
    return reach


def hybrid_connectivity(g: Graph, edge_order: Sequence[int], k: int, n_prime: int,
                        kernel_n: Optional[int] = None) -> bool:
    """
    Two-phase connectivity of a factored graph

    Phase 1 streams each n_prime-edge block with its two super-nodes as
    terminals to decide the kernel edge. Phase 2 computes kernel reachability.

    Args:
        g: Factored graph (super-nodes are ids 0..kernel_n-1)
        edge_order: Blockwise edge order
        k: Per-block locality bound
        n_prime: Edges per block
        kernel_n: Kernel size (default: inferred from the block count)

    Raises:
        FactoredStructureError: the order is not blockwise or a block lacks two super-nodes
    """
    order = [int(i) for i in edge_order]
    if sorted(order) != list(range(g.num_edges)):
        raise FactoredStructureError("edge order must be a permutation of the graph's edges")
    if n_prime < 1 or len(order) % n_prime:
        raise FactoredStructureError(f"{len(order)} edges do not split into blocks of {n_prime}")
    blocks = len(order) // n_prime
    size = _kernel_size(blocks) if kernel_n is None else kernel_n
    if size * (size - 1) != blocks:
        raise FactoredStructureError(f"kernel of {size} nodes needs {size * (size - 1)} blocks, got {blocks}")
    if blocks == 0:
        if g.n != 1:
            raise FactoredStructureError(f"an edgeless factored graph has one super-node, got n={g.n}")
        return True

    adjacency = np.zeros((size, size), dtype=bool)
    for b in range(blocks):
        edges = [g.edges[i] for i in order[b * n_prime:(b + 1) * n_prime]]
        terminals = sorted({x for e in edges for x in e if x < size})
        if len(terminals) != 2:
            raise FactoredStructureError(f"block {b} touches super-nodes {terminals}, expected exactly two")
        state = StreamState(k, terminals=terminals)
        for edge in edges:
            state.step(edge)
        if state.terminals_joined():
            v1, v2 = terminals
            adjacency[v1, v2] = adjacency[v2, v1] = True
    logger.debug(f"🧩 phase 1 recovered {int(adjacency.sum()) // 2} kernel edges from {blocks} blocks")
    return bool(kernel_reachability(adjacency).all())
