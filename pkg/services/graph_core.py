"""
Graph generators and exact task oracles
Every other service compares against the oracles in this module
"""

import itertools
import logging
import math
from collections import deque
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from config import COLOR_WALK_STEP_FACTOR, RED, BLUE, REGULAR_RETRY_FACTOR, UNREACHABLE, MAX_PATTERN_NODES
from models import Graph, TaskLabel
from services.errors import GeneratorError, InvalidGraphError, MissingDataError
from utils.disjoint_set import DisjointSet
from utils.naming import require_name
from utils.rng import make_rng

logger = logging.getLogger(__name__)

ORACLE_KINDS = (
    "node_degree",
    "cycle_check",
    "triangle_count",
    "connectivity",
    "color_counts",
    "shortest_path",
    "color_connectivity",
)

PATTERN_NAMES = ("triangle", "path3", "cycle4", "star3")


def _sorted_edge(u: int, v: int) -> Tuple[int, int]:
    return (u, v) if u < v else (v, u)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def generate_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """
    G(n, p) with edges in lexicographic order

    Args:
        n: Node count (>= 1)
        p: Inclusion probability of each unordered pair
        seed: RNG seed

    Returns:
        Graph whose edge list is sorted by (min, max) endpoint
    """
    if n < 1:
        raise GeneratorError(f"erdos-renyi needs n >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise GeneratorError(f"edge probability must be in [0, 1], got {p}")
    rng = make_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = rng.random(len(pairs)) < p
    edges = tuple(pair for pair, chosen in zip(pairs, keep) if chosen)
    logger.debug(f"🎲 ER(n={n}, p={p}, seed={seed}) -> {len(edges)} edges")
    return Graph(n=n, edges=edges)


def generate_regular(n: int, d: int, seed: int) -> Graph:
    """Simple d-regular graph via the pairing model, retrying up to REGULAR_RETRY_FACTOR * n times"""
    if n < 1 or d < 0:
        raise GeneratorError(f"regular graph needs n >= 1 and d >= 0, got n={n}, d={d}")
    if d >= n:
        raise GeneratorError(f"degree {d} must be smaller than n={n}")
    if (n * d) % 2:
        raise GeneratorError(f"n*d must be even, got n={n}, d={d}")

    rng = make_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    attempts = REGULAR_RETRY_FACTOR * n
    for attempt in range(attempts):
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        edges: Set[Tuple[int, int]] = set()
        ok = True
        for u, v in pairs:
            u, v = int(u), int(v)
            edge = _sorted_edge(u, v)
            if u == v or edge in edges:
                ok = False
                break
            edges.add(edge)
        if ok:
            logger.debug(f"🎲 regular(n={n}, d={d}) accepted after {attempt + 1} pairings")
            return Graph(n=n, edges=tuple(sorted(edges)))

    raise GeneratorError(f"no simple {d}-regular pairing on {n} nodes within {attempts} attempts (budget exhausted)")


def generate_cycles(n: int, split: bool, seed: int) -> Graph:
    """One n-cycle, or two disjoint n/2-cycles when split; edge order shuffled by seed"""
    if n < 3:
        raise GeneratorError(f"a cycle needs at least 3 nodes, got n={n}")
    if split and (n % 2 or n // 2 < 3):
        raise GeneratorError(f"split cycles need an even n with n/2 >= 3, got n={n}")

    if split:
        half = n // 2
        edges = [_sorted_edge(i, (i + 1) % half) for i in range(half)]
        edges += [_sorted_edge(half + i, half + (i + 1) % half) for i in range(half)]
    else:
        edges = [_sorted_edge(i, (i + 1) % n) for i in range(n)]

    rng = make_rng(seed)
    order = rng.permutation(len(edges))
    return Graph(n=n, edges=tuple(edges[int(i)] for i in order))


def generate_path(n: int, coordinates: bool = False) -> Graph:
    """Path 0-1-...-(n-1) in path order, optionally with 1-D coordinate features"""
    if n < 1:
        raise GeneratorError(f"path needs n >= 1, got {n}")
    edges = tuple((i, i + 1) for i in range(n - 1))
    features = tuple((float(i),) for i in range(n)) if coordinates else None
    return Graph(n=n, edges=edges, features=features)


def generate_grid(rows: int, cols: int, coordinates: bool = False) -> Graph:
    """4-neighbour grid; node id = r * cols + c; lexicographic edge order"""
    if rows < 1 or cols < 1:
        raise GeneratorError(f"grid needs positive dimensions, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    features = None
    if coordinates:
        features = tuple((float(v // cols), float(v % cols)) for v in range(rows * cols))
    return Graph(n=rows * cols, edges=tuple(sorted(edges)), features=features)


def color_connectivity_instance(g: Graph, seed: int) -> Graph:
    """
    Color floor(n/2) nodes red with two interleaved random walks

    Both walks start at distinct random nodes and take turns; each newly visited
    node turns red until the quota is met. The walks do not restart.

    Raises:
        InvalidGraphError: graph is disconnected or has fewer than 4 nodes
        GeneratorError: step guard hit (cannot happen on connected graphs in practice)
    """
    if g.n < 4:
        raise InvalidGraphError(f"color connectivity needs n >= 4, got {g.n}")
    if not is_connected(g):
        raise InvalidGraphError("color connectivity instances need a connected graph")

    rng = make_rng(seed)
    neighbours = g.adjacency()
    quota = g.n // 2
    walkers = [int(x) for x in rng.choice(g.n, size=2, replace=False)]
    red = set(walkers)

    max_steps = COLOR_WALK_STEP_FACTOR * g.n ** 3
    steps = 0
    turn = 0
    while len(red) < quota:
        if steps >= max_steps:
            raise GeneratorError(f"random-walk coloring did not reach {quota} red nodes in {max_steps} steps")
        here = walkers[turn]
        options = neighbours[here]
        nxt = options[int(rng.integers(len(options)))]
        walkers[turn] = nxt
        red.add(nxt)
        turn ^= 1
        steps += 1

    colors = tuple(RED if v in red else BLUE for v in range(g.n))
    return g.with_colors(colors)


def generate_factored(kernel: Graph, n_prime: int, k: int, seed: int) -> Tuple[Graph, List[int]]:
    """
    Build a k-local factored graph over a kernel graph

    Super-nodes are ids 0..kernel.n-1. Every ordered pair (v1, v2) of distinct
    super-nodes gets an n_prime-edge gadget: a path out of v1 and a path out of
    v2, joined by one edge iff {v1, v2} is a kernel edge. Each private path node
    carries at most k-1 pendant filler leaves placed right after the edge that
    reaches it, which keeps every gadget's node locality at most k.

    Args:
        kernel: Kernel graph
        n_prime: Edges per gadget (>= 3)
        k: Per-gadget node locality bound (>= 1)
        seed: RNG seed for block order and filler placement

    Returns:
        (graph with lexicographically sorted edges, blockwise edge order)
    """
    if k < 1:
        raise GeneratorError(f"locality bound must be >= 1, got {k}")
    if n_prime < 3:
        raise GeneratorError(f"n_prime={n_prime} too small for a gadget (needs >= 3)")

    rng = make_rng(seed)
    kernel_edges = {frozenset(e) for e in kernel.edges}
    pairs = [(a, b) for a in range(kernel.n) for b in range(kernel.n) if a != b]
    block_order = rng.permutation(len(pairs)) if pairs else []

    next_id = kernel.n
    blocks: List[List[Tuple[int, int]]] = []
    for block in block_order:
        v1, v2 = pairs[int(block)]
        joined = frozenset((v1, v2)) in kernel_edges
        join_edges = 1 if joined else 0
        spine_nodes = max(2, math.ceil((n_prime - join_edges) / k))
        p = spine_nodes // 2
        q = spine_nodes - p
        left = list(range(next_id, next_id + p))
        right = list(range(next_id + p, next_id + spine_nodes))
        next_id += spine_nodes

        # Spine: v1 -> left path -> join -> right path back down to v2, or,
        # without the join, the right path walked outward from v2.
        # Every spine edge after the first reaches exactly one new node.
        walk = [v1] + left
        spine = [(walk[i], walk[i + 1]) for i in range(len(walk) - 1)]
        back = [v2] + right
        if joined:
            spine.append((left[-1], right[-1]))
            spine.extend((back[i + 1], back[i]) for i in reversed(range(len(back) - 1)))
        else:
            spine.extend((back[i], back[i + 1]) for i in range(len(back) - 1))

        filler_total = n_prime - len(spine)
        private = left + right
        filler = {x: 0 for x in private}
        for _ in range(filler_total):
            open_slots = [x for x in private if filler[x] < k - 1]
            filler[open_slots[int(rng.integers(len(open_slots)))]] += 1

        sequence: List[Tuple[int, int]] = []
        placed: Set[int] = set()
        for u, v in spine:
            sequence.append((u, v))
            for x in (u, v):
                if x in filler and x not in placed:
                    placed.add(x)
                    for _ in range(filler[x]):
                        sequence.append((x, next_id))
                        next_id += 1
        blocks.append(sequence)

    flat = [_sorted_edge(u, v) for block in blocks for u, v in block]
    sorted_edges = sorted(flat)
    position = {edge: i for i, edge in enumerate(sorted_edges)}
    edge_order = [position[edge] for edge in flat]
    graph = Graph(n=next_id, edges=tuple(sorted_edges))
    logger.debug(f"🧱 factored graph: kernel n={kernel.n}, {len(blocks)} blocks of {n_prime} edges, n={graph.n}")
    return graph, edge_order


def generate(kind: str, seed: int, **params) -> Graph:
    """Dispatch a generator by CLI name (er, regular, cycles, path, grid)"""
    require_name(kind, GENERATORS, "generator")
    if kind == "er":
        return generate_erdos_renyi(int(params.get("n", 10)), float(params.get("p", 0.5)), seed)
    if kind == "regular":
        return generate_regular(int(params.get("n", 10)), int(params.get("d", 3)), seed)
    if kind == "cycles":
        return generate_cycles(int(params.get("n", 6)), bool(params.get("split", False)), seed)
    if kind == "path":
        return generate_path(int(params.get("n", 10)), bool(params.get("coordinates", False)))
    return generate_grid(int(params.get("rows", 4)), int(params.get("cols", 4)), bool(params.get("coordinates", False)))


GENERATORS = ("er", "regular", "cycles", "path", "grid")


# ---------------------------------------------------------------------------
# Traversal helpers
# ---------------------------------------------------------------------------

def bfs_distances(g: Graph, source: int, neighbours: Optional[List[List[int]]] = None) -> np.ndarray:
    """Hop distance from source to every node; UNREACHABLE where there is no path"""
    neighbours = neighbours if neighbours is not None else g.adjacency()
    dist = np.full(g.n, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in neighbours[u]:
            if dist[w] == UNREACHABLE:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def khop_ball(g: Graph, v: int, k: int, neighbours: Optional[List[List[int]]] = None) -> Tuple[int, ...]:
    """Sorted ids of all nodes within k hops of v"""
    neighbours = neighbours if neighbours is not None else g.adjacency()
    seen = {v}
    frontier = [v]
    for _ in range(k):
        nxt = []
        for u in frontier:
            for w in neighbours[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    return tuple(sorted(seen))


def connected_components(g: Graph) -> List[Tuple[int, ...]]:
    dsu = DisjointSet(range(g.n))
    for u, v in g.edges:
        dsu.union(u, v)
    return dsu.groups()


def is_connected(g: Graph) -> bool:
    """Union-find connectivity"""
    dsu = DisjointSet(range(g.n))
    for u, v in g.edges:
        dsu.union(u, v)
    return dsu.count_sets() == 1


def is_connected_bfs(g: Graph) -> bool:
    """BFS reachability from node 0, kept independent of the union-find path"""
    return bool(np.all(bfs_distances(g, 0) != UNREACHABLE))


# ---------------------------------------------------------------------------
# Small-pattern isomorphism
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _pair_bits(size: int) -> Dict[Tuple[int, int], int]:
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    return {pair: bit for bit, pair in enumerate(pairs)}


def adjacency_mask(size: int, edges) -> int:
    """Bitmask over the lexicographic pairs of a graph on `size` nodes"""
    bits = _pair_bits(size)
    mask = 0
    for u, v in edges:
        mask |= 1 << bits[_sorted_edge(u, v)]
    return mask


@lru_cache(maxsize=None)
def canonical_mask(size: int, mask: int) -> int:
    """Smallest adjacency mask over all relabelings (size <= MAX_PATTERN_NODES)"""
    bits = _pair_bits(size)
    present = [pair for pair, bit in bits.items() if mask >> bit & 1]
    best = None
    for perm in itertools.permutations(range(size)):
        relabelled = 0
        for u, v in present:
            relabelled |= 1 << bits[_sorted_edge(perm[u], perm[v])]
        if best is None or relabelled < best:
            best = relabelled
    return best if best is not None else 0


def pattern_graph(name: str) -> Graph:
    """Small named patterns used for motif counting"""
    require_name(name, PATTERN_NAMES, "pattern")
    if name == "triangle":
        return Graph(n=3, edges=((0, 1), (0, 2), (1, 2)))
    if name == "path3":
        return Graph(n=3, edges=((0, 1), (1, 2)))
    if name == "cycle4":
        return Graph(n=4, edges=((0, 1), (1, 2), (2, 3), (0, 3)))
    return Graph(n=4, edges=((0, 1), (0, 2), (0, 3)))


def diameter(g: Graph) -> int:
    """Largest finite hop distance (raises on disconnected graphs)"""
    neighbours = g.adjacency()
    best = 0
    for v in range(g.n):
        dist = bfs_distances(g, v, neighbours)
        if np.any(dist == UNREACHABLE):
            raise InvalidGraphError("diameter is undefined for a disconnected graph")
        best = max(best, int(dist.max()))
    return best


def count_induced_subgraphs(g: Graph, pattern: Graph) -> int:
    """Brute-force count of node subsets whose induced subgraph is isomorphic to pattern"""
    size = pattern.n
    if size > MAX_PATTERN_NODES:
        raise InvalidGraphError(f"patterns are limited to {MAX_PATTERN_NODES} nodes, got {size}")
    target = canonical_mask(size, adjacency_mask(size, pattern.edges))
    target_edges = pattern.num_edges
    neighbour_sets = g.neighbour_sets()
    count = 0
    for subset in itertools.combinations(range(g.n), size):
        local_edges = [
            (i, j)
            for i in range(size)
            for j in range(i + 1, size)
            if subset[j] in neighbour_sets[subset[i]]
        ]
        if len(local_edges) != target_edges:
            continue
        if canonical_mask(size, adjacency_mask(size, local_edges)) == target:
            count += 1
    return count


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def _has_cycle(g: Graph) -> bool:
    """Iterative DFS; a non-tree edge to an already-visited node closes a cycle"""
    neighbours = g.adjacency()
    visited = [False] * g.n
    for start in range(g.n):
        if visited[start]:
            continue
        visited[start] = True
        stack = [(start, -1)]
        while stack:
            u, parent = stack.pop()
            for w in neighbours[u]:
                if w == parent:
                    continue
                if visited[w]:
                    return True
                visited[w] = True
                stack.append((w, u))
    return False


def _triangle_count(g: Graph) -> int:
    neighbour_sets = g.neighbour_sets()
    total = 0
    for u, v in g.edges:
        a, b = _sorted_edge(u, v)
        total += sum(1 for w in neighbour_sets[a] & neighbour_sets[b] if w > b)
    return total


def _distance_matrix(g: Graph) -> Tuple[Tuple[int, ...], ...]:
    neighbours = g.adjacency()
    return tuple(tuple(int(x) for x in bfs_distances(g, v, neighbours)) for v in range(g.n))


def red_components(g: Graph) -> int:
    """Connected components of the subgraph induced by red nodes"""
    if g.colors is None:
        raise MissingDataError("color connectivity needs node colors")
    red = [v for v in range(g.n) if g.colors[v] == RED]
    dsu = DisjointSet(red)
    for u, v in g.edges:
        if u in dsu and v in dsu:
            dsu.union(u, v)
    return dsu.count_sets()


def oracle(g: Graph, kind: str, num_colors: Optional[int] = None) -> TaskLabel:
    """
    Exact reference label for a task

    Args:
        g: Input graph
        kind: One of ORACLE_KINDS
        num_colors: Length of the color_counts vector (defaults to max color + 1)

    Returns:
        TaskLabel with the exact value
    """
    require_name(kind, ORACLE_KINDS, "task")
    if kind == "node_degree":
        value = tuple(int(x) for x in g.degrees())
    elif kind == "cycle_check":
        value = _has_cycle(g)
    elif kind == "triangle_count":
        value = _triangle_count(g)
    elif kind == "connectivity":
        value = is_connected(g)
    elif kind == "color_counts":
        if g.colors is None:
            raise MissingDataError("color_counts needs node colors")
        width = num_colors if num_colors is not None else g.num_colors
        value = tuple(int(x) for x in np.bincount(np.asarray(g.colors, dtype=np.int64), minlength=width))
    elif kind == "shortest_path":
        value = _distance_matrix(g)
    else:
        value = red_components(g)
    return TaskLabel(kind=kind, value=value)


def labels_for(g: Graph, kinds: Optional[Sequence[str]] = None) -> Dict[str, object]:
    """Labels JSON body: every applicable oracle keyed by its label key"""
    if kinds is None:
        kinds = [k for k in ORACLE_KINDS if k not in ("color_counts", "color_connectivity") or g.colors is not None]
    labels: Dict[str, object] = {}
    for kind in kinds:
        label = oracle(g, kind)
        value = label.value
        labels[label.label_key] = [list(row) for row in value] if kind == "shortest_path" else (
            list(value) if isinstance(value, tuple) else value
        )
    return labels
