"""
Property suites behind `verify`

Every suite sweeps seeded random instances, compares each module against a
brute-force or networkx oracle and reports one PropertyResult per property
with the first counterexample found.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd

from config import (
    JACOBIAN_REL_TOL,
    MONOTONE_TOL,
    SENSITIVITY_LENGTHS,
    SENSITIVITY_RATIO_BAND,
    SENSITIVITY_STATE_WIDTH,
    VERIFY_ATTENTION_INSTANCES,
    VERIFY_COLOR_COUNT_INSTANCES,
    VERIFY_CONNECTIVITY_ORACLE_INSTANCES,
    VERIFY_HAC_DEPTH_INSTANCES,
    VERIFY_HAC_MST_INSTANCES,
    VERIFY_HAC_PE_INSTANCES,
    VERIFY_HYBRID_INSTANCES,
    VERIFY_LOCALITY_MIN_WINS,
    VERIFY_LOCALITY_TRIALS,
    VERIFY_MOTIF_INSTANCES,
    VERIFY_STREAM_EXHAUSTIVE_MAX_EDGES,
    VERIFY_STREAM_EXHAUSTIVE_NODES,
    VERIFY_STREAM_MAX_NODES,
    VERIFY_STREAM_RANDOM_INSTANCES,
    WITNESS_OUTPUT_TOL,
    suite_size,
)
from models import Graph, PropertyResult, RouterWeights
from services.connectivity_stream import edge_order_from_node_order, hybrid_connectivity, run_stream
from services.graph_core import (
    bfs_distances,
    color_connectivity_instance,
    count_induced_subgraphs,
    generate_cycles,
    generate_erdos_renyi,
    generate_factored,
    generate_grid,
    generate_path,
    generate_regular,
    is_connected,
    is_connected_bfs,
    khop_ball,
    oracle,
    pattern_graph,
    red_components,
)
from services.hac import (
    build_hac,
    edge_costs_from_features,
    hac_on_mst_equivalence,
    hierarchical_pe,
    hierarchical_pe_matrix,
    level_partitions,
    mst_edges,
)
from services.local_encoder import motif_count
from services.seq_models import (
    AttentionLayer,
    LinearSsmLayer,
    attention_forward,
    attention_jacobian,
    color_count_construction,
    count_colors,
    find_undercount_witness,
    finite_difference_jacobian,
    hippo_modal_stack,
    hybrid_forward,
    hybrid_jacobian,
    random_attention,
    random_hybrid,
    relative_error,
    sensitivity_profile,
    ssm_forward,
    ssm_jacobian,
)
from services.tokenizers import khop_tokenize, mot_route, node_locality, node_locality_of_edges, random_walk_tokenize
from utils.disjoint_set import DisjointSet
from utils.fingerprint import canonical_json
from utils.naming import require_name
from utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)


@dataclass
class SuiteOutcome:
    """Property results plus any data frames a suite emits (e.g. the sensitivity profile)"""
    results: List[PropertyResult] = field(default_factory=list)
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def failed(self) -> int:
        return sum(not r.passed for r in self.results)


class PropertyCheck:
    """Counts the instances of one property and keeps the first counterexample"""

    def __init__(self, suite: str, prop: str):
        self.suite = suite
        self.prop = prop
        self.instances = 0
        self.counterexample: Optional[str] = None

    def record(self, ok: bool, counterexample: Union[str, Callable[[], str]] = "") -> bool:
        self.instances += 1
        if not ok and self.counterexample is None:
            self.counterexample = counterexample() if callable(counterexample) else counterexample
            logger.debug(f"❌ {self.suite}/{self.prop}: {self.counterexample}")
        return ok

    def result(self) -> PropertyResult:
        return PropertyResult(
            suite=self.suite,
            prop=self.prop,
            passed=self.counterexample is None,
            instances=self.instances,
            counterexample=self.counterexample,
        )


def _describe(g: Graph, **extra) -> str:
    body = g.to_json_dict()
    body.update(extra)
    return canonical_json(body)


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(2**31 - 1))


def _random_graph(rng: np.random.Generator, n_max: int, n_min: int = 1, density: float = 3.0) -> Graph:
    """ER graph with n in [n_min, n_max] and p drawn so both connected and split instances occur"""
    n = int(rng.integers(n_min, n_max + 1))
    p = float(rng.uniform(0.0, min(1.0, density / n)))
    return generate_erdos_renyi(n, p, _seed(rng))


def _random_connected_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    """Random recursive tree plus ER edges"""
    edges = {(int(rng.integers(v)), v) for v in range(1, n)}
    edges |= set(generate_erdos_renyi(n, p, _seed(rng)).edges)
    return Graph(n=n, edges=tuple(sorted(edges)))


def _to_networkx(g: Graph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges)
    return G


def _edge_set_connected(edges: Sequence[Tuple[int, int]]) -> bool:
    """Connectivity of the graph spanned by the edges (nodes = endpoints)"""
    dsu = DisjointSet()
    for u, v in edges:
        dsu.add(u)
        dsu.add(v)
        dsu.union(u, v)
    return dsu.count_sets() <= 1


# ---------------------------------------------------------------------------
# graph_core
# ---------------------------------------------------------------------------

def suite_graph_oracles(seed: int) -> SuiteOutcome:
    suite = "graph-oracles"
    rng = make_rng(derive_seed(seed, 1))
    uf = PropertyCheck(suite, "unionfind-matches-bfs-and-networkx")
    tri = PropertyCheck(suite, "triangles-match-networkx")
    sp = PropertyCheck(suite, "shortest-paths-match-networkx")
    roundtrip = PropertyCheck(suite, "graph-json-roundtrip")
    for _ in range(suite_size(VERIFY_CONNECTIVITY_ORACLE_INSTANCES)):
        g = _random_graph(rng, 64)
        G = _to_networkx(g)
        expected = nx.is_connected(G)
        uf.record(is_connected(g) == expected and is_connected_bfs(g) == expected, lambda: _describe(g))
        tri.record(oracle(g, "triangle_count").value == sum(nx.triangles(G).values()) // 3, lambda: _describe(g))
        back = Graph.model_validate_json(g.model_dump_json())
        roundtrip.record(back == g and back.fingerprint() == g.fingerprint(), lambda: _describe(g))
        if g.n <= 16:
            dist = oracle(g, "shortest_path").value
            lengths = dict(nx.all_pairs_shortest_path_length(G))
            ok = all(dist[u][v] == lengths[u].get(v, -1) for u in range(g.n) for v in range(g.n))
            sp.record(ok, lambda: _describe(g))

    cycles = PropertyCheck(suite, "split-cycles-disconnected")
    for n in range(6, 42, 2):
        split = generate_cycles(n, True, derive_seed(seed, 2, n))
        whole = generate_cycles(n, False, derive_seed(seed, 3, n))
        ok = (not is_connected(split) and is_connected(whole)
              and all(d == 2 for d in split.degrees()) and all(d == 2 for d in whole.degrees()))
        cycles.record(ok, f"n={n}")

    regular = PropertyCheck(suite, "regular-degrees")
    for _ in range(suite_size(100)):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(d + 1, 31))
        if n * d % 2:
            n += 1
        g = generate_regular(n, d, _seed(rng))
        regular.record(all(x == d for x in g.degrees()), lambda: _describe(g, d=d))

    colored = PropertyCheck(suite, "color-connectivity-one-or-two-red-components")
    for _ in range(suite_size(50)):
        rows, cols = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        g = color_connectivity_instance(generate_grid(rows, cols), _seed(rng))
        red = sum(g.colors)
        colored.record(red_components(g) in (1, 2) and red == g.n // 2, lambda: _describe(g))

    checks = [uf, tri, sp, roundtrip, cycles, regular, colored]
    return SuiteOutcome(results=[c.result() for c in checks])


# ---------------------------------------------------------------------------
# tokenizers
# ---------------------------------------------------------------------------

def _brute_force_locality(edges: Sequence[Tuple[int, int]]) -> int:
    positions: Dict[int, List[int]] = {}
    for i, (u, v) in enumerate(edges):
        positions.setdefault(u, []).append(i)
        positions.setdefault(v, []).append(i)
    return max((max(p) - min(p) for p in positions.values()), default=0)


def suite_tokenizers(seed: int) -> SuiteOutcome:
    suite = "tokenizers"
    rng = make_rng(derive_seed(seed, 4))
    locality = PropertyCheck(suite, "locality-matches-brute-force")
    relabel = PropertyCheck(suite, "locality-relabel-invariant")
    khop = PropertyCheck(suite, "khop-rings-partition-ball")
    walks = PropertyCheck(suite, "random-walks-follow-edges")
    mot = PropertyCheck(suite, "mot-top2-are-best-scores")

    for _ in range(suite_size(500)):
        g = _random_graph(rng, 30)
        order = rng.permutation(g.num_edges)
        seq = [g.edges[i] for i in order]
        measured = node_locality(g, order)
        locality.record(measured == _brute_force_locality(seq), lambda: _describe(g, order=order.tolist()))

        perm = rng.permutation(g.n)
        renamed = [(int(perm[u]), int(perm[v])) for u, v in seq]
        relabel.record(node_locality_of_edges(renamed) == measured, lambda: _describe(g, perm=perm.tolist()))

    for _ in range(suite_size(100)):
        g = _random_graph(rng, 20)
        K = int(rng.integers(0, 4))
        tok = khop_tokenize(g, K)
        ok = True
        for v, sequence in enumerate(tok.sequences):
            rings = [() if token.empty else token.subgraph for token in sequence]
            flat = [x for ring in rings for x in ring]
            ok &= (len(sequence) == K + 1 and rings[0] == (v,) and len(flat) == len(set(flat))
                   and sorted(flat) == sorted(khop_ball(g, v, K)))
        khop.record(ok, lambda: _describe(g, k=K))

        tok = random_walk_tokenize(g, walk_len=int(rng.integers(1, 8)), walks_per_node=2, seed=_seed(rng))
        neighbours = g.neighbour_sets()
        ok = all(
            b.node in neighbours[a.node] or (a.node == b.node and not neighbours[a.node])
            for sequence in tok.sequences
            for a, b in zip(sequence, sequence[1:])
        )
        walks.record(ok, lambda: _describe(g))

    for _ in range(suite_size(100)):
        n, d, c = int(rng.integers(1, 20)), int(rng.integers(1, 6)), int(rng.integers(2, 5))
        X = rng.normal(size=(n, d))
        W = rng.normal(size=(d, c))
        assignment = mot_route(X, RouterWeights(weights=tuple(map(tuple, W))), [f"t{j}" for j in range(c)])
        scores = X @ W
        ok = True
        for v, (a, b) in enumerate(assignment.top2):
            rest = [scores[v, j] for j in range(c) if j not in (a, b)]
            ok &= a != b and scores[v, a] >= scores[v, b] and all(scores[v, b] >= s for s in rest)
        mot.record(ok, lambda: canonical_json({"X": X.tolist(), "W": W.tolist()}))

    checks = [locality, relabel, khop, walks, mot]
    return SuiteOutcome(results=[c.result() for c in checks])


# ---------------------------------------------------------------------------
# hac
# ---------------------------------------------------------------------------

def suite_hac_depth(seed: int) -> SuiteOutcome:
    suite = "hac-depth"
    rng = make_rng(derive_seed(seed, 5))
    depth = PropertyCheck(suite, "depth-at-most-ceil-log2-n")
    nested = PropertyCheck(suite, "levels-refine-root-first")
    leaves = PropertyCheck(suite, "deepest-level-is-leaf-order")
    for _ in range(suite_size(VERIFY_HAC_DEPTH_INSTANCES)):
        g = _random_graph(rng, 64, density=4.0)
        costs = rng.random(g.num_edges)
        tree = build_hac(g, costs)
        bound = math.ceil(math.log2(g.n)) if g.n > 1 else 0
        depth.record(tree.depth <= bound, lambda: _describe(g, costs=costs.tolist(), depth=tree.depth))

        partitions = level_partitions(tree)
        ok = len(partitions) == tree.depth + 1
        for coarse, fine in zip(partitions, partitions[1:]):
            owners = [set(c) for c in coarse]
            ok &= all(any(set(c) <= o for o in owners) for c in fine)
        nested.record(ok, lambda: _describe(g, costs=costs.tolist()))
        leaves.record(
            [c[0] for c in partitions[-1]] == list(tree.leaf_order) and all(len(c) == 1 for c in partitions[-1]),
            lambda: _describe(g, costs=costs.tolist()),
        )
    return SuiteOutcome(results=[depth.result(), nested.result(), leaves.result()])


def suite_hac_mst(seed: int) -> SuiteOutcome:
    suite = "hac-mst"
    rng = make_rng(derive_seed(seed, 6))
    equivalence = PropertyCheck(suite, "hac-on-mst-equals-hac")
    weight = PropertyCheck(suite, "mst-weight-matches-networkx")
    for _ in range(suite_size(VERIFY_HAC_MST_INSTANCES)):
        n = int(rng.integers(2, 41))
        g = generate_erdos_renyi(n, float(rng.uniform(0.1, 0.6)), _seed(rng))
        costs = rng.permutation(g.num_edges).astype(np.float64) + 1.0
        equivalence.record(hac_on_mst_equivalence(g, costs), lambda: _describe(g, costs=costs.tolist()))

        G = _to_networkx(g)
        for idx, (u, v) in enumerate(g.edges):
            G[u][v]["weight"] = costs[idx]
        expected = nx.minimum_spanning_tree(G).size(weight="weight")
        ours = float(sum(costs[i] for i in mst_edges(g, costs)))
        weight.record(math.isclose(ours, expected), lambda: _describe(g, costs=costs.tolist()))
    return SuiteOutcome(results=[equivalence.result(), weight.result()])


def suite_hac_pe(seed: int) -> SuiteOutcome:
    suite = "hac-pe"
    rng = make_rng(derive_seed(seed, 7))
    last = PropertyCheck(suite, "last-coordinate-is-bfs-distance")
    first = PropertyCheck(suite, "root-coordinate-is-zero")
    pairwise = PropertyCheck(suite, "pairwise-matches-matrix")
    for _ in range(suite_size(VERIFY_HAC_PE_INSTANCES)):
        g = _random_connected_graph(rng, int(rng.integers(2, 33)), float(rng.uniform(0.0, 0.3)))
        costs = rng.random(g.num_edges)
        tree = build_hac(g, costs)
        pe = hierarchical_pe_matrix(tree, g)
        dist = np.stack([bfs_distances(g, v) for v in range(g.n)])
        last.record(bool(np.array_equal(pe[:, :, -1], dist)), lambda: _describe(g, costs=costs.tolist()))
        first.record(bool(np.all(pe[:, :, 0] == 0)), lambda: _describe(g, costs=costs.tolist()))
        u, v = int(rng.integers(g.n)), int(rng.integers(g.n))
        pairwise.record(hierarchical_pe(tree, g, u, v) == tuple(int(x) for x in pe[u, v]),
                        lambda: _describe(g, costs=costs.tolist(), pair=[u, v]))
    return SuiteOutcome(results=[last.result(), first.result(), pairwise.result()])


def _jittered(g: Graph, rng: np.random.Generator, row_scale: float = 1.0) -> Graph:
    """Coordinate features with small noise; row_scale stretches the first axis so rows cluster first"""
    X = g.feature_matrix().copy()
    X[:, 0] *= row_scale
    return g.with_features(X + rng.normal(0.0, 0.01, size=X.shape))


def suite_hac_locality(seed: int) -> SuiteOutcome:
    """HAC-BFS leaf order vs a uniformly random node order on coordinate-featured paths and grids"""
    suite = "hac-locality"
    rng = make_rng(derive_seed(seed, 8))
    trials = suite_size(VERIFY_LOCALITY_TRIALS)
    needed = math.ceil(trials * VERIFY_LOCALITY_MIN_WINS / VERIFY_LOCALITY_TRIALS)
    wins = 0
    trial_rows = []
    for trial in range(trials):
        if trial % 2:
            g = _jittered(generate_path(int(rng.integers(16, 65)), coordinates=True), rng)
        else:
            rows, cols = int(rng.integers(4, 9)), int(rng.integers(4, 9))
            g = _jittered(generate_grid(rows, cols, coordinates=True), rng, row_scale=cols)
        tree = build_hac(g, edge_costs_from_features(g, "euclidean"))
        hac = node_locality(g, edge_order_from_node_order(g, tree.leaf_order))
        shuffled = node_locality(g, edge_order_from_node_order(g, rng.permutation(g.n)))
        wins += hac <= shuffled
        trial_rows.append({"trial": trial, "n": g.n, "hac_bfs": hac, "random": shuffled})
    result = PropertyResult(
        suite=suite,
        prop="hac-bfs-locality-beats-random",
        passed=wins >= needed,
        instances=trials,
        counterexample=None if wins >= needed else f"HAC-BFS order won {wins} of {trials} trials, needed {needed}",
    )
    return SuiteOutcome(results=[result], frames={"locality_trials": pd.DataFrame(trial_rows)})


# ---------------------------------------------------------------------------
# seq_models
# ---------------------------------------------------------------------------

def suite_color_count(seed: int) -> SuiteOutcome:
    suite = "color-count"
    rng = make_rng(derive_seed(seed, 9))
    exact = PropertyCheck(suite, "width-c-layer-counts-exactly")
    for _ in range(suite_size(VERIFY_COLOR_COUNT_INSTANCES)):
        C = int(rng.integers(1, 9))
        colors = rng.integers(C, size=int(rng.integers(1, 257)))
        counts = count_colors(color_count_construction(C), colors)
        expected = np.bincount(colors, minlength=C).astype(np.float64)
        exact.record(bool(np.array_equal(counts, expected)), lambda: canonical_json({"C": C, "colors": colors.tolist()}))

    witness = PropertyCheck(suite, "narrow-layer-undercounts")
    for C in (2, 3):
        found = find_undercount_witness(C, 6)
        ok = found is not None
        if ok:
            layer = LinearSsmLayer.lti(np.eye(C - 1), np.eye(C - 1, C), np.eye(C - 1))
            gap = np.max(np.abs(count_colors(layer, found.first) - count_colors(layer, found.second)))
            hist_a = np.bincount(found.first, minlength=C)
            hist_b = np.bincount(found.second, minlength=C)
            ok = gap <= WITNESS_OUTPUT_TOL and not np.array_equal(hist_a, hist_b)
        witness.record(ok, f"no witness for C={C} up to length 6")
    return SuiteOutcome(results=[exact.result(), witness.result()])


def depth_bound_spread(mid_norms: Dict[int, float], layers: int) -> float:
    """
    Fit C = norm * n**layers on the shortest length and return how far any other
    length strays from it, as a factor >= 1. A (1/n)**layers envelope holds with
    one constant only while this stays bounded.
    """
    lengths = sorted(mid_norms)
    fitted = mid_norms[lengths[0]] * lengths[0] ** layers
    spread = 1.0
    for n in lengths[1:]:
        ratio = mid_norms[n] * n ** layers / fitted
        spread = max(spread, ratio, 1.0 / ratio)
    return spread


def suite_sensitivity(seed: int) -> SuiteOutcome:
    """Deterministic: the modal HiPPO stacks have no random parameters"""
    suite = "sensitivity"
    m = SENSITIVITY_STATE_WIDTH
    monotone = PropertyCheck(suite, "single-layer-non-decreasing")
    band = PropertyCheck(suite, "single-layer-ratio-band")
    decay = PropertyCheck(suite, "decreases-with-depth")
    bound = PropertyCheck(suite, "depth-bound-fitted-constant")
    frames = []
    mid_norms: Dict[int, Dict[int, float]] = {1: {}, 2: {}, 3: {}}
    for n in SENSITIVITY_LENGTHS:
        profiles = {L: sensitivity_profile(hippo_modal_stack(m, L), n) for L in (1, 2, 3)}
        for L, profile in profiles.items():
            frames.append(profile.frame.assign(n=n, layers=L)[["n", "layers", "i", "norm", "surrogate", "ratio"]])

        norms = profiles[1].frame.set_index("i")["norm"]
        inner = [norms[i] for i in range(2, n)]
        monotone.record(all(b >= a - MONOTONE_TOL for a, b in zip(inner, inner[1:])), f"n={n}")
        band.record(profiles[1].ratio_band < SENSITIVITY_RATIO_BAND, f"n={n}, band={profiles[1].ratio_band:.3g}")

        mid = n // 2
        at_mid = [float(profiles[L].frame.set_index("i").loc[mid, "norm"]) for L in (1, 2, 3)]
        decay.record(at_mid[0] > at_mid[1] > at_mid[2], f"n={n}, norms={at_mid}")
        for L, norm in zip((1, 2, 3), at_mid):
            mid_norms[L][n] = norm

    # C is fitted once per depth, never against the length it is checked on
    for L, by_length in mid_norms.items():
        spread = depth_bound_spread(by_length, L)
        bound.record(spread < SENSITIVITY_RATIO_BAND, f"L={L}, spread={spread:.3g}, norms={by_length}")

    fd = PropertyCheck(suite, "analytic-matches-finite-difference")
    n = SENSITIVITY_LENGTHS[0]
    rng = make_rng(derive_seed(seed, 10))
    for L in (1, 2):
        stack = hippo_modal_stack(m, L)
        xs = rng.normal(size=(n, 1))

        def forward(X, stack=stack):
            for layer in stack:
                X = ssm_forward(layer, X)
            return X

        for i in range(1, n + 1):
            err = relative_error(ssm_jacobian(stack, n, i), finite_difference_jacobian(forward, xs, n, i))
            fd.record(err < JACOBIAN_REL_TOL, f"L={L}, i={i}, rel_err={err:.3g}")

    checks = [monotone, band, decay, bound, fd]
    profile = pd.concat(frames, ignore_index=True)
    return SuiteOutcome(results=[c.result() for c in checks], frames={"sensitivity_profile": profile})


def suite_jacobians(seed: int) -> SuiteOutcome:
    suite = "jacobians"
    rng = make_rng(derive_seed(seed, 11))
    attn = PropertyCheck(suite, "attention-analytic-matches-finite-difference")
    hybrid = PropertyCheck(suite, "hybrid-analytic-matches-finite-difference")
    for trial in range(suite_size(20)):
        T, d = int(rng.integers(2, 7)), int(rng.integers(1, 5))
        layer = random_attention(rng, d, int(rng.integers(1, 4)), causal=bool(trial % 2))
        if trial % 3 == 0:
            layer = AttentionLayer(layer.W_Q, layer.W_K, layer.W_V, layer.causal, pe=rng.normal(size=(T, d)))
        xs = rng.normal(size=(T, d))
        t, i = int(rng.integers(1, T + 1)), int(rng.integers(1, T + 1))
        err = relative_error(attention_jacobian(layer, xs, t, i),
                             finite_difference_jacobian(lambda X: attention_forward(layer, X), xs, t, i))
        attn.record(err < JACOBIAN_REL_TOL, f"trial={trial}, t={t}, i={i}, rel_err={err:.3g}")

        block = random_hybrid(rng, d_in=d, m=3, d=3, d_k=2, layers=int(rng.integers(1, 3)))
        err = relative_error(hybrid_jacobian(block, xs, t, i),
                             finite_difference_jacobian(lambda X: hybrid_forward(block, X), xs, t, i))
        hybrid.record(err < JACOBIAN_REL_TOL, f"trial={trial}, t={t}, i={i}, rel_err={err:.3g}")
    return SuiteOutcome(results=[attn.result(), hybrid.result()])


def suite_attention(seed: int) -> SuiteOutcome:
    suite = "attention"
    rng = make_rng(derive_seed(seed, 12))
    equivariance = PropertyCheck(suite, "permutation-equivariance")
    causal = PropertyCheck(suite, "causal-outputs-ignore-future")
    for trial in range(suite_size(VERIFY_ATTENTION_INSTANCES)):
        T, d = int(rng.integers(1, 12)), int(rng.integers(1, 6))
        layer = random_attention(rng, d, int(rng.integers(1, 5)))
        X = rng.normal(size=(T, d))
        perm = rng.permutation(T)
        ok = np.allclose(attention_forward(layer, X[perm]), attention_forward(layer, X)[perm], rtol=1e-12, atol=1e-12)
        equivariance.record(bool(ok), lambda: canonical_json({"trial": trial, "perm": perm.tolist()}))

        t = int(rng.integers(1, T + 1))
        edited = X.copy()
        edited[t:] = rng.normal(size=edited[t:].shape)
        models = [
            lambda Z: attention_forward(random_attention(make_rng(trial), d, 2, causal=True), Z),
            lambda Z: ssm_forward(LinearSsmLayer.hippo(3, B=np.ones((3, d)), C=np.ones((2, 3))), Z),
            lambda Z: ssm_forward(LinearSsmLayer.lti(0.9 * np.eye(3), np.ones((3, d)), np.ones((2, 3))), Z),
        ]
        ok = all(np.array_equal(model(X)[:t], model(edited)[:t]) for model in models)
        causal.record(ok, f"trial={trial}, T={T}, t={t}")
    return SuiteOutcome(results=[equivariance.result(), causal.result()])


# ---------------------------------------------------------------------------
# local_encoder
# ---------------------------------------------------------------------------

def suite_motif_counts(seed: int) -> SuiteOutcome:
    suite = "motif-counts"
    rng = make_rng(derive_seed(seed, 13))
    checks = {name: PropertyCheck(suite, f"{name}-count-exact") for name in ("triangle", "path3", "cycle4")}
    networkx_triangles = PropertyCheck(suite, "triangle-count-matches-networkx")
    for _ in range(suite_size(VERIFY_MOTIF_INSTANCES)):
        n = int(rng.integers(1, 21))
        g = generate_erdos_renyi(n, float(rng.uniform(0.05, 0.3)), _seed(rng))
        for name, check in checks.items():
            pattern = pattern_graph(name)
            check.record(motif_count(g, pattern) == count_induced_subgraphs(g, pattern), lambda: _describe(g))
        expected = sum(nx.triangles(_to_networkx(g)).values()) // 3
        networkx_triangles.record(motif_count(g, pattern_graph("triangle")) == expected, lambda: _describe(g))
    return SuiteOutcome(results=[c.result() for c in checks.values()] + [networkx_triangles.result()])


# ---------------------------------------------------------------------------
# connectivity_stream
# ---------------------------------------------------------------------------

def suite_stream_vs_unionfind(seed: int) -> SuiteOutcome:
    suite = "stream-vs-unionfind"
    exhaustive = PropertyCheck(suite, "exhaustive-small-orders")
    window = PropertyCheck(suite, "window-at-most-k-plus-one")
    nodes = range(VERIFY_STREAM_EXHAUSTIVE_NODES)
    all_edges = list(itertools.combinations(nodes, 2))
    for size in range(VERIFY_STREAM_EXHAUSTIVE_MAX_EDGES + 1):
        for subset in itertools.combinations(all_edges, size):
            expected = _edge_set_connected(subset)
            for seq in itertools.permutations(subset):
                k = node_locality_of_edges(seq)
                report = run_stream(seq, k)
                exhaustive.record(report.connected == expected, lambda: canonical_json({"edges": seq, "k": k}))
                window.record(report.max_window <= k + 1 and report.peak_labels <= k + 1,
                              lambda: canonical_json({"edges": seq, "k": k}))
    logger.info(f"🔍 {suite}: {exhaustive.instances} exhaustive orders checked")

    rng = make_rng(derive_seed(seed, 14))
    hac_orders = PropertyCheck(suite, "hac-orders-match-unionfind")
    no_violation = PropertyCheck(suite, "local-orders-never-flag")
    sound = PropertyCheck(suite, "violations-imply-nonlocal")
    for _ in range(suite_size(VERIFY_STREAM_RANDOM_INSTANCES)):
        g = _random_graph(rng, VERIFY_STREAM_MAX_NODES, density=2.0)
        tree = build_hac(g, rng.random(g.num_edges))
        order = edge_order_from_node_order(g, tree.leaf_order)
        seq = [g.edges[i] for i in order]
        k = node_locality_of_edges(seq)
        report = run_stream(seq, k, strict=True, num_nodes=g.n)
        hac_orders.record(report.connected == is_connected(g), lambda: _describe(g, order=order))
        no_violation.record(not report.violations, lambda: _describe(g, order=order))
        window.record(report.max_window <= k + 1 and report.peak_labels <= k + 1, lambda: _describe(g, order=order))

        shuffled = [g.edges[i] for i in rng.permutation(g.num_edges)]
        span = node_locality_of_edges(shuffled)
        k_small = int(rng.integers(0, span + 1))
        report = run_stream(shuffled, k_small, strict=True, num_nodes=g.n)
        sound.record(not report.violations or span > k_small, lambda: canonical_json({"edges": shuffled, "k": k_small}))

    checks = [exhaustive, window, hac_orders, no_violation, sound]
    return SuiteOutcome(results=[c.result() for c in checks])


def suite_hybrid(seed: int) -> SuiteOutcome:
    suite = "hybrid"
    rng = make_rng(derive_seed(seed, 15))
    matches = PropertyCheck(suite, "hybrid-matches-unionfind")
    kernel_check = PropertyCheck(suite, "factored-connectivity-follows-kernel")
    local = PropertyCheck(suite, "gadgets-are-k-local")
    for _ in range(suite_size(VERIFY_HYBRID_INSTANCES)):
        kernel = generate_erdos_renyi(int(rng.integers(1, 9)), float(rng.uniform(0.0, 0.8)), _seed(rng))
        k = int(rng.integers(1, 6))
        n_prime = int(rng.integers(2 * k + 2, 33))
        g, order = generate_factored(kernel, n_prime, k, _seed(rng))
        truth = is_connected(g)
        def describe(kernel=kernel, n_prime=n_prime, k=k):
            return canonical_json({"kernel": kernel.to_json_dict(), "n_prime": n_prime, "k": k})

        matches.record(hybrid_connectivity(g, order, k, n_prime) == truth, describe)
        kernel_check.record(truth == is_connected(kernel), describe)
        blocks = [[g.edges[i] for i in order[b:b + n_prime]] for b in range(0, len(order), n_prime)]
        local.record(all(node_locality_of_edges(block) <= k for block in blocks), describe)
    return SuiteOutcome(results=[matches.result(), kernel_check.result(), local.result()])


SUITES: Dict[str, Callable[[int], SuiteOutcome]] = {
    "graph-oracles": suite_graph_oracles,
    "tokenizers": suite_tokenizers,
    "hac-depth": suite_hac_depth,
    "hac-mst": suite_hac_mst,
    "hac-pe": suite_hac_pe,
    "hac-locality": suite_hac_locality,
    "color-count": suite_color_count,
    "sensitivity": suite_sensitivity,
    "jacobians": suite_jacobians,
    "attention": suite_attention,
    "motif-counts": suite_motif_counts,
    "stream-vs-unionfind": suite_stream_vs_unionfind,
    "hybrid": suite_hybrid,
}


def run_suites(name: str, seed: int) -> SuiteOutcome:
    """
    Run one registered suite, or every suite for "all"

    Raises:
        ConfigError: unknown suite name
    """
    require_name(name, (*SUITES, "all"), "suite")
    names = list(SUITES) if name == "all" else [name]
    outcome = SuiteOutcome()
    for suite in names:
        logger.info(f"🔍 running suite {suite}")
        part = SUITES[suite](seed)
        outcome.results.extend(part.results)
        outcome.frames.update(part.frames)
        status = "✅" if part.failed == 0 else "❌"
        logger.info(f"{status} {suite}: {len(part.results) - part.failed}/{len(part.results)} properties passed")
    return outcome
