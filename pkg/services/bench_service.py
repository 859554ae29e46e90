"""
Wall-time sweep of the clustering and tokenization stages over growing graphs
"""

import logging
import time
from typing import Callable, Dict, Sequence

import pandas as pd

from services.errors import ConfigError
from services.graph_core import generate_erdos_renyi
from services.hac import bfs_tokenize, build_hac, hierarchical_pe_matrix
from services.tokenizers import khop_tokenize, node_tokenize, random_walk_tokenize
from services.pipeline_service import hac_costs
from utils.rng import derive_seed

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (16, 32, 64, 128)


def bench(sizes: Sequence[int] = DEFAULT_SIZES, seed: int = 0, repeats: int = 3,
          average_degree: float = 4.0) -> pd.DataFrame:
    """
    Time each component on ER graphs of the given sizes

    Returns:
        Frame with columns component, n, edges, wall_time_s (best of `repeats`)
    """
    if not sizes or any(n < 2 for n in sizes):
        raise ConfigError(f"bench sizes must all be >= 2, got {list(sizes)}")
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")

    rows = []
    for n in sizes:
        g = generate_erdos_renyi(n, min(1.0, average_degree / (n - 1)), derive_seed(seed, n))
        costs = hac_costs(g)
        tree = build_hac(g, costs)
        components: Dict[str, Callable[[], object]] = {
            "hac": lambda: build_hac(g, costs),
            "hac-bfs": lambda: bfs_tokenize(tree),
            "hierarchical-pe": lambda: hierarchical_pe_matrix(tree, g),
            "node": lambda: node_tokenize(g),
            "khop": lambda: khop_tokenize(g, 2),
            "random-walk": lambda: random_walk_tokenize(g, walk_len=8, walks_per_node=1, seed=seed),
        }
        for name, fn in components.items():
            best = float("inf")
            for _ in range(repeats):
                started = time.perf_counter()
                fn()
                best = min(best, time.perf_counter() - started)
            rows.append({"component": name, "n": n, "edges": g.num_edges, "wall_time_s": best})
        logger.info(f"⏱️ bench n={n}: {g.num_edges} edges, HAC depth {tree.depth}")
    return pd.DataFrame(rows, columns=["component", "n", "edges", "wall_time_s"])
