"""
Graph and task-label models with type safety using Pydantic
"""

import math
from typing import FrozenSet, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from services.errors import InvalidGraphError
from utils.fingerprint import fingerprint

Edge = Tuple[int, int]

TaskKind = Literal[
    "node_degree",
    "cycle_check",
    "triangle_count",
    "connectivity",
    "color_counts",
    "shortest_path",
    "color_connectivity",
]


class Graph(BaseModel):
    """
    Undirected simple graph on nodes 0..n-1

    The edge order is part of the graph's identity: edge tokenization and the
    streaming connectivity automaton both consume edges in stored order.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int
    edges: Tuple[Edge, ...] = ()
    colors: Optional[Tuple[int, ...]] = None  # Per-node color id
    features: Optional[Tuple[Tuple[float, ...], ...]] = None  # Per-node vectors of dimension d_in

    @model_validator(mode="after")
    def _check_invariants(self) -> "Graph":
        if self.n < 1:
            raise InvalidGraphError(f"graph needs at least one node, got n={self.n}")
        seen = set()
        for position, (u, v) in enumerate(self.edges):
            if u == v:
                raise InvalidGraphError(f"self-loop on node {u} at edge {position}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidGraphError(f"edge {position} ({u}, {v}) has an endpoint outside 0..{self.n - 1}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidGraphError(f"duplicate edge {key} at position {position}")
            seen.add(key)
        if self.colors is not None:
            if len(self.colors) != self.n:
                raise InvalidGraphError(f"expected {self.n} colors, got {len(self.colors)}")
            if any(c < 0 for c in self.colors):
                raise InvalidGraphError("color ids must be non-negative")
        if self.features is not None:
            if len(self.features) != self.n:
                raise InvalidGraphError(f"expected {self.n} feature vectors, got {len(self.features)}")
            dims = {len(row) for row in self.features}
            if len(dims) > 1:
                raise InvalidGraphError(f"feature vectors have mixed dimensions {sorted(dims)}")
            if not all(math.isfinite(x) for row in self.features for x in row):
                raise InvalidGraphError("feature vectors must be finite")
        return self

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_colors(self) -> int:
        return max(self.colors) + 1 if self.colors else 0

    @property
    def feature_dim(self) -> Optional[int]:
        if self.features is None:
            return None
        return len(self.features[0]) if self.features else 0

    def adjacency(self) -> List[List[int]]:
        """Sorted neighbour lists indexed by node id"""
        neighbours: List[List[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            neighbours[u].append(v)
            neighbours[v].append(u)
        for row in neighbours:
            row.sort()
        return neighbours

    def neighbour_sets(self) -> List[FrozenSet[int]]:
        return [frozenset(row) for row in self.adjacency()]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def feature_matrix(self) -> Optional[np.ndarray]:
        if self.features is None:
            return None
        return np.asarray(self.features, dtype=np.float64).reshape(self.n, -1)

    def with_colors(self, colors) -> "Graph":
        return Graph(n=self.n, edges=self.edges, colors=tuple(int(c) for c in colors), features=self.features)

    def with_features(self, features) -> "Graph":
        rows = tuple(tuple(float(x) for x in row) for row in np.asarray(features, dtype=np.float64).reshape(self.n, -1))
        return Graph(n=self.n, edges=self.edges, colors=self.colors, features=rows)

    def to_json_dict(self) -> dict:
        """JSON form with the fixed field order n, edges, colors, features"""
        return self.model_dump(mode="json")

    def fingerprint(self) -> str:
        return fingerprint(self.to_json_dict())


LabelValue = Union[bool, int, Tuple[int, ...], Tuple[Tuple[int, ...], ...]]


class TaskLabel(BaseModel):
    """Exact oracle output for one task"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: TaskKind
    value: LabelValue

    @model_validator(mode="after")
    def _check_shape(self) -> "TaskLabel":
        value = self.value
        if self.kind in ("cycle_check", "connectivity"):
            if not isinstance(value, bool):
                raise InvalidGraphError(f"{self.kind} label must be boolean")
        elif self.kind in ("triangle_count", "color_connectivity"):
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise InvalidGraphError(f"{self.kind} label must be a non-negative integer")
        elif self.kind in ("node_degree", "color_counts"):
            if not isinstance(value, tuple) or any(not isinstance(x, int) or x < 0 for x in value):
                raise InvalidGraphError(f"{self.kind} label must be a vector of non-negative integers")
        elif self.kind == "shortest_path":
            if not isinstance(value, tuple) or any(not isinstance(row, tuple) for row in value):
                raise InvalidGraphError("shortest_path label must be a distance matrix")
        return self

    @property
    def label_key(self) -> str:
        """Key used in the labels JSON file"""
        return "connected" if self.kind == "connectivity" else self.kind
