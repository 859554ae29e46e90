"""
HAC dendrogram model
"""

from typing import Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from services.errors import InvalidGraphError


class HacNode(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    level: int  # Clustering round that created this cluster; leaves are 0
    members: Tuple[int, ...]  # Sorted graph node ids
    children: Tuple[int, ...] = ()  # Tree-node ids, ordered by smallest member


class HacTree(BaseModel):
    """
    Dendrogram of affinity-clustering rounds

    Tree nodes 0..n-1 are the singleton leaves, tree node v holding graph node v.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    depth: int
    nodes: Tuple[HacNode, ...]
    root: int
    leaf_order: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_tree(self) -> "HacTree":
        count = len(self.nodes)
        if not 0 <= self.root < count:
            raise InvalidGraphError(f"root id {self.root} outside 0..{count - 1}")
        if self.nodes[self.root].level != self.depth:
            raise InvalidGraphError("tree depth must equal the root level")
        for i, node in enumerate(self.nodes):
            if any(not 0 <= c < count for c in node.children):
                raise InvalidGraphError(f"tree node {i} has an unknown child")
            if len(node.children) == 1:
                raise InvalidGraphError(f"internal tree node {i} has a single child")
        if sorted(self.leaf_order) != list(range(self.num_graph_nodes)):
            raise InvalidGraphError("leaf_order must be a permutation of the graph nodes")
        return self

    @property
    def num_graph_nodes(self) -> int:
        return len(self.nodes[self.root].members)

    def parents(self) -> Dict[int, int]:
        return {child: i for i, node in enumerate(self.nodes) for child in node.children}

    def root_path(self, v: int) -> List[int]:
        """Tree-node ids from the root down to the leaf of graph node v"""
        parents = self.parents()
        path = [v]
        while path[-1] != self.root:
            path.append(parents[path[-1]])
        path.reverse()
        return path

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json")
