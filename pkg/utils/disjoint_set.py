"""
Disjoint-set forest with path halving and union by size
Used by the connectivity oracle, HAC merges and the red-component label
"""

from typing import Dict, Hashable, Iterable, Iterator, List, Set, Tuple


class DisjointSet:
    """Union-find over arbitrary hashable items"""

    def __init__(self, items: Iterable[Hashable] = ()):
        self._parent: Dict[Hashable, Hashable] = {}
        self._size: Dict[Hashable, int] = {}
        for item in items:
            self.add(item)

    def __len__(self) -> int:
        return len(self._parent)

    def __contains__(self, item: Hashable) -> bool:
        return item in self._parent

    def add(self, item: Hashable) -> None:
        if item in self._parent:
            return
        self._parent[item] = item
        self._size[item] = 1

    def find(self, item: Hashable) -> Hashable:
        parent = self._parent
        while parent[item] != item:
            parent[item] = parent[parent[item]]
            item = parent[item]
        return item

    def union(self, a: Hashable, b: Hashable) -> bool:
        """Merge the sets of a and b; returns False when they were already joined"""
        root_a, root_b = self.find(a), self.find(b)
        if root_a == root_b:
            return False
        if self._size[root_a] < self._size[root_b]:
            root_a, root_b = root_b, root_a
        self._parent[root_b] = root_a
        self._size[root_a] += self._size[root_b]
        return True

    def connected(self, a: Hashable, b: Hashable) -> bool:
        return self.find(a) == self.find(b)

    def count_sets(self) -> int:
        return sum(1 for item, parent in self._parent.items() if item == parent)

    def itersets(self) -> Iterator[Set[Hashable]]:
        groups: Dict[Hashable, Set[Hashable]] = {}
        for item in self._parent:
            groups.setdefault(self.find(item), set()).add(item)
        yield from groups.values()

    def groups(self) -> List[Tuple[Hashable, ...]]:
        """Sets as sorted tuples, ordered by their smallest member"""
        return sorted((tuple(sorted(group)) for group in self.itersets()), key=lambda g: g[0])
