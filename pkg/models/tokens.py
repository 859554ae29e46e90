"""
Token, tokenization and router models
"""

import math
from typing import Any, Dict, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from services.errors import DimensionMismatchError, TokenizationError


class NodeToken(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    node: int


class EdgeToken(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    edge: int  # Index into Graph.edges


class SubgraphToken(BaseModel):
    """
    A node subset; `empty` marks the placeholder emitted for an empty k-hop ring

    The placeholder still carries the centre node so the set is never empty.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")
    subgraph: Tuple[int, ...]
    empty: bool = False

    @model_validator(mode="after")
    def _check_members(self) -> "SubgraphToken":
        if not self.subgraph:
            raise TokenizationError("subgraph token needs at least one member")
        if list(self.subgraph) != sorted(set(self.subgraph)):
            raise TokenizationError(f"subgraph members must be sorted and distinct: {self.subgraph}")
        return self

    @property
    def members(self) -> Tuple[int, ...]:
        return self.subgraph


Token = Union[NodeToken, EdgeToken, SubgraphToken]


class Tokenization(BaseModel):
    """A set of token sequences produced from one graph"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    tokenizer: str
    params: Dict[str, Any] = Field(default_factory=dict)
    graph_fingerprint: str
    sequences: Tuple[Tuple[Token, ...], ...]

    @model_validator(mode="after")
    def _check_sequences(self) -> "Tokenization":
        if not self.sequences:
            raise TokenizationError("tokenization needs at least one sequence")
        for i, seq in enumerate(self.sequences):
            if not seq:
                raise TokenizationError(f"sequence {i} is empty")
        return self

    @property
    def num_sequences(self) -> int:
        return len(self.sequences)

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json")


class RouterWeights(BaseModel):
    """Linear router weights W_r, shape d_in x |candidates|"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    weights: Tuple[Tuple[float, ...], ...]

    @model_validator(mode="after")
    def _check_weights(self) -> "RouterWeights":
        if not self.weights or not self.weights[0]:
            raise DimensionMismatchError("router weights must be a non-empty matrix")
        width = len(self.weights[0])
        if any(len(row) != width for row in self.weights):
            raise DimensionMismatchError("router weight rows differ in length")
        if not all(math.isfinite(x) for row in self.weights for x in row):
            raise DimensionMismatchError("router weights must be finite")
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.weights), len(self.weights[0])


class MotAssignment(BaseModel):
    """Per-node top-2 tokenizer choice of the mixture-of-tokenization router"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    candidates: Tuple[str, ...]
    top2: Tuple[Tuple[int, int], ...]  # Per node: (best, second best) candidate index

    def one_hot(self) -> Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]:
        width = len(self.candidates)
        rows = []
        for first, second in self.top2:
            rows.append((
                tuple(int(j == first) for j in range(width)),
                tuple(int(j == second) for j in range(width)),
            ))
        return tuple(rows)

    def to_json_dict(self) -> dict:
        data = self.model_dump(mode="json")
        data["one_hot"] = [[list(a), list(b)] for a, b in self.one_hot()]
        return data
