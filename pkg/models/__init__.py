"""
Data models for the graph-sequence toolkit
"""

from .graph import Edge, Graph, TaskKind, TaskLabel
from .hac_tree import HacNode, HacTree
from .reports import EncoderSpec, LayerSpec, MetricRow, PipelineConfig, PropertyResult, StreamReport
from .tokens import EdgeToken, MotAssignment, NodeToken, RouterWeights, SubgraphToken, Token, Tokenization

__all__ = [
    "Edge",
    "Graph",
    "TaskKind",
    "TaskLabel",
    "HacNode",
    "HacTree",
    "EncoderSpec",
    "LayerSpec",
    "MetricRow",
    "PipelineConfig",
    "PropertyResult",
    "StreamReport",
    "EdgeToken",
    "MotAssignment",
    "NodeToken",
    "RouterWeights",
    "SubgraphToken",
    "Token",
    "Tokenization",
]
