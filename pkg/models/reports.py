"""
Pipeline configuration and report models
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class EncoderSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    d_local: int = 8
    depth: int = 1


class LayerSpec(BaseModel):
    """One global-encoder layer: an SSM (lti or hippo) or attention"""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: str = "hippo"
    state_width: int = 4
    causal: bool = False


class PipelineConfig(BaseModel):
    """Everything `run` needs; the seed is mandatory"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int
    task: str
    instances: int = 100
    generator: str = "er"
    generator_params: Dict[str, Any] = Field(default_factory=dict)
    tokenizer: Optional[str] = None
    pattern: str = "triangle"  # Motif for the triangle_count / motif tasks
    colors: int = 4  # Palette size for color_counts
    tokenizer_params: Dict[str, Any] = Field(default_factory=dict)
    encoder: EncoderSpec = Field(default_factory=EncoderSpec)
    model: List[LayerSpec] = Field(default_factory=lambda: [LayerSpec(), LayerSpec(), LayerSpec(kind="attention")])
    out_dir: str = "out"
    timing: bool = False


class StreamReport(BaseModel):
    """Result of one pass of the streaming connectivity automaton"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    connected: bool
    violations: List[int] = Field(default_factory=list)  # Edge positions where a retired node reappeared
    max_window: int = 0
    peak_labels: int = 0


class PropertyResult(BaseModel):
    """Outcome of one verified property"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    suite: str
    prop: str
    passed: bool
    instances: int
    counterexample: Optional[str] = None


class MetricRow(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    task: str
    method: str
    instances: int
    exact_match_rate: float
    peak_window: int = 0
    wall_time_s: Optional[float] = None
