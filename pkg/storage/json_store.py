"""
JSON file interchange for graphs, labels, tokenizations, HAC trees and reports
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from models import Graph, HacTree, MotAssignment, PipelineConfig, RouterWeights, Tokenization
from services.errors import GsmError, StorageError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ModelT = TypeVar("ModelT", bound=BaseModel)


def write_json(path: PathLike, data: Any) -> Path:
    """Write JSON deterministically (fixed key order, indent 2, trailing newline)"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, ensure_ascii=False, allow_nan=False) + "\n", encoding="utf-8")
    except (OSError, ValueError) as e:
        raise StorageError(f"cannot write {path}: {e}") from e
    logger.debug(f"💾 wrote {path}")
    return path


def read_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise StorageError(f"file not found: {path}") from e
    except (OSError, json.JSONDecodeError) as e:
        raise StorageError(f"cannot read {path}: {e}") from e


def _read_model(path: PathLike, model: Type[ModelT]) -> ModelT:
    data = read_json(path)
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise StorageError(f"{path} is not a valid {model.__name__}: {e.error_count()} errors") from e
    except GsmError as e:
        raise StorageError(f"{path} is not a valid {model.__name__}: {e}") from e


def write_graph(path: PathLike, g: Graph) -> Path:
    return write_json(path, g.to_json_dict())


def read_graph(path: PathLike) -> Graph:
    return _read_model(path, Graph)


def write_labels(path: PathLike, labels: Dict[str, Any]) -> Path:
    return write_json(path, labels)


def write_tokenization(path: PathLike, tok: Tokenization) -> Path:
    return write_json(path, tok.to_json_dict())


def read_tokenization(path: PathLike) -> Tokenization:
    return _read_model(path, Tokenization)


def write_hac_tree(path: PathLike, tree: HacTree) -> Path:
    return write_json(path, tree.to_json_dict())


def read_hac_tree(path: PathLike) -> HacTree:
    return _read_model(path, HacTree)


def write_mot_assignment(path: PathLike, assignment: MotAssignment) -> Path:
    return write_json(path, assignment.to_json_dict())


def read_mot_assignment(path: PathLike) -> MotAssignment:
    data = read_json(path)
    if isinstance(data, dict):
        data = {key: value for key, value in data.items() if key != "one_hot"}
    try:
        return MotAssignment.model_validate(data)
    except ValidationError as e:
        raise StorageError(f"{path} is not a valid MotAssignment: {e.error_count()} errors") from e


def read_router_weights(path: PathLike) -> RouterWeights:
    return _read_model(path, RouterWeights)


def write_router_weights(path: PathLike, weights: RouterWeights) -> Path:
    return write_json(path, weights.model_dump(mode="json"))


def read_pipeline_config(path: PathLike) -> PipelineConfig:
    return _read_model(path, PipelineConfig)
