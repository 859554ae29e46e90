"""
CSV outputs via pandas: PE tables, sensitivity profiles, metrics, reports
"""

import logging
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from services.errors import StorageError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_frame(path: PathLike, frame: pd.DataFrame) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e
    return path


def read_frame(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise StorageError(f"cannot read {path}: {e}") from e


def rows_frame(rows: Sequence[BaseModel], drop_empty: Sequence[str] = ()) -> pd.DataFrame:
    """Frame from pydantic rows; columns listed in drop_empty are dropped when entirely None"""
    frame = pd.DataFrame([row.model_dump() for row in rows])
    for column in drop_empty:
        if column in frame.columns and frame[column].isna().all():
            frame = frame.drop(columns=[column])
    return frame


def pe_frame(pe: np.ndarray) -> pd.DataFrame:
    """Long-form PE table: one row per ordered pair, columns u, v, d1..dL"""
    n, _, levels = pe.shape
    u, v = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    frame = pd.DataFrame({"u": u.reshape(-1), "v": v.reshape(-1)})
    for level in range(levels):
        frame[f"d{level + 1}"] = pe[:, :, level].reshape(-1)
    return frame


def read_pe(path: PathLike) -> np.ndarray:
    frame = read_frame(path)
    levels = [c for c in frame.columns if c.startswith("d")]
    n = int(frame["u"].max()) + 1
    pe = np.empty((n, n, len(levels)), dtype=np.int64)
    pe[frame["u"].to_numpy(), frame["v"].to_numpy()] = frame[levels].to_numpy()
    return pe
