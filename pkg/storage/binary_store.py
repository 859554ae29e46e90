"""
Binary records: one JSON header line followed by little-endian f64 payload

Used for encoded token sequences and for layer weights.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from services.errors import StorageError
from services.local_encoder import EncodedSequence
from services.seq_models import AttentionLayer, LinearSsmLayer

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
F64 = np.dtype("<f8")


def _header_bytes(header: dict) -> bytes:
    return (json.dumps(header, separators=(",", ":"), ensure_ascii=False) + "\n").encode("utf-8")


def write_records(path: PathLike, records: Sequence[Tuple[dict, Sequence[np.ndarray]]]) -> Path:
    """
    Write (header, arrays) records back to back

    Each header gains an "arrays" list of shapes so the payload can be split on read.
    """
    path = Path(path)
    chunks: List[bytes] = []
    for header, arrays in records:
        arrays = [np.ascontiguousarray(a, dtype=F64) for a in arrays]
        full_header = dict(header)
        full_header["arrays"] = [list(a.shape) for a in arrays]
        chunks.append(_header_bytes(full_header))
        chunks.extend(a.tobytes() for a in arrays)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(chunks))
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e
    return path


def read_records(path: PathLike) -> List[Tuple[dict, List[np.ndarray]]]:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from e

    records = []
    offset = 0
    while offset < len(blob):
        end = blob.find(b"\n", offset)
        if end < 0:
            raise StorageError(f"{path}: truncated header at byte {offset}")
        try:
            header = json.loads(blob[offset:end].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise StorageError(f"{path}: bad header at byte {offset}: {e}") from e
        offset = end + 1
        arrays = []
        for shape in header.pop("arrays", []):
            size = int(np.prod(shape)) * F64.itemsize
            if offset + size > len(blob):
                raise StorageError(f"{path}: payload shorter than its header announces")
            arrays.append(np.frombuffer(blob, dtype=F64, count=size // F64.itemsize, offset=offset).reshape(shape).copy())
            offset += size
        records.append((header, arrays))
    return records


def write_encoded(path: PathLike, sequences: Sequence[EncodedSequence]) -> Path:
    records = []
    for seq in sequences:
        token_count, d_local = seq.vectors.shape
        header = {"token_count": token_count, "d_local": d_local, "provenance": seq.provenance}
        records.append((header, [seq.vectors]))
    return write_records(path, records)


def read_encoded(path: PathLike) -> List[EncodedSequence]:
    out = []
    for header, arrays in read_records(path):
        if len(arrays) != 1 or arrays[0].shape != (header.get("token_count"), header.get("d_local")):
            raise StorageError(f"{path}: encoded record does not match its header")
        out.append(EncodedSequence(vectors=arrays[0], provenance=header.get("provenance", "")))
    return out


def write_vector(path: PathLike, vector: np.ndarray, provenance: str) -> Path:
    """A single pooled embedding"""
    vector = np.asarray(vector, dtype=F64).reshape(1, -1)
    return write_encoded(path, [EncodedSequence(vectors=vector, provenance=provenance)])


def write_layers(path: PathLike, layers: Sequence[Union[LinearSsmLayer, AttentionLayer]]) -> Path:
    records = []
    for layer in layers:
        if isinstance(layer, LinearSsmLayer):
            records.append(({"kind": "ssm", "mode": layer.mode}, [layer.A, layer.B, layer.C]))
        else:
            arrays = [layer.W_Q, layer.W_K, layer.W_V] + ([layer.pe] if layer.pe is not None else [])
            records.append(({"kind": "attention", "causal": layer.causal}, arrays))
    return write_records(path, records)


def read_layers(path: PathLike) -> List[Union[LinearSsmLayer, AttentionLayer]]:
    layers: List[Union[LinearSsmLayer, AttentionLayer]] = []
    for header, arrays in read_records(path):
        kind = header.get("kind")
        if kind == "ssm" and len(arrays) == 3:
            layers.append(LinearSsmLayer(*arrays, mode=header.get("mode", "lti")))
        elif kind == "attention" and len(arrays) in (3, 4):
            pe = arrays[3] if len(arrays) == 4 else None
            layers.append(AttentionLayer(*arrays[:3], causal=bool(header.get("causal")), pe=pe))
        else:
            raise StorageError(f"{path}: unknown layer record {header}")
    return layers
