"""
File interchange (JSON, f64 binary records, CSV)
"""

from .binary_store import read_encoded, read_layers, read_records, write_encoded, write_layers, write_records, write_vector
from .csv_store import pe_frame, read_frame, read_pe, rows_frame, write_frame
from .json_store import (
    read_graph,
    read_hac_tree,
    read_json,
    read_mot_assignment,
    read_pipeline_config,
    read_router_weights,
    read_tokenization,
    write_graph,
    write_hac_tree,
    write_json,
    write_labels,
    write_mot_assignment,
    write_router_weights,
    write_tokenization,
)

__all__ = [
    "read_encoded",
    "read_layers",
    "read_records",
    "write_encoded",
    "write_layers",
    "write_records",
    "write_vector",
    "pe_frame",
    "read_frame",
    "read_pe",
    "rows_frame",
    "write_frame",
    "read_graph",
    "read_hac_tree",
    "read_json",
    "read_mot_assignment",
    "read_pipeline_config",
    "read_router_weights",
    "read_tokenization",
    "write_graph",
    "write_hac_tree",
    "write_json",
    "write_labels",
    "write_mot_assignment",
    "write_router_weights",
    "write_tokenization",
]
