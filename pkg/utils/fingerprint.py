"""Canonical JSON and content fingerprints"""

import hashlib
import json
from typing import Any


def canonical_json(data: Any) -> str:
    """Compact JSON with insertion-ordered keys (field order is part of the formats)"""
    return json.dumps(data, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def fingerprint(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()
