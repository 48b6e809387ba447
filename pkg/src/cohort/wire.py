"""Canonical JSON helpers shared by the log, the adapters, and the parsers."""

from __future__ import annotations

import json
from typing import Any

_DECODER = json.JSONDecoder()


def canonical_json(value: Any) -> str:
    """Serialize to a canonical single-line form (sorted keys, no spaces).

    Used everywhere byte-stable output matters: event log lines, golden
    comparisons, replay equality checks.
    """
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def extract_json_object(raw: str, required_key: str) -> dict | None:
    """Return the first JSON object in ``raw`` that contains ``required_key``.

    Tolerates surrounding prose, code fences, and trailing junk: every ``{``
    is tried as a candidate start and decoded with the incremental JSON
    decoder, which handles nested braces and braces inside strings correctly.
    Objects that parse but lack the key are skipped.
    """
    idx = raw.find("{")
    while idx != -1:
        try:
            value, _ = _DECODER.raw_decode(raw, idx)
        except ValueError:
            value = None
        if isinstance(value, dict) and required_key in value:
            return value
        idx = raw.find("{", idx + 1)
    return None
