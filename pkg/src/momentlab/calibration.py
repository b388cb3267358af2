"""Frozen empirical constants.

The values live in data/calibration.json. They are produced once by
``python -m momentlab.calibrate`` on calibration seeds that the acceptance suite
never uses, and are read-only everywhere else.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

_MISSING = object()


@lru_cache(maxsize=1)
def load() -> dict:
    try:
        text = resources.files("momentlab").joinpath("data/calibration.json").read_text()
    except FileNotFoundError:
        return {}
    return json.loads(text)


def get(key: str, default=_MISSING):
    entry = load().get("constants", {}).get(key, _MISSING)
    if entry is _MISSING:
        if default is _MISSING:
            raise KeyError(f"calibration constant {key!r} is missing; run python -m momentlab.calibrate")
        return default
    return entry["value"] if isinstance(entry, dict) else entry
