"""Enumeration caps.

Defaults keep every exhaustive routine at desk scale.  The ``CLASSCODE_CAPS``
environment variable overrides them, either as JSON (``{"tc": 8}``) or as
comma-separated ``key=value`` pairs (``tc=8,budget=6``).
"""
from __future__ import annotations

import json
import os

DEFAULT_CAPS = {
    "tc": 12,  # hf_enumerate_tc_bounded
    "vstage": 5,  # hf_v_stage
    "budget": 6,  # node budget of unrollings
    "class_universe": 16,  # max universe size under FULL class quantification
}


def caps() -> dict[str, int]:
    out = dict(DEFAULT_CAPS)
    raw = os.environ.get("CLASSCODE_CAPS", "").strip()
    if not raw:
        return out
    if raw.startswith("{"):
        override = json.loads(raw)
    else:
        override = {}
        for part in raw.split(","):
            if part.strip():
                k, _, v = part.partition("=")
                override[k.strip()] = v.strip()
    for k, v in override.items():
        if k not in out:
            raise ValueError(f"unknown cap {k!r} in CLASSCODE_CAPS")
        out[k] = int(v)
    return out
