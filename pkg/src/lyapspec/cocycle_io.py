"""Cocycle file parsing.

The on-disk schema is the smallest JSON object that fixes every
dimension ambiguity:

    {"d": 2, "k": 2, "matrices": [[[2.0, 0.0], [0.0, 0.5]], ...]}

with k generator matrices of shape d x d, listed for symbols 1..k in
order. All numeric conventions downstream are natural-log.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .words import OneStepCocycle


def cocycle_from_dict(data: dict) -> OneStepCocycle:
    if not isinstance(data, dict):
        raise ValueError("cocycle document must be a JSON object")
    missing = {"d", "k", "matrices"} - set(data)
    if missing:
        raise ValueError(f"cocycle document is missing fields: {sorted(missing)}")
    d, k = data["d"], data["k"]
    if not (isinstance(d, int) and isinstance(k, int)) or d < 1 or k < 1:
        raise ValueError("d and k must be positive integers")
    try:
        G = np.array(data["matrices"], dtype=float)
    except (TypeError, ValueError) as e:
        raise ValueError(f"matrices are not a rectangular numeric array: {e}") from e
    if G.shape != (k, d, d):
        raise ValueError(
            f"matrices have shape {G.shape}, expected ({k}, {d}, {d})"
        )
    return OneStepCocycle(G)


def load_cocycle(path: str | Path) -> OneStepCocycle:
    """Parse and validate a cocycle JSON file."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(
            f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}"
        ) from e
    return cocycle_from_dict(data)


def cocycle_to_dict(C: OneStepCocycle) -> dict:
    return {"d": C.d, "k": C.k, "matrices": C.generators.tolist()}
