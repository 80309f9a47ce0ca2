"""Registry of expected values behind the verification suites.

Claims live in data/expected_values.json.  Entries with source="classical"
transcribe classical theorem statements and carry literal numbers; entries
with source="model" carry none, because their expected side is regenerated
from the closed-form model at run time, keeping the two computations
independent of hand-entered ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class Claim:
    id: str
    source: str  # "classical" | "model"
    anchor: str
    payload: dict
    note: str = ""


def load_claims() -> dict[str, Claim]:
    text = resources.files("hamcoh").joinpath("data/expected_values.json").read_text()
    data = json.loads(text)
    if data.get("version") != 1:
        raise ValueError(f"unsupported expected-values version {data.get('version')!r}")
    out = {}
    for raw in data["claims"]:
        claim = Claim(raw["id"], raw["source"], raw["anchor"], raw["payload"],
                      raw.get("note", ""))
        if claim.source not in ("classical", "model"):
            raise ValueError(f"claim {claim.id}: unknown source {claim.source!r}")
        out[claim.id] = claim
    return out
