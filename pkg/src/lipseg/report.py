"""JSON run reports written by the command line."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class SegmentationReport:
    command: str
    inputs: list[str]
    parameters: dict[str, Any] = field(default_factory=dict)
    criterion_value: float | None = None
    region_pixel_count: int | None = None
    iterations: int | None = None
    # invariance runs: variant name -> criterion value
    variant_values: dict[str, float] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    def to_json(self, indent: int | None = 2) -> str:
        # json emits shortest round-trip reprs, i.e. up to 17 significant digits
        return json.dumps(asdict(self), indent=indent, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "SegmentationReport":
        return cls(**json.loads(text))
