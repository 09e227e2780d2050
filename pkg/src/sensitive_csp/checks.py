from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class Check:
    """Outcome of a yes/no property test, with a counterexample when it fails."""

    holds: bool
    witness: Any = None
    nodes_explored: int = 0

    def __bool__(self) -> bool:
        return self.holds
