"""Operation counters used to check the linear-time and constant-delay claims.

Wall-clock timings are noisy in Python, so the engines also count abstract
work units.  ``ops`` is charged for every tuple touched or semiring operation
performed during preprocessing, ``probes`` for every labelled-link lookup made
while enumerating.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator


@dataclass
class OpCounter:
    ops: int = 0
    probes: int = 0

    def reset(self) -> None:
        self.ops = 0
        self.probes = 0


COUNTER = OpCounter()


@contextmanager
def counting() -> Iterator[OpCounter]:
    """Reset the global counter and hand it to the caller."""
    COUNTER.reset()
    yield COUNTER
