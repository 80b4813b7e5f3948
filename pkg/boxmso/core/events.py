"""
Trace events for table construction.

A recorder collects one event per expression node (kind, depth, table
size, elapsed time); the CLI prints them after the answer when
``--trace`` is given.
"""

import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Any

import orjson

logger = logging.getLogger(__name__)


@dataclass
class TraceEvent:
    """One processed expression node."""
    event_type: str
    data: dict[str, Any]
    timestamp: float = field(default_factory=time.time)

    def to_line(self) -> str:
        """Format the event as one JSON line."""
        payload: dict[str, Any] = {"type": self.event_type, **self.data}
        return orjson.dumps(payload, option=orjson.OPT_SORT_KEYS).decode()


class TraceRecorder:
    """Collects events from possibly concurrent table builders."""

    def __init__(self, enabled: bool = True) -> None:
        self.enabled = enabled
        self._events: list[TraceEvent] = []
        self._lock = threading.Lock()

    def record(self, event_type: str, **data: Any) -> None:
        if not self.enabled:
            return
        with self._lock:
            self._events.append(TraceEvent(event_type=event_type, data=data))

    @property
    def events(self) -> list[TraceEvent]:
        with self._lock:
            return list(self._events)

    def lines(self) -> list[str]:
        return [event.to_line() for event in self.events]

    def largest(self, key: str = "states") -> int:
        """Largest value of a numeric field over all events."""
        values = [int(e.data.get(key, 0)) for e in self.events]
        return max(values, default=0)


class Stopwatch:
    """Elapsed milliseconds since construction."""

    def __init__(self) -> None:
        self._start = time.perf_counter()

    @property
    def elapsed_ms(self) -> float:
        return round((time.perf_counter() - self._start) * 1000, 3)
