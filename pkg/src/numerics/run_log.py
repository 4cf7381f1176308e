"""Run log for tracking the events of one experiment run.

Events are kept in a bounded in-memory deque for the run manifest and are
forwarded to the standard logger as they arrive.
"""

import logging
from collections import deque
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Deque, Dict, List

logger = logging.getLogger(__name__)


class EventType(Enum):
    """Types of run events."""

    INFO = "info"
    WARNING = "warning"
    DIAGNOSTIC = "diagnostic"
    OUTPUT = "output"


_LEVELS = {
    EventType.INFO: logging.INFO,
    EventType.WARNING: logging.WARNING,
    EventType.DIAGNOSTIC: logging.DEBUG,
    EventType.OUTPUT: logging.INFO,
}


@dataclass
class RunEvent:
    """A single run log event."""

    text: str
    event_type: EventType
    timestamp: datetime

    def to_record(self) -> Dict[str, str]:
        """Return the event as a JSON-friendly dict."""
        return {
            "text": self.text,
            "type": self.event_type.value,
            "timestamp": self.timestamp.isoformat(timespec="seconds"),
        }


class RunLog:
    """Manages run events and history."""

    def __init__(self, max_events: int = 500):
        """Initialize run log.

        Args:
            max_events: Maximum events to keep in history
        """
        self.max_events = max_events
        self.events: Deque[RunEvent] = deque(maxlen=max_events)

    def add_event(self, text: str, event_type: EventType = EventType.INFO) -> None:
        """Add an event to the run log and forward it to the logger.

        Args:
            text: Event text
            event_type: Type of event
        """
        self.events.append(RunEvent(text=text, event_type=event_type, timestamp=datetime.now()))
        logger.log(_LEVELS[event_type], text)

    def get_recent_events(self, count: int) -> List[RunEvent]:
        """Get the most recent events.

        Args:
            count: Number of events to retrieve

        Returns:
            List of recent events
        """
        return list(self.events)[-count:] if self.events and count > 0 else []

    def get_events_by_type(self, event_type: EventType) -> List[RunEvent]:
        """Get all events of a specific type.

        Args:
            event_type: Type to filter by

        Returns:
            Filtered events
        """
        return [e for e in self.events if e.event_type == event_type]

    def clear(self) -> None:
        """Clear all events from the log."""
        self.events.clear()

    def to_records(self) -> List[Dict[str, str]]:
        """Return every event as a JSON-friendly dict, oldest first."""
        return [event.to_record() for event in self.events]

    def format_admissibility_message(
        self, dt: float, ok: bool, slack_a: float, slack_b: float
    ) -> str:
        """Format a step-size gate message.

        Args:
            dt: Step size
            ok: Whether the gate passed
            slack_a: Dissipativity-gate slack
            slack_b: Contraction-gate slack

        Returns:
            Formatted message
        """
        verdict = "passes" if ok else "FAILS"
        return (
            f"dt={dt:g} {verdict} the step-size gate "
            f"(slack_a={slack_a:.4f}, slack_b={slack_b:.4f})"
        )

    def format_diagnostic_message(self, label: str, violations: int, drift_ratio: float) -> str:
        """Format an inline-diagnostics message.

        Args:
            label: Run leg, e.g. "xi3 dt=0.001"
            violations: Stored states outside the truncation ball
            drift_ratio: Largest drift growth ratio seen

        Returns:
            Formatted message
        """
        if violations:
            return f"{label}: {violations} truncation violations, max drift ratio {drift_ratio:.3g}"
        return f"{label}: no truncation violations, max drift ratio {drift_ratio:.3g}"

    def format_output_message(self, path: str, rows: int) -> str:
        """Format a file-written message.

        Args:
            path: Output file
            rows: Data rows written

        Returns:
            Formatted message
        """
        return f"wrote {path} ({rows} rows)"
