"""Append-only decision log with a logical clock.

Lines are deterministic for a given request stream: the "timestamp" is a
monotonically increasing sequence number, never wall-clock time, so a
replayed trace produces byte-identical logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TextIO


def _dash(value) -> str:
    return str(value) if value not in (None, "", ()) else "-"


@dataclass
class DecisionLog:
    enabled: bool = True
    lines: list[str] = field(default_factory=list)
    sink: TextIO | None = None
    _seq: int = 0

    def record(self, request, decision) -> None:
        if not self.enabled:
            return
        self._seq += 1
        modules = ",".join(f"{name}:{verdict}"
                           for name, verdict in decision.module_verdicts)
        line = (
            f"seq={self._seq} subject={request.subject}"
            f" request={request.request_type} target={_dash(request.target)}"
            f" kind={_dash(request.target_kind)} verdict={decision.verdict}"
            f" reason={_dash(decision.reason)}"
            f" post={'+'.join(decision.post_actions) or '-'}"
            f" modules={modules or '-'}"
        )
        self.lines.append(line)
        if self.sink is not None:
            self.sink.write(line + "\n")

    def note(self, text: str) -> None:
        """Free-form audit line (capability recomputes, admin actions)."""
        if not self.enabled:
            return
        self._seq += 1
        line = f"seq={self._seq} {text}"
        self.lines.append(line)
        if self.sink is not None:
            self.sink.write(line + "\n")
