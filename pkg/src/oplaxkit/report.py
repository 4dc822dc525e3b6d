"""Structured check reports.

Every verifier returns a :class:`Report`: a list of located items plus a count
of conditions actually checked. ``verdict`` is ``pass`` exactly when no item
has severity ``fail``; tilting-style checks may force ``unverified``. Timing
is carried but never serialized into the comparable text (golden files must be
byte-stable across runs).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Item:
    location: str
    severity: str  # "fail" | "warn" | "info"
    message: str
    witness: str = ""


@dataclass
class Report:
    title: str
    items: list[Item] = field(default_factory=list)
    checked: int = 0
    timing: float = 0.0
    forced_verdict: str | None = None  # "unverified" for inconclusive checks

    @property
    def verdict(self) -> str:
        if self.forced_verdict is not None:
            return self.forced_verdict
        return "fail" if any(i.severity == "fail" for i in self.items) else "pass"

    def ok(self) -> bool:
        return self.verdict == "pass"

    def fail(self, location: str, message: str, witness: str = "") -> None:
        self.items.append(Item(location, "fail", message, witness))

    def warn(self, location: str, message: str, witness: str = "") -> None:
        self.items.append(Item(location, "warn", message, witness))

    def info(self, location: str, message: str, witness: str = "") -> None:
        self.items.append(Item(location, "info", message, witness))

    def tick(self, n: int = 1) -> None:
        self.checked += n

    def merge(self, sub: "Report", prefix: str = "") -> None:
        """Absorb a sub-report, prefixing item locations."""
        for it in sub.items:
            loc = f"{prefix}{it.location}" if prefix else it.location
            self.items.append(Item(loc, it.severity, it.message, it.witness))
        self.checked += sub.checked
        if sub.forced_verdict == "unverified" and self.forced_verdict is None:
            self.forced_verdict = "unverified"

    # -- rendering -----------------------------------------------------------

    def format_text(self) -> str:
        lines = [f"report: {self.title}", f"verdict: {self.verdict}", f"checked: {self.checked}"]
        if not self.items:
            lines.append("items: none")
        else:
            lines.append(f"items: {len(self.items)}")
            for it in self.items:
                w = f" | witness: {it.witness}" if it.witness else ""
                lines.append(f"  [{it.severity}] {it.location}: {it.message}{w}")
        return "\n".join(lines)

    def to_json_obj(self) -> dict:
        return {
            "title": self.title,
            "verdict": self.verdict,
            "checked": self.checked,
            "items": [
                {"location": i.location, "severity": i.severity, "message": i.message, "witness": i.witness}
                for i in self.items
            ],
        }
