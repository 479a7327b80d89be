"""Pass/fail certificates with an optional witness."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Certificate:
    name: str
    passed: bool
    witness: dict[str, Any] | None = None
    info: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "witness": self.witness}
        if self.info:
            out["info"] = self.info
        return out

    @classmethod
    def ok(cls, name: str, **info) -> "Certificate":
        return cls(name, True, None, dict(info))

    @classmethod
    def fail(cls, name: str, witness: dict[str, Any], **info) -> "Certificate":
        return cls(name, False, witness, dict(info))
