"""Experiment reports: named criteria with a value, a bound and a verdict."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from wavelab.errors import IoError

logger = logging.getLogger(__name__)

RELATIONS: tuple[str, ...] = ("<=", ">=", "==")


def _finite(x: float) -> Any:
    return float(x) if math.isfinite(x) else str(x)


@dataclass(frozen=True)
class Criterion:
    """``value <relation> bound``; ``"=="`` means |value − bound| ≤ tol."""

    name: str
    value: float
    bound: float
    relation: str = "<="
    tol: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.relation == "<=":
            return self.value <= self.bound
        if self.relation == ">=":
            return self.value >= self.bound
        return abs(self.value - self.bound) <= self.tol

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "value": _finite(self.value),
            "bound": _finite(self.bound),
            "relation": self.relation,
            "pass": self.passed,
        }
        if self.relation == "==":
            out["tol"] = self.tol
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class Report:
    command: str
    criteria: list[Criterion] = field(default_factory=list)
    payload: dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, value: float, bound: float, relation: str = "<=", **kw: Any) -> Criterion:
        if relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {relation!r}.")
        crit = Criterion(name, float(value), float(bound), relation, **kw)
        self.criteria.append(crit)
        if not crit.passed:
            logger.warning("Criterion %s failed: %s %s %s", name, value, relation, bound)
        return crit

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "pass": self.passed,
            "criteria": [c.to_dict() for c in self.criteria],
            "payload": self.payload,
        }

    def write(self, out_dir: Path) -> Path:
        path = Path(out_dir) / f"{self.command}-report.json"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            raise IoError(f"Cannot write report {path}: {exc}") from exc
        logger.info("Report written to %s", path)
        return path
