"""Tri-state verdicts and composable check reports."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    @staticmethod
    def combine(verdicts) -> "Verdict":
        verdicts = list(verdicts)
        if any(v is Verdict.FAIL for v in verdicts):
            return Verdict.FAIL
        if any(v is Verdict.INCONCLUSIVE for v in verdicts):
            return Verdict.INCONCLUSIVE
        return Verdict.PASS


@dataclass(frozen=True)
class CheckItem:
    name: str
    verdict: Verdict
    detail: str = ""


@dataclass
class Report:
    """Ordered list of named sub-checks with an aggregate verdict.

    The aggregate is FAIL if any item fails, otherwise INCONCLUSIVE if any
    item is inconclusive, otherwise PASS.  An empty report passes.
    """

    title: str
    items: list[CheckItem] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        return Verdict.combine(it.verdict for it in self.items)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def add(self, name: str, verdict: Verdict, detail: str = "") -> Verdict:
        self.items.append(CheckItem(name, verdict, detail))
        return verdict

    def add_comparison(self, name: str, comparison) -> Verdict:
        return self.add(name, comparison.verdict, comparison.describe())

    def merge(self, other: "Report", prefix: str | None = None) -> Verdict:
        """Fold another report's items in, optionally prefixing their names."""
        p = f"{prefix or other.title}: "
        for it in other.items:
            self.items.append(CheckItem(p + it.name, it.verdict, it.detail))
        return other.verdict

    def failures(self) -> Iterator[CheckItem]:
        return (it for it in self.items if it.verdict is not Verdict.PASS)

    def summary(self) -> str:
        counts = {v: 0 for v in Verdict}
        for it in self.items:
            counts[it.verdict] += 1
        return (f"{self.title}: {self.verdict.value} "
                f"({counts[Verdict.PASS]} pass, {counts[Verdict.FAIL]} fail, "
                f"{counts[Verdict.INCONCLUSIVE]} inconclusive)")

    def __str__(self) -> str:
        lines = [self.summary()]
        for it in self.items:
            line = f"  [{it.verdict.value}] {it.name}"
            if it.detail and it.verdict is not Verdict.PASS:
                line += f" -- {it.detail}"
            lines.append(line)
        return "\n".join(lines)
