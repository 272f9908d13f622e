"""Trace records shared by the rewriting engine and the strategies."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .measures import cl_measure, show_measure
from .syntax import show


class Status(str, Enum):
    NORMAL_FORM = "NormalForm"
    FUEL_EXHAUSTED = "FuelExhausted"
    STUCK = "Stuck"


@dataclass(frozen=True)
class Step:
    kind: Enum
    path: tuple
    term: object
    witness: dict = field(default_factory=dict, compare=False)


@dataclass
class Trace:
    initial: object
    steps: list = field(default_factory=list)
    status: Status = Status.NORMAL_FORM

    @property
    def final(self):
        return self.steps[-1].term if self.steps else self.initial

    def terms(self):
        return [self.initial] + [s.term for s in self.steps]

    def kinds(self):
        return [s.kind for s in self.steps]

    def count(self, *kinds) -> int:
        return sum(1 for s in self.steps if s.kind in kinds)

    def json_lines(self, key="rule", unicode=False, levels=None):
        """One JSON object per step; step 0 is the initial term."""
        rows = [(0, None, (), self.initial)]
        rows += [(i, s.kind.value, s.path, s.term) for i, s in enumerate(self.steps, 1)]
        out = []
        for n, tag, path, term in rows:
            rec = {
                "step": n,
                key: tag,
                "path": [sel.value for sel in path],
                "term": show(term, unicode),
                "cl": show_measure(cl_measure(term)),
            }
            if levels:
                from .measures import level

                rec["lv"] = {z: level(term, z) for z in levels}
            out.append(json.dumps(rec, ensure_ascii=False))
        return out

    def text_lines(self, unicode=False):
        out = [f"    {show(self.initial, unicode)}"]
        for s in self.steps:
            out.append(f"-{s.kind.value}-> {show(s.term, unicode)}")
        out.append(f"[{self.status.value}, {len(self.steps)} steps]")
        return out
