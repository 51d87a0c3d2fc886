"""Scripted message corruption.

Faults live entirely at the message layer: a faulty agent runs the honest
protocol on its own state but its outbound messages are rewritten before
delivery.  During an active window the script asserts the chosen subject
entries and picks the stamp by the ``freeze`` rule: keep the stamp from the
previous outbound message if that message already asserted the entry,
otherwise fabricate the current iteration.  A continuously active window
therefore sends a frozen, ageing stamp, which is the adversarial shape the
persistence experiments need; ``fresh`` re-stamps every round instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError

STAMP_MODES = ("freeze", "fresh")


@dataclass(frozen=True)
class FaultScript:
    """Corruption plan for one agent's outbound messages.

    ``windows`` are inclusive iteration ranges; ``subjects`` the entries to
    assert (None = every entry).
    """

    agent: int
    windows: tuple = ()
    subjects: tuple | None = None
    stamp_mode: str = "freeze"

    def __post_init__(self):
        object.__setattr__(self, "windows",
                           tuple((int(lo), int(hi)) for lo, hi in self.windows))
        if self.subjects is not None:
            object.__setattr__(self, "subjects",
                               tuple(int(s) for s in self.subjects))

    def validate(self, agent_count: int) -> None:
        if not 0 <= self.agent < agent_count:
            raise ScenarioError(f"fault script names unknown agent {self.agent}")
        if self.stamp_mode not in STAMP_MODES:
            raise ScenarioError(
                f"fault script stamp mode {self.stamp_mode!r} not in {STAMP_MODES}"
            )
        if not self.windows:
            raise ScenarioError("fault script has no active windows")
        for lo, hi in self.windows:
            if lo < 1 or hi < lo:
                raise ScenarioError(f"bad fault window [{lo}, {hi}]")
        if self.subjects is not None:
            if not self.subjects:
                raise ScenarioError("fault script has an empty subject list")
            for s in self.subjects:
                if not 0 <= s < agent_count:
                    raise ScenarioError(f"fault subject {s} out of range")

    def active(self, t: int) -> bool:
        return any(lo <= t <= hi for lo, hi in self.windows)

    def last_active(self) -> int:
        return max(hi for _, hi in self.windows)

    def subject_ids(self, agent_count: int):
        return range(agent_count) if self.subjects is None else self.subjects

    def to_dict(self) -> dict:
        out = {
            "agent": self.agent,
            "windows": [list(w) for w in self.windows],
            "stamp_mode": self.stamp_mode,
        }
        if self.subjects is not None:
            out["subjects"] = list(self.subjects)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FaultScript":
        return cls(
            agent=int(data["agent"]),
            windows=tuple(tuple(w) for w in data["windows"]),
            subjects=(tuple(data["subjects"]) if "subjects" in data else None),
            stamp_mode=data.get("stamp_mode", "freeze"),
        )


def corrupt_ft_message(script: FaultScript, v_row: np.ndarray,
                       u_row: np.ndarray, prev_v_row: np.ndarray,
                       prev_u_row: np.ndarray, t: int
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Corrupted (vector, stamps) for one outbound fault-tolerant message.

    ``prev_*`` are what this agent actually sent last round (after any
    corruption), so consecutive active rounds keep the frozen stamp.
    """
    v = v_row.copy()
    u = u_row.copy()
    for k in script.subject_ids(v.shape[0]):
        if script.stamp_mode == "fresh" or prev_v_row[k] == 0:
            u[k] = t
        else:
            u[k] = prev_u_row[k]
        v[k] = 1
    return v, u


def corrupt_basic_message(script: FaultScript, v_row: np.ndarray
                          ) -> np.ndarray:
    """Corrupted vector for one outbound basic message (no stamps to fake)."""
    v = v_row.copy()
    for k in script.subject_ids(v.shape[0]):
        v[k] = 1
    return v
