"""Local criterion sources that feed the protocols.

A criterion source answers one question per round: which agents consider
their local stopping test satisfied at iteration ``t``?  The two sources are
precomputed schedules (deterministic experiments) and the ADMM driver in
:mod:`termnet.admm`.  Both expose ``agent_count`` and ``bits(t)``; the
simulator only relies on that surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ScenarioError


def admm_criterion(mismatch: float, tolerance: float, prev_bit: int,
                   latch: bool) -> int:
    """Local criterion bit from a consensus mismatch value.

    The bit is 1 when the mismatch is below the tolerance.  With ``latch``
    the bit stays 1 once set, which makes the criterion monotone even if
    later iterates wobble above the tolerance again.
    """
    if latch and prev_bit:
        return 1
    return 1 if mismatch < tolerance else 0


def first_global_iteration(bits: np.ndarray) -> int | None:
    """First iteration at which every agent's bit is 1.

    ``bits`` is a (rounds, agents) array whose row ``r`` holds iteration
    ``r + 1``.  Returns None if the global criterion never holds.
    """
    if bits.size == 0:
        return None
    full = bits.all(axis=1)
    hits = np.flatnonzero(full)
    return int(hits[0]) + 1 if hits.size else None


@dataclass
class Schedule:
    """Precomputed local criterion bits.

    ``first_true[i]`` is the iteration at which agent ``i``'s bit turns 1
    (None: never).  Without overrides the schedule is monotone: the bit
    stays 1 afterwards.  ``overrides`` pins explicit bits at explicit
    iterations for non-monotone experiments.
    """

    first_true: tuple
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.first_true = tuple(
            None if ft is None else int(ft) for ft in self.first_true
        )
        for ft in self.first_true:
            if ft is not None and ft < 1:
                raise ScenarioError(f"satisfaction iteration {ft} must be >= 1")
        clean = {}
        for key, bit in dict(self.overrides).items():
            agent, t = key
            agent, t = int(agent), int(t)
            if not 0 <= agent < len(self.first_true):
                raise ScenarioError(f"override for unknown agent {agent}")
            if t < 1:
                raise ScenarioError(f"override at iteration {t} must be >= 1")
            clean[(agent, t)] = 1 if bit else 0
        self.overrides = clean

    @property
    def agent_count(self) -> int:
        return len(self.first_true)

    @classmethod
    def from_times(cls, times) -> "Schedule":
        return cls(tuple(times))

    @classmethod
    def never(cls, agent_count: int) -> "Schedule":
        return cls((None,) * agent_count)

    def bit(self, agent: int, t: int) -> int:
        override = self.overrides.get((agent, t))
        if override is not None:
            return override
        ft = self.first_true[agent]
        return 1 if ft is not None and t >= ft else 0

    def bits(self, t: int, compute_mask=None) -> np.ndarray:
        """Bits for iteration ``t``.  ``compute_mask`` is accepted for
        interface compatibility with the ADMM source and ignored: schedule
        lookups cost nothing to 'compute'."""
        return np.array(
            [self.bit(i, t) for i in range(self.agent_count)], dtype=np.uint8
        )

    def horizon(self) -> int:
        """Last iteration at which this schedule can still change a bit."""
        candidates = [ft for ft in self.first_true if ft is not None]
        candidates.extend(t for (_, t) in self.overrides)
        return max(candidates, default=1)

    def is_monotone(self) -> bool:
        """True if no agent's bit ever falls from 1 back to 0."""
        if not self.overrides:
            return True
        horizon = self.horizon() + 1
        for i in range(self.agent_count):
            prev = 0
            for t in range(1, horizon + 1):
                cur = self.bit(i, t)
                if prev == 1 and cur == 0:
                    return False
                prev = cur
        return True

    def reset_violations(self, stable_window: int) -> list[tuple[int, int]]:
        """Resets that happen after a bit held for ``stable_window`` rounds.

        The fault-tolerant method self-corrects a genuine 1 -> 0 flip, but
        only if the flip comes before the entry has propagated and aged into
        the stopping condition; a bit that stayed 1 for
        ``diameter + agent_count - 1`` rounds must never reset.  Returns
        ``(agent, iteration)`` pairs that break that requirement.
        """
        horizon = self.horizon() + 1
        bad = []
        for i in range(self.agent_count):
            streak = 0
            for t in range(1, horizon + 1):
                cur = self.bit(i, t)
                if cur:
                    streak += 1
                else:
                    if streak and streak >= stable_window:
                        bad.append((i, t))
                    streak = 0
        return bad

    def to_dict(self) -> dict:
        out = {"kind": "schedule", "first_true": list(self.first_true)}
        if self.overrides:
            out["overrides"] = sorted(
                [a, t, bit] for (a, t), bit in self.overrides.items()
            )
        return out
