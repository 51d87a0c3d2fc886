"""Reference experiment campaign.

A 22-agent random topology with diameter 7, a satisfaction schedule whose
last agent satisfies at iteration 862, and message-corruption windows of
20 iterations starting at every hundredth iteration from 100 through 800.
The basic method (fault free) stops at 869 = 862 + 7; the fault-tolerant
method stops at 897 = 862 + 2*7 + 22 - 1, with or without faults, for
every scripted faulty set.

The numbers are properties of the construction, not of one frozen graph:
any diameter-7 topology over 22 agents with honest satisfaction times
clear of the final correction windows reproduces them, which the seeded
sweep helper exercises.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criteria import Schedule
from .faults import FaultScript
from .graph import CommGraph, make_topology
from .sim import (CheckResult, RunReport, Scenario, assert_propositions,
                  failed_checks, run)

AGENT_COUNT = 22
DIAMETER = 7
LAST_AGENT = 7          # satisfies last, at GLOBAL_ITERATION
GLOBAL_ITERATION = 862
BASIC_STOP = GLOBAL_ITERATION + DIAMETER                        # 869
FT_STOP = GLOBAL_ITERATION + 2 * DIAMETER + AGENT_COUNT - 1     # 897
WINDOW_STARTS = tuple(range(100, 801, 100))
WINDOW_LENGTH = 20
FAULTY_SETS = ((0,), (0, 2), (0, 2, 3), (0, 2, 3, 8), (0, 2, 3, 8, 13))

DEFAULT_TOPOLOGY_SEED = 0
DEFAULT_EDGE_PROB = 0.08
DEFAULT_SCHEDULE_SEED = 7


def reference_topology(seed: int = DEFAULT_TOPOLOGY_SEED,
                       edge_prob: float = DEFAULT_EDGE_PROB) -> CommGraph:
    """Random 22-agent topology with diameter exactly 7."""
    return make_topology("random_diameter", AGENT_COUNT, edge_prob=edge_prob,
                         seed=seed, diameter=DIAMETER)


def reference_schedule(seed: int = DEFAULT_SCHEDULE_SEED) -> Schedule:
    """Satisfaction times with a unique last satisfier at iteration 862.

    The other agents satisfy by iteration 780, comfortably before the last
    corruption window's refusal periods expire, so no honest re-assertion
    can be stamped later than the last satisfier's.
    """
    rng = np.random.default_rng(seed)
    times = rng.integers(1, 781, size=AGENT_COUNT)
    times[LAST_AGENT] = GLOBAL_ITERATION
    return Schedule.from_times(int(x) for x in times)


def reference_faults(faulty: tuple) -> tuple:
    windows = tuple((start, start + WINDOW_LENGTH - 1)
                    for start in WINDOW_STARTS)
    return tuple(FaultScript(agent=a, windows=windows) for a in faulty)


def reference_scenario(faulty: tuple = (), *, method: str = "fault_tolerant",
                       topology_seed: int = DEFAULT_TOPOLOGY_SEED,
                       schedule_seed: int = DEFAULT_SCHEDULE_SEED,
                       execution: str = "vectorized") -> Scenario:
    label = ",".join(str(a) for a in faulty) if faulty else "none"
    return Scenario(
        graph=reference_topology(topology_seed),
        criterion=reference_schedule(schedule_seed),
        method=method,
        faults=reference_faults(faulty),
        max_iterations=FT_STOP + 200,
        execution=execution,
        name=f"reference-{method}-faulty[{label}]",
        seed=topology_seed,
    )


@dataclass
class CampaignRow:
    name: str
    faulty: list
    method: str
    common_stop: int | None
    expected_stop: int
    max_single_persistence: int
    max_global_persistence: int
    clamp_count: int
    accused: list
    check_failures: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CampaignResult:
    rows: list
    reports: list

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}

    def all_clean(self) -> bool:
        return all(
            not row.check_failures and row.common_stop == row.expected_stop
            for row in self.rows
        )


def _row_from_report(report: RunReport, expected_stop: int,
                     checks: list) -> CampaignRow:
    return CampaignRow(
        name=report.name,
        faulty=report.faulty_agents,
        method=report.method,
        common_stop=report.common_stop,
        expected_stop=expected_stop,
        max_single_persistence=report.max_single_persistence,
        max_global_persistence=report.max_global_persistence,
        clamp_count=report.clamp_count,
        accused=sorted({r["accused"] for r in report.fault_reports}),
        check_failures=[c.check for c in failed_checks(checks)],
    )


def run_reference_campaign(*, topology_seed: int = DEFAULT_TOPOLOGY_SEED,
                           schedule_seed: int = DEFAULT_SCHEDULE_SEED,
                           execution: str = "vectorized",
                           include_basic: bool = True,
                           faulty_sets: tuple = FAULTY_SETS
                           ) -> CampaignResult:
    """Run the full reference table: basic baseline, clean run, faulty sets."""
    rows: list[CampaignRow] = []
    reports: list[RunReport] = []

    def do(scenario: Scenario, expected: int):
        report = run(scenario)
        checks = assert_propositions(report)
        rows.append(_row_from_report(report, expected, checks))
        reports.append(report)

    if include_basic:
        do(reference_scenario(method="basic", topology_seed=topology_seed,
                              schedule_seed=schedule_seed,
                              execution=execution), BASIC_STOP)
    do(reference_scenario(method="fault_tolerant",
                          topology_seed=topology_seed,
                          schedule_seed=schedule_seed,
                          execution=execution), FT_STOP)
    for faulty in faulty_sets:
        do(reference_scenario(faulty, topology_seed=topology_seed,
                              schedule_seed=schedule_seed,
                              execution=execution), FT_STOP)
    return CampaignResult(rows, reports)


def seeded_sweep(topology_seeds, schedule_seeds, *,
                 faulty: tuple = FAULTY_SETS[-1],
                 execution: str = "vectorized") -> CampaignResult:
    """The faultiest reference row across several seeded instances."""
    rows, reports = [], []
    for ts in topology_seeds:
        for ss in schedule_seeds:
            scenario = reference_scenario(faulty, topology_seed=ts,
                                          schedule_seed=ss,
                                          execution=execution)
            report = run(scenario)
            checks = assert_propositions(report)
            rows.append(_row_from_report(report, FT_STOP, checks))
            reports.append(report)
    return CampaignResult(rows, reports)
