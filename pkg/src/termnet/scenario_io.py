"""Versioned JSON scenario files.

A scenario file captures everything ``sim.run`` needs: graph, criterion
source, method, fault scripts, execution knobs.  Parsing is strict —
unknown fields are rejected with the offending path, so a typo like
``"subects"`` fails loudly instead of silently deactivating a script.
"""

from __future__ import annotations

import json
from pathlib import Path

from .admm import AdmmProblem, SharedVariable
from .criteria import Schedule
from .errors import ScenarioFormatError
from .faults import FaultScript
from .graph import CommGraph
from .sim import Scenario

FORMAT_VERSION = 1


def _require_keys(data: dict, location: str, required: tuple,
                  optional: tuple = ()) -> None:
    if not isinstance(data, dict):
        raise ScenarioFormatError(
            f"expected an object, got {type(data).__name__}", location)
    for key in required:
        if key not in data:
            raise ScenarioFormatError(f"missing field {key!r}", location)
    allowed = set(required) | set(optional)
    for key in data:
        if key not in allowed:
            raise ScenarioFormatError(
                f"unknown field {key!r} (allowed: {sorted(allowed)})", location)


def _graph_from(data, location) -> CommGraph:
    _require_keys(data, location, ("agent_count", "edges"))
    return CommGraph(data["agent_count"],
                     [tuple(e) for e in data["edges"]])


def _criterion_from(data, location):
    _require_keys(data, location, ("kind",),
                  ("first_true", "overrides", "quadratics", "linears",
                   "shared", "rho", "tolerance", "latch"))
    kind = data["kind"]
    if kind == "schedule":
        _require_keys(data, location, ("kind", "first_true"), ("overrides",))
        overrides = {}
        for item in data.get("overrides", []):
            agent, t, bit = item
            overrides[(int(agent), int(t))] = int(bit)
        return Schedule(tuple(data["first_true"]), overrides)
    if kind == "admm":
        _require_keys(data, location,
                      ("kind", "quadratics", "linears", "shared"),
                      ("rho", "tolerance", "latch"))
        shared = []
        for pos, item in enumerate(data["shared"]):
            _require_keys(item, f"{location}.shared[{pos}]",
                          ("agent_a", "index_a", "agent_b", "index_b"))
            shared.append(SharedVariable(
                int(item["agent_a"]), int(item["index_a"]),
                int(item["agent_b"]), int(item["index_b"])))
        return AdmmProblem(
            data["quadratics"], data["linears"], shared,
            rho=float(data.get("rho", 1.0)),
            tolerance=float(data.get("tolerance", 1e-2)),
            latch=bool(data.get("latch", True)))
    raise ScenarioFormatError(f"unknown criterion kind {kind!r}", location)


def _fault_from(data, location) -> FaultScript:
    _require_keys(data, location, ("agent", "windows"),
                  ("subjects", "stamp_mode"))
    return FaultScript.from_dict(data)


def scenario_to_dict(scenario: Scenario) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "name": scenario.name,
        "method": scenario.method,
        "execution": scenario.execution,
        "max_iterations": scenario.max_iterations,
        "graph": scenario.graph.to_dict(),
        "criterion": scenario.criterion.to_dict(),
        "faults": [s.to_dict() for s in scenario.faults],
        "flags": {
            "strict_verbatim": scenario.strict_verbatim,
            "prose_correction_constant": scenario.prose_correction_constant,
            "reduced_computation": scenario.reduced_computation,
        },
    }
    if scenario.seed is not None:
        out["seed"] = scenario.seed
    return out


def scenario_from_dict(data: dict, *, location: str = "scenario") -> Scenario:
    _require_keys(data, location,
                  ("format_version", "graph", "criterion"),
                  ("name", "method", "execution", "max_iterations",
                   "faults", "flags", "seed"))
    version = data["format_version"]
    if version != FORMAT_VERSION:
        raise ScenarioFormatError(
            f"format_version {version} not supported (this build reads "
            f"{FORMAT_VERSION})", location)
    flags = data.get("flags", {})
    _require_keys(flags, f"{location}.flags", (),
                  ("strict_verbatim", "prose_correction_constant",
                   "reduced_computation"))
    faults = tuple(
        _fault_from(item, f"{location}.faults[{pos}]")
        for pos, item in enumerate(data.get("faults", []))
    )
    scenario = Scenario(
        graph=_graph_from(data["graph"], f"{location}.graph"),
        criterion=_criterion_from(data["criterion"], f"{location}.criterion"),
        method=data.get("method", "basic"),
        faults=faults,
        max_iterations=int(data.get("max_iterations", 10_000)),
        execution=data.get("execution", "vectorized"),
        strict_verbatim=bool(flags.get("strict_verbatim", False)),
        prose_correction_constant=bool(
            flags.get("prose_correction_constant", False)),
        reduced_computation=bool(flags.get("reduced_computation", False)),
        name=data.get("name", ""),
        seed=data.get("seed"),
    )
    scenario.validate()
    return scenario


def save_scenario(scenario: Scenario, path) -> None:
    path = Path(path)
    path.write_text(json.dumps(scenario_to_dict(scenario), indent=2,
                               sort_keys=True) + "\n")


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioFormatError(str(exc), str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(
            f"invalid JSON: {exc.msg}",
            f"{path}:{exc.lineno}:{exc.colno}") from exc
    return scenario_from_dict(data, location=str(path))
