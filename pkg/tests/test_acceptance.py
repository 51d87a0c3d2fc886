"""End-to-end acceptance: one test and one summary line per criterion.

Each test exercises its criterion at full advertised strength (sweep sizes,
exact stop values, tolerances) and records a PASS/FAIL line for the
terminal summary through the ``acceptance_record`` fixture.
"""

import time

import numpy as np
import pytest

from termnet.admm import (AdmmSolver, make_consensus_problem,
                          run_to_convergence, solve_pooled)
from termnet.campaign import (AGENT_COUNT, DIAMETER, FAULTY_SETS,
                              GLOBAL_ITERATION, reference_topology)
from termnet.criteria import Schedule
from termnet.faults import FaultScript
from termnet.graph import CommGraph, make_topology
from termnet.sim import Scenario, TraceConfig, run, savings_fraction
from termnet.tightness import find_tight_instance, persistence_bound

PERSISTENCE_CAP = DIAMETER + AGENT_COUNT - 2  # 27 for the reference table


# ---------------------------------------------------------------------------
# shared sweeps (each runs once per session)


def _random_connected_graph(rng) -> CommGraph:
    n = int(rng.integers(1, 31))
    if n == 1:
        return CommGraph(1, ())
    if n == 2:
        return CommGraph(2, ((0, 1),))
    kind = rng.choice(["ring", "path", "star", "complete", "random"])
    if kind == "random":
        return make_topology("random", n,
                             edge_prob=float(rng.uniform(0.1, 0.5)),
                             seed=int(rng.integers(0, 2**31)))
    return make_topology(str(kind), n)


@pytest.fixture(scope="module")
def exact_stop_sweep():
    """200 random scenarios, each run under both methods; exact stops."""
    rng = np.random.default_rng(20260823)
    t0 = time.perf_counter()
    failures = {"basic": [], "fault_tolerant": []}
    clean_ft_reports = 0
    for trial in range(200):
        g = _random_connected_graph(rng)
        n, d = g.agent_count, g.diameter()
        times = tuple(int(x) for x in rng.integers(1, 61, size=n))
        tg = max(times)
        sched = Schedule.from_times(times)
        for method, tail in (("basic", d), ("fault_tolerant", 2 * d + n - 1)):
            rep = run(Scenario(graph=g, criterion=sched, method=method,
                               max_iterations=tg + tail + 50))
            if not (rep.simultaneous and rep.common_stop == tg + tail):
                failures[method].append((trial, n, d, times,
                                         rep.stop_iterations, tg + tail))
            if method == "fault_tolerant" and not rep.fault_reports:
                clean_ft_reports += 1
    return {
        "scenarios": 200,
        "failures": failures,
        "clean_ft_quiet": clean_ft_reports,
        "seconds": time.perf_counter() - t0,
    }


def _random_fault_case(rng):
    """Graph + schedule + scripts with a non-cut-set faulty set that spares
    every last satisfier; None when no such faulty set turns up."""
    n = int(rng.integers(4, 15))
    kind = str(rng.choice(["ring", "path", "star", "random"]))
    if kind == "random":
        g = make_topology("random", n, edge_prob=float(rng.uniform(0.2, 0.5)),
                          seed=int(rng.integers(0, 2**31)))
    else:
        g = make_topology(kind, n)
    times = tuple(int(x) for x in rng.integers(1, 91, size=n))
    tg = max(times)
    last = {i for i, t in enumerate(times) if t == tg}
    eligible = [i for i in range(n) if i not in last]
    for _ in range(40):
        k = int(rng.integers(1, min(4, len(eligible) + 1)))
        faulty = tuple(sorted(
            rng.choice(eligible, size=k, replace=False).tolist()))
        if not g.is_cutset(faulty):
            break
    else:
        return None
    scripts = []
    for a in faulty:
        wins, lo = [], int(rng.integers(3, 40))
        for _ in range(int(rng.integers(1, 3))):
            hi = lo + int(rng.integers(3, 21))
            wins.append((lo, hi))
            lo = hi + int(rng.integers(2, 25))
        subjects = (None if rng.random() < 0.5 else tuple(sorted(
            rng.choice(n, size=int(rng.integers(1, 4)),
                       replace=False).tolist())))
        scripts.append(FaultScript(agent=a, windows=tuple(wins),
                                   subjects=subjects,
                                   stamp_mode=str(rng.choice(
                                       ["freeze", "fresh"]))))
    return g, times, tuple(scripts)


@pytest.fixture(scope="module")
def fault_campaign_sweep():
    """520 randomized corruption campaigns; bound and early-stop tallies."""
    rng = np.random.default_rng(97)
    t0 = time.perf_counter()
    done = exhausted = hit_bound = positive = 0
    bound_violations = []
    early_stops = []
    while done < 520:
        case = _random_fault_case(rng)
        if case is None:
            continue
        g, times, scripts = case
        n, d = g.agent_count, g.diameter()
        tg = max(times)
        faulty = {s.agent for s in scripts}
        horizon = max(tg, max(s.last_active() for s in scripts))
        rep = run(Scenario(graph=g, criterion=Schedule.from_times(times),
                           method="fault_tolerant", faults=scripts,
                           max_iterations=horizon + 4 * (d + n) + 60))
        bound = d + n - 2
        if not 0 <= rep.max_single_persistence <= bound:
            bound_violations.append((done, rep.max_single_persistence, bound))
        honest = [s for i, s in enumerate(rep.stop_iterations)
                  if i not in faulty and s is not None]
        early_stops.extend((done, s, tg) for s in honest if s < tg)
        exhausted += rep.exhausted
        hit_bound += rep.max_single_persistence == bound
        positive += rep.max_single_persistence > 0
        done += 1
    return {
        "runs": done,
        "exhausted": exhausted,
        "hit_bound": hit_bound,
        "positive": positive,
        "bound_violations": bound_violations,
        "early_stops": early_stops,
        "seconds": time.perf_counter() - t0,
    }


# ---------------------------------------------------------------------------
# criteria


def test_basic_method_exact_stop_sweep(exact_stop_sweep, acceptance_record):
    bad = exact_stop_sweep["failures"]["basic"]
    elapsed = exact_stop_sweep["seconds"]
    ok = not bad and elapsed < 60.0
    acceptance_record(
        "basic-exact-stop", ok,
        f"{exact_stop_sweep['scenarios']} random scenarios all stopped "
        f"simultaneously at exactly the global iteration plus the diameter "
        f"({elapsed:.1f}s)" if ok else f"failures: {bad[:3]}")
    assert not bad, bad[:3]
    assert elapsed < 60.0


def test_reference_basic_stop_869(reference_result, acceptance_record):
    row = reference_result.rows[0]
    report = reference_result.reports[0]
    ok = (row.method == "basic"
          and report.global_iteration == GLOBAL_ITERATION == 862
          and report.simultaneous and row.common_stop == 869)
    acceptance_record(
        "reference-basic-869", ok,
        f"22 agents, diameter 7, last criterion at "
        f"{report.global_iteration}, simultaneous stop at {row.common_stop}")
    assert ok, (row.common_stop, report.global_iteration)


def test_reference_fault_tolerant_stop_897(reference_result,
                                           acceptance_record):
    faulty_rows = [r for r in reference_result.rows if r.faulty]
    stops = [r.common_stop for r in faulty_rows]
    persist = [r.max_single_persistence for r in faulty_rows]
    sets_ok = [tuple(r.faulty) for r in faulty_rows] == list(FAULTY_SETS)
    windows_ok = all(
        rep.fault_last_active == 819
        for rep, row in zip(reference_result.reports, reference_result.rows)
        if row.faulty)
    ok = (sets_ok and windows_ok and len(faulty_rows) == 5
          and all(s == 897 for s in stops)
          and all(0 < p <= PERSISTENCE_CAP for p in persist))
    acceptance_record(
        "reference-fault-tolerant-897", ok,
        f"stops {stops} (want 897 each), honest false-entry persistence "
        f"{persist} all in (0, {PERSISTENCE_CAP}]")
    assert ok, (stops, persist)


def test_persistence_bound_and_tight_witness(fault_campaign_sweep,
                                             acceptance_record):
    sweep = fault_campaign_sweep
    witness = find_tight_instance(7, 3, budget=400, seed=0)
    witness_ok = (witness is not None
                  and witness.persistence == persistence_bound(7, 3) == 8)
    ok = (sweep["runs"] >= 500 and not sweep["bound_violations"]
          and witness_ok)
    acceptance_record(
        "persistence-bound-and-tightness", ok,
        f"{sweep['runs']} fault campaigns within diameter+agents-2 "
        f"({sweep['hit_bound']} at the bound); witness for 7 agents "
        f"diameter 3 reaches persistence "
        f"{witness.persistence if witness else '-'} = bound 8")
    assert not sweep["bound_violations"], sweep["bound_violations"][:3]
    assert witness_ok


def test_no_early_termination_under_faults(fault_campaign_sweep,
                                           acceptance_record):
    sweep = fault_campaign_sweep
    ok = sweep["runs"] >= 500 and not sweep["early_stops"]
    acceptance_record(
        "no-early-termination", ok,
        f"{sweep['runs']} fault campaigns, zero honest agents stopped "
        f"before the global iteration ({sweep['exhausted']} runs with "
        f"corruption into the stopping phase never stopped at all)")
    assert not sweep["early_stops"], sweep["early_stops"][:3]


def test_fault_tolerant_exact_stop_sweep(exact_stop_sweep, acceptance_record):
    bad = exact_stop_sweep["failures"]["fault_tolerant"]
    ok = not bad
    acceptance_record(
        "ft-exact-stop", ok,
        f"{exact_stop_sweep['scenarios']} fault-free runs all stopped "
        f"simultaneously at exactly the global iteration plus "
        f"2*diameter+agents-1" if ok else f"failures: {bad[:3]}")
    assert not bad, bad[:3]


def test_reduced_computation_savings(acceptance_record):
    def cases():
        for n in (4, 5, 7, 9, 12, 16, 20):
            yield make_topology("ring", n)
            yield make_topology("path", n)
            yield make_topology("star", n)
        for seed in range(8):
            yield make_topology("random", 15, edge_prob=0.2, seed=seed)
        yield reference_topology()

    rng = np.random.default_rng(11)
    mismatches = []
    count = 0
    low = 1.0
    for g in cases():
        n, d = g.agent_count, g.diameter()
        dist = g.distance_matrix()
        i = int(dist.max(axis=1).argmax())   # diametral endpoint last
        tg = d + 20
        times = [int(x) for x in rng.integers(1, max(2, tg - d + 1), size=n)]
        times[i] = tg
        rep = run(Scenario(graph=g, criterion=Schedule.from_times(times),
                           method="fault_tolerant", reduced_computation=True,
                           max_iterations=tg + 2 * d + n + 20))
        frac = savings_fraction(rep)
        target = (d + n - 1) / (2 * d + n - 1)
        granularity = 1.0 / (2 * d + n - 1)
        if (rep.exhausted or abs(frac - target) > granularity + 1e-12
                or frac < 2 / 3
                or rep.common_stop != tg + 2 * d + n - 1):
            mismatches.append((n, d, frac, target, rep.common_stop))
        low = min(low, frac)
        count += 1
    ok = not mismatches and count == 30
    acceptance_record(
        "reduced-computation-savings", ok,
        f"{count} topologies: savings fraction equals "
        f"(diameter+agents-1)/(2*diameter+agents-1) within one round, "
        f"minimum {low:.3f} >= 2/3" if ok else f"mismatches: {mismatches[:3]}")
    assert ok, mismatches[:3]


def test_detector_soundness(reference_result, exact_stop_sweep,
                            acceptance_record):
    wrong = []
    detected = 0
    noisy_clean = 0
    for row, report in zip(reference_result.rows, reference_result.reports):
        scripted = set(row.faulty)
        honest = {r["accused"] for r in report.fault_reports
                  if r["accuser"] not in scripted}
        if scripted:
            if honest - scripted:
                wrong.append((row.name, sorted(honest - scripted)))
            detected += bool(honest)
        elif report.fault_reports:
            noisy_clean += 1

    injector = run(Scenario(
        graph=make_topology("ring", 10),
        criterion=Schedule.from_times((4, 8, 3, 12, 6, 9, 2, 7, 11, 50)),
        method="fault_tolerant",
        faults=(FaultScript(agent=0, windows=((5, 30),), subjects=(9,)),),
        max_iterations=300))
    inj_accused = {r["accused"] for r in injector.fault_reports
                   if r["accuser"] != 0}
    if inj_accused != {0}:
        wrong.append(("ring10-injector", sorted(inj_accused)))
    else:
        detected += 1

    quiet = exact_stop_sweep["clean_ft_quiet"]
    ok = (not wrong and noisy_clean == 0 and detected == 6
          and quiet == exact_stop_sweep["scenarios"])
    acceptance_record(
        "detector-soundness", ok,
        f"honest accusations named only scripted faulty agents in all "
        f"{detected} injection runs; zero reports in "
        f"{quiet + 2} fault-free runs"
        if ok else f"wrong accusations {wrong}, noisy clean rows "
                   f"{noisy_clean}, quiet {quiet}/200")
    assert ok, (wrong, noisy_clean, quiet)


def test_admm_pipeline_end_to_end(acceptance_record):
    t0 = time.perf_counter()
    g = reference_topology()
    prob = make_consensus_problem(g, seed=5, rho=1.0, tolerance=1e-2,
                                  latch=True)
    n, d = g.agent_count, g.diameter()
    problems = []
    stops = {}
    tg = {}
    for method, tail in (("basic", d), ("fault_tolerant", 2 * d + n - 1)):
        rep = run(Scenario(graph=g, criterion=prob, method=method,
                           max_iterations=5000, name=f"admm-{method}"))
        stops[method] = rep.common_stop
        tg[method] = rep.global_iteration
        if not (rep.simultaneous
                and rep.common_stop == rep.global_iteration + tail):
            problems.append((method, rep.common_stop, rep.global_iteration))
    if tg["basic"] != tg["fault_tolerant"]:
        problems.append(("global iteration differs", tg))

    pooled = solve_pooled(prob)
    solver = AdmmSolver(prob)
    rounds = run_to_convergence(solver, pooled, 1e-6)
    err = solver.max_error_against(pooled)
    if rounds is None or err > 1e-6:
        problems.append(("pooled agreement", rounds, err))
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 60.0
    acceptance_record(
        "admm-end-to-end", ok,
        f"22-agent consensus latched at iteration {tg['basic']}; stops "
        f"basic {stops['basic']}, fault-tolerant {stops['fault_tolerant']}; "
        f"iterates match the pooled solve within 1e-6 after {rounds} rounds "
        f"({elapsed:.1f}s)" if ok else f"problems: {problems}")
    assert ok, problems


def test_parallel_serial_trace_equivalence(tmp_path, acceptance_record):
    rng = np.random.default_rng(6)
    scenarios = []
    for idx in range(6):
        n = int(rng.integers(3, 14))
        g = make_topology("random", n, edge_prob=0.5,
                          seed=int(rng.integers(0, 2**31)))
        times = tuple(int(x) for x in rng.integers(1, 30, size=n))
        faults = ()
        if idx % 2:
            a = int(rng.integers(0, n))
            faults = (FaultScript(
                agent=a, windows=((int(rng.integers(2, 8)),
                                   int(rng.integers(9, 20))),),
                stamp_mode=str(rng.choice(["freeze", "fresh"]))),)
        scenarios.append(Scenario(
            graph=g, criterion=Schedule.from_times(times),
            method="fault_tolerant", faults=faults, max_iterations=400,
            name=f"pair-{idx}"))
    mismatched = []
    for idx, scenario in enumerate(scenarios):
        blobs = {}
        for mode in ("serial", "parallel"):
            scenario.execution = mode
            path = tmp_path / f"{idx}-{mode}.trace.csv"
            run(scenario, trace=TraceConfig(path=path, fmt="csv"))
            blobs[mode] = path.read_bytes()
        if blobs["serial"] != blobs["parallel"]:
            mismatched.append(idx)
    ok = not mismatched
    acceptance_record(
        "parallel-serial-equivalence", ok,
        f"{len(scenarios)} scenarios (half with scripted corruption) "
        f"produced byte-identical serial and parallel traces"
        if ok else f"trace mismatch in scenarios {mismatched}")
    assert ok, mismatched
