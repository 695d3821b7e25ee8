"""Release gate: eleven numbered checks, one test and one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` so the per-criterion lines
print as they complete.  Each check folds its stated runtime limit into the
verdict, so a correct result computed too slowly still fails.

Known miss: the first clause of criterion 8 requires the joint infidelity at
the minimal stage-one time to reach the accuracy target itself.  A linear
sweep run for that minimal time retains an order-one leakage at the avoided
crossing (the minimal time is derived for a locally adapted sweep rate), so
the measured infidelity sits near 0.43 against the 0.1 target.  The companion
clause, which checks the 1/T^2 decay of that leakage, passes with a wide
margin.  README.md carries the full accounting.
"""

import math
import random
import time

import numpy as np
import pytest

from nestedsearch import (
    AccuracyTarget,
    Constraint,
    CspInstance,
    PartitionModel,
    SchedulePoint,
    SubsystemShape,
    approx_model_time,
    census,
    estimate,
    fit_scaling,
    gap,
    generate,
    model_time,
    optimize_x,
    simulate_stage2,
    stage1_time,
    total_time,
    verify_adiabatic_bound,
)
from nestedsearch.dynamics import STAGE2_STEP_MULTIPLIER, STAGE2_STEP_TIME


def _report(number, passed, detail):
    verdict = "PASS" if passed else "FAIL"
    print(f"{verdict} criterion {number}: {detail}", flush=True)
    return passed


def test_criterion_01_balanced_split_is_optimal():
    start = time.perf_counter()
    deviations = []
    for k in (2, 3, 5):
        x_opt, _ = optimize_x(32, k, 1.0)
        deviations.append(abs(x_opt - 0.5))
    elapsed = time.perf_counter() - start
    ok = max(deviations) <= 0.01 and elapsed < 10.0
    _report(
        1,
        ok,
        f"x_opt within {max(deviations):.2e} of 0.5 for k in (2, 3, 5) "
        f"[{elapsed:.1f}s / 10s]",
    )
    assert max(deviations) <= 0.01
    assert elapsed < 10.0


def test_criterion_02_scaling_slope():
    start = time.perf_counter()
    fit = fit_scaling(2, 1.0, 0.5, list(range(16, 41, 4)))
    elapsed = time.perf_counter() - start
    ok = abs(fit.slope - 0.375) <= 0.02 and elapsed < 30.0
    _report(
        2,
        ok,
        f"quadrature column slope {fit.slope:.4f} vs 0.375 +/- 0.02 "
        f"[{elapsed:.1f}s / 30s]",
    )
    assert abs(fit.slope - 0.375) <= 0.02
    assert elapsed < 30.0


def test_criterion_03_closed_form_tracks_quadrature():
    start = time.perf_counter()
    offsets = []
    for x in np.linspace(0.1, 0.9, 33):
        model = PartitionModel(32, 2, 1.0, float(x))
        budget = model_time(model)
        offsets.append(math.log2(budget.total_time) - approx_model_time(model))
    spread = max(offsets) - min(offsets)
    elapsed = time.perf_counter() - start
    ok = spread <= 1.0 and elapsed < 30.0
    _report(
        3,
        ok,
        f"log2 offset between quadrature and closed form spans {spread:.3f} "
        f"(limit 1.0) over 33 split points [{elapsed:.1f}s / 30s]",
    )
    assert spread <= 1.0
    assert elapsed < 30.0


def test_criterion_04_constraint_budget_collapse():
    start = time.perf_counter()
    worst = 0.0
    for x in np.linspace(0.1, 0.9, 33):
        a = math.log2(model_time(PartitionModel(32, 3, 1.054, float(x))).total_time)
        b = math.log2(model_time(PartitionModel(27, 3, 1.25, float(x))).total_time)
        worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    elapsed = time.perf_counter() - start
    ok = worst <= 0.02 and elapsed < 30.0
    _report(
        4,
        ok,
        f"(n=32, a=1.054) and (n=27, a=1.25) log2 times differ by at most "
        f"{100 * worst:.2f}% (limit 2%) [{elapsed:.1f}s / 30s]",
    )
    assert worst <= 0.02
    assert elapsed < 30.0


def test_criterion_05_time_grows_with_constraint_density():
    start = time.perf_counter()
    totals = [
        math.log2(model_time(PartitionModel(32, 5, alpha, 0.5)).total_time)
        for alpha in (0.9, 1.0, 1.054)
    ]
    elapsed = time.perf_counter() - start
    increasing = totals[0] < totals[1] < totals[2]
    ok = increasing and elapsed < 10.0
    _report(
        5,
        ok,
        f"log2 time strictly increasing over alpha 0.9 -> 1 -> 1.054: "
        f"{totals[0]:.3f} < {totals[1]:.3f} < {totals[2]:.3f} [{elapsed:.1f}s / 10s]",
    )
    assert increasing
    assert elapsed < 10.0


def test_criterion_06_gap_law():
    start = time.perf_counter()
    rng = random.Random(6)
    grid = np.linspace(0.0, 1.0, 201)
    worst = 0.0
    for _ in range(100):
        dim = 2 ** rng.randint(4, 40)
        sol = rng.randint(1, dim - 1)
        shape = SubsystemShape(dimension=dim, solutions=sol)
        assert gap(SchedulePoint(0.0), shape) == 1.0
        assert gap(SchedulePoint(1.0), shape) == 1.0
        values = [gap(SchedulePoint(float(s)), shape) for s in grid]
        assert min(values) == values[100]
        worst = max(worst, abs(values[100] - math.sqrt(shape.ratio)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 5.0
    _report(
        6,
        ok,
        f"minimum gap sits at s=1/2 and matches sqrt(M/N) within {worst:.1e} "
        f"(limit 1e-9) for 100 random shapes; endpoint gaps exactly 1 "
        f"[{elapsed:.1f}s / 5s]",
    )
    assert worst <= 1e-9
    assert elapsed < 5.0


def test_criterion_07_single_solution_point():
    est = estimate(PartitionModel(32, 2, 1.0, 0.5))
    exact = (
        est.log2_m_a == 8.0
        and est.log2_m_b == 8.0
        and est.log2_m_ab == 0.0
        and not est.clamped
    )
    _report(
        7,
        exact,
        "estimate(n=32, k=2, alpha=1, x=0.5) gives M_A = M_B = 256 and "
        "M_AB = 1 exactly",
    )
    assert exact


def test_criterion_08_minimal_time_accuracy():
    start = time.perf_counter()
    shapes = [SubsystemShape(64, 1), SubsystemShape(64, 1)]
    report = verify_adiabatic_bound(shapes, AccuracyTarget(epsilon=0.1))
    elapsed = time.perf_counter() - start
    at_minimal = report.infidelities[0]
    at_quadruple = report.infidelities[2]
    clause_a = at_minimal <= 0.1
    clause_b = at_quadruple <= at_minimal / 8.0
    ok = clause_a and clause_b and elapsed < 120.0
    _report(
        8,
        ok,
        f"minimal-time accuracy for two (M=1, N=64) subsystems at epsilon=0.1 "
        f"[{elapsed:.1f}s / 120s]",
    )
    print(
        f"  clause a: infidelity at the minimal time {at_minimal:.4f} "
        f"(required <= 0.1) -> {'PASS' if clause_a else 'FAIL'}",
        flush=True,
    )
    print(
        f"  clause b: infidelity at 4x the time {at_quadruple:.4f} "
        f"<= {at_minimal / 8.0:.4f} -> {'PASS' if clause_b else 'FAIL'}",
        flush=True,
    )
    assert clause_b
    assert elapsed < 120.0
    assert clause_a, (
        f"infidelity at the minimal time is {at_minimal:.4f}, above the 0.1 "
        "target; a linear sweep keeps an order-one leakage at the avoided "
        "crossing no matter how the budget was derived (see README)"
    )


def test_criterion_09_census_bounds():
    start = time.perf_counter()
    rng = random.Random(9)
    for _ in range(200):
        n = rng.randint(4, 14)
        k = rng.randint(2, min(4, n - 1))
        instance = generate(
            n,
            k,
            rng.choice([0.5, 0.8, 1.0, 1.2]),
            rng.uniform(0.25, 0.75),
            seed=rng.getrandbits(32),
        )
        counts = census(instance)
        assert counts.m_ab <= counts.m_a_s * counts.m_b_s <= counts.m_a * counts.m_b
    documented = CspInstance(
        n=4,
        k=2,
        partition_a=(0, 1),
        constraints=(Constraint((0, 2), (1, 1)),),
    )
    worked = census(documented)
    elapsed = time.perf_counter() - start
    example_ok = worked.m_ab == 12 and worked.rectangular is False
    ok = example_ok and elapsed < 60.0
    _report(
        9,
        ok,
        f"count bounds hold on 200 enumerated instances (n <= 14); the n=4 "
        f"worked example gives M_AB = {worked.m_ab} with rectangular = "
        f"{worked.rectangular} [{elapsed:.1f}s / 60s]",
    )
    assert example_ok
    assert elapsed < 60.0


def test_criterion_10_calibrated_stage2_success():
    start = time.perf_counter()
    steps = STAGE2_STEP_MULTIPLIER * 16
    report = simulate_stage2(16.0, 16.0, 1.0, steps=steps, step_time=STAGE2_STEP_TIME)
    elapsed = time.perf_counter() - start
    success = report.success_probability
    ok = success >= 0.9 and elapsed < 60.0
    _report(
        10,
        ok,
        f"(M_A, M_B, M_AB) = (16, 16, 1) reaches success {success:.4f} >= 0.9 "
        f"in {steps} steps (frozen multiplier {STAGE2_STEP_MULTIPLIER}) "
        f"[{elapsed:.1f}s / 60s]",
    )
    assert success >= 0.9
    assert elapsed < 60.0


def test_criterion_11_three_subset_composition():
    shapes = [SubsystemShape(16, 2)] * 3
    budget = total_time(shapes, 2.0)
    t1 = stage1_time(shapes).stage1_time
    iterations_exact = math.ceil(math.sqrt(2.0 * 2.0 * 2.0 / 2.0))
    exact = (
        budget.iterations == iterations_exact
        and budget.total_time == t1 * iterations_exact
    )
    _report(
        11,
        exact,
        f"three (M=2, N=16) subsystems with M_AB = 2 compose exactly: "
        f"total = stage1 x {budget.iterations}",
    )
    assert budget.iterations == iterations_exact
    assert budget.total_time == t1 * iterations_exact
