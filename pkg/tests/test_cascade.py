"""Cascading diversity-search tests.

Covers diverse initialization, candidate filtering, region-center
strategies, budget accounting, stalls, restarts, and the clearance
invariant replayed from region logs.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np
import pytest

from cascade_checks import clearance_violations, epoch_mean_violations
from divbatch import (
    Box,
    CENTER_STRATEGIES,
    CascadeInstance,
    DsConfig,
    EvaluatedPoint,
    InfeasibleInitialization,
    NoPopulation,
    TabuRegion,
    init_cma,
    init_diverse_means,
    is_valid_candidate,
    make_function,
    run_ds,
    update_tabu_center,
)


class FlatFunction:
    """Constant objective; every CMA-ES instance stops after one tell."""

    def __init__(self, dimension=2):
        self.dimension = dimension
        self.lower_bounds = np.full(dimension, -5.0)
        self.upper_bounds = np.full(dimension, 5.0)
        self.function_id = "flat"

    def evaluate(self, x):
        return 7.0


def point(x, f, idx, inst=0):
    return EvaluatedPoint(x=np.asarray(x, dtype=float), f=f, eval_index=idx, instance_id=inst)


def test_init_diverse_means_single_point():
    means = init_diverse_means(1, Box.cube(3), 4.0, np.random.default_rng(0))
    assert len(means) == 1
    assert Box.cube(3).contains(means[0])


@pytest.mark.parametrize("seed", range(20))
def test_init_diverse_means_pairwise_distance(seed):
    box = Box.cube(10)
    means = init_diverse_means(5, box, 10.0, np.random.default_rng(seed))
    assert len(means) == 5
    for a in range(5):
        assert box.contains(means[a])
        for b in range(a + 1, 5):
            assert np.linalg.norm(means[a] - means[b]) >= 10.0


def test_init_diverse_means_rejects_oversized_distance():
    # the cube's diagonal in D=10 is 10 sqrt(10) ~ 31.6
    with pytest.raises(InfeasibleInitialization):
        init_diverse_means(2, Box.cube(10), 32.0, np.random.default_rng(0))


def test_init_diverse_means_raises_when_the_cap_is_exhausted():
    # 30 points pairwise >= 13 apart cannot fit in [-5, 5]^2
    with pytest.raises(InfeasibleInitialization):
        init_diverse_means(30, Box.cube(2), 13.0, np.random.default_rng(0), rejection_cap=2000)


def test_candidate_boundary_is_valid():
    regions = [TabuRegion(center=np.zeros(2), radius=3.0, owner=0)]
    assert is_valid_candidate(np.array([3.0, 0.0]), 1, regions)
    assert not is_valid_candidate(np.array([2.999999, 0.0]), 1, regions)


def test_candidate_ignores_later_and_inactive_regions():
    regions = [
        TabuRegion(center=np.zeros(2), radius=3.0, owner=2),
        TabuRegion(center=np.zeros(2), radius=3.0, owner=0, active=False),
    ]
    # the only region owned by an earlier instance is inactive
    assert is_valid_candidate(np.zeros(2), 1, regions)
    assert not is_valid_candidate(np.zeros(2), 3, regions[:1])


def test_instance_zero_is_never_constrained():
    regions = [TabuRegion(center=np.zeros(2), radius=100.0, owner=0)]
    assert is_valid_candidate(np.zeros(2), 0, regions)


def make_instance(dim=2, mean=None):
    mean = np.zeros(dim) if mean is None else mean
    state = init_cma(dim, mean, seed=0)
    region = TabuRegion(center=mean.copy(), radius=1.0, owner=0)
    return CascadeInstance(index=0, state=state, region=region)


def test_center_update_population_best_breaks_ties_by_eval_index():
    inst = make_instance()
    pop = [point([1, 1], 2.0, 5), point([2, 2], 1.0, 7), point([3, 3], 1.0, 9)]
    update_tabu_center(inst, pop, "population_best")
    assert np.array_equal(inst.region.center, [2.0, 2.0])


def test_center_update_best_so_far_prefers_the_instance_record():
    inst = make_instance()
    inst.best_point = point([9, 9], -1.0, 1)
    update_tabu_center(inst, [point([1, 1], 5.0, 3)], "best_so_far")
    assert np.array_equal(inst.region.center, [9.0, 9.0])


def test_center_update_distribution_mean_copies_the_mean():
    inst = make_instance(mean=np.array([0.5, -0.5]))
    update_tabu_center(inst, [], "distribution_mean")
    assert np.array_equal(inst.region.center, [0.5, -0.5])
    inst.state.mean[0] = 99.0
    assert inst.region.center[0] == 0.5


def test_center_update_rejects_empty_population_and_bad_strategy():
    inst = make_instance()
    with pytest.raises(NoPopulation):
        update_tabu_center(inst, [], "population_best")
    with pytest.raises(ValueError):
        update_tabu_center(inst, [point([0, 0], 1.0, 0)], "nope")


def test_run_ds_rejects_unknown_strategy():
    with pytest.raises(ValueError):
        run_ds(DsConfig(k=2, d_min=1.0, budget=50, center_strategy="nope"), FlatFunction())


@pytest.mark.parametrize("budget", [37, 100, 203])
def test_run_ds_spends_the_budget_exactly(budget):
    fn = make_function("rastrigin_sep", 3, 0)
    traj = run_ds(DsConfig(k=3, d_min=1.0, budget=budget, seed=0), fn)
    assert len(traj) == budget
    assert [p.eval_index for p in traj.points] == list(range(budget))
    assert all(0 <= p.instance_id < 3 for p in traj.points)
    assert all(fn.box.contains(p.x) for p in traj.points)
    assert fn.eval_count == budget


def test_run_ds_metadata():
    fn = make_function("sphere", 2, 0)
    traj = run_ds(DsConfig(k=2, d_min=1.0, budget=60, seed=5), fn)
    assert traj.algorithm_id == "ds"
    assert traj.function_id == "sphere"
    assert traj.config["k"] == 2
    assert traj.config["seed"] == 5


def test_single_instance_never_rejects():
    fn = make_function("griewank", 3, 0)
    traj, log = run_ds(DsConfig(k=1, d_min=3.0, budget=140, seed=2), fn, return_log=True)
    assert log.total_rejections == 0
    assert len(traj) == 140


def test_run_ds_is_deterministic():
    fn_a = make_function("schaffers_f7", 3, 1)
    fn_b = make_function("schaffers_f7", 3, 1)
    cfg = DsConfig(k=3, d_min=2.0, budget=150, seed=9)
    assert run_ds(cfg, fn_a) == run_ds(cfg, fn_b)


def test_run_ds_warns_when_budget_is_below_one_round():
    fn = make_function("sphere", 2, 0)
    with pytest.warns(UserWarning, match="below one full round"):
        run_ds(DsConfig(k=4, d_min=1.0, budget=10, seed=0), fn)


def test_run_ds_propagates_infeasible_initialization():
    fn = make_function("sphere", 10, 0)
    with pytest.raises(InfeasibleInitialization):
        run_ds(DsConfig(k=2, d_min=40.0, budget=100, seed=0), fn)


def test_clearance_invariant_holds_on_logged_runs():
    for fid, dim, k, d_min, budget in [
        ("rastrigin_sep", 5, 3, 4.0, 300),
        ("gauss_peaks", 2, 3, 2.0, 240),
    ]:
        fn = make_function(fid, dim, 0)
        traj, log = run_ds(DsConfig(k=k, d_min=d_min, budget=budget, seed=3), fn, return_log=True)
        assert clearance_violations(traj, log, d_min) == []
        assert epoch_mean_violations(log, d_min) == []


def test_population_best_centers_replay_from_the_trajectory():
    fn = make_function("rastrigin_sep", 3, 4)
    traj, log = run_ds(DsConfig(k=2, d_min=2.0, budget=210, seed=4), fn, return_log=True)
    pops = defaultdict(list)
    for p in traj.points:
        _, generation = log.point_generation[p.eval_index]
        pops[(p.instance_id, generation)].append(p)
    snapshot = {(s.generation, s.instance): s.center for s in log.snapshots}
    running_best: dict[int, EvaluatedPoint] = {}
    checked = 0
    for (inst, generation), pop in sorted(pops.items(), key=lambda kv: kv[0][1]):
        for p in pop:
            cur = running_best.get(inst)
            if cur is None or (p.f, p.eval_index) < (cur.f, cur.eval_index):
                running_best[inst] = p
        center = snapshot[(generation, inst)]
        gen_best = min(pop, key=lambda p: (p.f, p.eval_index))
        # a live instance moves its center to the generation best; an
        # instance that stopped this round freezes at its best so far
        candidates = [gen_best.x, running_best[inst].x]
        assert any(np.array_equal(center, c) for c in candidates)
        checked += 1
    # 210 evals at 7 per instance generation gives 15 rounds of 2 instances
    assert checked == 30


def test_stalled_instance_freezes_at_its_best_point():
    fn = make_function("sphere", 2, 0)
    traj, log = run_ds(DsConfig(k=2, d_min=9.0, budget=300, seed=0), fn, return_log=True)
    per = defaultdict(list)
    for p in traj.points:
        per[p.instance_id].append(p)
    # instance 1 is starved once instance 0 settles mid-box
    assert 0 < len(per[1]) < 50
    assert len(traj) == 300
    best1 = min(per[1], key=lambda p: (p.f, p.eval_index))
    last_center = [s.center for s in log.snapshots if s.instance == 1][-1]
    assert np.array_equal(last_center, best1.x)


def test_stall_with_zero_evaluations_keeps_the_initial_center():
    fn = make_function("sphere", 2, 0)
    traj, log = run_ds(DsConfig(k=2, d_min=9.0, budget=300, seed=4), fn, return_log=True)
    assert all(p.instance_id == 0 for p in traj.points)
    assert len(traj) == 300
    (_, _, means) = log.epoch_starts[0]
    last_center = [s.center for s in log.snapshots if s.instance == 1][-1]
    assert np.array_equal(last_center, means[1])


def test_flat_function_restarts_until_the_budget_is_gone():
    fn = FlatFunction()
    traj, log = run_ds(DsConfig(k=2, d_min=1.0, budget=60, seed=0), fn, return_log=True)
    assert len(traj) == 60
    assert len(log.epoch_starts) >= 3
    assert epoch_mean_violations(log, 1.0) == []
    epochs = sorted({e for e, _, _ in log.epoch_starts})
    assert epochs == list(range(len(epochs)))


def test_restart_on_a_real_function():
    fn = make_function("sphere", 2, 0)
    traj, log = run_ds(DsConfig(k=2, d_min=2.0, budget=2000, seed=0), fn, return_log=True)
    assert len(log.epoch_starts) >= 2
    assert len(traj) == 2000
    assert clearance_violations(traj, log, 2.0) == []
    assert epoch_mean_violations(log, 2.0) == []


@pytest.mark.parametrize("strategy", CENTER_STRATEGIES)
def test_center_strategies_all_run_to_budget(strategy):
    fn = make_function("griewank", 3, 2)
    traj = run_ds(DsConfig(k=2, d_min=2.0, budget=120, seed=1, center_strategy=strategy), fn)
    assert len(traj) == 120


def test_center_strategies_change_the_search():
    fn_a = make_function("rastrigin_sep", 3, 0)
    fn_b = make_function("rastrigin_sep", 3, 0)
    a = run_ds(DsConfig(k=3, d_min=2.0, budget=200, seed=0), fn_a)
    b = run_ds(
        DsConfig(k=3, d_min=2.0, budget=200, seed=0, center_strategy="distribution_mean"), fn_b
    )
    assert a != b


def test_reorder_flag_still_spends_the_budget_deterministically():
    fn_a, fn_b = FlatFunction(), FlatFunction()
    cfg = DsConfig(k=3, d_min=1.0, budget=90, seed=7, reorder_on_convergence=True)
    a = run_ds(cfg, fn_a)
    b = run_ds(cfg, fn_b)
    assert a == b
    assert len(a) == 90


def test_region_log_csv_layout(tmp_path):
    fn = make_function("sphere", 2, 0)
    _, log = run_ds(DsConfig(k=2, d_min=1.0, budget=60, seed=0), fn, return_log=True)
    path = tmp_path / "regions.csv"
    log.write(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "generation,instance,x0,x1,active"
    first = lines[1].split(",")
    assert first[0] == "0"
    assert first[1] in {"0", "1"}
    assert first[-1] in {"0", "1"}
    assert len(lines) == 1 + len(log.snapshots)


def test_center_at_returns_the_latest_snapshot():
    fn = make_function("sphere", 2, 0)
    _, log = run_ds(DsConfig(k=2, d_min=1.0, budget=120, seed=0), fn, return_log=True)
    snap = log.center_at(3, 1)
    assert snap is not None
    assert snap.generation <= 3
    assert snap.instance == 1
    later = [s for s in log.snapshots if s.instance == 1 and s.generation <= 3]
    assert np.array_equal(snap.center, later[-1].center)
