import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment

from rdekit import apply_T, ks_distance
from rdekit.graph_solvers import (MessageSet, PI2_OVER_6, _dmin_excluding, bp_decide, bp_run,
                                  bp_step, brute_force_dfactor, brute_force_matching, compare_run,
                                  exact_dfactor, exact_matching, gen_instance, hungarian,
                                  instance_from_weights, instance_seeds, message_samples,
                                  min_cost_dfactor)


def test_instance_generation_is_seeded():
    a, b = gen_instance(6, 3), gen_instance(6, 3)
    assert np.array_equal(a.weights, b.weights)
    assert np.all(a.weights > 0)
    with pytest.raises(ValueError):
        gen_instance(0, 1)
    with pytest.raises(ValueError):
        instance_from_weights(np.ones((2, 3)))


@given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 2**31))
@settings(max_examples=50)
def test_dmin_excluding_matches_loop(cols, d, seed):
    if d >= cols:
        d = cols - 1
    A = np.random.default_rng(seed).integers(0, 4, size=(3, cols)).astype(float)
    out = _dmin_excluding(A, d)
    for r in range(3):
        for c in range(cols):
            rest = np.delete(A[r], c)
            assert out[r, c] == np.sort(rest)[d - 1]


@pytest.mark.parametrize("n", [1, 2, 5, 30, 120])
def test_hungarian_matches_scipy(n):
    W = gen_instance(n, n).weights
    cols = hungarian(W)
    r, c = linear_sum_assignment(W)
    assert sorted(cols.tolist()) == list(range(n))
    assert W[np.arange(n), cols].sum() == pytest.approx(W[r, c].sum(), rel=1e-12)


def test_hungarian_rectangular_rejected():
    with pytest.raises(ValueError):
        hungarian(np.ones((2, 3)))


@pytest.mark.parametrize("seed", range(10))
def test_exact_matches_brute_force(seed):
    inst = gen_instance(int(np.random.default_rng(seed).integers(1, 8)), seed)
    assert exact_matching(inst).cost == pytest.approx(brute_force_matching(inst).cost, rel=1e-12)


@pytest.mark.parametrize("n,d", [(3, 2), (4, 2), (5, 2), (4, 3), (5, 3)])
def test_dfactor_matches_brute_force(n, d):
    for seed in range(4):
        inst = gen_instance(n, 100 * n + seed)
        ex = exact_dfactor(inst, d)
        bf = brute_force_dfactor(inst, d)
        assert ex.degrees_ok(d) and bf.degrees_ok(d)
        assert ex.cost == pytest.approx(bf.cost, rel=1e-12)


def test_dfactor_full_degree_takes_everything():
    inst = gen_instance(4, 0)
    sol = exact_dfactor(inst, 4)
    assert sol.edges.all()
    assert sol.cost == pytest.approx(inst.weights.sum())


def test_dfactor_rejects_large_d():
    with pytest.raises(ValueError):
        min_cost_dfactor(gen_instance(3, 0).weights, 4)


def test_bp_on_trivial_instance():
    W = np.array([[1.0, 5.0, 6.0], [5.0, 1.0, 6.0], [6.0, 5.0, 1.0]])
    inst = instance_from_weights(W)
    sol = bp_decide(inst, bp_run(inst, 1, 20), 1)
    assert sol.consistent and sol.cost == 3.0
    assert np.array_equal(sol.edges, np.eye(3, dtype=bool))


def test_bp_step_is_synchronous():
    inst = gen_instance(6, 1)
    m0 = MessageSet.zeros(6)
    m1 = bp_step(inst, m0, 1)
    # from zero messages every message is the smallest other weight in the row
    expect = np.array([[np.min(np.delete(inst.weights[i], j)) for j in range(6)] for i in range(6)])
    assert np.allclose(m1.left_to_right, expect)
    assert m1.iteration == 1
    with pytest.raises(ValueError):
        bp_step(inst, m0, 6)


def test_bp_damping_fixed_point_agrees():
    inst = gen_instance(20, 4)
    plain = bp_decide(inst, bp_run(inst, 1, 300), 1)
    damped = bp_decide(inst, bp_run(inst, 1, 300, damping=0.5), 1)
    if plain.consistent and damped.consistent:
        assert plain.cost == pytest.approx(damped.cost)


def test_bp_d2_small():
    inst = gen_instance(30, 7)
    sol = bp_decide(inst, bp_run(inst, 2, 200), 2)
    if sol.consistent:
        assert sol.degrees_ok(2)
        assert sol.cost >= exact_dfactor(inst, 2).cost - 1e-9


def test_message_samples_scale():
    inst = gen_instance(10, 0)
    msgs = bp_run(inst, 1, 3)
    s = message_samples(inst, msgs)
    assert s.size == 200
    assert np.allclose(s[:100], 10 * msgs.left_to_right.ravel())


def test_instance_seeds_reproducible():
    assert instance_seeds(1, 5) == instance_seeds(1, 5)
    assert instance_seeds(1, 5) != instance_seeds(2, 5)
    assert instance_seeds(1, 3) == instance_seeds(1, 5)[:3]


def test_compare_run_artifacts(tmp_path):
    rep = compare_run(12, 1, 4, bp_iters=100, seed=3)
    agg = rep.aggregate()
    assert agg["num_instances"] == 4
    assert agg["pi2_over_6_gap"] == pytest.approx(rep.mean_exact - PI2_OVER_6)
    rep.to_csv(tmp_path / "r.csv")
    rep.to_json(tmp_path / "r.json")
    header = (tmp_path / "r.csv").read_text().splitlines()[0]
    assert header == "instance_seed,n,d,exact_cost,bp_cost,bp_consistent,gap"
    assert json.loads((tmp_path / "r.json").read_text())["n"] == 12


def test_compare_run_parallel_is_identical():
    a = compare_run(10, 2, 4, bp_iters=30, seed=8)
    b = compare_run(10, 2, 4, bp_iters=30, seed=8, jobs=2)
    assert [r.exact_cost for r in a.rows] == [r.exact_cost for r in b.rows]
    assert [r.bp_cost for r in a.rows] == [r.bp_cost for r in b.rows]


def test_compare_run_without_bp():
    rep = compare_run(8, 1, 2, with_bp=False)
    assert all(not r.bp_consistent for r in rep.rows)
    assert rep.bp_pass_rate == 0.0


@pytest.mark.parametrize("t", [1, 4, 10])
def test_scaled_messages_follow_operator_iterates(point_mass, t):
    # from zero messages, n times a message after t rounds has roughly the law of T^t
    # applied to the point mass; the n messages of a row share most inputs, so the
    # noise floor is about 1/sqrt(n)
    inst = gen_instance(400, 1)
    law = point_mass
    for _ in range(t):
        law = apply_T(law, 1)
    assert ks_distance(message_samples(inst, bp_run(inst, 1, t)), law) < 0.06


@given(c=st.floats(0.0, 5.0), seed=st.integers(0, 1000), d=st.integers(1, 3))
@settings(max_examples=20, deadline=None)
def test_adding_a_constant_shifts_optimum(c, seed, d):
    inst = gen_instance(7, seed)
    moved = instance_from_weights(inst.weights + c)
    a = exact_dfactor(inst, d)
    b = exact_dfactor(moved, d)
    assert b.cost == pytest.approx(a.cost + 7 * d * c, rel=1e-9, abs=1e-9)
    assert a.edge_set() == b.edge_set()


def test_messages_after_30_rounds_follow_shifted_fixed_point(point_mass):
    # raw rounds oscillate like raw iterates of T, so the oracle is T^30, a translate of F_1
    inst = gen_instance(500, 3)
    law = point_mass
    for _ in range(30):
        law = apply_T(law, 1)
    assert ks_distance(message_samples(inst, bp_run(inst, 1, 30)), law) < 0.05
