"""
Allocator Service Tests
"""
import itertools
import time

import numpy as np
import pytest

from app.models.allocation import Assignment, GKind, MessageState, SolverParams
from app.models.detection import DetectorKind
from app.models.measurement import SinrTable
from app.models.network_config import NetworkConfig
from app.services.allocator_service import AllocatorService, max_excluding_self
from app.services.topology_service import TopologyService
from app.utils.errors import (
    ConfigurationError,
    ConstraintViolationError,
    FeasibilityError,
    IncompleteTableError,
)

UNDAMPED = SolverParams(alpha=0.0)


def one_group(w):
    w = np.asarray(w, dtype=float)
    return AllocatorService.weights_from_matrix(w, np.zeros(w.shape[0], dtype=int))


def sinr_table(avg, counts=None, group_of=None):
    avg = np.asarray(avg, dtype=float)
    counts = np.ones(avg.shape, dtype=int) if counts is None else np.asarray(counts)
    return SinrTable(
        avg=avg,
        counts=counts,
        sums=avg * counts,
        cell_of=np.zeros(avg.shape[0], dtype=int),
        group_of=np.arange(avg.shape[0]) if group_of is None else np.asarray(group_of),
        frames=int(counts.sum(axis=1).max()),
        detector=DetectorKind.MRC,
    )


def brute_force(weights):
    """Best objective over every feasible assignment of a single-group instance"""
    n, C = weights.w.shape
    return max(
        sum(weights.w[k, c] for k, c in enumerate(channels))
        for channels in itertools.permutations(range(C), n)
    )


# ==================== Weights ====================

def test_identity_weights_pass_values_through():
    weights = AllocatorService.build_weights(sinr_table([[5.0, 2.0], [0.5, 1.0]]), 0)
    assert weights.w[0, 0] == 5.0
    assert weights.g_kind is GKind.IDENTITY
    assert weights.tags.tolist() == [0, 1]
    assert [g.tolist() for g in weights.groups] == [[0], [1]]


def test_log1p_weights():
    weights = AllocatorService.build_weights(sinr_table([[0.0, np.e - 1]]), 0, 'log1p')
    np.testing.assert_allclose(weights.w, [[0.0, 1.0]])


def test_weights_are_monotone(rng):
    a = rng.uniform(0, 100, 1000)
    b = a + rng.uniform(1e-6, 10, 1000)
    for kind in GKind:
        assert np.all(kind.apply(b) > kind.apply(a))


def test_weights_only_cover_the_requested_cell():
    table = sinr_table([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    table = SinrTable(
        avg=table.avg, counts=table.counts, sums=table.sums, cell_of=np.array([1, 0, 1]),
        group_of=np.array([0, 0, 1]), frames=1, detector=DetectorKind.ZF,
    )
    weights = AllocatorService.build_weights(table, 1)
    assert weights.tags.tolist() == [0, 2]
    np.testing.assert_array_equal(weights.w, [[1.0, 2.0], [5.0, 6.0]])
    assert weights.core == 1


def test_missing_entry_raises_incomplete_table():
    with pytest.raises(IncompleteTableError):
        AllocatorService.build_weights(sinr_table([[1.0, 2.0]], counts=[[1, 0]]), 0)
    with pytest.raises(IncompleteTableError):
        AllocatorService.build_weights(sinr_table([[1.0, np.nan]]), 0)


def test_weights_from_matrix_validation():
    with pytest.raises(IncompleteTableError):
        AllocatorService.weights_from_matrix([[1.0, 2.0]], [0, 1])
    with pytest.raises(IncompleteTableError):
        AllocatorService.weights_from_matrix([[1.0, np.inf]], [0])


def test_solver_params_invariants():
    for bad in ({'alpha': 1.0}, {'alpha': -0.1}, {'epsilon': 0.0}, {'n_max': 0}, {'jitter': -1.0}):
        with pytest.raises(ConfigurationError):
            SolverParams(**bad)


# ==================== Max-Sum Messages ====================

def test_max_excluding_self():
    x = np.array([[3.0, 1.0, 2.0], [5.0, 5.0, 0.0]])
    np.testing.assert_array_equal(max_excluding_self(x, axis=1), [[2.0, 3.0, 3.0], [5.0, 5.0, 5.0]])
    np.testing.assert_array_equal(max_excluding_self(x, axis=0), [[5.0, 5.0, 0.0], [3.0, 1.0, 2.0]])
    assert np.all(max_excluding_self(np.ones((1, 3)), axis=0) == -np.inf)


def test_hand_trace_single_tag():
    weights = one_group([[3.0, 1.0]])
    state = AllocatorService.max_sum_iterate(AllocatorService.initial_state(weights), weights, 0.0)
    np.testing.assert_array_equal(state.phi, [[1.0, 3.0]])
    np.testing.assert_array_equal(state.rho, [[0.0, 0.0]])
    np.testing.assert_array_equal(state.chi, [[-2.0, 2.0]])
    assert state.n == 1
    assert AllocatorService.extract_assignment(state, weights).channel_of.tolist() == [0]


def test_single_tag_reaches_optimum_at_first_iteration():
    assignment, trace = AllocatorService.run_max_sum(one_group([[3.0, 1.0]]), UNDAMPED)
    assert assignment.channel_of.tolist() == [0]
    assert trace.converged
    assert trace.first_iteration_reaching(3.0) == 1
    assert trace.entries[0].objective == 3.0


def test_singleton_groups_receive_no_rho(rng):
    weights = AllocatorService.weights_from_matrix(rng.uniform(size=(4, 3)), [0, 1, 2, 3])
    state = AllocatorService.initial_state(weights)
    for _ in range(3):
        state = AllocatorService.max_sum_iterate(state, weights, 0.05)
        assert not np.any(state.rho)


def test_damping_leaves_fixed_points_unchanged():
    weights = one_group([[3.0, 1.0]])
    state = AllocatorService.initial_state(weights)
    for _ in range(3):
        state = AllocatorService.max_sum_iterate(state, weights, 0.0)
    damped = AllocatorService.max_sum_iterate(state, weights, 0.5)
    np.testing.assert_array_equal(damped.phi, state.phi)
    np.testing.assert_array_equal(damped.chi, state.chi)


def test_chi_is_consistent_after_every_iteration(rng):
    weights = AllocatorService.random_instance(rng)
    state = AllocatorService.initial_state(weights)
    for _ in range(20):
        state = AllocatorService.max_sum_iterate(state, weights, 0.05)
        np.testing.assert_array_equal(state.chi, state.phi + state.rho - weights.w)
        assert np.all(state.rho >= 0)


def test_nmae_conventions():
    ones = np.ones((2, 3))
    assert AllocatorService.nmae(ones, ones) == 0.0
    assert AllocatorService.nmae(2 * ones, ones) == 0.5
    assert AllocatorService.nmae(np.zeros(1), np.zeros(1)) == 0.0
    assert AllocatorService.nmae(np.zeros(1), np.ones(1)) == np.inf


# ==================== Extraction ====================

def state_with_chi(chi):
    chi = np.asarray(chi, dtype=float)
    return MessageState(phi=np.zeros_like(chi), rho=np.zeros_like(chi), chi=chi, n=1)


def test_extract_single_negative_entry():
    assignment = AllocatorService.extract_assignment(state_with_chi([[-2.0, 2.0]]), one_group([[3.0, 1.0]]))
    assert assignment.channel_of.tolist() == [0]
    assert not assignment.repaired


def test_extract_all_negative_picks_most_negative():
    weights = one_group([[0.0, 0.0, 0.0]])
    assignment = AllocatorService.extract_assignment(state_with_chi([[-1.0, -3.0, -2.0]]), weights)
    assert assignment.channel_of.tolist() == [1]
    assert assignment.repaired


def test_extract_without_negative_entries_picks_argmin():
    weights = one_group([[0.0, 0.0, 0.0]])
    assignment = AllocatorService.extract_assignment(state_with_chi([[2.0, 1.0, 1.0]]), weights)
    assert assignment.channel_of.tolist() == [1]
    assert assignment.repaired


def test_group_conflict_is_repaired_by_matching():
    weights = one_group([[3.0, 1.0], [2.0, 4.0]])
    assignment = AllocatorService.extract_assignment(state_with_chi([[-1.0, 1.0], [-1.0, 1.0]]), weights)
    assert assignment.channel_of.tolist() == [0, 1]
    assert assignment.repaired
    AllocatorService.check_feasibility(weights, assignment)


def test_repair_keeps_uncontested_channels():
    weights = one_group([[3.0, 1.0, 0.0], [2.0, 4.0, 0.0], [0.0, 9.0, 5.0]])
    chi = [[-1.0, 1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, 1.0, -1.0]]
    assignment = AllocatorService.extract_assignment(state_with_chi(chi), weights)
    assert assignment.channel_of.tolist() == [0, 1, 2]


def test_conflicts_across_groups_are_allowed():
    weights = AllocatorService.weights_from_matrix([[3.0, 1.0], [2.0, 1.0]], [0, 1])
    assignment = AllocatorService.extract_assignment(state_with_chi([[-1.0, 1.0], [-1.0, 1.0]]), weights)
    assert assignment.channel_of.tolist() == [0, 0]
    assert not assignment.repaired


# ==================== Max-Sum Runs ====================

def test_single_subchannel_short_circuits():
    weights = AllocatorService.weights_from_matrix([[3.0], [1.0]], [0, 1])
    assignment, trace = AllocatorService.run_max_sum(weights)
    assert assignment.channel_of.tolist() == [0, 0]
    assert trace.trivial and trace.converged
    assert trace.iterations == 0


def test_empty_cell_short_circuits():
    weights = AllocatorService.weights_from_matrix(np.zeros((0, 4)), np.zeros(0, dtype=int))
    assignment, trace = AllocatorService.run_max_sum(weights)
    assert assignment.v.shape == (0, 4)
    assert trace.trivial


def test_infeasible_group_fails_before_iterating():
    with pytest.raises(FeasibilityError):
        AllocatorService.run_max_sum(one_group(np.ones((3, 2))))
    with pytest.raises(FeasibilityError):
        AllocatorService.exact_optimal(one_group(np.ones((3, 2))))


@pytest.mark.parametrize('method', ['max_sum', 'exact', 'random_orthogonal'])
def test_infeasible_group_is_reported_by_training_index(method):
    weights = AllocatorService.weights_from_matrix(np.ones((5, 2)), [0, 0, 5, 5, 5], core=3)
    with pytest.raises(FeasibilityError) as exc:
        AllocatorService.solve(weights, method)
    assert (exc.value.core, exc.value.group, exc.value.size) == (3, 5, 3)


def test_group_violation_is_reported_by_training_index():
    weights = AllocatorService.weights_from_matrix([[1.0, 2.0], [3.0, 4.0]], [7, 7])
    with pytest.raises(ConstraintViolationError) as exc:
        AllocatorService.check_feasibility(weights, Assignment.from_channels([1, 1], 2))
    assert exc.value.constraint == 'unique-subchannel-per-group'
    assert 'training group 7' in exc.value.message


def test_cell_weights_keep_training_indices():
    table = sinr_table(np.ones((3, 4)), group_of=[2, 6, 2])
    weights = AllocatorService.build_weights(table, 0)
    assert weights.group_ids == (2, 6)
    assert [g.tolist() for g in weights.groups] == [[0, 2], [1]]


def test_iteration_cap_is_respected(rng):
    weights = AllocatorService.random_instance(rng)
    _, trace = AllocatorService.run_max_sum(weights, SolverParams(n_max=3, epsilon=1e-300))
    assert trace.iterations == 3
    assert not trace.converged
    assert [e.iteration for e in trace.entries] == [1, 2, 3]


def test_max_sum_is_deterministic(rng):
    weights = AllocatorService.random_instance(rng)
    a, trace_a = AllocatorService.run_max_sum(weights)
    b, trace_b = AllocatorService.run_max_sum(weights)
    assert a.same_as(b)
    assert [e.to_dict() for e in trace_a.entries] == [e.to_dict() for e in trace_b.entries]


def test_jitter_is_bounded_and_reproducible():
    weights = one_group([[1.0, 2.0], [3.0, 4.0]])
    params = SolverParams(jitter=1e-9, jitter_seed=4)
    a = AllocatorService.jittered(weights, params).w
    b = AllocatorService.jittered(weights, params).w
    np.testing.assert_array_equal(a, b)
    assert np.all((a - weights.w >= 0) & (a - weights.w <= 4e-9))
    assert AllocatorService.jittered(weights, SolverParams()) is weights


def test_max_sum_matches_exact_on_oracle_subset():
    rows = AllocatorService.oracle_check(40, seed=0)
    assert all(row['match'] for row in rows)
    for row in rows:
        assert row['max_sum_objective'] == pytest.approx(row['exact_objective'], rel=1e-9)


@pytest.mark.slow
def test_max_sum_matches_exact_on_full_oracle_suite():
    rows = AllocatorService.oracle_check(500, seed=0)
    assert all(row['match'] for row in rows)
    within_bound = [row['iterations'] <= 8 * row['n_tags'] for row in rows if row['converged']]
    assert np.mean(within_bound) >= 0.95


@pytest.mark.slow
def test_per_iteration_cost_scales_gently(rng):
    def seconds_per_iteration(n_tags):
        group_of = np.arange(n_tags) % 8
        weights = AllocatorService.weights_from_matrix(rng.uniform(size=(n_tags, 8)), group_of)
        state = AllocatorService.initial_state(weights)
        best = np.inf
        for _ in range(5):
            start = time.perf_counter()
            for _ in range(200):
                state = AllocatorService.max_sum_iterate(state, weights, 0.05)
            best = min(best, time.perf_counter() - start)
        return best

    assert seconds_per_iteration(40) / seconds_per_iteration(20) < 8


# ==================== Exact and Random ====================

def test_exact_two_by_two():
    weights = one_group([[3.0, 1.0], [2.0, 4.0]])
    assignment = AllocatorService.exact_optimal(weights)
    assert assignment.channel_of.tolist() == [0, 1]
    assert AllocatorService.objective_value(weights, assignment) == 7.0


def test_exact_singleton_groups_take_argmax(rng):
    w = rng.uniform(size=(5, 4))
    weights = AllocatorService.weights_from_matrix(w, np.arange(5))
    assert AllocatorService.exact_optimal(weights).channel_of.tolist() == np.argmax(w, axis=1).tolist()


def test_exact_diagonal():
    weights = one_group(np.eye(3) * 10 + 1)
    assert AllocatorService.exact_optimal(weights).channel_of.tolist() == [0, 1, 2]


def test_exact_matches_brute_force(rng):
    for _ in range(30):
        weights = one_group(rng.uniform(size=(3, 4)))
        objective = AllocatorService.objective_value(weights, AllocatorService.exact_optimal(weights))
        assert objective == pytest.approx(brute_force(weights), rel=1e-12)


def test_per_tag_shift_moves_objective_not_argmax(rng):
    for _ in range(20):
        weights = one_group(rng.uniform(size=(3, 3)))
        delta = float(rng.uniform(-1, 1))
        k = int(rng.integers(3))
        shifted_w = weights.w.copy()
        shifted_w[k] += delta
        shifted = one_group(shifted_w)

        before = AllocatorService.exact_optimal(weights)
        after = AllocatorService.exact_optimal(shifted)
        assert before.same_as(after)
        assert AllocatorService.objective_value(shifted, after) == pytest.approx(
            AllocatorService.objective_value(weights, before) + delta, abs=1e-12
        )
        assert brute_force(shifted) == pytest.approx(brute_force(weights) + delta, abs=1e-12)


def test_random_full_group_is_a_permutation(rng):
    weights = one_group(np.zeros((8, 8)))
    assignment = AllocatorService.random_orthogonal_allocation(weights.groups, 8, rng)
    assert sorted(assignment.channel_of.tolist()) == list(range(8))


def test_random_single_tag_is_uniform(rng):
    groups = (np.array([0]),)
    picks = [AllocatorService.random_orthogonal_allocation(groups, 4, rng).channel_of[0] for _ in range(4000)]
    counts = np.bincount(picks, minlength=4)
    assert np.all(np.abs(counts - 1000) < 150)


def test_random_allocation_rejects_oversized_group(rng):
    with pytest.raises(FeasibilityError):
        AllocatorService.random_orthogonal_allocation((np.arange(3),), 2, rng)


def test_random_mean_never_beats_exact(rng):
    for _ in range(5):
        weights = AllocatorService.random_instance(rng)
        exact = AllocatorService.objective_value(weights, AllocatorService.exact_optimal(weights))
        assert AllocatorService.random_mean_objective(weights, 1000, rng) <= exact


def unrepaired_channels(state):
    """The lone chi <= 0 entry of every tag, else its argmin chi; plus the pick counts"""
    selected = state.chi <= 0
    picks = selected.sum(axis=1)
    return np.where(picks == 1, np.argmax(selected, axis=1), np.argmin(state.chi, axis=1)), picks


def replay(weights, iterations, alpha):
    state = AllocatorService.initial_state(weights)
    for _ in range(iterations):
        state = AllocatorService.max_sum_iterate(state, weights, alpha)
    return state


def check_topology(config, seed, params=SolverParams()):
    """All methods feasible on one random topology; Max-Sum flags exactly the repaired extractions"""
    rng = np.random.default_rng(seed)
    topology = TopologyService.build_cellular_topology(config, rng)
    repairs = 0
    for core in range(topology.n_cores):
        tags = topology.cell_members(core)
        weights = AllocatorService.weights_from_matrix(
            rng.uniform(0, 50, size=(tags.size, config.n_channels)), topology.group_of[tags], core
        )
        for method in ('exact', 'random_orthogonal'):
            assignment, _ = AllocatorService.solve(weights, method, rng=rng)
            AllocatorService.check_feasibility(weights, assignment)

        assignment, trace = AllocatorService.run_max_sum(weights, params)
        AllocatorService.check_feasibility(weights, assignment)
        if trace.trivial:
            continue
        state = replay(AllocatorService.jittered(weights, params), trace.iterations, params.alpha)
        channels, picks = unrepaired_channels(state)
        clash = any(np.unique(channels[group]).size < group.size for group in weights.groups)
        needs_repair = bool(np.any(picks != 1)) or clash
        assert assignment.repaired == needs_repair
        assert trace.entries[-1].repaired == needs_repair
        if not needs_repair:
            np.testing.assert_array_equal(assignment.channel_of, channels)
        repairs += needs_repair
    return repairs


def test_every_method_is_feasible_on_real_topologies(paper_config):
    for seed in range(5):
        check_topology(paper_config, seed)


def test_repairs_are_flagged_when_iterations_run_out():
    config = NetworkConfig(n_cores=3, n_tags=36, n_channels=4, n_training=4)
    repairs = sum(check_topology(config, seed, SolverParams(n_max=1)) for seed in range(5))
    assert repairs > 0


@pytest.mark.slow
def test_every_method_is_feasible_on_a_thousand_topologies(paper_config):
    for seed in range(1000):
        check_topology(paper_config, seed)


# ==================== Objective ====================

def test_objective_of_zero_weights():
    weights = one_group(np.zeros((2, 3)))
    assert AllocatorService.objective_value(weights, Assignment.from_channels([0, 2], 3)) == 0.0


@pytest.mark.parametrize('v, constraint', [
    ([[1, 1], [0, 1]], 'one-subchannel-per-tag'),
    ([[0, 0], [0, 1]], 'one-subchannel-per-tag'),
    ([[1, 0], [1, 0]], 'unique-subchannel-per-group'),
    ([[2, 0], [0, 1]], 'binary'),
    ([[1, 0]], 'shape'),
])
def test_objective_names_the_violated_constraint(v, constraint):
    weights = one_group([[3.0, 1.0], [2.0, 4.0]])
    with pytest.raises(ConstraintViolationError) as exc:
        AllocatorService.objective_value(weights, Assignment(v=np.array(v)))
    assert exc.value.constraint == constraint
