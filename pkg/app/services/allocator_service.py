"""
Allocator Service - Per-Core Subchannel Assignment

Solves: maximize sum_kc w_kc v_kc over binary v with one subchannel per tag and
no subchannel shared inside a training group. Three solvers are offered: damped
Max-Sum message passing, an exact per-group Hungarian matching and a random
orthogonal baseline.
"""
import logging
from dataclasses import replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.models.allocation import (
    Assignment,
    ConvergenceTrace,
    GKind,
    MessageState,
    Method,
    SolverParams,
    TraceEntry,
    Weights,
)
from app.utils import rng as streams
from app.utils.errors import (
    ConstraintViolationError,
    FeasibilityError,
    IncompleteTableError,
)

logger = logging.getLogger(__name__)


def max_excluding_self(x, axis):
    """For every entry, the max of the other entries along `axis` (-inf if there are none)"""
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    if n < 2:
        return np.full(x.shape, -np.inf)
    top = np.argmax(x, axis=axis)
    first = np.take_along_axis(x, np.expand_dims(top, axis), axis=axis)
    masked = x.copy()
    np.put_along_axis(masked, np.expand_dims(top, axis), -np.inf, axis=axis)
    second = np.max(masked, axis=axis, keepdims=True)
    position = np.arange(n).reshape([-1 if a == axis % x.ndim else 1 for a in range(x.ndim)])
    is_top = position == np.expand_dims(top, axis)
    return np.where(is_top, second, first)


class AllocatorService:
    """Builds weights from an SINR table and solves the per-core assignment"""

    # ==================== Weights ====================

    @staticmethod
    def build_weights(sinr_table, cell, g_kind=GKind.IDENTITY):
        """w_kc = g(avg SINR) for the tags of one cell"""
        g_kind = GKind(g_kind)
        tags = np.flatnonzero(sinr_table.cell_of == cell)
        avg = sinr_table.avg[tags]
        missing = (sinr_table.counts[tags] == 0) | ~np.isfinite(avg)
        if np.any(missing):
            row, c = np.argwhere(missing)[0]
            raise IncompleteTableError(
                f"SINR table has no entry for tag {int(tags[row])}, subchannel {int(c)} (cell {cell})"
            )
        group_of = sinr_table.group_of[tags]
        labels = np.unique(group_of)
        return Weights(
            w=g_kind.apply(avg),
            tags=tags,
            groups=tuple(np.flatnonzero(group_of == m) for m in labels),
            g_kind=g_kind,
            core=int(cell),
            group_ids=tuple(int(m) for m in labels),
        )

    @staticmethod
    def weights_from_matrix(w, group_of, core=None):
        """Weights from a raw matrix and a per-row group label"""
        w = np.atleast_2d(np.asarray(w, dtype=float))
        group_of = np.asarray(group_of, dtype=int)
        if group_of.shape[0] != w.shape[0]:
            raise IncompleteTableError(
                f"{group_of.shape[0]} group labels given for {w.shape[0]} weight rows"
            )
        if not np.all(np.isfinite(w)):
            raise IncompleteTableError("Weights must be finite")
        labels = np.unique(group_of)
        return Weights(
            w=w,
            tags=np.arange(w.shape[0]),
            groups=tuple(np.flatnonzero(group_of == m) for m in labels),
            core=core,
            group_ids=tuple(int(m) for m in labels),
        )

    @staticmethod
    def check_groups(weights):
        """Every training group must fit into the subchannels"""
        for i, group in enumerate(weights.groups):
            if group.size > weights.n_channels:
                raise FeasibilityError(
                    weights.core, weights.group_label(i), int(group.size), weights.n_channels
                )

    # ==================== Feasibility and Objective ====================

    @staticmethod
    def check_feasibility(weights, assignment):
        """Raise ConstraintViolationError naming the first violated constraint"""
        v = np.asarray(assignment.v)
        if v.shape != weights.w.shape:
            raise ConstraintViolationError(
                'shape', f"assignment {v.shape} does not match weights {weights.w.shape}"
            )
        if not np.all((v == 0) | (v == 1)):
            raise ConstraintViolationError('binary', "entries must be 0 or 1")
        per_tag = v.sum(axis=1)
        if np.any(per_tag != 1):
            k = int(np.flatnonzero(per_tag != 1)[0])
            raise ConstraintViolationError(
                'one-subchannel-per-tag', f"tag row {k} holds {int(per_tag[k])} subchannels"
            )
        for i, group in enumerate(weights.groups):
            per_channel = v[group].sum(axis=0)
            if np.any(per_channel > 1):
                c = int(np.flatnonzero(per_channel > 1)[0])
                raise ConstraintViolationError(
                    'unique-subchannel-per-group',
                    f"subchannel {c} used {int(per_channel[c])} times "
                    f"in training group {weights.group_label(i)}",
                )

    @staticmethod
    def is_feasible(weights, assignment):
        try:
            AllocatorService.check_feasibility(weights, assignment)
        except ConstraintViolationError:
            return False
        return True

    @staticmethod
    def objective_value(weights, assignment):
        """sum_kc w_kc v_kc of a feasible assignment"""
        AllocatorService.check_feasibility(weights, assignment)
        return float(np.sum(weights.w * assignment.v))

    # ==================== Max-Sum ====================

    @staticmethod
    def initial_state(weights):
        zeros = np.zeros_like(weights.w, dtype=float)
        return MessageState(phi=zeros, rho=zeros.copy(), chi=-weights.w.astype(float), n=0)

    @staticmethod
    def max_sum_iterate(state, weights, alpha):
        """One synchronous sweep: all phi from rho^(n-1), then all rho from phi^(n)"""
        w = weights.w
        phi_raw = max_excluding_self(w - state.rho, axis=1)
        phi = alpha * state.phi + (1.0 - alpha) * phi_raw

        rho_raw = np.zeros_like(w, dtype=float)
        candidates = w - phi
        for group in weights.groups:
            if group.size > 1:
                rho_raw[group] = np.maximum(max_excluding_self(candidates[group], axis=0), 0.0)
        rho = alpha * state.rho + (1.0 - alpha) * rho_raw

        return MessageState(phi=phi, rho=rho, chi=phi + rho - w, n=state.n + 1)

    @staticmethod
    def nmae(chi_n, chi_prev):
        """max|chi_n - chi_prev| / max|chi_n|, 0/0 -> 0 and x/0 -> inf"""
        numerator = float(np.max(np.abs(chi_n - chi_prev))) if np.size(chi_n) else 0.0
        denominator = float(np.max(np.abs(chi_n))) if np.size(chi_n) else 0.0
        if denominator == 0:
            return np.inf if numerator > 0 else 0.0
        return numerator / denominator

    @staticmethod
    def extract_assignment(state, weights):
        """Channels with chi <= 0, repaired into a feasible assignment when needed

        A tag with zero or several chi <= 0 takes its argmin chi (lowest index on
        ties). Tags that collide inside a training group are re-solved exactly
        over the subchannels the rest of the group leaves free.
        """
        chi = state.chi
        C = weights.n_channels
        selected = chi <= 0
        picks = selected.sum(axis=1)
        channels = np.where(picks == 1, np.argmax(selected, axis=1), np.argmin(chi, axis=1))
        repaired = bool(np.any(picks != 1))

        for group in weights.groups:
            used, counts = np.unique(channels[group], return_counts=True)
            clashing = used[counts > 1]
            if not clashing.size:
                continue
            contested = group[np.isin(channels[group], clashing)]
            held = channels[group[~np.isin(channels[group], clashing)]]
            free = np.setdiff1d(np.arange(C), held)
            rows, cols = linear_sum_assignment(weights.w[np.ix_(contested, free)], maximize=True)
            channels[contested[rows]] = free[cols]
            repaired = True

        return Assignment.from_channels(channels, C, repaired=repaired)

    @staticmethod
    def jittered(weights, params):
        """Weights plus uniform noise in [0, jitter * max|w|] for a unique optimum"""
        if params.jitter <= 0 or not weights.w.size:
            return weights
        rng = streams.derive_rng(params.jitter_seed, streams.JITTER)
        magnitude = params.jitter * float(np.max(np.abs(weights.w)))
        return replace(weights, w=weights.w + rng.uniform(0.0, magnitude, size=weights.w.shape))

    @staticmethod
    def run_max_sum(weights, params=None):
        """Damped Max-Sum until NMAE < epsilon or n_max iterations

        Returns (Assignment, ConvergenceTrace); trace objectives use the
        unjittered weights.
        """
        params = params or SolverParams()
        AllocatorService.check_groups(weights)
        C = weights.n_channels
        if C == 1 or weights.n_tags == 0:
            assignment = Assignment.from_channels(np.zeros(weights.n_tags, dtype=int), C)
            return assignment, ConvergenceTrace(entries=[], converged=True, trivial=True)

        solve_weights = AllocatorService.jittered(weights, params)
        state = AllocatorService.initial_state(solve_weights)
        trace = ConvergenceTrace()
        assignment = None
        for _ in range(params.n_max):
            new_state = AllocatorService.max_sum_iterate(state, solve_weights, params.alpha)
            error = AllocatorService.nmae(new_state.chi, state.chi)
            assignment = AllocatorService.extract_assignment(new_state, solve_weights)
            feasible = AllocatorService.is_feasible(weights, assignment)
            objective = float(np.sum(weights.w * assignment.v)) if feasible else np.nan
            trace.entries.append(
                TraceEntry(
                    iteration=new_state.n,
                    nmae=error,
                    objective=objective,
                    feasible=feasible,
                    repaired=assignment.repaired,
                )
            )
            state = new_state
            if error < params.epsilon:
                trace.converged = True
                break

        if not trace.converged:
            logger.warning(
                f"Max-Sum hit n_max={params.n_max} on core {weights.core} "
                f"(last NMAE {trace.entries[-1].nmae:.3e})"
            )
        if assignment.repaired:
            logger.warning(f"Max-Sum assignment on core {weights.core} needed repair")
        AllocatorService.check_feasibility(weights, assignment)
        return assignment, trace

    # ==================== Exact and Random ====================

    @staticmethod
    def exact_optimal(weights):
        """Maximum-weight matching of every training group (Hungarian method)"""
        AllocatorService.check_groups(weights)
        channels = np.zeros(weights.n_tags, dtype=int)
        for group in weights.groups:
            rows, cols = linear_sum_assignment(weights.w[group], maximize=True)
            channels[group[rows]] = cols
        return Assignment.from_channels(channels, weights.n_channels)

    @staticmethod
    def random_orthogonal_allocation(groups, n_channels, rng, n_tags=None):
        """Uniformly random injective tag -> subchannel map inside every group"""
        n_tags = sum(g.size for g in groups) if n_tags is None else n_tags
        channels = np.zeros(n_tags, dtype=int)
        for m, group in enumerate(groups):
            if group.size > n_channels:
                raise FeasibilityError(None, m, int(group.size), n_channels)
            channels[group] = rng.choice(n_channels, size=group.size, replace=False)
        return Assignment.from_channels(channels, n_channels)

    @staticmethod
    def random_mean_objective(weights, draws, rng):
        """Mean objective of `draws` random orthogonal allocations"""
        total = 0.0
        for _ in range(draws):
            assignment = AllocatorService.random_orthogonal_allocation(
                weights.groups, weights.n_channels, rng, weights.n_tags
            )
            total += float(np.sum(weights.w * assignment.v))
        return total / draws

    # ==================== Dispatch ====================

    @staticmethod
    def solve(weights, method, params=None, rng=None):
        """(Assignment, ConvergenceTrace or None) for one core"""
        method = Method(method)
        if method is Method.MAX_SUM:
            return AllocatorService.run_max_sum(weights, params)
        if method is Method.EXACT:
            return AllocatorService.exact_optimal(weights), None
        AllocatorService.check_groups(weights)
        rng = rng if rng is not None else streams.derive_rng(0, streams.RANDOM_BASELINE)
        return AllocatorService.random_orthogonal_allocation(
            weights.groups, weights.n_channels, rng, weights.n_tags
        ), None

    # ==================== Oracle Equivalence ====================

    @staticmethod
    def random_instance(rng, n_channels=8, max_group_size=8, max_groups=3):
        """Uniform random weights over 1..max_groups groups of size <= min(C, max_group_size)"""
        n_groups = int(rng.integers(1, max_groups + 1))
        sizes = rng.integers(1, min(n_channels, max_group_size) + 1, size=n_groups)
        group_of = np.repeat(np.arange(n_groups), sizes)
        w = rng.uniform(0.0, 1.0, size=(group_of.shape[0], n_channels))
        return AllocatorService.weights_from_matrix(w, group_of)

    @staticmethod
    def oracle_check(n_instances, seed, params=None, n_channels=8):
        """Max-Sum against the exact matching on jittered random instances

        Returns one row per instance with both objectives and whether the
        assignments coincide.
        """
        params = params or SolverParams(n_max=1000, jitter=1e-9)
        rows = []
        for i in range(n_instances):
            rng = streams.derive_rng(seed, streams.ORACLE, i)
            weights = AllocatorService.random_instance(rng, n_channels=n_channels)
            instance_params = replace(params, jitter_seed=streams.derive_seed(seed, streams.JITTER, i))
            solve_weights = AllocatorService.jittered(weights, instance_params)
            assignment, trace = AllocatorService.run_max_sum(
                solve_weights, replace(instance_params, jitter=0.0)
            )
            exact = AllocatorService.exact_optimal(solve_weights)
            max_sum_objective = AllocatorService.objective_value(solve_weights, assignment)
            exact_objective = AllocatorService.objective_value(solve_weights, exact)
            match = assignment.same_as(exact) and abs(max_sum_objective - exact_objective) <= 1e-9 * max(
                abs(exact_objective), 1e-300
            )
            if not match:
                logger.warning(
                    f"Oracle mismatch on instance {i}: max-sum {max_sum_objective:.12g} "
                    f"vs exact {exact_objective:.12g}"
                )
            rows.append({
                'instance': i,
                'n_tags': weights.n_tags,
                'n_groups': len(weights.groups),
                'max_sum_objective': max_sum_objective,
                'exact_objective': exact_objective,
                'iterations': trace.iterations,
                'converged': trace.converged,
                'repaired': assignment.repaired,
                'match': bool(match),
            })
        return rows
