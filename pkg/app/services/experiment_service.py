"""
Experiment Service - Spec Loading, Power Sweeps, Convergence and Timing Studies
"""
import hashlib
import logging
import os
import time
from dataclasses import replace

import numpy as np
import yaml
from marshmallow import ValidationError

from app.models.allocation import GKind, Method
from app.models.detection import DetectorKind
from app.models.experiment import CoreConvergence, ResultRecord, RunOutput
from app.schemas import ExperimentSpecSchema
from app.services.allocator_service import AllocatorService
from app.services.measurement_service import MeasurementService
from app.services.report_service import ReportService
from app.services.topology_service import TopologyService
from app.utils import rng as streams
from app.utils.errors import ConfigurationError, SpecParseError

logger = logging.getLogger(__name__)

PRESET_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'presets')
PRESET_NAMES = ('paper', 'desk')
MAX_BASE_DEPTH = 8


def deep_merge(base, override):
    """Recursive dict merge; values of `override` win"""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def first_error(messages, prefix=()):
    """(dotted field path, message) of the first marshmallow error"""
    if isinstance(messages, dict):
        for key, value in messages.items():
            path = prefix if key == '_schema' else prefix + (str(key),)
            return first_error(value, path)
    if isinstance(messages, (list, tuple)) and messages:
        return first_error(messages[0], prefix)
    return '.'.join(prefix), str(messages)


def locate_line(text, path):
    """1-based line of the deepest node of `path` present in the YAML text"""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for part in path.split('.') if path else []:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == part), None)
            key = next((k for k, v in node.value if k.value == part), None)
            if key is None:
                break
            line, node = key.start_mark.line + 1, match
        elif isinstance(node, yaml.SequenceNode) and part.isdigit() and int(part) < len(node.value):
            node = node.value[int(part)]
            line = node.start_mark.line + 1
        else:
            break
    return line


class ExperimentService:
    """Wires topology -> measurement -> allocation and writes the result tables"""

    # ==================== Experiment Files ====================

    @staticmethod
    def preset_path(name):
        if name not in PRESET_NAMES:
            raise ConfigurationError(f"Unknown preset '{name}', expected one of {', '.join(PRESET_NAMES)}")
        return os.path.join(PRESET_DIR, f'{name}.yaml')

    @staticmethod
    def preset_text(name):
        with open(ExperimentService.preset_path(name)) as f:
            return f.read()

    @staticmethod
    def _read_yaml(path):
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise SpecParseError(f"Cannot read experiment file {path}: {e.strerror}")
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, 'problem_mark', None)
            raise SpecParseError(
                f"Invalid YAML in {path}: {getattr(e, 'problem', None) or e}",
                line=mark.line + 1 if mark else None,
                column=mark.column + 1 if mark else None,
            )
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise SpecParseError(f"Experiment file {path} must hold a mapping", line=1)
        return text, data

    @staticmethod
    def _resolve(path, depth=0):
        """Raw merged mapping of `path` and its `base:` chain"""
        if depth > MAX_BASE_DEPTH:
            raise SpecParseError(f"Too many nested 'base' references at {path}", field='base')
        text, data = ExperimentService._read_yaml(path)
        base = data.pop('base', None)
        if base is None:
            return text, data
        if not isinstance(base, str):
            raise SpecParseError("'base' must be a preset name or a path", line=locate_line(text, 'base'), field='base')
        if base in PRESET_NAMES:
            base_path = ExperimentService.preset_path(base)
        else:
            base_path = os.path.join(os.path.dirname(os.path.abspath(path)), base)
        _, base_data = ExperimentService._resolve(base_path, depth + 1)
        return text, deep_merge(base_data, data)

    @staticmethod
    def load_spec(path):
        """ExperimentSpec from a YAML file, merged over its `base:` preset or file"""
        text, data = ExperimentService._resolve(path)
        try:
            spec = ExperimentSpecSchema().load(data)
        except ValidationError as e:
            field, message = first_error(e.messages)
            raise SpecParseError(
                f"Invalid experiment file {path}: {message}",
                line=locate_line(text, field),
                field=field or None,
            )
        logger.info(f"Loaded experiment spec from {path}")
        return spec

    @staticmethod
    def preset(name):
        return ExperimentService.load_spec(ExperimentService.preset_path(name))

    @staticmethod
    def canonical_yaml(mapping):
        return yaml.safe_dump(mapping, sort_keys=True, default_flow_style=False)

    @staticmethod
    def dump_spec(spec):
        """Canonical YAML form; load_spec(dump_spec(s)) == s semantically"""
        return ExperimentService.canonical_yaml(spec.to_dict())

    @staticmethod
    def digest(mapping):
        """SHA-256 of the canonical YAML of a plain mapping"""
        return hashlib.sha256(ExperimentService.canonical_yaml(mapping).encode('utf-8')).hexdigest()

    @staticmethod
    def spec_hash(spec):
        return ExperimentService.digest(spec.to_dict())

    @staticmethod
    def with_overrides(spec, seed=None, frames=None, detectors=None, output_dir=None, workers=None):
        """Apply CLI overrides; None leaves a field unchanged"""
        changes = {}
        if seed is not None:
            changes['seed'] = int(seed)
        if frames is not None:
            changes['frames'] = int(frames)
        if detectors:
            changes['detectors'] = tuple(DetectorKind(d) for d in detectors)
        if output_dir is not None:
            changes['output_dir'] = output_dir
        if workers is not None:
            changes['workers'] = int(workers)
        return replace(spec, **changes) if changes else spec

    # ==================== Building Blocks ====================

    @staticmethod
    def trial_seed(spec, trial):
        return streams.derive_seed(spec.seed, streams.TRIAL, trial)

    @staticmethod
    def build_topology(spec, trial):
        """Topology of one trial, placed from network.seed; fixed across powers and detectors"""
        return TopologyService.build_cellular_topology(
            spec.network, streams.derive_rng(spec.network.seed, streams.TOPOLOGY, trial)
        )

    @staticmethod
    def cell_weights(table, n_cores, g_kind):
        return [AllocatorService.build_weights(table, b, g_kind) for b in range(n_cores)]

    @staticmethod
    def evaluate_table(spec, table, n_cores, trial, power, detector, seed, power_index=0):
        """One ResultRecord per method for one measured SINR table"""
        solve_weights = ExperimentService.cell_weights(table, n_cores, spec.g_kind)
        if GKind(spec.g_kind) is GKind.IDENTITY:
            report_weights = solve_weights
        else:
            report_weights = ExperimentService.cell_weights(table, n_cores, GKind.IDENTITY)

        detector_index = list(DetectorKind).index(DetectorKind(detector))
        records = []
        for method in spec.methods:
            method = Method(method)
            linear, iterations, repaired = 0.0, 0, False
            started = time.perf_counter()
            for b in range(n_cores):
                if method is Method.RANDOM_ORTHOGONAL:
                    rng = streams.derive_rng(
                        seed, streams.RANDOM_BASELINE, detector_index, power_index, b
                    )
                    linear += AllocatorService.random_mean_objective(report_weights[b], spec.random_draws, rng)
                    continue
                assignment, trace = AllocatorService.solve(solve_weights[b], method, spec.solver)
                linear += AllocatorService.objective_value(report_weights[b], assignment)
                if trace is not None:
                    iterations = max(iterations, trace.iterations)
                repaired = repaired or assignment.repaired
            elapsed = time.perf_counter() - started
            records.append(ResultRecord(
                trial=trial,
                power_dBm=float(power),
                detector=DetectorKind(detector).value,
                method=method.value,
                sum_avg_sinr_linear=linear,
                sum_avg_sinr_dB=float(10.0 * np.log10(linear)) if linear > 0 else float('-inf'),
                iterations=iterations,
                wall_time_seconds=elapsed,
                repaired=repaired,
            ))
        return records

    # ==================== Power Sweep ====================

    @staticmethod
    def sweep_records(spec, out_dir=None, workers=None):
        """ResultRecords for every (trial, detector, power, method) plus any table dumps"""
        workers = workers or spec.workers
        records, files = [], []
        for trial in range(spec.trials):
            seed = ExperimentService.trial_seed(spec, trial)
            topology = ExperimentService.build_topology(spec, trial)
            suffix = f'_trial{trial}' if spec.trials > 1 else ''
            if spec.dump_tables and out_dir:
                files.append(ReportService.write_topology(
                    topology, os.path.join(out_dir, f'topology{suffix}.txt')
                ))
            for detector in spec.detectors:
                tables = MeasurementService.run_measurement_sweep(
                    topology, spec.network, spec.frames, detector, seed, spec.power_sweep_dBm, workers
                )
                for power_index, power in enumerate(spec.power_sweep_dBm):
                    table = tables[float(power)]
                    if spec.dump_tables and out_dir:
                        name = f'sinr_table_{DetectorKind(detector).value}_{power:g}dBm{suffix}.csv'
                        files.append(ReportService.write_sinr_table(
                            table, os.path.join(out_dir, name), spec.network.subcarrier_integers
                        ))
                    records.extend(ExperimentService.evaluate_table(
                        spec, table, topology.n_cores, trial, power, detector, seed, power_index
                    ))
                logger.info(f"Trial {trial}: {DetectorKind(detector).value.upper()} sweep done")
        return records, files

    @staticmethod
    def run_sweep(spec, out_dir=None, workers=None):
        """Sum of average SINR across all tags versus transmit power; writes sweep.csv"""
        out_dir = out_dir or spec.output_dir
        records, files = ExperimentService.sweep_records(spec, out_dir, workers)
        files.append(ReportService.emit_csv(records, os.path.join(out_dir, 'sweep.csv')))
        return RunOutput(records=records, files=files)

    # ==================== Convergence Study ====================

    @staticmethod
    def convergence_rows(study):
        rows = []
        for row in study.rows:
            rows.append({
                'trial': study.trial,
                'detector': study.detector,
                'core': study.core,
                **row,
                'optimal_objective': study.optimal_objective,
                'objective_gap': study.optimal_objective - row['objective'],
            })
        return rows

    @staticmethod
    def run_convergence_study(spec, out_dir=None, workers=None):
        """Per-core Max-Sum NMAE and objective gap to the exact optimum; writes convergence.csv"""
        out_dir = out_dir or spec.output_dir
        workers = workers or spec.workers
        studies = []
        for trial in range(spec.trials):
            seed = ExperimentService.trial_seed(spec, trial)
            topology = ExperimentService.build_topology(spec, trial)
            for detector in spec.detectors:
                table = MeasurementService.run_measurement_phase(
                    topology, spec.network, spec.frames, detector, seed, workers
                )
                for weights in ExperimentService.cell_weights(table, topology.n_cores, spec.g_kind):
                    optimal = AllocatorService.objective_value(
                        weights, AllocatorService.exact_optimal(weights)
                    )
                    _, trace = AllocatorService.run_max_sum(weights, spec.solver)
                    reached = 0 if trace.trivial else trace.first_iteration_reaching(optimal)
                    studies.append(CoreConvergence(
                        trial=trial,
                        detector=DetectorKind(detector).value,
                        core=weights.core,
                        optimal_objective=optimal,
                        rows=trace.to_rows(),
                        converged=trace.converged,
                        iterations=trace.iterations,
                        optimal_iteration=reached,
                    ))
        rows = [row for study in studies for row in ExperimentService.convergence_rows(study)]
        columns = [
            'trial', 'detector', 'core', 'iteration', 'nmae', 'objective',
            'optimal_objective', 'objective_gap', 'feasible', 'repaired',
        ]
        path = ReportService.emit_csv(rows, os.path.join(out_dir, 'convergence.csv'), columns=columns)
        return RunOutput(records=studies, files=[path])

    # ==================== Timing ====================

    @staticmethod
    def run_timing_comparison(spec, out_dir=None, workers=None):
        """Mean solver wall time per detector and method over the sweep; writes timing.csv"""
        methods = {Method(m) for m in spec.methods}
        if not {Method.MAX_SUM, Method.EXACT} <= methods:
            raise ConfigurationError("Timing comparison needs both max_sum and exact methods")
        out_dir = out_dir or spec.output_dir
        records, _ = ExperimentService.sweep_records(spec, None, workers)
        frame = ReportService.to_frame(records)
        timing = (
            frame.groupby(['detector', 'method'], sort=True)['wall_time_seconds']
            .agg(['mean', 'count'])
            .reset_index()
            .rename(columns={'mean': 'mean_wall_time_seconds', 'count': 'points'})
        )
        exact = timing[timing['method'] == Method.EXACT.value].set_index('detector')['mean_wall_time_seconds']
        timing['ratio_to_exact'] = timing['mean_wall_time_seconds'] / timing['detector'].map(exact)
        path = ReportService.emit_csv(timing.to_dict('records'), os.path.join(out_dir, 'timing.csv'))
        for row in timing.itertuples():
            logger.info(f"{row.detector.upper()} {row.method}: {row.mean_wall_time_seconds:.4g} s mean")
        return RunOutput(records=timing.to_dict('records'), files=[path])

    # ==================== Oracle Suite ====================

    @staticmethod
    def run_oracle_check(n_instances, seed, params, out_dir):
        rows = AllocatorService.oracle_check(n_instances, seed, params)
        path = ReportService.emit_csv(rows, os.path.join(out_dir, 'oracle.csv'))
        return RunOutput(records=rows, files=[path])


