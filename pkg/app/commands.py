"""
CLI Commands

Registered on the Flask CLI, so every command runs as `flask --app wsgi <command>`.
"""
import functools
import os
from dataclasses import replace

import click
from flask import current_app

from app.models.allocation import SolverParams
from app.services.experiment_service import ExperimentService
from app.services.report_service import ReportService
from app.utils.errors import BackscatterError


def experiment_options(command):
    """Options shared by sweep, converge and timing"""
    options = [
        click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                     help='Experiment YAML file (defaults to the DEFAULT_PRESET preset)'),
        click.option('--seed', type=click.IntRange(min=0), help='Master seed'),
        click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Output directory'),
        click.option('--detector', 'detectors', multiple=True, type=click.Choice(['mrc', 'zf']),
                     help='Restrict detectors (repeatable)'),
        click.option('--frames', type=click.IntRange(min=1), help='Measurement frames J'),
        click.option('--workers', type=click.IntRange(min=1), help='Worker processes'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def reports_errors(command):
    """Turn simulator and I/O errors into clean CLI failures"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except BackscatterError as e:
            raise click.ClickException(f"[{e.error_code}] {e.message}")
        except OSError as e:
            raise click.ClickException(f"I/O error: {e}")

    return wrapper


def command_line():
    """Invoked command with its non-default parameters, for the manifest"""
    ctx = click.get_current_context()
    parts = [ctx.info_name]
    for name, value in sorted(ctx.params.items()):
        if value is None or value == () or value is False:
            continue
        if isinstance(value, tuple):
            parts.extend(f'--{name}={v}' for v in value)
        else:
            parts.append(f'--{name}={value}')
    return ' '.join(parts)


def load_experiment(config_path, seed, out_dir, detectors, frames, workers):
    """ExperimentSpec with CLI overrides and the output directory to use"""
    if config_path:
        spec = ExperimentService.load_spec(config_path)
        default_out = spec.output_dir
    else:
        spec = ExperimentService.preset(current_app.config['DEFAULT_PRESET'])
        spec = replace(spec, random_draws=current_app.config['RANDOM_DRAWS'])
        default_out = current_app.config['OUTPUT_DIR']
    if workers is None and not config_path:
        workers = current_app.config['WORKERS']
    out_dir = out_dir or default_out
    spec = ExperimentService.with_overrides(
        spec, seed=seed, frames=frames, detectors=detectors, output_dir=out_dir, workers=workers
    )
    return spec, out_dir


def finish(result, spec_hash, seed, workers, out_dir):
    """Write the run manifest next to the outputs"""
    manifest = os.path.join(out_dir, 'run_manifest.txt')
    ReportService.write_manifest(manifest, command_line(), spec_hash, seed, workers, result.files)
    for path in result.files + [manifest]:
        click.echo(f"wrote {path}")


def register_commands(app):
    """Register experiment commands on app.cli"""

    @app.cli.command('sweep')
    @experiment_options
    @reports_errors
    def sweep(config_path, seed, out_dir, detectors, frames, workers):
        """Sum of average SINR versus transmit power for every method"""
        spec, out_dir = load_experiment(config_path, seed, out_dir, detectors, frames, workers)
        result = ExperimentService.run_sweep(spec, out_dir)
        frame = ReportService.to_frame(result.records)
        summary = frame.pivot_table(
            index='power_dBm', columns=['detector', 'method'], values='sum_avg_sinr_dB', aggfunc='mean'
        )
        click.echo(summary.round(2).to_string())
        finish(result, ExperimentService.spec_hash(spec), spec.seed, spec.workers, out_dir)

    @app.cli.command('converge')
    @experiment_options
    @reports_errors
    def converge(config_path, seed, out_dir, detectors, frames, workers):
        """Per-core Max-Sum convergence against the exact optimum"""
        spec, out_dir = load_experiment(config_path, seed, out_dir, detectors, frames, workers)
        result = ExperimentService.run_convergence_study(spec, out_dir)
        for study in result.records:
            click.echo(
                f"trial {study.trial} {study.detector.upper()} core {study.core}: "
                f"{study.iterations} iterations, converged={study.converged}, "
                f"optimal at {study.optimal_iteration}"
            )
        finish(result, ExperimentService.spec_hash(spec), spec.seed, spec.workers, out_dir)

    @app.cli.command('timing')
    @experiment_options
    @reports_errors
    def timing(config_path, seed, out_dir, detectors, frames, workers):
        """Mean solver wall time per method, with the max_sum / exact ratio"""
        spec, out_dir = load_experiment(config_path, seed, out_dir, detectors, frames, workers)
        result = ExperimentService.run_timing_comparison(spec, out_dir)
        for row in result.records:
            click.echo(
                f"{row['detector'].upper():>4} {row['method']:<18} "
                f"{row['mean_wall_time_seconds']:.4g} s  ratio {row['ratio_to_exact']:.3g}"
            )
        finish(result, ExperimentService.spec_hash(spec), spec.seed, spec.workers, out_dir)

    @app.cli.command('oracle-check')
    @click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
    @click.option('--instances', type=click.IntRange(min=1), help='Number of random instances')
    @click.option('--out', 'out_dir', type=click.Path(file_okay=False), help='Output directory')
    @reports_errors
    def oracle_check(seed, instances, out_dir):
        """Max-Sum against the exact matching on random jittered instances"""
        instances = instances or current_app.config['ORACLE_INSTANCES']
        out_dir = out_dir or current_app.config['OUTPUT_DIR']
        params = SolverParams(
            n_max=current_app.config['ORACLE_MAX_ITERATIONS'],
            jitter=current_app.config['ORACLE_JITTER'],
        )
        result = ExperimentService.run_oracle_check(instances, seed, params, out_dir)
        mismatches = sum(not row['match'] for row in result.records)
        click.echo(f"{instances - mismatches}/{instances} instances match the exact optimum")
        suite = {'instances': instances, 'seed': seed, 'solver': params.to_dict()}
        finish(result, ExperimentService.digest(suite), seed, 1, out_dir)
        if mismatches:
            raise click.ClickException(f"{mismatches} oracle mismatch(es)")

    @app.cli.command('preset')
    @click.option('--paper', 'name', flag_value='paper', help='Full-scale network parameters')
    @click.option('--desk', 'name', flag_value='desk', default=True, help='J=1000, 5 trials (default)')
    @click.option('--out', 'out_path', type=click.Path(dir_okay=False), help='Write to a file')
    @reports_errors
    def preset(name, out_path):
        """Print a shipped preset as a resolved experiment file"""
        text = ExperimentService.dump_spec(ExperimentService.preset(name))
        if out_path:
            ReportService.write_text(text, out_path)
            click.echo(f"wrote {out_path}")
        else:
            click.echo(text, nl=False)
