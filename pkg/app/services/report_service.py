"""
Report Service - CSV Tables, Text Dumps and Run Manifests
"""
import logging
import os
from datetime import datetime, timezone

import pandas as pd

logger = logging.getLogger(__name__)


class ReportService:
    """Writes plot-ready CSV files and run bookkeeping"""

    @staticmethod
    def _prepare(path):
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        return path

    @staticmethod
    def to_frame(records, columns=None):
        rows = [r.to_dict() if hasattr(r, 'to_dict') else dict(r) for r in records]
        return pd.DataFrame(rows, columns=columns)

    @staticmethod
    def emit_csv(records, path, columns=None, exclude=()):
        """One header line, one row per record; `exclude` drops columns (e.g. timings)"""
        frame = ReportService.to_frame(records, columns)
        if exclude:
            frame = frame.drop(columns=[c for c in exclude if c in frame.columns])
        frame.to_csv(ReportService._prepare(path), index=False)
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    @staticmethod
    def read_csv(path):
        return pd.read_csv(path)

    @staticmethod
    def write_sinr_table(table, path, subcarrier_integers=None):
        return ReportService.emit_csv(table.to_rows(subcarrier_integers), path)

    @staticmethod
    def write_trace(trace, path):
        columns = ['iteration', 'nmae', 'objective', 'feasible', 'repaired']
        return ReportService.emit_csv(trace.to_rows(), path, columns=columns)

    @staticmethod
    def write_text(text, path):
        with open(ReportService._prepare(path), 'w') as f:
            f.write(text)
        return path

    @staticmethod
    def write_topology(topology, path):
        return ReportService.write_text(topology.to_table(), path)

    @staticmethod
    def write_manifest(path, command, spec_hash, seed, workers, files):
        """Plain key: value lines identifying a run"""
        lines = [
            f"command: {command}",
            f"config_sha256: {spec_hash}",
            f"seed: {seed}",
            f"workers: {workers}",
            f"written_at: {datetime.now(timezone.utc).isoformat(timespec='seconds')}",
            "files:",
        ]
        lines.extend(f"  - {os.path.basename(f)}" for f in files)
        return ReportService.write_text('\n'.join(lines) + '\n', path)
