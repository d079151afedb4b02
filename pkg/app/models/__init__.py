"""
Domain Models Package

Immutable dataclasses holding numpy arrays; every service passes these around.
"""
from app.models.network_config import NetworkConfig
from app.models.topology import Topology, TrainingSet
from app.models.channel import (
    BasebandFrame,
    ChannelRealization,
    CompoundChannelTable,
    LinkStats,
    LinkStatsTable,
)
from app.models.detection import DetectorKind, GroupSinr, SinrBreakdown, ZfOperator
from app.models.measurement import FrequencyAllocation, SinrTable
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
from app.models.experiment import CoreConvergence, ExperimentSpec, ResultRecord, RunOutput

__all__ = [
    'NetworkConfig',
    'Topology',
    'TrainingSet',
    'BasebandFrame',
    'ChannelRealization',
    'CompoundChannelTable',
    'LinkStats',
    'LinkStatsTable',
    'DetectorKind',
    'GroupSinr',
    'SinrBreakdown',
    'ZfOperator',
    'FrequencyAllocation',
    'SinrTable',
    'Assignment',
    'ConvergenceTrace',
    'GKind',
    'MessageState',
    'Method',
    'SolverParams',
    'TraceEntry',
    'Weights',
    'CoreConvergence',
    'ExperimentSpec',
    'ResultRecord',
    'RunOutput',
]
