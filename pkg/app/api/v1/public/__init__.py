"""
Public Routes
"""
from flask import Blueprint, jsonify

public_bp = Blueprint('public', __name__)


@public_bp.route('/presets', methods=['GET'])
def get_presets():
    """Shipped experiment presets, fully resolved"""
    from app.services.experiment_service import ExperimentService, PRESET_NAMES

    presets = [
        {'key': name, **ExperimentService.preset(name).to_dict()}
        for name in PRESET_NAMES
    ]

    return jsonify({
        'success': True,
        'data': {
            'presets': presets
        }
    })


@public_bp.route('/methods', methods=['GET'])
def get_methods():
    """Allocation methods and detectors understood by the simulator"""
    from app.models.allocation import GKind, Method
    from app.models.detection import DetectorKind

    return jsonify({
        'success': True,
        'data': {
            'methods': [m.value for m in Method],
            'detectors': [d.value for d in DetectorKind],
            'g_kinds': [g.value for g in GKind],
        }
    })
