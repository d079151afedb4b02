"""
Allocator Routes
"""
from flask import Blueprint, current_app, jsonify, request

allocator_bp = Blueprint('allocator', __name__)


# ==================== Solve ====================

@allocator_bp.route('/solve', methods=['POST'])
def solve():
    """Solve one core's subchannel assignment"""
    from app.schemas import SolveRequestSchema
    from app.services.allocator_service import AllocatorService
    from app.utils import rng as streams

    data = request.get_json(silent=True)

    if not data:
        return jsonify({
            'success': False,
            'message': 'Request body is required',
            'error_code': 'VAL_001'
        }), 400

    payload = SolveRequestSchema().load(data)
    weights_matrix = payload['weights']
    n_channels = len(weights_matrix[0])

    if any(len(row) != n_channels for row in weights_matrix):
        return jsonify({
            'success': False,
            'message': 'All weight rows must have the same length',
            'error_code': 'VAL_001'
        }), 400

    if len(weights_matrix) > current_app.config['MAX_SOLVE_TAGS'] or \
            n_channels > current_app.config['MAX_SOLVE_CHANNELS']:
        return jsonify({
            'success': False,
            'message': 'Instance too large',
            'error_code': 'VAL_002'
        }), 400

    group_of = payload['group_of']
    if group_of is None:
        group_of = list(range(len(weights_matrix)))

    weights = AllocatorService.weights_from_matrix(weights_matrix, group_of)
    rng = streams.derive_rng(payload['seed'], streams.RANDOM_BASELINE)
    assignment, trace = AllocatorService.solve(weights, payload['method'], payload['solver'], rng)

    return jsonify({
        'success': True,
        'data': {
            'method': payload['method'],
            'assignment': assignment.channel_of.tolist(),
            'objective': AllocatorService.objective_value(weights, assignment),
            'iterations': trace.iterations if trace else 0,
            'converged': trace.converged if trace else True,
            'repaired': assignment.repaired,
            'trace': trace.to_rows() if trace else [],
        }
    })
