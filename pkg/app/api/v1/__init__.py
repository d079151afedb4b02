"""
API v1 Blueprint
"""
from flask import Blueprint, jsonify

api_v1_bp = Blueprint('api_v1', __name__)


# Health check endpoint
@api_v1_bp.route('/health', methods=['GET'])
def health_check():
    """API health check"""
    return jsonify({
        'success': True,
        'message': 'Backscatter allocation API is running',
        'version': '1.0.0'
    })


# Import and register route modules
from app.api.v1.public import public_bp  # noqa: E402
from app.api.v1.allocator import allocator_bp  # noqa: E402

api_v1_bp.register_blueprint(public_bp, url_prefix='/public')
api_v1_bp.register_blueprint(allocator_bp, url_prefix='/allocator')
