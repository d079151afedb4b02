"""
Backscatter Allocation Simulator Application Factory
"""
import logging
import os
from flask import Flask, jsonify
from marshmallow import ValidationError
from app.config import config
from app.utils.errors import BackscatterError


def create_app(config_name=None):
    """Create and configure the Flask application"""

    if config_name is None:
        config_name = os.environ.get('FLASK_ENV', 'development')

    app = Flask(__name__)
    app.config.from_object(config[config_name])

    # Logging
    configure_logging(app)

    # Register blueprints
    register_blueprints(app)

    # Register error handlers
    register_error_handlers(app)

    # Register CLI commands
    register_cli_commands(app)

    return app


def configure_logging(app):
    """Root log level from LOG_LEVEL"""
    level = getattr(logging, str(app.config['LOG_LEVEL']).upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s'
    )
    logging.getLogger().setLevel(level)
    app.logger.setLevel(level)


def register_blueprints(app):
    """Register Flask blueprints"""
    from app.api.v1 import api_v1_bp
    app.register_blueprint(api_v1_bp, url_prefix='/api/v1')


def register_error_handlers(app):
    """Register error handlers"""

    @app.errorhandler(BackscatterError)
    def simulator_error(error):
        return jsonify(error.to_dict()), error.status_code

    @app.errorhandler(ValidationError)
    def validation_error(error):
        return jsonify({
            'success': False,
            'message': 'Invalid request',
            'errors': error.messages,
            'error_code': 'VAL_001'
        }), 400

    @app.errorhandler(400)
    def bad_request(error):
        return jsonify({
            'success': False,
            'message': 'Bad request',
            'error_code': 'VAL_001'
        }), 400

    @app.errorhandler(404)
    def not_found(error):
        return jsonify({
            'success': False,
            'message': 'Resource not found',
            'error_code': 'NOT_FOUND'
        }), 404

    @app.errorhandler(500)
    def internal_error(error):
        return jsonify({
            'success': False,
            'message': 'Internal server error',
            'error_code': 'SYS_001'
        }), 500


def register_cli_commands(app):
    """Register CLI commands"""
    from app.commands import register_commands
    register_commands(app)
