"""
Application Configuration
"""
import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    """Base configuration"""

    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

    # Experiments
    OUTPUT_DIR = os.environ.get('OUTPUT_DIR', 'results')
    WORKERS = int(os.environ.get('WORKERS', '1'))
    DEFAULT_PRESET = os.environ.get('DEFAULT_PRESET', 'desk')

    # Allocator oracle suite
    ORACLE_INSTANCES = int(os.environ.get('ORACLE_INSTANCES', '500'))
    ORACLE_MAX_ITERATIONS = int(os.environ.get('ORACLE_MAX_ITERATIONS', '1000'))
    ORACLE_JITTER = float(os.environ.get('ORACLE_JITTER', '1e-9'))

    # Random orthogonal baseline
    RANDOM_DRAWS = int(os.environ.get('RANDOM_DRAWS', '1000'))

    # Solve API
    MAX_SOLVE_TAGS = 512
    MAX_SOLVE_CHANNELS = 64


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG')


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    LOG_LEVEL = 'WARNING'
    OUTPUT_DIR = 'results-test'
    WORKERS = 1
    ORACLE_INSTANCES = 20
    RANDOM_DRAWS = 50


class ProductionConfig(Config):
    """Production configuration"""
    DEBUG = False


config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}
