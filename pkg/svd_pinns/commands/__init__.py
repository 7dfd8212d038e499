from .training import training_bp
from .sweep import sweep_bp
from .evaluate import evaluate_bp


def register_blueprints(app):
    """Register all command blueprints with the Flask app."""
    app.register_blueprint(training_bp)
    app.register_blueprint(sweep_bp)
    app.register_blueprint(evaluate_bp)
