"""Live-interpreter evaluation service for the points-to analyzer."""

from .service import EvaluationService, HandleRegistry, serve

__all__ = ["EvaluationService", "HandleRegistry", "serve"]
