"""
Командная строка: каждая стадия пайплайна - отдельная подкоманда.
"""

from .app import main
from .parser import build_parser, load_config
from .pipeline import pipeline_plan
from .runner import StageResult, run_stage

__all__ = ["main", "build_parser", "load_config", "pipeline_plan", "run_stage", "StageResult"]
