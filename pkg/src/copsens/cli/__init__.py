"""Command-line front end."""

from copsens.cli.main import build_parser, cmd_analyze, cmd_evalue, cmd_simulate, main
from copsens.pipeline.config import AnalysisConfig

__all__ = ["AnalysisConfig", "build_parser", "cmd_analyze", "cmd_evalue", "cmd_simulate", "main"]
