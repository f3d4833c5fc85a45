"""Command-line interface."""
from src.interfaces.cli.commands import cli, exit_code_for, main

__all__ = ["cli", "exit_code_for", "main"]
