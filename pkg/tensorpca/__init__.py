"""tensorpca package.

Exports:
- generate: spiked tensor instances
- get_algorithm: recovery algorithms by tag ("homotopy", "power", "flatten", ...)
- main: command line launcher
"""
from .cli import main
from .model import generate
from .plugins_loader import get_algorithm

__all__ = ["generate", "get_algorithm", "main"]
