"""
Main entry point for the IGFT desk trainer.

Usage: python main.py {gen,train,eval,simulate,report} [options]
"""
import os
import sys

# Add src to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.interfaces.cli import main  # noqa: E402


if __name__ == "__main__":
    main()
