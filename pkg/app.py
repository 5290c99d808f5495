"""Runs the dioph command line from a source checkout, e.g. ``python app.py solve "x^2=4"``."""
import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
