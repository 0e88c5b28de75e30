"""Tests Package

This package contains unit and integration tests for the DMD filtering toolkit,
organized by layer: numerical models, services and the command-line interface.
"""

__version__ = "1.1.0"
