"""Filtering toolkit for stationary Gaussian discrete Markov diffusions.

This package simulates discrete Markov diffusions (DMD), computes the optimal
one-step filtering matrix and its error covariance in closed form, estimates
unknown signal parameters from paired trajectories and validates all of it with
Monte Carlo studies driven from a command-line interface.
"""

__version__ = "1.1.0"
__author__ = "DMD Filtering Team"
