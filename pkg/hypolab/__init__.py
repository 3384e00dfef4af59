"""
hypolab - a workbench for hypoelliptic operators: symbolic operator algebra,
spectral solvers and numerical regularity probes.
"""

__version__ = "0.1.0"
