"""Simulation of partitioned analog Ising machine networks."""

__version__ = "0.1.0"
