"""Simulation and verification toolkit for flocking and consensus dynamics
on temporal graphs."""

__version__ = "0.1.0"
