"""Feshbach-Schur perturbation toolkit with a helium ground-state application."""

__version__ = "0.1.0"
