"""Reversible quantum Markov semigroups and their trace-distance ergodicity bounds."""

__version__ = "0.1.0"
