"""Finite-scale constructions and checkers for arity of relational structures."""

__version__ = "0.1.0"
