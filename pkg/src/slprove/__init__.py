"""Entailment prover for separation logic with inductive predicates."""

__version__ = "0.1.0"
