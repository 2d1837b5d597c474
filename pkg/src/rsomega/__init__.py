"""Desk-scale proof theory for Kripke-Platek set theory.

Ordinal notations up to epsilon_{Omega+1}, a finitary KP sequent calculus,
lazily branching infinitary derivations, the cut-elimination transformers and
the embedding of finitary proofs, wired into a reflection pipeline.
"""

__version__ = "0.1.0"
