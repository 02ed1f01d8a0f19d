"""Exact computations with divided powers, delta-rings, prismatic envelopes
and divided-power de Rham complexes."""

__version__ = "0.1.0"
