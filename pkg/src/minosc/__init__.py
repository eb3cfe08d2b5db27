"""Minimal graphs over the unit disk with micro-oscillations.

Pipeline: build a harmonic seed with prescribed nodal geometry, promote it to
a solution of the minimal surface equation by a contracting fixed-point
iteration, then extract and certify the zero set (length, transversality,
near-flat graph area).
"""

__version__ = "0.1.0"
