"""Goal-conditioned generation of safety-critical driving scenarios.

The package is organized as a set of flat modules; import what you
need directly (``scengen.env``, ``scengen.agent``, ``scengen.goals``,
...) rather than through this namespace.
"""

__version__ = "0.1.0"
