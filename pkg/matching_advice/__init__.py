"""Online bipartite matching with advice: simulation, bounds and lower-bound constructions."""

__version__ = "0.1.0"
