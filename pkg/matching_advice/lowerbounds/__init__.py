"""Lower-bound constructions for online matching with advice."""
