"""Slab-freezing laboratory for the nonnegative stochastic heat equation."""
