"""Certified quasi-F-split heights of hypersurface singularities in positive characteristic."""

__version__ = "0.1.0"
