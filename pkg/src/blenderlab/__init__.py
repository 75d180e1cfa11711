"""blenderlab: a desk-scale laboratory for blenders, parablenders and heterocycles."""

__version__ = "0.1.0"
