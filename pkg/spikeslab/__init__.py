"""Two-stage posterior sampling for spike-and-slab linear regression."""

__version__ = '0.1'
