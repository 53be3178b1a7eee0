"""Hybrid-cloud readiness assessment for file-storage volumes.

The pipeline: scan volume metadata, content-label a sampled subset with a
sensitivity dictionary, train metadata-only classifiers on the labeled
subset, predict the remainder, combine predicted sensitivity with IO-density
hotness, and emit per-volume migration recommendations.
"""

__version__ = "0.1.0"
