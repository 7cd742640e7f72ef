"""Hierarchical piecewise-constant super-region segmentation."""

from ._superregions import (
    ConfigError,
    IoError,
    asa,
    boundary_recall,
    coarsen,
    cue,
    evaluate,
    fit_palette,
    hierarchy,
    rgb_to_lab,
    segment,
)

__all__ = [
    "ConfigError",
    "IoError",
    "asa",
    "boundary_recall",
    "coarsen",
    "cue",
    "evaluate",
    "fit_palette",
    "hierarchy",
    "rgb_to_lab",
    "segment",
]
