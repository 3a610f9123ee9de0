"""Multi-robot motion planning on curvature-constrained local roadmaps."""

__version__ = "0.1.0"
