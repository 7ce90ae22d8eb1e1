"""Parallel mean curvature surfaces in S^2 x H^2: constructors, extrinsic geometry and verification."""

__version__ = "0.1.0"
