"""Convex-set primitives: projections, support functions, cones, small dense kernels."""
