"""
Curvature-constrained curves on the unit sphere
"""
