"""Exact Bruhat-Tits tree computations over local fields.

Branches of matrices and quaternion orders, twisted Galois forms of the
tree, and integral-form counts for Q8, the Hurwitz unit group, and the
dicyclic group, locally and globally.
"""

__version__ = "0.1.0"
