"""
triphoton: multiphoton interference at multiport linear-optical interferometers.

Permanent-based photon statistics, partial distinguishability, transfer
matrix tomography, dip/peak fitting and design scoring.
"""

__version__ = "1.0.0"
