"""
Analysis engines: photon statistics, distinguishability, tomography,
curve fitting and design evaluation.
"""
