"""Bundled device matrices."""
