"""Sliced probability divergences and their unsliced references."""
