"""Skew-rack coloring and birack cocycle invariants of framed closed braids."""
