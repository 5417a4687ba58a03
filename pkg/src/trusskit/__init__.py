"""Combinatorics of open and closed n-trusses."""
