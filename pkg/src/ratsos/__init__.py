"""Exact sums-of-squares certificates from semidefinite programming."""
