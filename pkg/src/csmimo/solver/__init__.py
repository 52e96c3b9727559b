"""Sparse recovery: cone-program solver and the complex Dantzig selector."""
