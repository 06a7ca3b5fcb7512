"""Repo-wide numerical conventions."""

__version__ = "0.1.0"

# Fourier transforms use mu_hat(xi) = sum_j w_j exp(FT_SIGN * 2 pi i xi . x_j).
FT_SIGN = -1

DEFAULT_ATOM_BUDGET = 10**7

# ft_batch sums atoms in blocks of this size, then Neumaier-sums the block totals.
ATOM_BLOCK = 1024
