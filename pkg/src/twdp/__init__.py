"""Numerical laboratory for the two-way channel with encoder-side state.

Core pieces: exact information measures over dense joint tables, the binning
rate region of the discrete two-way channel, a finite-blocklength Monte Carlo
of the random binning scheme, and closed-form Gaussian dirty-paper checks.
An HTTP service and a thin CLI sit on top.
"""

__version__ = "0.1.0"
