"""Numerical laboratory for the Boussinesq evolution exp(it|D|sqrt(1+|D|^2)).

Modules:
    grid          periodic grids, transforms and Sobolev norms
    symbol        dispersion symbols and their derivatives
    propagator    grid evolution, quadrature oracle, maximal scans
    wavepacket    packet evaluation and the divergence construction
    oscillatory   kernel decay probes and van der Corput checks
    measures      discrete fractal measures, energies, maximal ratios
    radial        Bessel functions and radial evolution in dimension n >= 2
    experiments   the verification experiments run by the command line
"""
__version__ = "0.1.0"
