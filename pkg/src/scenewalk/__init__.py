"""Monte Carlo laboratory for random walks in stationary sceneries.

Sceneries are generated either i.i.d. or by reading a fixed observable
along the orbit of an ergodic torus automorphism; the walker's accumulated
scenery Z_n = sum xi_{S_k}, normalized by n^{3/4}, is compared against the
self-intersection-local-time mixture law it converges to.
"""

__version__ = "0.1.0"
