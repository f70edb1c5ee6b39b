"""rgglab: spectra of high-dimensional random geometric graphs on the sphere.

Submodules:

- ``sphere``: uniform sphere sampling, spherical-cap measure, threshold
  calibration, cap-restricted sampling.
- ``graphgen``: geometric and Erdos-Renyi adjacency construction, centering,
  edge-list serialization.
- ``decomp``: bridges, block-cut trees, ear decompositions, closed-walk graph
  statistics and their contribution bound.
- ``walks``: closed-walk enumeration and classification, Catalan/semicircle
  and sparse-limit moments, the brute-force trace oracle.
- ``spectral``: dense symmetric eigenvalues, empirical spectral distributions,
  reference laws, KS distance, second eigenvalue.
- ``experiments``: config-driven experiment runners behind the ``rgglab`` CLI.
"""

__version__ = "0.1.0"
