"""Causally invariant feature selection for covariate-shift transfer.

Subpackages by layer: :mod:`sctl.graph` (mixed graphs, m-separation),
:mod:`sctl.citest` (conditional independence tests), :mod:`sctl.blanket`
(Markov blanket discovery), :mod:`sctl.selection` (separating-set search),
:mod:`sctl.synth` and :mod:`sctl.scenarios` (ground-truth data),
:mod:`sctl.predict` (predictors and metrics) and :mod:`sctl.cli`.
"""

__version__ = "0.1.0"
