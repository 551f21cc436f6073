"""Simulator and analysis toolkit for quantum-generated one-time tables.

Layers: exact small-qubit quantum mechanics (:mod:`ottlab.quantum`), the
bipartite table-generation protocols with adversaries and noise
(:mod:`ottlab.protocols`), batch checking/combining/error-reduction
(:mod:`ottlab.factory`), table-driven classical two-party computation
(:mod:`ottlab.mpc`), the numerical security lab (:mod:`ottlab.lab`),
interactive homomorphic Clifford+T evaluation (:mod:`ottlab.qhe`), and a
reproducible CLI (:mod:`ottlab.cli`).
"""

from .protocols import (AdversaryStrategy, NoiseModel, OneTimeTable,
                        generate_batch, run_nland, run_nland2, run_nland3)
from .quantum import DensityMatrix, Ensemble, Gate, PureState

__all__ = [
    "AdversaryStrategy", "DensityMatrix", "Ensemble", "Gate", "NoiseModel",
    "OneTimeTable", "PureState", "generate_batch", "run_nland", "run_nland2",
    "run_nland3",
]

__version__ = "0.1.0"
