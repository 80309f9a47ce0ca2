"""Exact cohomology of the graded Lie algebra of formal Hamiltonian vector fields.

The package computes weight-graded Chevalley-Eilenberg cohomology, absolute
and relative to the symplectic subalgebra, over exact rational arithmetic
with multi-modular rank certification, and cross-checks the result against
the Gelfand-Kalinin-Fuchs closed-form model.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .poisson import AlgebraSpec, Monomial, PoissonElement, enumerate_monomials, poisson_bracket, sp_basis
from .cochains import DualGenerator, SectorBasis, enumerate_sector, assemble_differential, assemble_sp_action, relative_sector
from .linalg import SparseExactMatrix, RankCertificate, rank_mod_p, rank_certified, kernel_basis_exact
from .engine import BettiRow, BettiTable, CocycleRepresentative, betti_table, betti_table_relative, sp_cohomology, extract_representative
from .model import ModelGenerator, ModelMonomial, model_basis, model_differential, predicted_betti, anomaly_target

__all__ = [
    "AlgebraSpec", "Monomial", "PoissonElement", "enumerate_monomials", "poisson_bracket", "sp_basis",
    "DualGenerator", "SectorBasis", "enumerate_sector", "assemble_differential", "assemble_sp_action", "relative_sector",
    "SparseExactMatrix", "RankCertificate", "rank_mod_p", "rank_certified", "kernel_basis_exact",
    "BettiRow", "BettiTable", "CocycleRepresentative", "betti_table", "betti_table_relative", "sp_cohomology", "extract_representative",
    "ModelGenerator", "ModelMonomial", "model_basis", "model_differential", "predicted_betti", "anomaly_target",
    "__version__",
]
