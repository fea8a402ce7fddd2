"""Boolean hierarchical Tucker tensor networks.

Decomposes Boolean tensors into tree-structured networks of Boolean factors
by recursive unfold-and-split, where each split is an alternating Boolean
matrix factorization whose column subproblems are higher-order binary
objectives, quadratized and handed to pluggable minimizers (exact
enumeration, simulated annealing, or a remote annealer-shaped service).
"""

from .boolcore import (
    BitMatrix,
    BitTensor,
    BitVector,
    ShapeError,
    bool_matmul,
    bool_matvec,
    hamming,
    matricize_split,
    move_q_to_rows,
    reshape,
    tensor_contract,
)
from .hubo import (
    Assignment,
    ExpansionLimitError,
    HuboPoly,
    QuboModel,
    build_column_hubo,
    default_strength,
    eval_hubo,
    eval_qubo,
    hubo_to_qubo,
)
from .solvers import (
    RemoteProtocolError,
    RemoteTransportError,
    SolveReport,
    SolverConfig,
    SolverError,
    kernel_backend,
    minimize_column,
    solve_exact,
    solve_remote,
    solve_sa,
)
from .bmf import BmfConfig, BmfResult, factorize, update_factor
from .htn import (
    HtnConfig,
    HtnTree,
    Internal,
    Leaf,
    RankClampWarning,
    decompose,
    error_rate,
    reconstruct,
)
from .gen import GenerationError, GenSpec, add_noise, generate
from .bench import SweepSpec, TrialRecord, run_sweep, summarize

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "BitTensor",
    "BitVector",
    "ShapeError",
    "bool_matmul",
    "bool_matvec",
    "hamming",
    "matricize_split",
    "move_q_to_rows",
    "reshape",
    "tensor_contract",
    "Assignment",
    "ExpansionLimitError",
    "HuboPoly",
    "QuboModel",
    "build_column_hubo",
    "default_strength",
    "eval_hubo",
    "eval_qubo",
    "hubo_to_qubo",
    "RemoteProtocolError",
    "RemoteTransportError",
    "SolveReport",
    "SolverConfig",
    "SolverError",
    "kernel_backend",
    "minimize_column",
    "solve_exact",
    "solve_remote",
    "solve_sa",
    "BmfConfig",
    "BmfResult",
    "factorize",
    "update_factor",
    "HtnConfig",
    "HtnTree",
    "Internal",
    "Leaf",
    "RankClampWarning",
    "decompose",
    "error_rate",
    "reconstruct",
    "GenerationError",
    "GenSpec",
    "add_noise",
    "generate",
    "SweepSpec",
    "TrialRecord",
    "run_sweep",
    "summarize",
]
