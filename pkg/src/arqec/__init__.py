"""Autoregressive maximum-likelihood decoding for stabilizer codes."""

import os as _os

# Honor ARQEC_THREADS before numpy initializes its BLAS thread pools; this
# is the package's only environment knob.
_threads = _os.environ.get("ARQEC_THREADS")
if _threads:
    for _var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
del _os

from .codes import (
    CodeTables,
    ElsConfig,
    build_code,
    build_code_from_spec,
    check_tables,
    els_bits,
    els_to_pauli,
    format_check_matrix,
    load_check_matrix,
    make_code_tables,
    parse_check_matrix,
    pauli_to_els,
    puncture,
    repetition_code,
    rotated_surface_code,
    save_check_matrix,
    surface_code,
    syndrome,
    toric_code,
)
from .decoding import (
    DecodeResult,
    decode_batch,
    decode_multi,
    decode_pretrained,
    exact_minweight,
    exact_mld,
    logical_error_rate,
    refine,
)
from .errors import (
    ArqecError,
    BadFileError,
    DegenerateKernelError,
    InconsistentSystemError,
    LengthMismatchError,
    NonFiniteError,
    RankDeficientError,
    ShapeMismatchError,
    TooLargeError,
    UnevaluableModelError,
    UnpairedDataError,
)
from .model import (
    ExactSequenceModel,
    ModelConfig,
    ModelParams,
    checkpoint_bytes,
    forward,
    params_from_checkpoint_bytes,
    generate_beta,
    grad_nll,
    init_params,
    load_checkpoint,
    log_conditional_beta,
    log_joint,
    sample_alpha,
    save_checkpoint,
)
from .noise import (
    DepolarizingModel,
    IsingNoiseModel,
    logprob_depolarizing,
    sample_depolarizing,
    sample_ising,
    sample_training_batch,
)
from .training import (
    TrainConfig,
    evaluate_kl,
    pretrain,
    resolve_profile,
    train_mismatched,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
