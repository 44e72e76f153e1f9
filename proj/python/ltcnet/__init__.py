"""Liquid time-constant networks with NCP wiring, against an LSTM baseline.

Thin re-export of the compiled extension; see the C++ headers for the
authoritative API documentation.
"""

from ._ltcnet import (  # noqa: F401
    Dataset,
    Model,
    PerturbKind,
    PerturbTarget,
    PerturbationSpec,
    SynthSpec,
    TrainConfig,
    TrainTrace,
    Wiring,
    WiringSpec,
    add_drift,
    add_noise,
    apply_perturbation,
    build_ncp_wiring,
    chrono_split,
    fit_scale,
    flops_per_step,
    ks_2samp,
    lstm_flops_per_step,
    lstm_param_count,
    make_model,
    mse,
    param_count,
    r2_score,
    sparsity,
    synth_generate,
    synth_true_signal,
    tail_mse,
    train,
)
