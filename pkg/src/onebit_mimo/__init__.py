"""Channel estimation and information bounds for 1-bit oversampled MIMO uplinks."""

from .estimator import (
    BussgangOperator,
    EstimatorState,
    blmmse_estimate,
    bussgang_gain,
    cov_yp,
    cov_yp_diag,
    estimate_channel_pipeline,
    instantaneous_estimate,
    lra_ls_estimate,
    make_bussgang_operator,
    symbol_pulse,
    update_rhat,
)
from .experiments import (
    ResultRow,
    SweepSpec,
    crb_curve,
    crb_point,
    run_nmse_point,
    run_sweep,
    write_csv,
)
from .fisher import (
    FisherResult,
    OrthantQuery,
    biased_bound,
    crb,
    fisher_lower_bound,
    fisher_summary,
    fisher_white,
    orthant_probability,
    quantized_cov,
    quantized_mean,
    quantized_mean_grad,
    write_fisher_csv,
)
from .model import (
    SystemConfig,
    build_g,
    build_phi,
    build_z,
    channel_matrix,
    combined_pulse,
    rrc_taps,
    stack_real,
    symbol_projection,
    symbol_view,
)
from .simulate import (
    ChannelState,
    QuantizedBatch,
    draw_channel,
    draw_noise,
    draw_pilots,
    noise_var_from_snr_db,
    orthogonal_pilots,
    quantize,
    simulate_pilot_batch,
    substream,
)

__version__ = "0.1.0"
