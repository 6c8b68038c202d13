//! Quantum states, distances, max-divergence and the smoothed quantum measures.

mod constructions;
mod convex_split;
mod equivalence;
mod measures;
mod state;

pub use constructions::{
    apply_local_channel, copy_isometry, cq_function_apply, embed_isometry, projective_measure_cq,
    thm2_hat_construction, thm3_hat_construction, HatConstruction,
};
pub use convex_split::{
    convex_split_classical, convex_split_state, convex_split_threshold, ConvexSplit,
    SplitDistances, MAX_SPLIT_DIM,
};
pub use equivalence::{check_partial_full_equivalence, EquivalenceReport};
pub use measures::{
    hmin_full_quantum, hmin_partial_quantum, hmin_unsmoothed, imax_full_quantum,
    imax_partial_quantum, imax_unsmoothed, quantum_measure, Metric, QuantumKind,
    QuantumMeasureResult, SdpDiagnostics, SmoothingBall, MAX_SDP_DIM,
};
pub use state::{
    dmax_quantum, fidelity_bar, fidelity_generalized, gen_trace_distance, psd_part,
    purified_distance, DensityOperator, STATE_TOL,
};
