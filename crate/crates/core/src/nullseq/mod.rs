//! Candidate null sequences, the tail-integral classification of ground
//! states, and the comparison transfer engine.

mod classify;
mod cutoff;
mod profiles;
mod transfer;

pub use classify::{
    classify, m1_integral, m2_integral, m2_tilde, ClassificationVerdict, ClassifyOptions, GroundStateVerdict, TailIntegral,
};
pub use cutoff::{
    log_cutoff_family, verify_null_sequence, window_norm, CutoffFamily, DecayConvention, DecayFit, DecayModel, LogCutoff,
    NullSequenceEntry, NullSequenceReport, Schedule, SequenceVerdict,
};
pub use profiles::{make_eta_phi, make_oscillatory_psi, Blend, EtaPhi, OscillatoryPsi, ETA_R0};
pub use transfer::{
    check_transfer_conditions, monotone_kernel_check, transfer_null_sequence, ConditionCheck, KernelCheck,
    TransferConditions, TransferReport, TransferVerdict,
};
