//! Fixed-length compression of memoryless sources.

pub mod codec;
pub mod oracle;
pub mod rate;
pub mod restricted;
pub mod source;
pub mod typical;

pub use codec::{
    build_codec, fom_dil_check, fom_tilde, fom_tilde_norm, fom_tilde_retained, theorem_m,
    DilationCheck, TypicalCodec, DEFAULT_DELTA,
};
pub use oracle::{best_point_mass_codec, brute_force_codecs};
pub use rate::{
    additivity_check, exact_rate, exact_rate_enumerated, info_content_estimate, rate_curve,
    top_k_mass, AdditivityReport, InfoContentReport, RateCurve, RatePoint,
};
pub use restricted::{restricted_rate, RestrictedReport};
pub use source::{message_distribution, Source, TypeClass};
pub use typical::{typical_set, TypicalSet};
