//! Parameter selection, the two factor maps, and the end-to-end verifier.

pub mod f1;
pub mod params;
pub mod sections;
pub mod verify;

pub use f1::JoinMap;
pub use params::{choose_delta_cutoff, choose_flow_params, FlowParams};
pub use sections::{build_section, section_value, Section, SectionValue};
pub use verify::{
    assemble, f0, sample_point, verify_main, Assembly, CheckRecord, Pipeline, PipelineConfig,
    Verdict, VerifierReport,
};
