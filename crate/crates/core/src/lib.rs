//! Turning Følner-type witnesses given as bounded `ℕ`-valued 0-chains into
//! witnesses given by plain finite subsets, with exact arithmetic and a
//! re-checkable certificate.
//!
//! The pipeline is: check the input chains ([`check_instance`]), split the
//! space into `S`-connected components ([`rips_components`]), classify them
//! and pick annulus points ([`classify`]), attach tails ([`augment`]), push
//! excess mass along a proper flow until every chain is `{0,1}`-valued
//! ([`build_flow`], [`stabilize`]), and map the supports back into the
//! space ([`phi`]). [`run_pipeline`] does all of it and asserts every
//! guarantee on the way.
//!
//! Everything is generic over the distance type; [`Dist`] is the default.

pub mod augment;
pub mod chains;
pub mod error;
pub mod flow;
pub mod generate;
pub mod io;
pub mod metric;
pub mod scalar;
pub mod tailor;
pub mod verify;

pub use augment::{augment, AugPoint, AugmentedSpace};
pub use chains::{
    check_instance, from_sets, set_ratio, variation_ratio, Chain, ChainFamily, InstanceParams,
    InstanceReport, SetFamily, VarRatio,
};
pub use error::{Error, ErrorKind, Result};
pub use generate::{gen_instance, weighted_balls, GenKind, GenParams};
pub use io::{output_to_json, parse_output, Instance};
pub use verify::{flow_monitor, verify_certificate, verify_naive, MonitorReport, MonitorSpec, VerifyReport};
pub use flow::{build_flow, split, stabilize, stabilize_traced, step, FlowMap, Stabilized};
pub use metric::{
    rips_components, Component, ComponentClass, Decomposition, MetricGenerator, MetricSource,
    PointIdx, Space,
};
pub use scalar::{parse_quotient, Quotient, Scalar};
pub use tailor::{
    annulus_points, classify, phi, run_pipeline, Case, Certificate, PairRecord, PipelineOptions,
    PipelineOutput, RadiusBounds, SubsetFamily, TailorPlan,
};

/// Exact rational distances; the default everywhere.
pub type Dist = num_rational::Rational64;
/// Arbitrary-precision rational distances.
pub type BigDist = num_rational::BigRational;

pub type RatSpace = Space<Dist>;
pub type RatParams = InstanceParams<Dist>;
pub type RatCertificate = Certificate<Dist>;
