//! Library half of the `sbba` command: instance files, generators,
//! worked-example reproduction, comparison tables and suite audits.

pub mod compare;
pub mod generate;
pub mod reproduce;
pub mod schema;
pub mod suite;

use sbba_core::mechanisms::{McAfee, Mechanism, Sbba, SbbaDual, Vcg};

pub type DynMechanism = Box<dyn Mechanism + Send + Sync>;

pub const MECHANISM_NAMES: [&str; 4] = ["sbba", "sbba_dual", "mcafee", "vcg"];

pub fn mechanism(name: &str) -> Option<DynMechanism> {
    Some(match name {
        "sbba" => Box::new(Sbba),
        "sbba_dual" => Box::new(SbbaDual),
        "mcafee" => Box::new(McAfee),
        "vcg" => Box::new(Vcg),
        _ => return None,
    })
}

pub fn all_mechanisms() -> Vec<DynMechanism> {
    MECHANISM_NAMES.iter().map(|n| mechanism(n).expect("known name")).collect()
}
