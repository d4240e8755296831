//! Manufactured solutions, norms, the fractional boundary seminorm and
//! refinement studies.

pub mod cases;
pub mod gagliardo;
pub mod norms;
pub mod study;

pub use cases::{make_case, ManufacturedCase, RandomData, CASE_IDS};
pub use gagliardo::{gagliardo_seminorm, periodic_extension_check, periodic_extension_from_samples, ExtensionRatio};
pub use norms::{error_norm, Field, NormKind, NormSpec};
pub use study::{convergence_study, stability_probe, StabilityTable, StudyTable};
