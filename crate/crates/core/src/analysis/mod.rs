//! Validation metrics and the ADMD case study.

mod admd;
mod pdf;
mod validation;

pub use admd::{
    admd_increase, admd_increase_with, blend_baseline, regional_batch, AdmdBasis, AdmdReport, BaselineProfile,
    Region, RegionFailure, RegionalBatch, ADMD_HEADER,
};
pub use pdf::{mape, start_time_pdf, SlotPdf};
pub use validation::{leave_one_out_validate, MapeSet, ValidationConfig, ValidationReport, VehicleValidation};
