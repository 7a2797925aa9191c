//! Aqueous transport, TCE dissolution and the long-term plume stage.

pub mod dissolution;
pub mod natural;
pub mod stage2;
pub mod transport;

pub use dissolution::{deplete_source, dissolution_flux, dissolve_cell, DissolutionParams};
pub use natural::{NaturalFlowConfig, NaturalStepper};
pub use stage2::{probe, run_stage2, MassAudit, PlumeRow, Stage2Config, Stage2Output};
pub use transport::{ExchangeLedger, InflowBC, TransportOperator, TransportParams};
