pub mod series;
pub mod simulate;
pub mod verify;

pub use series::{run_series, SeriesReport};
pub use simulate::{run_simulate, SimulateSummary};
pub use verify::{run_verify, VerifyReport};
