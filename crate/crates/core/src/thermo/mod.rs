//! Partition functions, pressure, recurrence, equilibrium measures, zeta
//! series and distortion.

pub mod distortion;
pub mod expsum;
pub mod measure;
pub mod partition;
pub mod perron;
pub mod pressure;
pub mod recurrence;
pub mod zeta;

pub use distortion::{distortion_constant, DistortionReport};
pub use expsum::ExpSum;
pub use measure::{equilibrium_measure, measure_pressure, MarkovMeasure, MeasureSummary};
pub use partition::{partition_function, partition_function_with_budget, positive_recurrence_test, PartitionFunctionTable, ZnEntry};
pub use perron::{perron, spectral_radius, PerronData};
pub use pressure::{pressure_exhaustion, pressure_from_table, pressure_spectral, PressureEstimate, PressureMethod};
pub use recurrence::{recurrence_classify, Interval, RecurrenceClass, RecurrenceVerdict};
pub use zeta::{zeta_series, ZetaSeries};
