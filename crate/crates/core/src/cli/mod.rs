//! Batch front end: configuration, realizable-set cache and the pipeline
//! that produces JSON reports.

pub mod cache;
pub mod config;
pub mod run;

pub use cache::{
    cache_roundtrip, load_or_build, read_cache, write_cache, CacheStatus, CACHE_DIR_ENV,
};
pub use config::{parse_config, parse_config_table, Mode, RunConfig};
pub use run::{probe_battery, run, Outcome, ProbeReport, Report, SCHEMA_VERSION};
