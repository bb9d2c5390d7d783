//! Spatially explicit simulator of the food–land system.
//!
//! Exogenous population and income drive food demand; crop and livestock
//! production respond through intensification and land conversion on a
//! gridded landscape whose ecosystem integrity feeds back on yields and on
//! its own recovery. A scenario layer evaluates supply- and demand-side
//! policy portfolios against a business-as-usual baseline.
//!
//! ```no_run
//! use foodland::{demand::Drivers, engine, params::ModelParams};
//!
//! let params = ModelParams::default();
//! let drivers = Drivers::builtin();
//! let record = engine::run(&params, &drivers, 7).unwrap();
//! println!("forest cells in 2100: {}", record.last().area_forest);
//! ```

pub mod calibration;
pub mod config;
pub mod demand;
pub mod engine;
pub mod error;
pub mod landscape;
pub mod numfmt;
pub mod output;
pub mod params;
pub mod production;
pub mod scenario;

pub use error::{Error, Result};
pub use params::ModelParams;
