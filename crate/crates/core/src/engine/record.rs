use serde::{Deserialize, Serialize};

use crate::landscape::LandscapeMetrics;

/// Column names of a [`YearRecord`], in output order.
pub const COLUMNS: [&str; 34] = [
    "demand_meat",
    "demand_crop_food",
    "demand_feed",
    "demand_crop",
    "output_crop",
    "output_crop_conv",
    "output_crop_org",
    "output_meat",
    "output_meat_conv",
    "output_meat_org",
    "feed_scaling",
    "technology",
    "mechanization",
    "chemicals",
    "livestock_density",
    "ecosystem_service",
    "area_natural",
    "area_crop",
    "area_pasture",
    "area_crop_organic",
    "area_pasture_organic",
    "area_forest",
    "area_degraded",
    "mean_eps_natural",
    "mean_eps_crop_conv",
    "mean_eps_crop_org",
    "mean_eps_pasture_conv",
    "mean_eps_pasture_org",
    "cells_converted_crop",
    "cells_converted_pasture",
    "cells_abandoned_crop",
    "cells_abandoned_pasture",
    "saturation_events",
    "natural_eps_sum",
];

pub const N_COLUMNS: usize = COLUMNS.len();

/// Index of a column by name.
pub fn column_index(name: &str) -> Option<usize> {
    COLUMNS.iter().position(|c| *c == name)
}

/// Land changes applied in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LandChange {
    pub converted_crop: usize,
    pub converted_pasture: usize,
    pub abandoned_crop: usize,
    pub abandoned_pasture: usize,
}

/// State of one run at the end of one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRecord {
    pub year: i32,
    pub demand_meat: f64,
    pub demand_crop_food: f64,
    pub demand_feed: f64,
    pub output_crop_conv: f64,
    pub output_crop_org: f64,
    /// Meat output after feed scaling, by regime.
    pub output_meat_conv: f64,
    pub output_meat_org: f64,
    pub feed_scaling: f64,
    pub technology: f64,
    pub mechanization: f64,
    pub chemicals: f64,
    pub livestock_density: f64,
    pub ecosystem_service: f64,
    pub metrics: LandscapeMetrics,
    pub change: LandChange,
    pub saturation_events: u64,
    pub natural_eps_sum: f64,
}

impl YearRecord {
    pub fn demand_crop(&self) -> f64 {
        self.demand_crop_food + self.demand_feed
    }

    pub fn output_crop(&self) -> f64 {
        self.output_crop_conv + self.output_crop_org
    }

    pub fn output_meat(&self) -> f64 {
        self.output_meat_conv + self.output_meat_org
    }

    /// Values in [`COLUMNS`] order; `None` where a mean is undefined.
    pub fn values(&self) -> [Option<f64>; N_COLUMNS] {
        let m = &self.metrics;
        let c = &self.change;
        let n = |v: usize| Some(v as f64);
        [
            Some(self.demand_meat),
            Some(self.demand_crop_food),
            Some(self.demand_feed),
            Some(self.demand_crop()),
            Some(self.output_crop()),
            Some(self.output_crop_conv),
            Some(self.output_crop_org),
            Some(self.output_meat()),
            Some(self.output_meat_conv),
            Some(self.output_meat_org),
            Some(self.feed_scaling),
            Some(self.technology),
            Some(self.mechanization),
            Some(self.chemicals),
            Some(self.livestock_density),
            Some(self.ecosystem_service),
            n(m.area_natural),
            n(m.area_crop),
            n(m.area_pasture),
            n(m.area_crop_organic),
            n(m.area_pasture_organic),
            n(m.area_forest),
            n(m.area_degraded),
            m.mean_eps_natural,
            m.mean_eps_crop_conv,
            m.mean_eps_crop_org,
            m.mean_eps_pasture_conv,
            m.mean_eps_pasture_org,
            n(c.converted_crop),
            n(c.converted_pasture),
            n(c.abandoned_crop),
            n(c.abandoned_pasture),
            Some(self.saturation_events as f64),
            Some(self.natural_eps_sum),
        ]
    }
}

/// One row per simulated year, first year included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub rows: Vec<YearRecord>,
}

impl RunRecord {
    pub fn last(&self) -> &LandscapeMetrics {
        &self.rows.last().expect("run has at least one row").metrics
    }

    pub fn row(&self, year: i32) -> Option<&YearRecord> {
        let first = self.rows.first()?.year;
        self.rows.get(usize::try_from(year - first).ok()?)
    }

    /// One column as a series over years.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = column_index(name)?;
        Some(self.rows.iter().map(|r| r.values()[k]).collect())
    }
}
