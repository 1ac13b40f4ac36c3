//! Hourly machine prices and the stage → VM family recommendation.
//!
//! Pricing CSV: header `family,vcpus,price_per_hour,currency`, one row per
//! (family, vCPU count). Leading `#` lines are comments; a `# source: ...`
//! comment is kept as the table's provenance.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stage::{Stage, VCPU_OPTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VmFamily {
    GeneralPurpose,
    MemoryOptimized,
}

impl VmFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            VmFamily::GeneralPurpose => "general-purpose",
            VmFamily::MemoryOptimized => "memory-optimized",
        }
    }
}

impl fmt::Display for VmFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VmFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "generalpurpose" => Ok(VmFamily::GeneralPurpose),
            "memoryoptimized" => Ok(VmFamily::MemoryOptimized),
            _ => Err(Error::Validation(format!("unknown VM family `{s}`"))),
        }
    }
}

/// Synthesis and STA favor general-purpose machines; placement and routing
/// benefit from the higher memory-to-core ratio.
pub fn recommend_family(stage: Stage) -> VmFamily {
    match stage {
        Stage::Synthesis | Stage::Sta => VmFamily::GeneralPurpose,
        Stage::Placement | Stage::Routing => VmFamily::MemoryOptimized,
    }
}

/// Cost of a job billed per second: `runtime_seconds / 3600 × price_per_hour`.
pub fn job_cost(runtime_seconds: u64, price_per_hour: f64) -> Result<f64> {
    if runtime_seconds == 0 || !(price_per_hour.is_finite() && price_per_hour > 0.0) {
        return Err(Error::Contract(format!(
            "job_cost needs positive inputs (runtime {runtime_seconds} s, price {price_per_hour}/h)"
        )));
    }
    Ok(runtime_seconds as f64 / 3600.0 * price_per_hour)
}

/// Round a currency amount for display.
pub fn display_cost(cost: f64) -> String {
    format!("{cost:.2}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub family: VmFamily,
    pub vcpus: u32,
    pub price_per_hour: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingTable {
    rows: Vec<PriceRow>,
    pub source: String,
    pub currency: String,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    family: String,
    vcpus: String,
    price_per_hour: String,
    currency: String,
}

impl PricingTable {
    /// Validate rows: known vCPU sizes, positive prices, unique keys.
    pub fn new(rows: Vec<PriceRow>, source: impl Into<String>, currency: impl Into<String>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if !VCPU_OPTIONS.contains(&r.vcpus) {
                return Err(Error::Validation(format!("row {}: vcpus must be one of 1, 2, 4, 8", i + 1)));
            }
            if !(r.price_per_hour.is_finite() && r.price_per_hour > 0.0) {
                return Err(Error::Validation(format!("row {}: price_per_hour must be positive", i + 1)));
            }
            if rows[..i].iter().any(|o| o.family == r.family && o.vcpus == r.vcpus) {
                return Err(Error::Validation(format!(
                    "row {}: duplicate entry for ({}, {})",
                    i + 1,
                    r.family,
                    r.vcpus
                )));
            }
        }
        let table = PricingTable {
            rows,
            source: source.into(),
            currency: currency.into(),
        };
        for w in table.warnings() {
            log::warn!("{w}");
        }
        Ok(table)
    }

    pub fn rows(&self) -> &[PriceRow] {
        &self.rows
    }

    pub fn price(&self, family: VmFamily, vcpus: u32) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.family == family && r.vcpus == vcpus)
            .map(|r| r.price_per_hour)
    }

    /// Like [`PricingTable::price`] but a configuration error when absent.
    pub fn require(&self, family: VmFamily, vcpus: u32) -> Result<f64> {
        self.price(family, vcpus)
            .ok_or_else(|| Error::Config(format!("pricing table has no row for ({family}, {vcpus} vCPUs)")))
    }

    /// Non-fatal findings: prices that drop as the machine grows.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for family in [VmFamily::GeneralPurpose, VmFamily::MemoryOptimized] {
            let mut prices: Vec<(u32, f64)> = self
                .rows
                .iter()
                .filter(|r| r.family == family)
                .map(|r| (r.vcpus, r.price_per_hour))
                .collect();
            prices.sort_by_key(|p| p.0);
            for w in prices.windows(2) {
                if w[1].1 < w[0].1 {
                    out.push(format!(
                        "{family}: {} vCPUs ({}/h) is cheaper than {} vCPUs ({}/h)",
                        w[1].0, w[1].1, w[0].0, w[0].1
                    ));
                }
            }
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let source = text
            .lines()
            .take_while(|l| l.trim_start().starts_with('#'))
            .find_map(|l| l.trim_start().trim_start_matches('#').trim().strip_prefix("source:"))
            .map(|s| s.trim().to_string())
            .unwrap_or_default();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Validation(format!("pricing CSV header: {e}")))?
            .clone();
        let expected = ["family", "vcpus", "price_per_hour", "currency"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Validation(format!(
                "pricing CSV header must be `{}`",
                expected.join(",")
            )));
        }
        let mut rows = Vec::new();
        let mut currency: Option<String> = None;
        for (i, rec) in reader.deserialize::<CsvRow>().enumerate() {
            let row_no = i + 1;
            let rec = rec.map_err(|e| Error::Validation(format!("row {row_no}: {e}")))?;
            let family: VmFamily = rec
                .family
                .parse()
                .map_err(|_| Error::Validation(format!("row {row_no}: unknown family label `{}`", rec.family)))?;
            let vcpus: u32 = rec
                .vcpus
                .parse()
                .map_err(|_| Error::Validation(format!("row {row_no}: invalid vcpus `{}`", rec.vcpus)))?;
            let price: f64 = rec.price_per_hour.parse().map_err(|_| {
                Error::Validation(format!("row {row_no}: invalid price_per_hour `{}`", rec.price_per_hour))
            })?;
            match &currency {
                None => currency = Some(rec.currency.clone()),
                Some(c) if *c != rec.currency => {
                    return Err(Error::Validation(format!(
                        "row {row_no}: currency `{}` differs from `{c}` (single-currency tables only)",
                        rec.currency
                    )))
                }
                _ => {}
            }
            rows.push(PriceRow {
                family,
                vcpus,
                price_per_hour: price,
            });
        }
        PricingTable::new(rows, source, currency.unwrap_or_default())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        if !self.source.is_empty() {
            out.push_str(&format!("# source: {}\n", self.source));
        }
        out.push_str("family,vcpus,price_per_hour,currency\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.family, r.vcpus, r.price_per_hour, self.currency));
        }
        out
    }
}

pub fn load_pricing(path: &Path) -> Result<PricingTable> {
    PricingTable::from_csv_str(&std::fs::read_to_string(path)?)
}
