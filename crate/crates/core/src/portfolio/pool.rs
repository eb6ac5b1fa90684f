use std::path::Path;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sim::rng;

pub const START_PRICE: f64 = 100.0;
/// Standard deviation of the daily log-return.
pub const DAILY_LOG_SIGMA: f64 = 0.01;

/// Daily price series for `n` assets with their return statistics.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AssetPool {
    pub names: Vec<String>,
    /// `prices[i][t]`: price of asset `i` on day `t`.
    pub prices: Vec<Vec<f64>>,
    /// Mean daily relative return per asset.
    pub mu: Vec<f64>,
    /// Sample covariance of daily relative returns, row-major `n × n`.
    pub cov: Vec<f64>,
}

impl AssetPool {
    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn days(&self) -> usize {
        self.prices.first().map_or(0, Vec::len)
    }

    pub fn cov_at(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.n() + j]
    }

    /// Computes `mu` and the covariance from raw price series.
    pub fn from_prices(names: Vec<String>, prices: Vec<Vec<f64>>) -> Result<Self> {
        let n = names.len();
        if n == 0 || prices.len() != n {
            return Err(Error::MalformedData(format!("{} names for {} price series", n, prices.len())));
        }
        let days = prices[0].len();
        if days < 2 {
            return Err(Error::MalformedData("need at least two days of prices".into()));
        }
        for (i, series) in prices.iter().enumerate() {
            if series.len() != days {
                return Err(Error::MalformedData(format!("asset {} has {} prices, expected {days}", names[i], series.len())));
            }
            if let Some(p) = series.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
                return Err(Error::MalformedData(format!("asset {} has non-positive price {p}", names[i])));
            }
        }
        let returns: Vec<Vec<f64>> = prices.iter().map(|s| s.windows(2).map(|w| w[1] / w[0] - 1.0).collect()).collect();
        let t = days - 1;
        let mu: Vec<f64> = returns.iter().map(|r| r.iter().sum::<f64>() / t as f64).collect();
        // Unbiased denominator; a single return has no spread to estimate.
        let denom = t.saturating_sub(1).max(1) as f64;
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = returns[i].iter().zip(&returns[j]).map(|(a, b)| (a - mu[i]) * (b - mu[j])).sum();
                cov[i * n + j] = s / denom;
                cov[j * n + i] = s / denom;
            }
        }
        Ok(AssetPool { names, prices, mu, cov })
    }

    /// Reads a header row of asset names followed by one row of prices per day.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path.as_ref())?;
        let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut prices = vec![Vec::new(); names.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != names.len() {
                return Err(Error::MalformedData(format!("row {} has {} fields, expected {}", row + 2, rec.len(), names.len())));
            }
            for (i, field) in rec.iter().enumerate() {
                let p: f64 =
                    field.trim().parse().map_err(|_| Error::MalformedData(format!("row {}: `{field}` is not a number", row + 2)))?;
                prices[i].push(p);
            }
        }
        Self::from_prices(names, prices)
    }

    /// Writes the CSV price format. Values use the shortest round-trip form.
    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(&self.names)?;
        for t in 0..self.days() {
            w.write_record(self.prices.iter().map(|s| s[t].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Geometric random walk from 100 with daily factor `exp(N(0, 0.01))`.
pub fn generate_pool(seed: u64, n: usize, days: usize) -> Result<AssetPool> {
    if n < 2 || days < 2 {
        return Err(Error::InvalidProblem(format!("need n ≥ 2 and days ≥ 2, got n = {n}, days = {days}")));
    }
    let mut r = rng::seeded(seed);
    let step = Normal::new(0.0, DAILY_LOG_SIGMA).expect("valid normal parameters");
    let prices = (0..n)
        .map(|_| {
            let mut p = START_PRICE;
            let mut s = Vec::with_capacity(days);
            s.push(p);
            for _ in 1..days {
                p *= f64::exp(step.sample(&mut r));
                s.push(p);
            }
            s
        })
        .collect();
    let names = (0..n).map(|i| format!("A{i}")).collect();
    AssetPool::from_prices(names, prices)
}
