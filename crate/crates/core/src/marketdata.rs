//! Offline ingestion of historical closing prices into a return/covariance
//! model.
//!
//! Input format: CSV with header `date,<ticker1>,<ticker2>,...`, ISO dates,
//! decimal prices. Rows containing any missing or non-numeric cell are
//! dropped; remaining dates must be strictly increasing.

use crate::error::{Error, Result};
use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use std::path::Path;

/// Cleaned price history: a dense date-by-ticker matrix of closing prices.
#[derive(Debug, Clone)]
pub struct PriceTable {
    pub dates: Vec<NaiveDate>,
    pub tickers: Vec<String>,
    /// Row `t`, column `i`: closing price of `tickers[i]` on `dates[t]`.
    pub prices: DMatrix<f64>,
}

impl PriceTable {
    pub fn num_days(&self) -> usize {
        self.dates.len()
    }

    pub fn num_assets(&self) -> usize {
        self.tickers.len()
    }
}

/// Load and clean a price CSV.
pub fn load_prices<P: AsRef<Path>>(path: P) -> Result<PriceTable> {
    let mut reader = csv::Reader::from_path(path.as_ref())
        .map_err(|e| Error::MarketData(format!("cannot read {}: {e}", path.as_ref().display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::MarketData(format!("bad header: {e}")))?
        .clone();
    if headers.is_empty() || headers.get(0).map(str::trim) != Some("date") {
        return Err(Error::MarketData(
            "first header column must be `date`".into(),
        ));
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(|s| s.trim().to_string()).collect();
    if tickers.is_empty() {
        return Err(Error::MarketData("no ticker columns".into()));
    }
    for (i, t) in tickers.iter().enumerate() {
        if tickers[..i].contains(t) {
            return Err(Error::MarketData(format!("duplicate ticker `{t}`")));
        }
    }

    let mut dates = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MarketData(format!("bad record: {e}")))?;
        if record.len() != tickers.len() + 1 {
            continue; // ragged row: treat as unclean
        }
        let Ok(date) = NaiveDate::parse_from_str(record.get(0).unwrap_or("").trim(), "%Y-%m-%d")
        else {
            continue;
        };
        let mut row = Vec::with_capacity(tickers.len());
        let mut clean = true;
        for cell in record.iter().skip(1) {
            match cell.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    clean = false;
                    break;
                }
            }
        }
        if clean {
            dates.push(date);
            rows.push(row);
        }
    }

    if rows.len() < 2 {
        return Err(Error::MarketData(format!(
            "fewer than 2 clean rows ({} found)",
            rows.len()
        )));
    }
    for w in dates.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::MarketData(format!(
                "dates not strictly increasing at {}",
                w[1]
            )));
        }
    }

    let prices = DMatrix::from_fn(rows.len(), tickers.len(), |r, c| rows[r][c]);
    Ok(PriceTable {
        dates,
        tickers,
        prices,
    })
}

/// Estimate per-asset expected returns and the return covariance matrix.
///
/// Daily arithmetic returns `r_t = p_t / p_{t-1} - 1`; `e_i` is the mean
/// daily return and `c_ij` the sample covariance with divisor `T - 1` over
/// the `T` return rows.
pub fn estimate_model(table: &PriceTable) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let days = table.num_days();
    let n = table.num_assets();
    if days < 3 {
        return Err(Error::MarketData(format!(
            "need at least 3 clean rows, got {days}"
        )));
    }
    if table.prices.iter().any(|&p| p <= 0.0) {
        return Err(Error::MarketData("nonpositive price in table".into()));
    }

    let t_returns = days - 1;
    let mut returns = DMatrix::zeros(t_returns, n);
    for t in 0..t_returns {
        for i in 0..n {
            returns[(t, i)] = table.prices[(t + 1, i)] / table.prices[(t, i)] - 1.0;
        }
    }

    let means = DVector::from_fn(n, |i, _| returns.column(i).sum() / t_returns as f64);
    let mut cov = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for t in 0..t_returns {
                acc += (returns[(t, i)] - means[i]) * (returns[(t, j)] - means[j]);
            }
            let v = acc / (t_returns as f64 - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((means, cov))
}
