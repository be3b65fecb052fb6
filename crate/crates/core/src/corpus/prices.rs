//! Price panel loading and simple-returns computation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;

use crate::corpus::is_valid_ticker;
use crate::{Error, Result};

/// Aligned ticker x date matrix of closing prices.
///
/// Shape is `|U| x (T+1)`: every ticker has a price for every date, all
/// prices are positive and finite, and dates are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    prices: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, prices: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.is_empty() {
            return Err(Error::Validation("price panel has no tickers".into()));
        }
        if dates.len() < 2 {
            return Err(Error::Validation(
                "price panel needs at least 2 dates to define returns".into(),
            ));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "price panel dates must be strictly increasing".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for t in &tickers {
            if !is_valid_ticker(t) {
                return Err(Error::Validation(format!("invalid ticker {t:?}")));
            }
            if !seen.insert(t.clone()) {
                return Err(Error::Validation(format!("duplicate ticker {t:?}")));
            }
        }
        if prices.len() != tickers.len() {
            return Err(Error::Validation(format!(
                "price matrix has {} rows for {} tickers",
                prices.len(),
                tickers.len()
            )));
        }
        for (row, ticker) in prices.iter().zip(&tickers) {
            if row.len() != dates.len() {
                return Err(Error::Validation(format!(
                    "ticker {ticker} has {} prices for {} dates",
                    row.len(),
                    dates.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p <= 0.0) {
                return Err(Error::Validation(format!(
                    "ticker {ticker} has non-positive price {p}"
                )));
            }
        }
        Ok(Self {
            tickers,
            dates,
            prices,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn num_companies(&self) -> usize {
        self.tickers.len()
    }

    /// Number of return periods, i.e. `dates.len() - 1`.
    pub fn num_periods(&self) -> usize {
        self.dates.len() - 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.prices[i]
    }

    /// Keeps only the rows whose index satisfies `keep`, preserving order.
    pub fn retain_rows(&self, keep: &dyn Fn(usize) -> bool) -> Result<PricePanel> {
        let mut tickers = Vec::new();
        let mut prices = Vec::new();
        for i in 0..self.tickers.len() {
            if keep(i) {
                tickers.push(self.tickers[i].clone());
                prices.push(self.prices[i].clone());
            }
        }
        PricePanel::new(tickers, self.dates.clone(), prices)
    }
}

/// Aligned ticker x period matrix of simple returns, shape `|U| x T`.
///
/// Row ordering always equals the ordering of the source [`PricePanel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsPanel {
    tickers: Vec<String>,
    returns: Vec<Vec<f64>>,
}

impl ReturnsPanel {
    pub fn new(tickers: Vec<String>, returns: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.is_empty() || returns.len() != tickers.len() {
            return Err(Error::Validation(
                "returns panel rows must match tickers".into(),
            ));
        }
        let periods = returns[0].len();
        if periods == 0 {
            return Err(Error::Validation("returns panel has no periods".into()));
        }
        for (row, ticker) in returns.iter().zip(&tickers) {
            if row.len() != periods {
                return Err(Error::Validation(format!(
                    "ticker {ticker} has ragged returns row"
                )));
            }
            if row.iter().any(|r| !r.is_finite()) {
                return Err(Error::Validation(format!(
                    "ticker {ticker} has non-finite return"
                )));
            }
        }
        Ok(Self { tickers, returns })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn num_companies(&self) -> usize {
        self.tickers.len()
    }

    pub fn num_periods(&self) -> usize {
        self.returns[0].len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.returns[i]
    }

    /// Returns of every company at period `t`, in row order.
    pub fn column(&self, t: usize) -> Vec<f64> {
        self.returns.iter().map(|row| row[t]).collect()
    }
}

/// Simple returns `r_t = (p_t - p_{t-1}) / p_{t-1}`, one per consecutive
/// date pair.
pub fn compute_returns(panel: &PricePanel) -> ReturnsPanel {
    let returns = (0..panel.num_companies())
        .map(|i| {
            let prices = panel.row(i);
            prices
                .windows(2)
                .map(|w| (w[1] - w[0]) / w[0])
                .collect::<Vec<f64>>()
        })
        .collect();
    ReturnsPanel {
        tickers: panel.tickers().to_vec(),
        returns,
    }
}

/// Result of loading a price file: the validated panel plus the tickers that
/// were excluded for missing one or more dates.
#[derive(Debug)]
pub struct PriceLoad {
    pub panel: PricePanel,
    /// Tickers dropped because they lacked complete pricing data.
    pub excluded: Vec<String>,
}

/// Loads a price CSV in either long (`date,ticker,close`) or wide
/// (`date,<TICKER1>,...`) form, keyed off the header.
///
/// Tickers missing any date in the file are excluded (reported in
/// [`PriceLoad::excluded`]); non-positive prices and duplicate
/// `(date, ticker)` cells are hard validation errors.
pub fn load_prices(path: &Path) -> Result<PriceLoad> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty price file"))?;
    let fields: Vec<String> = header
        .split(',')
        .map(|f| f.trim().to_string())
        .collect();
    if fields.len() < 2 || !fields[0].eq_ignore_ascii_case("date") {
        return Err(Error::parse(
            path,
            1,
            "price file header must start with `date`",
        ));
    }
    let long_form = fields.len() == 3
        && fields[1].eq_ignore_ascii_case("ticker")
        && fields[2].eq_ignore_ascii_case("close");

    // (ticker, date) -> price, both axes ordered
    let mut cells: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    let mut dates: BTreeSet<NaiveDate> = BTreeSet::new();

    if long_form {
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected 3 fields, got {}", parts.len()),
                ));
            }
            let date = parse_date(parts[0], path, lineno)?;
            let ticker = parts[1].to_string();
            if !is_valid_ticker(&ticker) {
                return Err(Error::parse(path, lineno, format!("invalid ticker {ticker:?}")));
            }
            let close = parse_price(parts[2], path, lineno)?;
            if close <= 0.0 {
                return Err(Error::Validation(format!(
                    "non-positive close {close} for {ticker} on {date} ({}:{lineno})",
                    path.display()
                )));
            }
            dates.insert(date);
            if cells.entry(ticker.clone()).or_default().insert(date, close).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate (date, ticker) cell: {date}, {ticker} ({}:{lineno})",
                    path.display()
                )));
            }
        }
    } else {
        let tickers: Vec<String> = fields[1..].iter().map(|t| t.to_string()).collect();
        for t in &tickers {
            if !is_valid_ticker(t) {
                return Err(Error::parse(path, 1, format!("invalid ticker {t:?} in header")));
            }
        }
        {
            let mut seen = BTreeSet::new();
            if let Some(dup) = tickers.iter().find(|t| !seen.insert(t.as_str())) {
                return Err(Error::parse(path, 1, format!("duplicate ticker {dup:?} in header")));
            }
        }
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != tickers.len() + 1 {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected {} fields, got {}", tickers.len() + 1, parts.len()),
                ));
            }
            let date = parse_date(parts[0], path, lineno)?;
            if !dates.insert(date) {
                return Err(Error::Validation(format!(
                    "duplicate date {date} ({}:{lineno})",
                    path.display()
                )));
            }
            for (ticker, cell) in tickers.iter().zip(&parts[1..]) {
                if cell.is_empty() {
                    continue; // missing cell: ticker gets excluded below
                }
                let close = parse_price(cell, path, lineno)?;
                if close <= 0.0 {
                    return Err(Error::Validation(format!(
                        "non-positive close {close} for {ticker} on {date} ({}:{lineno})",
                        path.display()
                    )));
                }
                cells.entry(ticker.clone()).or_default().insert(date, close);
            }
        }
        // Wide-format tickers with no cells at all still count as present.
        for t in tickers {
            cells.entry(t).or_default();
        }
    }

    let dates: Vec<NaiveDate> = dates.into_iter().collect();
    let mut kept = Vec::new();
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (ticker, by_date) in cells {
        if by_date.len() == dates.len() {
            rows.push(dates.iter().map(|d| by_date[d]).collect());
            kept.push(ticker);
        } else {
            excluded.push(ticker);
        }
    }
    if kept.is_empty() {
        return Err(Error::Validation(format!(
            "no ticker in {} has complete pricing data",
            path.display()
        )));
    }
    let panel = PricePanel::new(kept, dates, rows)?;
    Ok(PriceLoad { panel, excluded })
}

fn parse_date(s: &str, path: &Path, lineno: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| Error::parse(path, lineno, format!("bad date {s:?}: {e}")))
}

fn parse_price(s: &str, path: &Path, lineno: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(path, lineno, format!("bad price {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, lineno, format!("non-finite price {s:?}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn long_format_minimal() {
        let f = write_tmp(
            "date,ticker,close\n\
             2020-01-01,AAA,100.0\n\
             2020-01-02,AAA,110.0\n\
             2020-01-03,AAA,99.0\n\
             2020-01-01,BBB,50.0\n\
             2020-01-02,BBB,50.0\n\
             2020-01-03,BBB,50.0\n",
        );
        let load = load_prices(f.path()).unwrap();
        assert_eq!(load.panel.num_companies(), 2);
        assert_eq!(load.panel.dates().len(), 3);
        assert!(load.excluded.is_empty());
        assert_eq!(load.panel.tickers(), &["AAA", "BBB"]);
    }

    #[test]
    fn wide_format_minimal() {
        let f = write_tmp(
            "date,AAA,BBB\n\
             2020-01-02,110.0,50.0\n\
             2020-01-01,100.0,50.0\n\
             2020-01-03,99.0,50.0\n",
        );
        let load = load_prices(f.path()).unwrap();
        assert_eq!(load.panel.num_companies(), 2);
        // dates get sorted ascending
        assert_eq!(load.panel.row(0), &[100.0, 110.0, 99.0]);
    }

    #[test]
    fn ticker_missing_a_date_is_excluded_with_warning() {
        let f = write_tmp(
            "date,ticker,close\n\
             2020-01-01,AAA,100.0\n\
             2020-01-02,AAA,110.0\n\
             2020-01-01,XYZ,10.0\n",
        );
        let load = load_prices(f.path()).unwrap();
        assert_eq!(load.panel.tickers(), &["AAA"]);
        assert_eq!(load.excluded, vec!["XYZ".to_string()]);
    }

    #[test]
    fn negative_close_is_a_validation_error() {
        let f = write_tmp(
            "date,ticker,close\n\
             2020-01-01,AAA,100.0\n\
             2020-01-02,AAA,-5.0\n",
        );
        let err = load_prices(f.path()).unwrap_err();
        assert_eq!(err.category(), "validation");
        assert!(err.to_string().contains("-5"));
    }

    #[test]
    fn duplicate_cell_is_a_validation_error() {
        let f = write_tmp(
            "date,ticker,close\n\
             2020-01-01,AAA,100.0\n\
             2020-01-01,AAA,101.0\n\
             2020-01-02,AAA,102.0\n",
        );
        let err = load_prices(f.path()).unwrap_err();
        assert_eq!(err.category(), "validation");
    }

    #[test]
    fn malformed_row_names_the_line() {
        let f = write_tmp(
            "date,ticker,close\n\
             2020-01-01,AAA,100.0\n\
             2020-01-02,AAA,ten\n",
        );
        let err = load_prices(f.path()).unwrap_err();
        assert_eq!(err.category(), "parse");
        assert!(err.to_string().contains(":3"));
    }

    #[test]
    fn returns_match_the_formula() {
        let panel = PricePanel::new(
            vec!["AAA".into()],
            vec![d(1), d(2), d(3)],
            vec![vec![100.0, 110.0, 99.0]],
        )
        .unwrap();
        let returns = compute_returns(&panel);
        assert_eq!(returns.row(0), &[0.10, -0.10]);
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let panel = PricePanel::new(
            vec!["AAA".into()],
            vec![d(1), d(2), d(3)],
            vec![vec![50.0, 50.0, 50.0]],
        )
        .unwrap();
        let returns = compute_returns(&panel);
        assert_eq!(returns.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn returns_match_elementwise_oracle_on_random_panel() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let companies = 5;
        let days = 10;
        let tickers: Vec<String> = (0..companies).map(|i| format!("{}{}", "T", ticker_suffix(i))).collect();
        let prices: Vec<Vec<f64>> = (0..companies)
            .map(|_| (0..days).map(|_| rng.gen_range(10.0..500.0)).collect())
            .collect();
        let dates: Vec<NaiveDate> = (1..=days as u32).map(d).collect();
        let panel = PricePanel::new(tickers, dates, prices.clone()).unwrap();
        let returns = compute_returns(&panel);
        for (i, series) in prices.iter().enumerate() {
            for t in 0..days - 1 {
                let expected = (series[t + 1] - series[t]) / series[t];
                let got = returns.row(i)[t];
                let rel = ((got - expected) / expected.abs().max(1e-300)).abs();
                assert!(rel < 1e-15, "company {i} period {t}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn prices_reconstruct_from_returns() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let prices: Vec<f64> = (0..40).map(|_| rng.gen_range(1.0..1000.0)).collect();
        let dates: Vec<NaiveDate> = (0..40)
            .map(|i| d(1) + chrono::Duration::days(i))
            .collect();
        let panel = PricePanel::new(vec!["AAA".into()], dates, vec![prices.clone()]).unwrap();
        let returns = compute_returns(&panel);
        let mut p = prices[0];
        for (t, r) in returns.row(0).iter().enumerate() {
            p *= 1.0 + r;
            let rel = ((p - prices[t + 1]) / prices[t + 1]).abs();
            assert!(rel < 1e-12);
        }
    }

    #[test]
    fn returns_row_order_matches_panel() {
        let panel = PricePanel::new(
            vec!["ZZZ".into(), "AAA".into()],
            vec![d(1), d(2)],
            vec![vec![10.0, 11.0], vec![20.0, 22.0]],
        )
        .unwrap();
        let returns = compute_returns(&panel);
        assert_eq!(returns.tickers(), panel.tickers());
    }

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, day).unwrap()
    }

    fn ticker_suffix(i: usize) -> char {
        (b'A' + i as u8) as char
    }
}
