//! Target:context training-set generation from returns and news co-mentions.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{NewsArticle, ReturnsPanel};
use crate::{Error, Result};

/// Which data modality produced a context set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Returns,
    News,
}

/// Where a context set came from: a return period (returns modality) or an
/// article id (news modality).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Period(usize),
    Article(String),
}

/// One training example: a target company plus the companies that co-occur
/// with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextSet {
    pub target: usize,
    pub context: Vec<usize>,
    pub modality: Modality,
    pub origin: Origin,
}

impl ContextSet {
    /// Checks the type invariants against a universe of `universe_size`
    /// companies.
    pub fn validate(&self, universe_size: usize) -> Result<()> {
        if self.target >= universe_size {
            return Err(Error::Validation(format!(
                "target index {} out of range for universe of {universe_size}",
                self.target
            )));
        }
        if self.context.is_empty() {
            return Err(Error::Validation("empty context".into()));
        }
        let mut sorted = self.context.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.context.len() {
            return Err(Error::Validation("duplicate context indices".into()));
        }
        if self.context.contains(&self.target) {
            return Err(Error::Validation("target appears in its own context".into()));
        }
        if let Some(&m) = self.context.iter().find(|&&m| m >= universe_size) {
            return Err(Error::Validation(format!(
                "context index {m} out of range for universe of {universe_size}"
            )));
        }
        Ok(())
    }
}

/// Context-set tie-breaking rule. Only one rule is defined; the field exists
/// so configs can state it explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    TickerLexicographic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextGenConfig {
    /// Context size C for the returns modality.
    pub context_size: usize,
    /// Drop sets whose target return falls inside the day's interquartile
    /// range.
    pub iqr_filter: bool,
    pub tie_break: TieBreak,
}

impl Default for ContextGenConfig {
    fn default() -> Self {
        Self {
            context_size: 3,
            iqr_filter: true,
            tie_break: TieBreak::TickerLexicographic,
        }
    }
}

impl ContextGenConfig {
    pub fn validate(&self, universe_size: usize) -> Result<()> {
        if self.context_size == 0 {
            return Err(Error::Config("context_size must be positive".into()));
        }
        if self.context_size >= universe_size {
            return Err(Error::Config(format!(
                "context_size {} must be smaller than the universe size {universe_size}",
                self.context_size
            )));
        }
        if self.iqr_filter && universe_size < 4 {
            return Err(Error::Config(format!(
                "the IQR filter needs at least 4 companies, got {universe_size}"
            )));
        }
        Ok(())
    }
}

/// 25th and 75th percentiles of one day's cross-section of returns, using
/// linear interpolation between closest order statistics.
pub fn daily_quartiles(returns_column: &[f64]) -> Result<(f64, f64)> {
    if returns_column.len() < 4 {
        return Err(Error::Validation(format!(
            "quartiles need at least 4 values, got {}",
            returns_column.len()
        )));
    }
    let mut sorted = returns_column.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok((percentile(&sorted, 0.25), percentile(&sorted, 0.75)))
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Generates one returns context set per (company, period) pair that survives
/// the IQR filter.
///
/// The context is the `C` companies with the closest same-day return, by
/// lowest `|r_t^i - r_t^j|`, ties broken ticker-lexicographically. A target
/// whose return lies inside the closed interval `[q1, q3]` of that day's
/// returns is filtered out when `iqr_filter` is on. Output is ordered by
/// `(t, target ticker)`, contexts by ascending distance.
pub fn returns_context_sets(
    returns: &ReturnsPanel,
    cfg: &ContextGenConfig,
) -> Result<Vec<ContextSet>> {
    let n = returns.num_companies();
    cfg.validate(n)?;
    let tickers = returns.tickers();

    let mut ticker_order: Vec<usize> = (0..n).collect();
    ticker_order.sort_by(|&a, &b| tickers[a].cmp(&tickers[b]));

    let mut sets = Vec::new();
    for t in 0..returns.num_periods() {
        let column = returns.column(t);
        let bounds = if cfg.iqr_filter {
            Some(daily_quartiles(&column)?)
        } else {
            None
        };
        for &i in &ticker_order {
            let target_return = column[i];
            if let Some((q1, q3)) = bounds {
                if target_return >= q1 && target_return <= q3 {
                    continue;
                }
            }
            let mut candidates: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let key = |j: usize| (f64_key((column[j] - target_return).abs()), &tickers[j]);
            // partial selection of the C nearest, then rank the prefix
            candidates.select_nth_unstable_by(cfg.context_size - 1, |&a, &b| {
                key(a).cmp(&key(b))
            });
            candidates.truncate(cfg.context_size);
            candidates.sort_by(|&a, &b| key(a).cmp(&key(b)));
            sets.push(ContextSet {
                target: i,
                context: candidates,
                modality: Modality::Returns,
                origin: Origin::Period(t),
            });
        }
    }
    Ok(sets)
}

/// Total-order key for a finite f64 (distances here are always finite).
fn f64_key(v: f64) -> OrderedF64 {
    OrderedF64(v)
}

#[derive(PartialEq)]
struct OrderedF64(f64);

impl Eq for OrderedF64 {}

impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Generates news context sets: an article with `n >= 2` distinct mentions
/// yields `n` sets, each mention once as the target with the remaining
/// `n - 1` as context.
///
/// Output is ordered by `(article_id, target ticker)`; articles must already
/// carry deduplicated mention lists.
pub fn news_context_sets(articles: &[NewsArticle], tickers: &[String]) -> Vec<ContextSet> {
    let mut order: Vec<usize> = (0..articles.len()).collect();
    order.sort_by(|&a, &b| articles[a].article_id.cmp(&articles[b].article_id));

    let mut sets = Vec::new();
    for idx in order {
        let article = &articles[idx];
        if article.mentions.len() < 2 {
            continue;
        }
        let mut mentions = article.mentions.clone();
        mentions.sort_by(|&a, &b| tickers[a].cmp(&tickers[b]));
        for &target in &mentions {
            let context: Vec<usize> =
                mentions.iter().copied().filter(|&m| m != target).collect();
            sets.push(ContextSet {
                target,
                context,
                modality: Modality::News,
                origin: Origin::Article(article.article_id.clone()),
            });
        }
    }
    sets
}

#[derive(Serialize, Deserialize)]
struct ContextSetRecord {
    target: String,
    context: Vec<String>,
    modality: Modality,
    origin: String,
}

/// Writes context sets as line-delimited JSON, e.g.
/// `{"target":"MSFT","context":["IBM","AAPL","ORCL"],"modality":"returns","origin":"2000-01-03"}`.
///
/// Returns-modality origins are written as the calendar date the return
/// realized on, i.e. `dates[t + 1]` for period `t`.
pub fn write_context_sets_jsonl(
    path: &Path,
    sets: &[ContextSet],
    tickers: &[String],
    dates: &[NaiveDate],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for set in sets {
        let origin = match &set.origin {
            Origin::Period(t) => {
                let date = dates.get(t + 1).ok_or_else(|| {
                    Error::Validation(format!("period {t} out of range for {} dates", dates.len()))
                })?;
                date.format("%Y-%m-%d").to_string()
            }
            Origin::Article(id) => id.clone(),
        };
        let record = ContextSetRecord {
            target: tickers[set.target].clone(),
            context: set.context.iter().map(|&c| tickers[c].clone()).collect(),
            modality: set.modality,
            origin,
        };
        serde_json::to_writer(&mut w, &record).map_err(|e| {
            Error::Validation(format!("cannot serialize context set: {e}"))
        })?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads context sets written by [`write_context_sets_jsonl`], resolving
/// tickers against `tickers` and returns-origin dates against `dates`.
pub fn read_context_sets_jsonl(
    path: &Path,
    tickers: &[String],
    dates: &[NaiveDate],
) -> Result<Vec<ContextSet>> {
    let ticker_index: BTreeMap<&str, usize> = tickers
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let date_index: BTreeMap<NaiveDate, usize> = dates
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, d)| (*d, i - 1))
        .collect();

    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut sets = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ContextSetRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, lineno, format!("bad context set: {e}")))?;
        let resolve = |t: &str| -> Result<usize> {
            ticker_index.get(t).copied().ok_or_else(|| {
                Error::parse(path, lineno, format!("ticker {t:?} not in universe"))
            })
        };
        let target = resolve(&record.target)?;
        let context = record
            .context
            .iter()
            .map(|t| resolve(t))
            .collect::<Result<Vec<usize>>>()?;
        let origin = match record.modality {
            Modality::Returns => {
                let date = NaiveDate::parse_from_str(&record.origin, "%Y-%m-%d").map_err(|e| {
                    Error::parse(path, lineno, format!("bad origin date {:?}: {e}", record.origin))
                })?;
                let period = date_index.get(&date).copied().ok_or_else(|| {
                    Error::parse(path, lineno, format!("origin date {date} not in the panel"))
                })?;
                Origin::Period(period)
            }
            Modality::News => Origin::Article(record.origin),
        };
        let set = ContextSet {
            target,
            context,
            modality: record.modality,
            origin,
        };
        set.validate(tickers.len())
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        sets.push(set);
    }
    Ok(sets)
}
