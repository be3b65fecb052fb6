//! Company universe construction: prices, labels, news and the joint
//! inclusion filter.

pub mod news;
pub mod prices;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use news::{
    extract_tickers, load_news, NewsArticle, NewsLoad, TickerPattern, DEFAULT_TICKER_PATTERN,
};
pub use prices::{compute_returns, load_prices, PriceLoad, PricePanel, ReturnsPanel};

/// A company with its two-level industry labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCompany {
    pub ticker: String,
    pub name: String,
    /// Coarse sector label ("Industry 1"), e.g. "Finance".
    pub sector1: String,
    /// Fine sector label ("Industry 2"), e.g. "Major Bank".
    pub sector2: String,
}

/// Tickers are nonempty uppercase ASCII, at most 5 letters.
pub fn is_valid_ticker(t: &str) -> bool {
    !t.is_empty() && t.len() <= 5 && t.bytes().all(|b| b.is_ascii_uppercase())
}

/// Parsed labels file: companies sorted by ticker plus the closed set of
/// coarse sector values.
#[derive(Debug, Clone)]
pub struct LabelsFile {
    pub companies: Vec<LabeledCompany>,
    /// Closed set of valid `sector1` values. Taken from a `# sector1: A,B,...`
    /// comment line when the file declares one, otherwise inferred from the
    /// distinct values present.
    pub sector1_values: Vec<String>,
}

/// Loads a labels CSV with header `ticker,name,sector1,sector2`.
///
/// Lines starting with `#` are comments; a `# sector1: ...` comment declares
/// the closed set of coarse sector labels and makes out-of-set values an
/// error.
pub fn load_labels(path: &Path) -> Result<LabelsFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut declared: Option<Vec<String>> = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(values) = rest.trim().strip_prefix("sector1:") {
                declared = Some(
                    values
                        .split(',')
                        .map(|v| v.trim().to_string())
                        .filter(|v| !v.is_empty())
                        .collect(),
                );
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    {
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(path, 1, e.to_string()))?;
        let expected = ["ticker", "name", "sector1", "sector2"];
        let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
        if got != expected {
            return Err(Error::parse(
                path,
                1,
                format!("labels header must be `ticker,name,sector1,sector2`, got {got:?}"),
            ));
        }
    }

    let mut companies = Vec::new();
    let mut seen = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 4 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 4 fields, got {}", record.len()),
            ));
        }
        let company = LabeledCompany {
            ticker: record[0].to_string(),
            name: record[1].to_string(),
            sector1: record[2].to_string(),
            sector2: record[3].to_string(),
        };
        if !is_valid_ticker(&company.ticker) {
            return Err(Error::parse(
                path,
                line,
                format!("invalid ticker {:?}", company.ticker),
            ));
        }
        if company.sector1.is_empty() || company.sector2.is_empty() {
            return Err(Error::parse(
                path,
                line,
                format!("empty sector label for {}", company.ticker),
            ));
        }
        if !seen.insert(company.ticker.clone()) {
            return Err(Error::Validation(format!(
                "duplicate ticker {:?} in labels file",
                company.ticker
            )));
        }
        companies.push(company);
    }
    if companies.is_empty() {
        return Err(Error::Validation(format!(
            "labels file {} has no companies",
            path.display()
        )));
    }
    companies.sort_by(|a, b| a.ticker.cmp(&b.ticker));

    let sector1_values = match declared {
        Some(values) => {
            let set: BTreeSet<&String> = values.iter().collect();
            for c in &companies {
                if !set.contains(&c.sector1) {
                    return Err(Error::Validation(format!(
                        "sector1 {:?} for {} is not in the declared set {values:?}",
                        c.sector1, c.ticker
                    )));
                }
            }
            values
        }
        None => {
            let set: BTreeSet<String> = companies.iter().map(|c| c.sector1.clone()).collect();
            set.into_iter().collect()
        }
    };

    Ok(LabelsFile {
        companies,
        sector1_values,
    })
}

/// A filtered universe with its aligned price panel and re-indexed articles.
#[derive(Debug)]
pub struct UniverseBuild {
    /// Companies sorted by ticker; row order of `panel` matches.
    pub universe: Vec<LabeledCompany>,
    pub panel: PricePanel,
    /// Articles with mentions re-indexed against `universe`; articles left
    /// with no in-universe mention are dropped.
    pub articles: Vec<NewsArticle>,
    /// Tickers dropped by the filter, with the reason.
    pub dropped: Vec<(String, String)>,
}

/// Applies the joint inclusion criterion: complete pricing data (already
/// guaranteed by the panel), a label row, and at least `min_mentions`
/// distinct articles mentioning the company.
///
/// `articles` mention indices must refer to `panel` row order.
pub fn build_universe(
    panel: &PricePanel,
    articles: &[NewsArticle],
    labels: &[LabeledCompany],
    min_mentions: usize,
) -> Result<UniverseBuild> {
    let by_ticker: BTreeMap<&str, &LabeledCompany> =
        labels.iter().map(|c| (c.ticker.as_str(), c)).collect();

    let n = panel.num_companies();
    let mut mention_counts = vec![0usize; n];
    for article in articles {
        for &m in &article.mentions {
            if m >= n {
                return Err(Error::Validation(format!(
                    "article {} mentions index {m}, but the panel has {n} companies",
                    article.article_id
                )));
            }
            mention_counts[m] += 1;
        }
        let mut dedup = article.mentions.clone();
        dedup.sort_unstable();
        dedup.dedup();
        if dedup.len() != article.mentions.len() {
            return Err(Error::Validation(format!(
                "article {} has duplicate mentions",
                article.article_id
            )));
        }
    }

    let mut universe = Vec::new();
    let mut dropped = Vec::new();
    let mut remap = vec![None; n];
    for (i, ticker) in panel.tickers().iter().enumerate() {
        match by_ticker.get(ticker.as_str()) {
            None => dropped.push((ticker.clone(), "no label row".to_string())),
            Some(_) if mention_counts[i] < min_mentions => dropped.push((
                ticker.clone(),
                format!(
                    "mentioned in {} articles, need at least {min_mentions}",
                    mention_counts[i]
                ),
            )),
            Some(c) => {
                remap[i] = Some(universe.len());
                universe.push((*c).clone());
            }
        }
    }
    if universe.is_empty() {
        return Err(Error::Config(format!(
            "universe is empty after filtering (min_mentions = {min_mentions})"
        )));
    }

    let filtered_panel = panel.retain_rows(&|i| remap[i].is_some())?;

    let mut filtered_articles = Vec::new();
    for article in articles {
        let mentions: Vec<usize> = article.mentions.iter().filter_map(|&m| remap[m]).collect();
        if !mentions.is_empty() {
            filtered_articles.push(NewsArticle {
                article_id: article.article_id.clone(),
                date: article.date,
                text: article.text.clone(),
                mentions,
            });
        }
    }

    Ok(UniverseBuild {
        universe,
        panel: filtered_panel,
        articles: filtered_articles,
        dropped,
    })
}
