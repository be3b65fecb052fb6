//! News corpus loading and regex ticker extraction.

use std::collections::HashMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::corpus::LabeledCompany;
use crate::{Error, Result};

/// Default mention style: a parenthesized uppercase symbol with a one-letter
/// exchange suffix, e.g. `(JPM.N)`.
pub const DEFAULT_TICKER_PATTERN: &str = r"\(([A-Z]{1,5})\.[A-Z]\)";

/// A compiled ticker-mention pattern with exactly one capture group holding
/// the bare symbol.
#[derive(Debug, Clone)]
pub struct TickerPattern {
    regex: regex::Regex,
}

impl TickerPattern {
    pub fn new(pattern: &str) -> Result<Self> {
        let regex = regex::Regex::new(pattern)
            .map_err(|e| Error::Config(format!("invalid ticker pattern {pattern:?}: {e}")))?;
        if regex.captures_len() != 2 {
            return Err(Error::Config(format!(
                "ticker pattern {pattern:?} must have exactly one capture group for the symbol, found {}",
                regex.captures_len() - 1
            )));
        }
        Ok(Self { regex })
    }

    pub fn as_str(&self) -> &str {
        self.regex.as_str()
    }
}

impl Default for TickerPattern {
    fn default() -> Self {
        Self::new(DEFAULT_TICKER_PATTERN).expect("default pattern compiles")
    }
}

/// One news document with its in-universe company mentions.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsArticle {
    pub article_id: String,
    pub date: Option<NaiveDate>,
    pub text: String,
    /// Deduplicated universe indices, in first-occurrence order.
    pub mentions: Vec<usize>,
}

/// Extracts in-universe company mentions from `text`.
///
/// Returns deduplicated universe indices in first-occurrence order; captured
/// symbols not in the universe are dropped.
pub fn extract_tickers(
    text: &str,
    pattern: &TickerPattern,
    universe: &[LabeledCompany],
) -> Vec<usize> {
    let index: HashMap<&str, usize> = universe
        .iter()
        .enumerate()
        .map(|(i, c)| (c.ticker.as_str(), i))
        .collect();
    extract_with_index(text, pattern, &index)
}

fn extract_with_index(
    text: &str,
    pattern: &TickerPattern,
    index: &HashMap<&str, usize>,
) -> Vec<usize> {
    let mut seen = vec![];
    for caps in pattern.regex.captures_iter(text) {
        let symbol = caps.get(1).map(|m| m.as_str()).unwrap_or("");
        if let Some(&i) = index.get(symbol) {
            if !seen.contains(&i) {
                seen.push(i);
            }
        }
    }
    seen
}

/// Result of loading a news corpus: the articles plus any documents skipped
/// because their text could not be decoded.
#[derive(Debug)]
pub struct NewsLoad {
    pub articles: Vec<NewsArticle>,
    pub skipped: Vec<String>,
}

#[derive(Deserialize)]
struct JsonArticle {
    id: String,
    #[serde(default)]
    date: Option<String>,
    text: String,
}

/// Loads a news corpus from either a directory of `.txt` files (article id =
/// file name) or a line-delimited JSON file with fields `id`, `date`
/// (optional, ISO-8601) and `text`.
///
/// Mention lists are populated against `universe` via [`extract_tickers`];
/// articles come back sorted by article id.
pub fn load_news(
    path: &Path,
    pattern: &TickerPattern,
    universe: &[LabeledCompany],
) -> Result<NewsLoad> {
    let index: HashMap<&str, usize> = universe
        .iter()
        .enumerate()
        .map(|(i, c)| (c.ticker.as_str(), i))
        .collect();

    let mut articles = Vec::new();
    let mut skipped = Vec::new();

    if path.is_dir() {
        let mut entries: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(path, e))?
            .into_iter()
            .filter(|e| e.path().extension().is_some_and(|ext| ext == "txt"))
            .collect();
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let file_path = entry.path();
            let article_id = entry.file_name().to_string_lossy().into_owned();
            let bytes = std::fs::read(&file_path).map_err(|e| Error::io(&file_path, e))?;
            let text = match String::from_utf8(bytes) {
                Ok(t) => t,
                Err(_) => {
                    skipped.push(article_id);
                    continue;
                }
            };
            let mentions = extract_with_index(&text, pattern, &index);
            articles.push(NewsArticle {
                article_id,
                date: None,
                text,
                mentions,
            });
        }
    } else {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        for (idx, raw_line) in bytes.split(|&b| b == b'\n').enumerate() {
            let lineno = idx + 1;
            let line = match std::str::from_utf8(raw_line) {
                Ok(l) => l.trim(),
                Err(_) => {
                    skipped.push(format!("line {lineno}"));
                    continue;
                }
            };
            if line.is_empty() {
                continue;
            }
            let doc: JsonArticle = serde_json::from_str(line)
                .map_err(|e| Error::parse(path, lineno, format!("bad article JSON: {e}")))?;
            let date = match doc.date {
                Some(ref s) => Some(NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| {
                    Error::parse(path, lineno, format!("bad article date {s:?}: {e}"))
                })?),
                None => None,
            };
            let mentions = extract_with_index(&doc.text, pattern, &index);
            articles.push(NewsArticle {
                article_id: doc.id,
                date,
                text: doc.text,
                mentions,
            });
        }
    }

    articles.sort_by(|a, b| a.article_id.cmp(&b.article_id));
    if let Some(w) = articles.windows(2).find(|w| w[0].article_id == w[1].article_id) {
        return Err(Error::Validation(format!(
            "duplicate article id {:?} in {}",
            w[0].article_id,
            path.display()
        )));
    }
    Ok(NewsLoad { articles, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn company(ticker: &str) -> LabeledCompany {
        LabeledCompany {
            ticker: ticker.to_string(),
            name: format!("{ticker} Corp"),
            sector1: "Finance".to_string(),
            sector2: "Major Bank".to_string(),
        }
    }

    #[test]
    fn extracts_reuters_style_mentions() {
        let universe = vec![company("JPM"), company("C")];
        let got = extract_tickers(
            "JPMorgan Chase & Co (JPM.N) and Citigroup (C.N)",
            &TickerPattern::default(),
            &universe,
        );
        assert_eq!(got, vec![0, 1]);
    }

    #[test]
    fn no_parenthesized_tickers_means_no_mentions() {
        let universe = vec![company("JPM")];
        let got = extract_tickers(
            "markets were quiet on Tuesday",
            &TickerPattern::default(),
            &universe,
        );
        assert!(got.is_empty());
    }

    #[test]
    fn dedups_and_drops_out_of_universe_symbols() {
        let universe = vec![company("JPM")];
        let got = extract_tickers(
            "(JPM.N) rallied ... (JPM.N) closed higher ... (XXXX.N) fell",
            &TickerPattern::default(),
            &universe,
        );
        assert_eq!(got, vec![0]);
    }

    #[test]
    fn pattern_without_capture_group_is_a_config_error() {
        let err = TickerPattern::new(r"\([A-Z]+\)").unwrap_err();
        assert_eq!(err.category(), "config");
    }

    #[test]
    fn invalid_regex_is_a_config_error() {
        let err = TickerPattern::new(r"\((").unwrap_err();
        assert_eq!(err.category(), "config");
    }

    #[test]
    fn loads_txt_directory_sorted_by_file_name() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.txt"), "Citigroup (C.N) gained").unwrap();
        std::fs::write(dir.path().join("a.txt"), "JPMorgan (JPM.N) fell").unwrap();
        std::fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let universe = vec![company("C"), company("JPM")];
        let load = load_news(dir.path(), &TickerPattern::default(), &universe).unwrap();
        assert_eq!(load.articles.len(), 2);
        assert_eq!(load.articles[0].article_id, "a.txt");
        assert_eq!(load.articles[0].mentions, vec![1]);
        assert_eq!(load.articles[1].mentions, vec![0]);
    }

    #[test]
    fn loads_jsonl_and_skips_undecodable_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("news.jsonl");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(
            br#"{"id":"n2","date":"2020-03-01","text":"Citigroup (C.N) up"}"#,
        );
        bytes.push(b'\n');
        bytes.extend_from_slice(&[0xff, 0xfe, b'b', b'a', b'd']);
        bytes.push(b'\n');
        bytes.extend_from_slice(br#"{"id":"n1","text":"JPMorgan (JPM.N) down"}"#);
        bytes.push(b'\n');
        std::fs::write(&path, bytes).unwrap();
        let universe = vec![company("C"), company("JPM")];
        let load = load_news(&path, &TickerPattern::default(), &universe).unwrap();
        assert_eq!(load.skipped.len(), 1);
        assert_eq!(load.articles.len(), 2);
        // sorted by id
        assert_eq!(load.articles[0].article_id, "n1");
        assert_eq!(load.articles[0].date, None);
        assert_eq!(
            load.articles[1].date,
            Some(NaiveDate::from_ymd_opt(2020, 3, 1).unwrap())
        );
    }
}
