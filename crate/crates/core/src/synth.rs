//! Seeded synthetic datasets with planted sector structure, for desk-scale
//! verification: prices whose returns share a per-sector factor, and news
//! articles whose co-mentions are biased toward one sector.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{LabeledCompany, NewsArticle, PricePanel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_sectors: usize,
    pub companies_per_sector: usize,
    /// Number of price dates; returns get one fewer period.
    pub n_days: usize,
    pub n_articles: usize,
    /// Pairwise correlation of same-sector returns, in `[0, 1)`.
    pub intra_sector_return_correlation: f64,
    /// Probability that an article draws all its companies from one sector.
    pub co_mention_bias: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_sectors: 4,
            companies_per_sector: 10,
            n_days: 250,
            n_articles: 400,
            intra_sector_return_correlation: 0.9,
            co_mention_bias: 0.9,
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn num_companies(&self) -> usize {
        self.n_sectors * self.companies_per_sector
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sectors == 0 || self.companies_per_sector == 0 {
            return Err(Error::Config("need at least one sector and company".into()));
        }
        if self.num_companies() > 500 {
            return Err(Error::Config(format!(
                "{} companies exceeds the desk-scale cap of 500",
                self.num_companies()
            )));
        }
        if self.n_days < 2 || self.n_days > 5000 {
            return Err(Error::Config(format!(
                "n_days must be in 2..=5000, got {}",
                self.n_days
            )));
        }
        if !(0.0..1.0).contains(&self.intra_sector_return_correlation) {
            return Err(Error::Config(
                "intra_sector_return_correlation must be in [0, 1)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.co_mention_bias) {
            return Err(Error::Config("co_mention_bias must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Deterministic ticker for a company index: `AAA`, `AAB`, ...
pub fn ticker_for_index(i: usize) -> String {
    let letters = [
        (i / 676) % 26,
        (i / 26) % 26,
        i % 26,
    ];
    letters.iter().map(|&l| (b'A' + l as u8) as char).collect()
}

const NAME_SUFFIXES: [&str; 6] = ["Corp", "Inc", "Group", "Holdings", "Industries", "Partners"];

/// A generated dataset, before serialization.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub companies: Vec<LabeledCompany>,
    pub panel: PricePanel,
    pub articles: Vec<NewsArticle>,
    pub sector1_values: Vec<String>,
}

/// Sector index of a company index under a spec's layout.
pub fn sector_of(spec: &SyntheticSpec, company: usize) -> usize {
    company / spec.companies_per_sector
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let n = spec.num_companies();

    let sector_names: Vec<String> = (0..spec.n_sectors)
        .map(|s| format!("Sector{:02}", s + 1))
        .collect();
    let companies: Vec<LabeledCompany> = (0..n)
        .map(|i| {
            let sector = sector_of(spec, i);
            let ticker = ticker_for_index(i);
            LabeledCompany {
                name: format!("{ticker} {}", NAME_SUFFIXES[i % NAME_SUFFIXES.len()]),
                sector1: sector_names[sector].clone(),
                sector2: format!(
                    "{} {}",
                    sector_names[sector],
                    if i % 2 == 0 { "Alpha" } else { "Beta" }
                ),
                ticker,
            }
        })
        .collect();

    // prices: r = vol * (sqrt(rho) * sector_factor + sqrt(1 - rho) * idio)
    let mut price_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vol = 0.02;
    let rho = spec.intra_sector_return_correlation;
    let (factor_w, idio_w) = (rho.sqrt(), (1.0 - rho).sqrt());
    let start = NaiveDate::from_ymd_opt(2006, 1, 2).expect("valid date");
    let dates: Vec<NaiveDate> = (0..spec.n_days)
        .map(|d| start + chrono::Duration::days(d as i64))
        .collect();
    let mut prices: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![price_rng.gen_range(20.0..200.0)])
        .collect();
    for _ in 1..spec.n_days {
        let factors: Vec<f64> = (0..spec.n_sectors)
            .map(|_| StandardNormal.sample(&mut price_rng))
            .collect();
        for (i, series) in prices.iter_mut().enumerate() {
            let idio: f64 = StandardNormal.sample(&mut price_rng);
            let ret = (vol * (factor_w * factors[sector_of(spec, i)] + idio_w * idio)).max(-0.8);
            let last = *series.last().expect("seeded above");
            series.push(last * (1.0 + ret));
        }
    }
    let panel = PricePanel::new(
        companies.iter().map(|c| c.ticker.clone()).collect(),
        dates.clone(),
        prices,
    )?;

    // articles: biased toward single-sector co-mentions
    let mut news_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5EED_ACED_F00D_CAFE);
    let mut articles = Vec::with_capacity(spec.n_articles);
    for a in 0..spec.n_articles {
        let biased = spec.companies_per_sector >= 2
            && news_rng.gen_bool(spec.co_mention_bias);
        let mentions: Vec<usize> = if biased {
            let sector = news_rng.gen_range(0..spec.n_sectors);
            let pool_start = sector * spec.companies_per_sector;
            let m = news_rng.gen_range(2..=spec.companies_per_sector.min(5));
            rand::seq::index::sample(&mut news_rng, spec.companies_per_sector, m)
                .into_iter()
                .map(|offset| pool_start + offset)
                .collect()
        } else {
            let m = news_rng.gen_range(2..=n.min(5));
            rand::seq::index::sample(&mut news_rng, n, m).into_vec()
        };
        let date = dates[news_rng.gen_range(0..dates.len())];
        let text = article_text(a, &mentions, &companies);
        articles.push(NewsArticle {
            article_id: format!("a{a:06}"),
            date: Some(date),
            text,
            mentions,
        });
    }

    Ok(SyntheticData {
        companies,
        panel,
        articles,
        sector1_values: sector_names,
    })
}

fn article_text(index: usize, mentions: &[usize], companies: &[LabeledCompany]) -> String {
    let names: Vec<String> = mentions
        .iter()
        .map(|&m| format!("{} ({}.N)", companies[m].name, companies[m].ticker))
        .collect();
    match index % 3 {
        0 => format!(
            "Shares of {} moved together in heavy trading on Wednesday.",
            names.join(", ")
        ),
        1 => format!(
            "Analysts flagged {} after the sector update, citing common exposure.",
            names.join(" and ")
        ),
        _ => format!(
            "Market wrap: {} featured prominently in the session.",
            names.join("; ")
        ),
    }
}

/// File locations produced by [`write_files`].
#[derive(Debug, Clone)]
pub struct SynthPaths {
    pub prices: PathBuf,
    pub news: PathBuf,
    pub labels: PathBuf,
}

/// Serializes a generated dataset as `prices.csv` (wide form), `news.jsonl`
/// and `labels.csv` under `dir`.
pub fn write_files(data: &SyntheticData, dir: &Path) -> Result<SynthPaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = SynthPaths {
        prices: dir.join("prices.csv"),
        news: dir.join("news.jsonl"),
        labels: dir.join("labels.csv"),
    };

    let mut prices = String::from("date");
    for t in data.panel.tickers() {
        prices.push(',');
        prices.push_str(t);
    }
    prices.push('\n');
    for (d, date) in data.panel.dates().iter().enumerate() {
        prices.push_str(&date.format("%Y-%m-%d").to_string());
        for i in 0..data.panel.num_companies() {
            prices.push(',');
            prices.push_str(&format!("{}", data.panel.row(i)[d]));
        }
        prices.push('\n');
    }
    std::fs::write(&paths.prices, prices).map_err(|e| Error::io(&paths.prices, e))?;

    #[derive(Serialize)]
    struct Doc<'a> {
        id: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        date: Option<String>,
        text: &'a str,
    }
    let mut news = String::new();
    for article in &data.articles {
        let doc = Doc {
            id: &article.article_id,
            date: article.date.map(|d| d.format("%Y-%m-%d").to_string()),
            text: &article.text,
        };
        news.push_str(&serde_json::to_string(&doc).expect("article serializes"));
        news.push('\n');
    }
    std::fs::write(&paths.news, news).map_err(|e| Error::io(&paths.news, e))?;

    std::fs::write(&paths.labels, labels_csv(&data.companies, &data.sector1_values))
        .map_err(|e| Error::io(&paths.labels, e))?;
    Ok(paths)
}

/// Labels CSV text with the closed sector1 set declared up front.
pub fn labels_csv(companies: &[LabeledCompany], sector1_values: &[String]) -> String {
    let mut out = format!("# sector1: {}\n", sector1_values.join(","));
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["ticker", "name", "sector1", "sector2"])
        .expect("write to memory");
    for c in companies {
        writer
            .write_record([&c.ticker, &c.name, &c.sector1, &c.sector2])
            .expect("write to memory");
    }
    out.push_str(
        std::str::from_utf8(&writer.into_inner().expect("no partial flush"))
            .expect("csv is utf-8"),
    );
    out
}
