//! Similarity computations over trained embeddings: kNN retrieval,
//! high-similarity mismatch detection and similarity-graph export.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledCompany;
use crate::embedder::EmbeddingMatrix;
use crate::{Error, Result};

/// Cosine similarity, clamped into `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Validation(format!(
            "cosine of vectors with different lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (mut uu, mut vv, mut uv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        uu += a * a;
        vv += b * b;
        uv += a * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::Validation(
            "cosine similarity is undefined for a zero vector".into(),
        ));
    }
    Ok((uv / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Symmetric pairwise-similarity matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    tickers: Vec<String>,
    s: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn new(tickers: Vec<String>, s: Vec<Vec<f64>>) -> Result<Self> {
        let n = tickers.len();
        if n == 0 || s.len() != n || s.iter().any(|row| row.len() != n) {
            return Err(Error::Validation(format!(
                "similarity matrix must be {n} x {n}"
            )));
        }
        for (i, row) in s.iter().enumerate() {
            if row[i] != 1.0 {
                return Err(Error::Validation(format!(
                    "similarity diagonal for {} must be exactly 1, got {}",
                    tickers[i], row[i]
                )));
            }
            for (j, &value) in row.iter().enumerate() {
                if value != s[j][i] {
                    return Err(Error::Validation(format!(
                        "similarity matrix is not symmetric at ({i}, {j})"
                    )));
                }
                if !(-1.0..=1.0).contains(&value) {
                    return Err(Error::Validation(format!(
                        "similarity {value} at ({i}, {j}) is outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self { tickers, s })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn size(&self) -> usize {
        self.tickers.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[i][j]
    }
}

/// Pairwise cosine over embedding rows. Each pair is computed once and
/// mirrored, so symmetry and the unit diagonal hold exactly.
#[allow(clippy::needless_range_loop)] // (i, j) indexing mirrors both triangles
pub fn similarity_matrix(e: &EmbeddingMatrix) -> Result<SimilarityMatrix> {
    let n = e.num_companies();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        s[i][i] = 1.0;
        for j in (i + 1)..n {
            let sim = cosine(e.row(i), e.row(j)).map_err(|_| {
                let zero = if e.row(i).iter().all(|&v| v == 0.0) { i } else { j };
                Error::Validation(format!(
                    "embedding row for {} is all zeros",
                    e.tickers()[zero]
                ))
            })?;
            s[i][j] = sim;
            s[j][i] = sim;
        }
    }
    SimilarityMatrix::new(e.tickers().to_vec(), s)
}

/// Ranking metric for nearest-neighbor queries. Cosine is the default; the
/// alternatives rank by euclidean distance (ascending) or raw dot product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Cosine,
    Euclidean,
    Dot,
}

/// A ranked neighbor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub ticker: String,
    pub score: f64,
}

/// Top-k companies nearest to `query` by cosine similarity, query excluded,
/// ties broken ticker-lexicographically.
pub fn knn(e: &EmbeddingMatrix, query: &str, k: usize) -> Result<Vec<Neighbor>> {
    knn_with_metric(e, query, k, Metric::Cosine)
}

pub fn knn_with_metric(
    e: &EmbeddingMatrix,
    query: &str,
    k: usize,
    metric: Metric,
) -> Result<Vec<Neighbor>> {
    let qi = e.index_of(query).ok_or_else(|| Error::UnknownTicker {
        ticker: query.to_string(),
        suggestion: nearest_spelling(query, e.tickers()),
    })?;
    if k == 0 || k >= e.num_companies() {
        return Err(Error::Validation(format!(
            "k must be in 1..{} (universe size), got {k}",
            e.num_companies()
        )));
    }
    let q = e.row(qi);
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(e.num_companies() - 1);
    for j in 0..e.num_companies() {
        if j == qi {
            continue;
        }
        let score = match metric {
            Metric::Cosine => cosine(q, e.row(j))?,
            Metric::Euclidean => euclidean(q, e.row(j)),
            Metric::Dot => dot(q, e.row(j)),
        };
        scored.push((j, score));
    }
    scored.sort_by(|a, b| {
        let primary = match metric {
            Metric::Euclidean => a.1.total_cmp(&b.1),
            _ => b.1.total_cmp(&a.1),
        };
        primary.then_with(|| e.tickers()[a.0].cmp(&e.tickers()[b.0]))
    });
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(j, score)| Neighbor {
            ticker: e.tickers()[j].clone(),
            score,
        })
        .collect())
}

fn nearest_spelling(query: &str, tickers: &[String]) -> Option<String> {
    tickers
        .iter()
        .min_by_key(|t| (edit_distance(query, t), t.as_str()))
        .cloned()
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Which label level a mismatch scan compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectorLevel {
    /// sector1, the coarse "Industry 1" label
    #[default]
    Coarse,
    /// sector2, the fine "Industry 2" label
    Fine,
}

/// A high-similarity pair whose sector labels disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub ticker_a: String,
    pub ticker_b: String,
    pub similarity: f64,
    pub sector_a: String,
    pub sector_b: String,
}

/// All unordered pairs with similarity at least `min_sim` whose coarse
/// sector labels differ, sorted by similarity descending.
pub fn mismatches(
    s: &SimilarityMatrix,
    labels: &[LabeledCompany],
    min_sim: f64,
) -> Result<Vec<Mismatch>> {
    mismatches_by_level(s, labels, min_sim, SectorLevel::Coarse)
}

pub fn mismatches_by_level(
    s: &SimilarityMatrix,
    labels: &[LabeledCompany],
    min_sim: f64,
    level: SectorLevel,
) -> Result<Vec<Mismatch>> {
    if !(-1.0..=1.0).contains(&min_sim) {
        return Err(Error::Validation(format!(
            "min_sim must be in [-1, 1], got {min_sim}"
        )));
    }
    let sector_of = |ticker: &str| -> Result<&str> {
        labels
            .iter()
            .find(|c| c.ticker == ticker)
            .map(|c| match level {
                SectorLevel::Coarse => c.sector1.as_str(),
                SectorLevel::Fine => c.sector2.as_str(),
            })
            .ok_or_else(|| Error::Validation(format!("no label for ticker {ticker}")))
    };
    let mut out = Vec::new();
    for i in 0..s.size() {
        for j in (i + 1)..s.size() {
            let sim = s.get(i, j);
            if sim < min_sim {
                continue;
            }
            let (ta, tb) = (&s.tickers()[i], &s.tickers()[j]);
            let (sa, sb) = (sector_of(ta)?, sector_of(tb)?);
            if sa != sb {
                let (ticker_a, ticker_b, sector_a, sector_b) = if ta < tb {
                    (ta.clone(), tb.clone(), sa.to_string(), sb.to_string())
                } else {
                    (tb.clone(), ta.clone(), sb.to_string(), sa.to_string())
                };
                out.push(Mismatch {
                    ticker_a,
                    ticker_b,
                    similarity: sim,
                    sector_a,
                    sector_b,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.ticker_a.cmp(&b.ticker_a))
            .then_with(|| a.ticker_b.cmp(&b.ticker_b))
    });
    Ok(out)
}

/// A similarity-graph edge with lexicographically ordered endpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

/// Thresholded edge list over all unordered company pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub edges: Vec<Edge>,
    pub threshold: f64,
    pub universe_size: usize,
}

impl EdgeList {
    /// Achieved edge density: `|edges| / (|U| * (|U| - 1) / 2)`.
    pub fn density(&self) -> f64 {
        let pairs = self.universe_size * (self.universe_size - 1) / 2;
        if pairs == 0 {
            0.0
        } else {
            self.edges.len() as f64 / pairs as f64
        }
    }
}

/// Edges for every unordered pair with similarity strictly above
/// `threshold`. Self-pairs are never considered.
pub fn export_graph(s: &SimilarityMatrix, threshold: f64) -> Result<EdgeList> {
    if !(-1.0..=1.0).contains(&threshold) {
        return Err(Error::Validation(format!(
            "graph threshold must be in [-1, 1], got {threshold}"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..s.size() {
        for j in (i + 1)..s.size() {
            if s.get(i, j) > threshold {
                let (a, b) = (&s.tickers()[i], &s.tickers()[j]);
                let (source, target) = if a < b { (a, b) } else { (b, a) };
                edges.push(Edge {
                    source: source.clone(),
                    target: target.clone(),
                    weight: s.get(i, j),
                });
            }
        }
    }
    edges.sort_by(|a, b| a.source.cmp(&b.source).then_with(|| a.target.cmp(&b.target)));
    Ok(EdgeList {
        edges,
        threshold,
        universe_size: s.size(),
    })
}

/// Smallest threshold whose edge count stays within `target_density` of all
/// possible edges.
pub fn density_threshold(s: &SimilarityMatrix, target_density: f64) -> Result<f64> {
    if !(target_density > 0.0 && target_density <= 1.0) {
        return Err(Error::Validation(format!(
            "target density must be in (0, 1], got {target_density}"
        )));
    }
    let mut sims = Vec::new();
    for i in 0..s.size() {
        for j in (i + 1)..s.size() {
            sims.push(s.get(i, j));
        }
    }
    sims.sort_unstable_by(f64::total_cmp);
    let pairs = sims.len();
    let allowed = (target_density * pairs as f64).floor() as usize;
    if allowed >= pairs {
        return Ok(-1.0);
    }
    Ok(sims[pairs - allowed - 1])
}

/// Writes `source,target,weight` CSV importable by common graph tools.
pub fn write_edge_list_csv(path: &Path, edges: &EdgeList) -> Result<()> {
    let mut out = String::from("source,target,weight\n");
    for e in &edges.edges {
        out.push_str(&format!("{},{},{}\n", e.source, e.target, e.weight));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes a minimal GEXF 1.2 document with one node per company and one
/// weighted edge per entry.
pub fn write_edge_list_gexf(path: &Path, edges: &EdgeList, tickers: &[String]) -> Result<()> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n");
    out.push_str("  <graph defaultedgetype=\"undirected\">\n    <nodes>\n");
    for t in tickers {
        out.push_str(&format!("      <node id=\"{t}\" label=\"{t}\"/>\n"));
    }
    out.push_str("    </nodes>\n    <edges>\n");
    for (i, e) in edges.edges.iter().enumerate() {
        out.push_str(&format!(
            "      <edge id=\"{i}\" source=\"{}\" target=\"{}\" weight=\"{}\"/>\n",
            e.source, e.target, e.weight
        ));
    }
    out.push_str("    </edges>\n  </graph>\n</gexf>\n");
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// kNN results as an aligned plain-text table.
pub fn knn_table(query: &str, metric: Metric, neighbors: &[Neighbor]) -> String {
    let width = neighbors
        .iter()
        .map(|n| n.ticker.len())
        .chain(["neighbor".len()])
        .max()
        .unwrap_or(8);
    let mut out = format!("query: {query} ({metric:?})\n");
    out.push_str(&format!("{:<w$}  {:>10}\n", "neighbor", "score", w = width));
    for n in neighbors {
        out.push_str(&format!("{:<w$}  {:>10.4}\n", n.ticker, n.score, w = width));
    }
    out
}

/// kNN results as JSON.
#[derive(Debug, Serialize)]
pub struct KnnReport<'a> {
    pub query: &'a str,
    pub metric: Metric,
    pub k: usize,
    pub neighbors: &'a [Neighbor],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedder::{init_embeddings, TrainConfig};

    fn tickers(n: usize) -> Vec<String> {
        (0..n).map(crate::synth::ticker_for_index).collect()
    }

    fn matrix(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        let dim = rows[0].len();
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        EmbeddingMatrix::new(tickers(rows.len()), dim, values).unwrap()
    }

    #[test]
    fn cosine_basics() {
        let u = vec![0.3, -0.7, 2.0];
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let scaled: Vec<f64> = u.iter().map(|v| 3.5 * v).collect();
        assert!((cosine(&u, &scaled).unwrap() - 1.0).abs() < 1e-15);
        let negated: Vec<f64> = u.iter().map(|v| -0.25 * v).collect();
        assert!((cosine(&u, &negated).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_cosine_is_an_error() {
        assert!(cosine(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn similarity_matrix_is_exactly_symmetric_with_unit_diagonal() {
        let e = init_embeddings(&tickers(9), &TrainConfig::for_dim(6)).unwrap();
        let s = similarity_matrix(&e).unwrap();
        for i in 0..9 {
            assert_eq!(s.get(i, i), 1.0);
            for j in 0..9 {
                assert_eq!(s.get(i, j), s.get(j, i));
            }
        }
    }

    #[test]
    fn zero_row_is_named_in_the_error() {
        let e = matrix(vec![vec![1.0, 0.0], vec![0.0, 0.0], vec![0.5, 0.5]]);
        let err = similarity_matrix(&e).unwrap_err();
        assert!(err.to_string().contains("AAB"), "{err}");
    }

    #[test]
    fn knn_on_universe_of_three_returns_the_other_two() {
        let e = matrix(vec![vec![1.0, 0.0], vec![0.9, 0.1], vec![-1.0, 0.2]]);
        let got = knn(&e, "AAA", 2).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].ticker, "AAB");
        assert_eq!(got[1].ticker, "AAC");
        assert!(got[0].score > got[1].score);
    }

    #[test]
    fn knn_matches_full_sort_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let n = 20;
        let dim = 8;
        let values: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e = EmbeddingMatrix::new(tickers(n), dim, values).unwrap();
        for k in [1, 5, 19] {
            let got = knn(&e, "AAF", k).unwrap();
            // oracle: full pairwise sort
            let qi = e.index_of("AAF").unwrap();
            let mut all: Vec<(String, f64)> = (0..n)
                .filter(|&j| j != qi)
                .map(|j| {
                    (
                        e.tickers()[j].clone(),
                        cosine(e.row(qi), e.row(j)).unwrap(),
                    )
                })
                .collect();
            all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            all.truncate(k);
            let got_pairs: Vec<(String, f64)> =
                got.into_iter().map(|nb| (nb.ticker, nb.score)).collect();
            assert_eq!(got_pairs, all);
        }
    }

    #[test]
    fn knn_of_unknown_ticker_suggests_a_spelling() {
        let e = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let err = knn(&e, "AAX", 1).unwrap_err();
        match err {
            Error::UnknownTicker { suggestion, .. } => {
                assert!(suggestion.is_some());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn knn_with_all_neighbors_returns_each_company_once() {
        let e = init_embeddings(&tickers(12), &TrainConfig::for_dim(4)).unwrap();
        let got = knn(&e, "AAC", 11).unwrap();
        let mut names: Vec<&str> = got.iter().map(|n| n.ticker.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 11);
        assert!(!names.contains(&"AAC"));
    }

    #[test]
    fn knn_ranking_is_scale_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 10;
        let values: Vec<f64> = (0..n * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e = EmbeddingMatrix::new(tickers(n), 4, values.clone()).unwrap();
        let scaled =
            EmbeddingMatrix::new(tickers(n), 4, values.iter().map(|v| v * 17.0).collect())
                .unwrap();
        let a = knn(&e, "AAB", 5).unwrap();
        let b = knn(&scaled, "AAB", 5).unwrap();
        let ta: Vec<&str> = a.iter().map(|n| n.ticker.as_str()).collect();
        let tb: Vec<&str> = b.iter().map(|n| n.ticker.as_str()).collect();
        assert_eq!(ta, tb);
    }

    fn hand_matrix() -> SimilarityMatrix {
        // AAA-AAB high, AAA-AAC mid, rest low
        let s = vec![
            vec![1.0, 0.9, 0.65, 0.1],
            vec![0.9, 1.0, 0.2, 0.05],
            vec![0.65, 0.2, 1.0, -0.3],
            vec![0.1, 0.05, -0.3, 1.0],
        ];
        SimilarityMatrix::new(tickers(4), s).unwrap()
    }

    fn hand_labels(sectors: [&str; 4]) -> Vec<LabeledCompany> {
        sectors
            .iter()
            .enumerate()
            .map(|(i, s)| LabeledCompany {
                ticker: crate::synth::ticker_for_index(i),
                name: format!("Company {i}"),
                sector1: s.to_string(),
                sector2: format!("{s} Sub"),
            })
            .collect()
    }

    #[test]
    fn one_sector_means_no_mismatches() {
        let got = mismatches(&hand_matrix(), &hand_labels(["F"; 4]), -1.0).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn minimum_threshold_returns_all_cross_sector_pairs() {
        let got = mismatches(&hand_matrix(), &hand_labels(["F", "F", "T", "E"]), -1.0).unwrap();
        // pairs with differing sectors: (0,2),(0,3),(1,2),(1,3),(2,3) = 5
        assert_eq!(got.len(), 5);
        // sorted by similarity descending
        for w in got.windows(2) {
            assert!(w[0].similarity >= w[1].similarity);
        }
    }

    #[test]
    fn known_cross_sector_high_pair_is_found() {
        // all 6 pairs by hand: only (AAA, AAC) has sim >= 0.6 across sectors
        let got = mismatches(&hand_matrix(), &hand_labels(["F", "F", "T", "E"]), 0.6).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].ticker_a, "AAA");
        assert_eq!(got[0].ticker_b, "AAC");
        assert_eq!(got[0].similarity, 0.65);
        assert_eq!(got[0].sector_a, "F");
        assert_eq!(got[0].sector_b, "T");
    }

    #[test]
    fn fine_level_catches_sub_sector_disagreement() {
        let mut labels = hand_labels(["F", "F", "T", "E"]);
        labels[1].sector2 = "Other Sub".into();
        let coarse = mismatches_by_level(&hand_matrix(), &labels, 0.8, SectorLevel::Coarse)
            .unwrap();
        let fine = mismatches_by_level(&hand_matrix(), &labels, 0.8, SectorLevel::Fine).unwrap();
        assert!(coarse.is_empty());
        assert_eq!(fine.len(), 1); // AAA vs AAB at 0.9
    }

    #[test]
    fn maximum_threshold_gives_no_edges() {
        let edges = export_graph(&hand_matrix(), 1.0).unwrap();
        assert!(edges.edges.is_empty());
    }

    #[test]
    fn minimum_threshold_gives_the_complete_graph() {
        let edges = export_graph(&hand_matrix(), -1.0).unwrap();
        assert_eq!(edges.edges.len(), 6);
        assert!((edges.density() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_enumerated_edges_at_threshold_0_6() {
        let edges = export_graph(&hand_matrix(), 0.6).unwrap();
        let got: Vec<(&str, &str)> = edges
            .edges
            .iter()
            .map(|e| (e.source.as_str(), e.target.as_str()))
            .collect();
        assert_eq!(got, vec![("AAA", "AAB"), ("AAA", "AAC")]);
    }

    #[test]
    fn edge_sets_are_monotone_in_the_threshold() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let e = init_embeddings(&tickers(15), &TrainConfig::for_dim(5)).unwrap();
        let s = similarity_matrix(&e).unwrap();
        for _ in 0..10 {
            let t1: f64 = rng.gen_range(-1.0..1.0);
            let t2: f64 = rng.gen_range(t1..1.0);
            let e1 = export_graph(&s, t1).unwrap();
            let e2 = export_graph(&s, t2).unwrap();
            let set1: std::collections::BTreeSet<(String, String)> = e1
                .edges
                .iter()
                .map(|e| (e.source.clone(), e.target.clone()))
                .collect();
            for e in &e2.edges {
                assert!(set1.contains(&(e.source.clone(), e.target.clone())));
            }
        }
    }

    #[test]
    fn density_threshold_inverts_the_density() {
        let s = hand_matrix();
        // 6 pairs; 5% of 6 -> 0 edges allowed -> threshold = max sim
        let t = density_threshold(&s, 0.05).unwrap();
        assert_eq!(t, 0.9);
        assert!(export_graph(&s, t).unwrap().edges.is_empty());
        // one third of 6 -> 2 edges allowed
        let t = density_threshold(&s, 2.0 / 6.0).unwrap();
        let edges = export_graph(&s, t).unwrap();
        assert!(edges.edges.len() <= 2);
        // full density keeps everything
        let t = density_threshold(&s, 1.0).unwrap();
        assert_eq!(export_graph(&s, t).unwrap().edges.len(), 6);
    }
}
