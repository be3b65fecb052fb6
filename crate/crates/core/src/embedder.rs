//! Tied-weight softmax embedding model.
//!
//! The model's only parameters are the company embeddings themselves: one
//! matrix `W` whose rows are embeddings. The hidden layer is the element-wise
//! average of the context rows, the output is `softmax(W h)`, and the same
//! matrix serves both the input lookup and the output projection, so the
//! gradient of the cross-entropy loss has two contribution paths.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::context_gen::ContextSet;
use crate::{Error, Result};

/// `|U| x N` matrix whose rows are company embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    tickers: Vec<String>,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(tickers: Vec<String>, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("embedding dim must be positive".into()));
        }
        if tickers.is_empty() {
            return Err(Error::Validation("embedding matrix has no rows".into()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = tickers.iter().find(|t| !seen.insert(t.as_str())) {
            return Err(Error::Validation(format!("duplicate ticker {dup:?}")));
        }
        if values.len() != tickers.len() * dim {
            return Err(Error::Validation(format!(
                "expected {} values for {} x {dim}, got {}",
                tickers.len() * dim,
                tickers.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("embedding matrix has non-finite entries".into()));
        }
        Ok(Self {
            tickers,
            dim,
            values,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_companies(&self) -> usize {
        self.tickers.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index_of(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    /// Unit-normalizes every row; errors on a zero row.
    pub fn normalize_rows(&self) -> Result<EmbeddingMatrix> {
        let mut values = self.values.clone();
        for (i, ticker) in self.tickers.iter().enumerate() {
            let row = &mut values[i * self.dim..(i + 1) * self.dim];
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Validation(format!(
                    "cannot normalize zero embedding for {ticker}"
                )));
            }
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
        EmbeddingMatrix::new(self.tickers.clone(), self.dim, values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Embedding dimensionality N.
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Initial entries are uniform on `[-init_scale, +init_scale]`.
    pub init_scale: f64,
    pub shuffle_each_epoch: bool,
}

impl TrainConfig {
    /// Defaults for a given dimensionality: lr 0.05, 25 epochs, init scale
    /// `0.5 / N`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            dim,
            learning_rate: 0.05,
            epochs: 25,
            seed: 1,
            init_scale: 0.5 / dim.max(1) as f64,
            shuffle_each_epoch: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("embedding dim must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !self.init_scale.is_finite() || self.init_scale < 0.0 {
            return Err(Error::Config("init_scale must be non-negative".into()));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::for_dim(20)
    }
}

/// Seeded random initialization: entries i.i.d. uniform on
/// `[-init_scale, +init_scale]`, row-major draw order.
pub fn init_embeddings(tickers: &[String], cfg: &TrainConfig) -> Result<EmbeddingMatrix> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = tickers.len() * cfg.dim;
    let values: Vec<f64> = (0..n)
        .map(|_| {
            if cfg.init_scale == 0.0 {
                0.0
            } else {
                rng.gen_range(-cfg.init_scale..cfg.init_scale)
            }
        })
        .collect();
    EmbeddingMatrix::new(tickers.to_vec(), cfg.dim, values)
}

/// Hidden layer: element-wise average of the context rows. Agnostic to the
/// context size, which is what lets one model consume both modalities.
pub fn hidden_layer(w: &EmbeddingMatrix, context: &[usize]) -> Result<Vec<f64>> {
    if context.is_empty() {
        return Err(Error::Validation("hidden layer needs a nonempty context".into()));
    }
    let mut h = vec![0.0; w.dim()];
    for &c in context {
        if c >= w.num_companies() {
            return Err(Error::Validation(format!(
                "context index {c} out of range for {} companies",
                w.num_companies()
            )));
        }
        for (hv, wv) in h.iter_mut().zip(w.row(c)) {
            *hv += wv;
        }
    }
    let inv = 1.0 / context.len() as f64;
    for hv in &mut h {
        *hv *= inv;
    }
    Ok(h)
}

/// Posterior over the universe: `softmax(W h)`, computed with
/// max-subtraction.
pub fn forward(w: &EmbeddingMatrix, h: &[f64]) -> Vec<f64> {
    assert_eq!(h.len(), w.dim(), "hidden vector length must equal dim");
    let mut logits: Vec<f64> = (0..w.num_companies())
        .map(|i| dot(w.row(i), h))
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in &mut logits {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in &mut logits {
        *v /= sum;
    }
    logits
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cross-entropy loss `-log p[target]` and its exact gradient with respect
/// to every entry of the shared matrix.
///
/// Both contribution paths through the tied matrix are included: every row
/// `j` receives the output-projection term `e_j * h` (with `e = p - y`),
/// and every context row additionally receives the input-averaging term
/// `(1/C) * W^T e`.
pub fn loss_and_gradient(w: &EmbeddingMatrix, set: &ContextSet) -> Result<(f64, Vec<f64>)> {
    set.validate(w.num_companies())?;
    let h = hidden_layer(w, &set.context)?;
    let p = forward(w, &h);
    let loss = -p[set.target].ln();

    let n = w.num_companies();
    let dim = w.dim();
    let mut errors = p;
    errors[set.target] -= 1.0;

    // dL/dh = W^T e, taken before any update
    let mut dh = vec![0.0; dim];
    for (j, e) in errors.iter().enumerate() {
        for (dv, wv) in dh.iter_mut().zip(w.row(j)) {
            *dv += e * wv;
        }
    }

    let mut grad = vec![0.0; n * dim];
    for (j, e) in errors.iter().enumerate() {
        let row = &mut grad[j * dim..(j + 1) * dim];
        for (g, hv) in row.iter_mut().zip(&h) {
            *g = e * hv;
        }
    }
    let inv_c = 1.0 / set.context.len() as f64;
    for &c in &set.context {
        let row = &mut grad[c * dim..(c + 1) * dim];
        for (g, dv) in row.iter_mut().zip(&dh) {
            *g += inv_c * dv;
        }
    }
    Ok((loss, grad))
}

/// Trained embeddings plus the mean per-epoch loss trace.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub embeddings: EmbeddingMatrix,
    pub loss_trace: Vec<f64>,
}

/// Per-example SGD over the context sets: `cfg.epochs` passes with a fixed
/// learning rate and an optional seeded shuffle per epoch.
///
/// Fully deterministic given the set order, seed, and config. Aborts with a
/// diagnostic if any example produces a non-finite loss.
pub fn train(sets: &[ContextSet], tickers: &[String], cfg: &TrainConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    for set in sets {
        set.validate(tickers.len())?;
    }
    let mut w = init_embeddings(tickers, cfg)?;
    // decouple the shuffle stream from the init stream
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9E37_79B9_7F4A_7C15);

    let n = w.num_companies();
    let dim = w.dim();
    let lr = cfg.learning_rate;
    let mut order: Vec<usize> = (0..sets.len()).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut dh = vec![0.0; dim];

    for epoch in 0..cfg.epochs {
        if cfg.shuffle_each_epoch {
            order.shuffle(&mut shuffle_rng);
        }
        let mut epoch_loss = 0.0;
        for &set_index in &order {
            let set = &sets[set_index];
            let h = hidden_layer(&w, &set.context)?;
            let p = forward(&w, &h);
            let loss = -p[set.target].ln();
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    set_index,
                    target: tickers[set.target].clone(),
                });
            }
            epoch_loss += loss;

            let mut errors = p;
            errors[set.target] -= 1.0;
            dh.fill(0.0);
            for (j, e) in errors.iter().enumerate() {
                for (dv, wv) in dh.iter_mut().zip(w.row(j)) {
                    *dv += e * wv;
                }
            }
            for (j, e) in errors.iter().enumerate().take(n) {
                let step = lr * e;
                for (wv, hv) in w.row_mut(j).iter_mut().zip(&h) {
                    *wv -= step * hv;
                }
            }
            let step_c = lr / set.context.len() as f64;
            for &c in &set.context {
                for (wv, dv) in w.row_mut(c).iter_mut().zip(&dh) {
                    *wv -= step_c * dv;
                }
            }
        }
        loss_trace.push(if sets.is_empty() {
            0.0
        } else {
            epoch_loss / sets.len() as f64
        });
    }
    Ok(TrainOutput {
        embeddings: w,
        loss_trace,
    })
}

/// Row-wise concatenation of two embedding matrices over the same universe.
pub fn concat_embeddings(a: &EmbeddingMatrix, b: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    if a.tickers != b.tickers {
        let sa: BTreeSet<&String> = a.tickers.iter().collect();
        let sb: BTreeSet<&String> = b.tickers.iter().collect();
        let diff: Vec<&&String> = sa.symmetric_difference(&sb).collect();
        if diff.is_empty() {
            return Err(Error::Validation(
                "embedding matrices order their tickers differently".into(),
            ));
        }
        return Err(Error::Validation(format!(
            "embedding matrices cover different universes; unmatched tickers: {diff:?}"
        )));
    }
    let dim = a.dim + b.dim;
    let mut values = Vec::with_capacity(a.tickers.len() * dim);
    for i in 0..a.tickers.len() {
        values.extend_from_slice(a.row(i));
        values.extend_from_slice(b.row(i));
    }
    EmbeddingMatrix::new(a.tickers.clone(), dim, values)
}

/// Writes the TSV form: header `ticker\tdim0\t...\tdimN-1`, one row per
/// company, 17 significant digits.
pub fn write_embeddings_tsv(path: &Path, w: &EmbeddingMatrix) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut write = |s: String| -> Result<()> {
        out.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
    };
    let header: Vec<String> = std::iter::once("ticker".to_string())
        .chain((0..w.dim()).map(|d| format!("dim{d}")))
        .collect();
    write(header.join("\t"))?;
    write("\n".into())?;
    for i in 0..w.num_companies() {
        let mut fields = vec![w.tickers()[i].clone()];
        fields.extend(w.row(i).iter().map(|v| format!("{v:.16e}")));
        write(fields.join("\t"))?;
        write("\n".into())?;
    }
    Ok(())
}

/// Reads a TSV written by [`write_embeddings_tsv`].
pub fn read_embeddings_tsv(path: &Path) -> Result<EmbeddingMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::parse(path, 1, "empty embedding file")),
    };
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.first() != Some(&"ticker") || fields.len() < 2 {
        return Err(Error::parse(path, 1, "embedding header must be `ticker\\tdim0...`"));
    }
    let dim = fields.len() - 1;
    let mut tickers = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != dim + 1 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} fields, got {}", dim + 1, fields.len()),
            ));
        }
        tickers.push(fields[0].to_string());
        for f in &fields[1..] {
            values.push(f.parse::<f64>().map_err(|_| {
                Error::parse(path, lineno, format!("bad embedding value {f:?}"))
            })?);
        }
    }
    EmbeddingMatrix::new(tickers, dim, values)
}

/// Writes the loss trace as CSV `epoch,mean_loss` with 1-based epochs.
pub fn write_loss_trace_csv(path: &Path, trace: &[f64]) -> Result<()> {
    let mut out = String::from("epoch,mean_loss\n");
    for (i, loss) in trace.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, loss));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
