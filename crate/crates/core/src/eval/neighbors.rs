use super::EvalError;
use crate::embeddings::WordEmbeddings;
use crate::matrix::{dot64, norm64};

/// The `k` vocabulary words closest to `word` by cosine, best first; ties go
/// to the lexicographically smaller word. The query itself and zero vectors
/// are never returned.
pub fn nearest_neighbors(emb: &WordEmbeddings, word: &str, k: usize) -> Result<Vec<(String, f64)>, EvalError> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let query = emb.lookup(word)?;
    let qn = norm64(&query);
    if qn == 0.0 {
        return Err(EvalError::ZeroVector);
    }
    let mut scored: Vec<(&str, f64)> = emb
        .words()
        .iter()
        .enumerate()
        .filter(|(_, w)| w.as_str() != word)
        .filter_map(|(i, w)| {
            let v = emb.vector(i);
            let n = norm64(v);
            (n > 0.0).then(|| (w.as_str(), dot64(&query, v) / (qn * n)))
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(w, c)| (w.to_owned(), c)).collect())
}
