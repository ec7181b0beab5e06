use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;

use crate::error::{read_file, Error, Result};
use crate::text::fold;

/// Word vectors for cosine nearest-neighbour search. Vectors are stored
/// unit-normalized, so cosine similarity is a dot product.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    words: Vec<String>,
    index: HashMap<String, usize>,
    unit: Vec<f64>,
    dim: usize,
}

impl EmbeddingTable {
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table = EmbeddingTable {
            words: Vec::new(),
            index: HashMap::new(),
            unit: Vec::new(),
            dim: 0,
        };
        for (i, (word, vector)) in entries.into_iter().enumerate() {
            table.push("entries", i + 1, word.into(), vector)?;
        }
        Ok(table)
    }

    /// Parses the whitespace-separated text format: a word followed by `d`
    /// floats on every line.
    pub fn parse(source_name: &str, contents: &str) -> Result<Self> {
        let mut table = Self::from_entries(Vec::<(String, Vec<f64>)>::new())?;
        for (i, line) in contents.lines().enumerate() {
            let line_no = i + 1;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else {
                continue;
            };
            let vector = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        Error::parse(source_name, line_no, format!("invalid component {f:?}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(source_name, line_no, word.to_string(), vector)?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&path.display().to_string(), &read_file(path)?)
    }

    fn push(
        &mut self,
        source_name: &str,
        line: usize,
        word: String,
        vector: Vec<f64>,
    ) -> Result<()> {
        if vector.is_empty() {
            return Err(Error::parse(source_name, line, "missing vector components"));
        }
        if self.words.is_empty() {
            self.dim = vector.len();
        } else if vector.len() != self.dim {
            return Err(Error::parse(
                source_name,
                line,
                format!("expected {} components, found {}", self.dim, vector.len()),
            ));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(source_name, line, "non-finite component"));
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::parse(source_name, line, "zero-magnitude vector"));
        }
        let key = fold(&word);
        if self.index.contains_key(&key) {
            return Err(Error::parse(
                source_name,
                line,
                format!("duplicate word {word:?}"),
            ));
        }
        self.index.insert(key, self.words.len());
        self.words.push(word);
        self.unit.extend(vector.iter().map(|x| x / norm));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(&fold(word))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.unit[i * self.dim..(i + 1) * self.dim]
    }

    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let (ia, ib) = (*self.index.get(&fold(a))?, *self.index.get(&fold(b))?);
        Some(dot(self.row(ia), self.row(ib)))
    }

    /// Up to `k` words by descending cosine similarity to `word`, excluding
    /// `word` itself. Equal similarities are ordered lexicographically.
    pub fn nearest_neighbors(&self, word: &str, k: usize) -> Vec<String> {
        let Some(&query) = self.index.get(&fold(word)) else {
            return Vec::new();
        };
        if k == 0 {
            return Vec::new();
        }
        let q = self.row(query);
        let mut scored: Vec<(f64, usize)> = (0..self.words.len())
            .filter(|&i| i != query)
            // `+ 0.0` maps -0.0 to 0.0 so equal similarities tie under total_cmp
            .map(|i| (dot(q, self.row(i)) + 0.0, i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            b.0.total_cmp(&a.0)
                .then_with(|| self.words[a.1].cmp(&self.words[b.1]))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_by(order);
        scored
            .into_iter()
            .map(|(_, i)| self.words[i].clone())
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> EmbeddingTable {
        EmbeddingTable::from_entries([
            ("a", vec![1.0, 0.0]),
            ("b", vec![0.9, 0.1]),
            ("c", vec![0.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn nearest_by_cosine() {
        let t = toy();
        assert_eq!(t.nearest_neighbors("a", 1), vec!["b"]);
        assert_eq!(t.nearest_neighbors("A", 5), vec!["b", "c"]);
        assert_eq!(t.nearest_neighbors("c", 2), vec!["b", "a"]);
        assert!(t.nearest_neighbors("zzz", 3).is_empty());
    }

    #[test]
    fn ties_break_lexicographically() {
        let t = EmbeddingTable::from_entries([
            ("q", vec![1.0, 0.0]),
            ("zeta", vec![0.0, 1.0]),
            ("alpha", vec![0.0, 2.0]),
            ("mid", vec![0.0, 3.0]),
        ])
        .unwrap();
        assert_eq!(t.nearest_neighbors("q", 3), vec!["alpha", "mid", "zeta"]);
        assert_eq!(t.nearest_neighbors("q", 2), vec!["alpha", "mid"]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = EmbeddingTable::parse("emb", "a 1 0\nb 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = EmbeddingTable::parse("emb", "a 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = EmbeddingTable::parse("emb", "a 1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = EmbeddingTable::parse("emb", "a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn parses_text_format() {
        let t = EmbeddingTable::parse("emb", "a 1 0\n\nb 0.9 0.1\n").unwrap();
        assert_eq!((t.len(), t.dim()), (2, 2));
        let sim = t.similarity("a", "b").unwrap();
        assert!((sim - 0.9 / (0.82f64).sqrt()).abs() < 1e-12);
    }
}
