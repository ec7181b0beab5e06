use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{read_file, Error, Result};
use crate::text::fold;

pub const DEFAULT_BIAS: f64 = -4.0;

/// Case-folded word weights plus a bias, the parameters of the reference
/// logistic scorer.
#[derive(Debug, Clone)]
pub struct Lexicon {
    weights: HashMap<String, f64>,
    bias: f64,
}

/// Occurrence counts of positive lexicon weights, keyed by the weight's bit
/// pattern (which orders positive floats by value). The logit then depends
/// only on the multiset of weights present, not on which words carried them
/// or the order they were added in.
pub(crate) type Hits = BTreeMap<u64, i64>;

impl Lexicon {
    pub fn new(bias: f64) -> Self {
        Lexicon {
            weights: HashMap::new(),
            bias,
        }
    }

    pub fn from_entries<I, S>(entries: I, bias: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut lexicon = Lexicon::new(bias);
        for (i, (word, weight)) in entries.into_iter().enumerate() {
            lexicon.insert("entries", i + 1, word.as_ref(), weight)?;
        }
        Ok(lexicon)
    }

    /// Parses `word<TAB>weight` lines. Blank lines and `#` comments are skipped.
    pub fn parse(source_name: &str, contents: &str, bias: f64) -> Result<Self> {
        let mut lexicon = Lexicon::new(bias);
        for (i, line) in contents.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (word, weight) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source_name, line_no, "expected `word<TAB>weight`"))?;
            let weight: f64 = weight.trim().parse().map_err(|_| {
                Error::parse(
                    source_name,
                    line_no,
                    format!("invalid weight {:?}", weight.trim()),
                )
            })?;
            lexicon.insert(source_name, line_no, word.trim(), weight)?;
        }
        Ok(lexicon)
    }

    pub fn load(path: impl AsRef<Path>, bias: f64) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&path.display().to_string(), &read_file(path)?, bias)
    }

    fn insert(&mut self, source_name: &str, line: usize, word: &str, weight: f64) -> Result<()> {
        if word.is_empty() {
            return Err(Error::parse(source_name, line, "empty word"));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::parse(
                source_name,
                line,
                format!("weight must be finite and non-negative, got {weight}"),
            ));
        }
        if self.weights.insert(fold(word), weight).is_some() {
            return Err(Error::parse(
                source_name,
                line,
                format!("duplicate entry {word:?}"),
            ));
        }
        Ok(())
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight of `word` after case folding; zero for unknown words.
    pub fn weight(&self, word: &str) -> f64 {
        let hit = if word.bytes().any(|b| b.is_ascii_uppercase()) || !word.is_ascii() {
            self.weights.get(fold(word).as_str())
        } else {
            self.weights.get(word)
        };
        hit.copied().unwrap_or(0.0)
    }

    pub(crate) fn add_hits<'w>(
        &self,
        hits: &mut Hits,
        words: impl Iterator<Item = &'w str>,
        delta: i64,
    ) {
        for word in words {
            let weight = self.weight(word);
            if weight > 0.0 {
                *hits.entry(weight.to_bits()).or_insert(0) += delta;
            }
        }
        hits.retain(|_, count| *count != 0);
    }

    pub(crate) fn logit(&self, hits: &Hits) -> f64 {
        hits.iter().fold(self.bias, |acc, (&bits, &count)| {
            acc + count as f64 * f64::from_bits(bits)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tab_separated_file() {
        let lex = Lexicon::parse("lex", "# header\nStupid\t3.0\n\nidiot\t 2.5 \n", -4.0).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.weight("STUPID"), 3.0);
        assert_eq!(lex.weight("idiot"), 2.5);
        assert_eq!(lex.weight("nice"), 0.0);
    }

    #[test]
    fn rejects_malformed_lines_with_line_numbers() {
        let err = Lexicon::parse("lex", "ok\t1\nbroken 2\n", -4.0).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = Lexicon::parse("lex", "a\t-1\n", -4.0).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Lexicon::parse("lex", "a\tNaN\n", -4.0).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Lexicon::parse("lex", "a\t1\nA\t2\n", -4.0).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn logit_is_independent_of_token_order() {
        let lex = Lexicon::from_entries([("a", 0.1), ("b", 0.2), ("c", 0.7)], -4.0).unwrap();
        let mut forward = Hits::new();
        lex.add_hits(&mut forward, ["a", "b", "c", "a"].into_iter(), 1);
        let mut backward = Hits::new();
        lex.add_hits(&mut backward, ["c", "a"].into_iter(), 1);
        lex.add_hits(&mut backward, ["b", "a"].into_iter(), 1);
        assert_eq!(
            lex.logit(&forward).to_bits(),
            lex.logit(&backward).to_bits()
        );
    }

    #[test]
    fn words_with_equal_weights_are_interchangeable() {
        let lex = Lexicon::from_entries(
            [
                ("junk", 0.8),
                ("rubbish", 1.0),
                ("ugly", 2.0),
                ("vile", 2.0),
            ],
            -4.0,
        )
        .unwrap();
        let mut a = Hits::new();
        lex.add_hits(&mut a, ["rubbish", "junk", "ugly"].into_iter(), 1);
        let mut b = Hits::new();
        lex.add_hits(&mut b, ["vile", "rubbish", "junk"].into_iter(), 1);
        assert_eq!(a, b);
        assert_eq!(lex.logit(&a).to_bits(), lex.logit(&b).to_bits());
    }
}
