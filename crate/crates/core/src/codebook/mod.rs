//! Codebooks with minimum Levenshtein distance 3 and their constructions.

pub mod covariance;
pub mod rate;
pub mod search;
pub mod verify;
pub mod vt;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::io::short_hash;
use crate::seq::Sequence;

pub use covariance::{density_score, estimate_covariance, CovarianceModel};
pub use rate::code_rate;
pub use search::{degs_search, random_search, DegsSearch};
pub use verify::{find_isolated, verify_min_distance, MinDistanceReport};
pub use vt::vt_codebook;

/// How a codebook was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Greedy search ordered by embedding density.
    Degs,
    /// Greedy search in uniformly random order.
    Rand,
    /// Varshamov-Tenengolts construction (minimum distance 3 not guaranteed).
    Vt,
    /// Anything else, e.g. hand-written test books.
    Other,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Degs => "degs",
            Method::Rand => "rand",
            Method::Vt => "vt",
            Method::Other => "other",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degs" => Ok(Method::Degs),
            "rand" => Ok(Method::Rand),
            "vt" => Ok(Method::Vt),
            "other" => Ok(Method::Other),
            _ => Err(Error::InvalidConfig(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub method: Method,
    pub seed: Option<u64>,
    pub model_hash: Option<String>,
}

impl Provenance {
    /// Whether the distance-3 invariant is expected to hold for this book.
    pub fn guarantees_distance_3(&self) -> bool {
        self.method != Method::Vt
    }
}

/// Codewords of one length in selection order, with a lexicographic view used
/// for index encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    q: u8,
    selection: Vec<Sequence>,
    sorted: Vec<Sequence>,
    pub provenance: Provenance,
}

impl Codebook {
    /// Builds a codebook, checking lengths, alphabet and distinctness.
    pub fn new(n: usize, q: u8, selection: Vec<Sequence>, provenance: Provenance) -> Result<Self> {
        crate::seq::check_alphabet(q)?;
        for c in &selection {
            if c.len() != n {
                return Err(Error::InvalidConfig(format!("codeword {c} has length {}, expected {n}", c.len())));
            }
            if c.q() != q {
                return Err(Error::AlphabetMismatch(c.q(), q));
            }
        }
        let mut sorted = selection.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!("duplicate codeword {}", w[0])));
        }
        Ok(Self { n, q, selection, sorted, provenance })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.selection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection.is_empty()
    }

    /// Codewords in the order they were selected.
    pub fn selection_order(&self) -> &[Sequence] {
        &self.selection
    }

    /// Codewords in lexicographic order; position = encoding index.
    pub fn sorted(&self) -> &[Sequence] {
        &self.sorted
    }

    /// Codeword for message index `index`.
    pub fn encode(&self, index: usize) -> Result<Sequence> {
        self.sorted
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange { index, size: self.len() })
    }

    /// Message index of a codeword.
    pub fn decode_index(&self, codeword: &Sequence) -> Result<usize> {
        self.sorted
            .binary_search(codeword)
            .map_err(|_| Error::UnknownCodeword(codeword.to_string()))
    }

    /// Serialized text form.
    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let mut out = String::with_capacity(32 + self.len() * (self.n + 1));
        out.push_str("#dodo-codebook v1\n");
        out.push_str(&format!(
            "#n={} q={} method={} seed={} model={}\n",
            self.n,
            self.q,
            p.method,
            p.seed.map_or_else(|| "-".to_string(), |s| s.to_string()),
            p.model_hash.as_deref().unwrap_or("-"),
        ));
        for c in &self.selection {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Distance properties are not checked here.
    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "#dodo-codebook v1")) => {}
            Some((_, other)) => return Err(perr(1, format!("bad header {other:?}"))),
            None => return Err(perr(1, "empty file".into())),
        }
        let (_, meta) = lines.next().ok_or_else(|| perr(2, "missing metadata line".into()))?;
        let meta = meta.strip_prefix('#').ok_or_else(|| perr(2, "metadata must start with '#'".into()))?;
        let (mut n, mut q, mut method, mut seed, mut model) = (None, None, None, None, None);
        for field in meta.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(|| perr(2, format!("bad field {field:?}")))?;
            let bad = |_| perr(2, format!("bad value for {key}: {value:?}"));
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "q" => q = Some(value.parse::<u8>().map_err(|e| bad(e.to_string()))?),
                "method" => method = Some(value.parse::<Method>().map_err(|e| bad(e.to_string()))?),
                "seed" => {
                    seed = Some(if value == "-" {
                        None
                    } else {
                        Some(value.parse::<u64>().map_err(|e| bad(e.to_string()))?)
                    })
                }
                "model" => model = Some((value != "-").then(|| value.to_string())),
                _ => return Err(perr(2, format!("unknown field {key:?}"))),
            }
        }
        let n = n.ok_or_else(|| perr(2, "missing n".into()))?;
        let q = q.ok_or_else(|| perr(2, "missing q".into()))?;
        let provenance = Provenance {
            method: method.ok_or_else(|| perr(2, "missing method".into()))?,
            seed: seed.flatten(),
            model_hash: model.flatten(),
        };
        let mut words = Vec::new();
        for (i, line) in lines {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let w = Sequence::parse(line, q).map_err(|e| perr(i + 1, e.to_string()))?;
            if w.len() != n {
                return Err(perr(i + 1, format!("codeword length {} != n = {n}", w.len())));
            }
            words.push(w);
        }
        Self::new(n, q, words, provenance).map_err(|e| perr(0, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    /// Short content hash of the serialized form.
    pub fn hash(&self) -> String {
        short_hash(self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn book(words: &[&str]) -> Codebook {
        let seqs = words.iter().map(|w| w.parse().unwrap()).collect();
        let prov = Provenance { method: Method::Rand, seed: Some(3), model_hash: None };
        Codebook::new(words[0].len(), 4, seqs, prov).unwrap()
    }

    #[test]
    fn encode_decode() {
        let cb = book(&["3333", "0000", "1212"]);
        assert_eq!(cb.encode(0).unwrap().to_string(), "0000");
        assert_eq!(cb.encode(2).unwrap().to_string(), "3333");
        for i in 0..cb.len() {
            assert_eq!(cb.decode_index(&cb.encode(i).unwrap()).unwrap(), i);
        }
        assert!(matches!(cb.encode(3), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(cb.decode_index(&"0001".parse().unwrap()), Err(Error::UnknownCodeword(_))));
    }

    #[test]
    fn text_round_trip() {
        let cb = book(&["3333", "0000", "1212"]);
        let text = cb.to_text();
        assert!(text.starts_with("#dodo-codebook v1\n#n=4 q=4 method=rand seed=3 model=-\n3333\n"));
        assert_eq!(Codebook::from_text(&text).unwrap(), cb);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Codebook::from_text("").is_err());
        assert!(Codebook::from_text("#dodo-codebook v2\n#n=4 q=4 method=rand seed=- model=-\n").is_err());
        assert!(Codebook::from_text("#dodo-codebook v1\n#n=4 q=4 method=rand seed=- model=-\n0120\n012\n").is_err());
        assert!(Codebook::from_text("#dodo-codebook v1\n#n=4 q=4 method=rand seed=- model=-\n0124\n").is_err());
        assert!(Codebook::from_text("#dodo-codebook v1\n#n=4 q=4 method=rand seed=- model=-\n0120\n0120\n").is_err());
        assert!(Codebook::from_text("#dodo-codebook v1\n#n=4 q=4 method=magic seed=- model=-\n").is_err());
    }
}
