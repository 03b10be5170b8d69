//! External bibliographic records and top-candidate matching.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::citeparse::{content_word_overlap, Stopwords};

/// Default minimum content-word overlap for accepting a candidate.
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalWork {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub venue: Option<String>,
    #[serde(default)]
    pub doi: Option<String>,
    #[serde(default)]
    pub cited_by_count: u64,
}

/// A ranked title search over some bibliographic index.
pub trait WorkSource {
    type Error;

    /// Service-ranked candidates for `title`, at most `max_n` of them.
    fn search_candidates(&self, title: &str, max_n: usize) -> Result<Vec<ExternalWork>, Self::Error>;
}

/// The top-ranked candidate if its content-word overlap with the claimed
/// title reaches `threshold`. Lower-ranked candidates are never considered.
pub fn match_work<'a>(
    claimed_title: &str,
    candidates: &'a [ExternalWork],
    threshold: f64,
    stopwords: &Stopwords,
) -> Option<&'a ExternalWork> {
    let top = candidates.first()?;
    (content_word_overlap(claimed_title, &top.title, stopwords) >= threshold).then_some(top)
}

/// The candidate with the highest content-word overlap, if it reaches
/// `threshold`. Ties go to the better-ranked candidate.
pub fn best_overlap_candidate<'a>(
    claimed_title: &str,
    candidates: &'a [ExternalWork],
    threshold: f64,
    stopwords: &Stopwords,
) -> Option<&'a ExternalWork> {
    let mut best: Option<(&ExternalWork, f64)> = None;
    for c in candidates {
        let o = content_word_overlap(claimed_title, &c.title, stopwords);
        if o >= threshold && best.is_none_or(|(_, b)| o > b) {
            best = Some((c, o));
        }
    }
    best.map(|(c, _)| c)
}

pub fn citation_count(work: &ExternalWork) -> u64 {
    work.cited_by_count
}
