//! Field-level verification of a parsed citation against a matched record.
//!
//! Each of the five fields receives a [`FieldVerdict`]; the verdicts combine
//! into a weighted authenticity score in `[0, 1]` where `ABSENT` fields drop
//! out of both numerator and denominator.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::citeparse::{normalize_title, AuthorName, ParsedReference, Stopwords};
use crate::error::{Error, Result};
use crate::works::ExternalWork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FieldVerdict {
    Match,
    Abbrev,
    Contains,
    Contradiction,
    Unconfirmed,
    Absent,
}

impl FieldVerdict {
    pub const ALL: [FieldVerdict; 6] = [
        FieldVerdict::Match,
        FieldVerdict::Abbrev,
        FieldVerdict::Contains,
        FieldVerdict::Contradiction,
        FieldVerdict::Unconfirmed,
        FieldVerdict::Absent,
    ];

    /// Verdict value under the default contradiction penalty; `None` for `ABSENT`.
    pub fn score(self) -> Option<f64> {
        self.score_with(DEFAULT_CONTRADICTION_PENALTY)
    }

    pub fn score_with(self, contradiction_penalty: f64) -> Option<f64> {
        match self {
            FieldVerdict::Match => Some(1.0),
            FieldVerdict::Abbrev => Some(0.75),
            FieldVerdict::Contains => Some(0.5),
            FieldVerdict::Unconfirmed => Some(0.0),
            FieldVerdict::Contradiction => Some(contradiction_penalty),
            FieldVerdict::Absent => None,
        }
    }

    pub fn is_confirming(self) -> bool {
        matches!(self, FieldVerdict::Match | FieldVerdict::Abbrev)
    }
}

pub const DEFAULT_CONTRADICTION_PENALTY: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Title,
    Identifier,
    Authors,
    Year,
    Venue,
}

impl FieldKind {
    pub const ALL: [FieldKind; 5] = [
        FieldKind::Title,
        FieldKind::Identifier,
        FieldKind::Authors,
        FieldKind::Year,
        FieldKind::Venue,
    ];
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "title" => FieldKind::Title,
            "identifier" | "doi" => FieldKind::Identifier,
            "authors" | "author" => FieldKind::Authors,
            "year" => FieldKind::Year,
            "venue" | "journal" => FieldKind::Venue,
            _ => return Err(Error::UnknownFieldKind(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldWeights {
    pub title: f64,
    pub identifier: f64,
    pub authors: f64,
    pub year: f64,
    pub venue: f64,
}

impl Default for FieldWeights {
    fn default() -> Self {
        FieldWeights {
            title: 0.25,
            identifier: 0.25,
            authors: 0.20,
            year: 0.15,
            venue: 0.15,
        }
    }
}

impl FieldWeights {
    pub fn get(&self, kind: FieldKind) -> f64 {
        match kind {
            FieldKind::Title => self.title,
            FieldKind::Identifier => self.identifier,
            FieldKind::Authors => self.authors,
            FieldKind::Year => self.year,
            FieldKind::Venue => self.venue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldVerdicts {
    pub title: FieldVerdict,
    pub identifier: FieldVerdict,
    pub authors: FieldVerdict,
    pub year: FieldVerdict,
    pub venue: FieldVerdict,
}

impl FieldVerdicts {
    pub fn uniform(v: FieldVerdict) -> Self {
        FieldVerdicts {
            title: v,
            identifier: v,
            authors: v,
            year: v,
            venue: v,
        }
    }

    pub fn get(&self, kind: FieldKind) -> FieldVerdict {
        match kind {
            FieldKind::Title => self.title,
            FieldKind::Identifier => self.identifier,
            FieldKind::Authors => self.authors,
            FieldKind::Year => self.year,
            FieldKind::Venue => self.venue,
        }
    }

    pub fn set(&mut self, kind: FieldKind, v: FieldVerdict) {
        match kind {
            FieldKind::Title => self.title = v,
            FieldKind::Identifier => self.identifier = v,
            FieldKind::Authors => self.authors = v,
            FieldKind::Year => self.year = v,
            FieldKind::Venue => self.venue = v,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (FieldKind, FieldVerdict)> + '_ {
        FieldKind::ALL.into_iter().map(move |k| (k, self.get(k)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Verified,
    VerifiedWithError,
    Unverified,
    NeedsHuman,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::VerifiedWithError => "verified-with-error",
            Status::Unverified => "unverified",
            Status::NeedsHuman => "needs-human",
        }
    }

    /// The two buckets that only ever hold confirmed real works.
    pub fn is_verified(self) -> bool {
        matches!(self, Status::Verified | Status::VerifiedWithError)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub reference_id: String,
    pub verdicts: FieldVerdicts,
    pub authenticity: f64,
    pub status: Status,
    pub matched_candidate: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RelevanceLabel {
    No,
    Partial,
    Yes,
}

pub const DEFAULT_PARTIAL_WEIGHT: f64 = 0.5;

pub fn relevance_value(label: RelevanceLabel, partial_weight: f64) -> f64 {
    match label {
        RelevanceLabel::Yes => 1.0,
        RelevanceLabel::Partial => partial_weight,
        RelevanceLabel::No => 0.0,
    }
}

// ---------------------------------------------------------------------------
// Scoring

pub fn authenticity_score(verdicts: &FieldVerdicts) -> Result<f64> {
    authenticity_score_with(verdicts, &FieldWeights::default(), DEFAULT_CONTRADICTION_PENALTY)
}

/// `max(0, Σ wᵢ·vᵢ / Σ wᵢ)` over the non-`ABSENT` fields.
pub fn authenticity_score_with(
    verdicts: &FieldVerdicts,
    weights: &FieldWeights,
    contradiction_penalty: f64,
) -> Result<f64> {
    let (num, den) = verdicts
        .iter()
        .filter_map(|(k, v)| v.score_with(contradiction_penalty).map(|s| (weights.get(k), s)))
        .fold((0.0, 0.0), |(n, d), (w, s)| (n + w * s, d + w));
    if den == 0.0 {
        return Err(Error::Undefined("every field is ABSENT"));
    }
    Ok((num / den).max(0.0))
}

pub fn quality(authenticity: f64, label: RelevanceLabel, partial_weight: f64) -> f64 {
    authenticity * relevance_value(label, partial_weight)
}

pub fn binary_title_match(result: &VerificationResult) -> bool {
    result.matched_candidate.is_some() && result.verdicts.title == FieldVerdict::Match
}

pub fn classify_status(verdicts: &FieldVerdicts, matched: bool) -> Status {
    if !matched {
        return Status::Unverified;
    }
    if !verdicts.title.is_confirming() {
        return Status::NeedsHuman;
    }
    let flawed = verdicts
        .iter()
        .any(|(_, v)| matches!(v, FieldVerdict::Contradiction | FieldVerdict::Contains));
    if flawed {
        Status::VerifiedWithError
    } else {
        Status::Verified
    }
}

// ---------------------------------------------------------------------------
// Field classification

/// Verdict for one field. `claimed = None` means the citation omitted the
/// field; `candidate = None` means the matched record cannot speak to it.
///
/// For [`FieldKind::Authors`] both strings hold `;`-separated names.
pub fn classify_field(kind: FieldKind, claimed: Option<&str>, candidate: Option<&str>) -> FieldVerdict {
    let Some(claimed) = claimed.map(str::trim).filter(|s| !s.is_empty()) else {
        return FieldVerdict::Absent;
    };
    let Some(candidate) = candidate.map(str::trim).filter(|s| !s.is_empty()) else {
        return FieldVerdict::Unconfirmed;
    };
    match kind {
        FieldKind::Title => classify_title(claimed, candidate),
        FieldKind::Authors => classify_authors(claimed, candidate),
        FieldKind::Year => classify_year(claimed, candidate),
        FieldKind::Venue => classify_venue(claimed, candidate),
        FieldKind::Identifier => classify_identifier(claimed, candidate),
    }
}

/// [`classify_field`] with the field kind given by name.
pub fn classify_field_named(kind: &str, claimed: Option<&str>, candidate: Option<&str>) -> Result<FieldVerdict> {
    Ok(classify_field(kind.parse()?, claimed, candidate))
}

fn strict_containment(a: &str, b: &str) -> bool {
    a != b && !a.is_empty() && !b.is_empty() && (a.contains(b) || b.contains(a))
}

fn canonical_title(s: &str) -> String {
    let main = s.split([':', '—']).next().unwrap_or(s).split(" - ").next().unwrap_or(s);
    normalize_title(&main.replace('&', " and "))
}

fn classify_title(claimed: &str, candidate: &str) -> FieldVerdict {
    let (a, b) = (normalize_title(claimed), normalize_title(candidate));
    if a == b {
        return FieldVerdict::Match;
    }
    let amp = |s: &str| normalize_title(&s.replace('&', " and "));
    let (ca, cb) = (canonical_title(claimed), canonical_title(candidate));
    // subtitle dropped on one side, or '&' written for 'and'
    if amp(claimed) == amp(candidate) || (!ca.is_empty() && (ca == cb || ca == b || a == cb)) {
        return FieldVerdict::Abbrev;
    }
    if strict_containment(&a, &b) {
        return FieldVerdict::Contains;
    }
    FieldVerdict::Contradiction
}

fn parse_names(s: &str) -> Vec<AuthorName> {
    s.split(';').filter_map(AuthorName::parse).collect()
}

fn classify_authors(claimed: &str, candidate: &str) -> FieldVerdict {
    let (a, b) = (parse_names(claimed), parse_names(candidate));
    if a.is_empty() || b.is_empty() {
        return FieldVerdict::Unconfirmed;
    }
    if a.len() == b.len() {
        if a.iter().zip(&b).all(|(x, y)| x.same_full_name(y)) {
            return FieldVerdict::Match;
        }
        if a.iter().zip(&b).all(|(x, y)| x.initials_compatible(y)) {
            return FieldVerdict::Abbrev;
        }
    }
    let subset = |small: &[AuthorName], large: &[AuthorName]| {
        small.len() < large.len() && small.iter().all(|x| large.iter().any(|y| x.initials_compatible(y)))
    };
    if subset(&a, &b) || subset(&b, &a) {
        return FieldVerdict::Contains;
    }
    FieldVerdict::Contradiction
}

fn leading_year(s: &str) -> Option<i32> {
    let digits: String = s.chars().filter(char::is_ascii_digit).take(4).collect();
    (digits.len() == 4).then(|| digits.parse().ok()).flatten()
}

fn classify_year(claimed: &str, candidate: &str) -> FieldVerdict {
    match (leading_year(claimed), leading_year(candidate)) {
        (Some(a), Some(b)) if a == b => {
            if claimed == candidate {
                FieldVerdict::Match
            } else {
                // e.g. "1971a" against "1971"
                FieldVerdict::Abbrev
            }
        }
        (Some(_), Some(_)) => FieldVerdict::Contradiction,
        _ => FieldVerdict::Unconfirmed,
    }
}

fn venue_tokens(s: &str) -> Vec<String> {
    const SKIP: &[&str] = &["of", "the", "and", "for", "in", "on", "und", "de"];
    s.replace('&', " ")
        .split(|c: char| !c.is_alphanumeric())
        .map(normalize_title)
        .filter(|t| !t.is_empty() && !SKIP.contains(&t.as_str()))
        .collect()
}

/// ISO-4 style abbreviation: same number of significant words with each
/// word of one a prefix of the corresponding word of the other, or an
/// acronym of the significant words.
fn is_venue_abbreviation(short: &str, long: &str) -> bool {
    let (s, l) = (venue_tokens(short), venue_tokens(long));
    if s.is_empty() || l.is_empty() {
        return false;
    }
    if s.len() == l.len() && s.iter().zip(&l).all(|(a, b)| b.starts_with(a.as_str())) {
        return true;
    }
    if s.len() == 1 && l.len() >= 2 {
        let acronym: String = l.iter().filter_map(|t| t.chars().next()).collect();
        return acronym == s[0];
    }
    false
}

fn classify_venue(claimed: &str, candidate: &str) -> FieldVerdict {
    let (a, b) = (normalize_title(claimed), normalize_title(candidate));
    if a == b {
        return FieldVerdict::Match;
    }
    if venue_tokens(claimed) == venue_tokens(candidate)
        || is_venue_abbreviation(claimed, candidate)
        || is_venue_abbreviation(candidate, claimed)
    {
        return FieldVerdict::Abbrev;
    }
    if strict_containment(&a, &b) {
        return FieldVerdict::Contains;
    }
    FieldVerdict::Contradiction
}

/// Lower-cased DOI with resolver prefixes removed; other identifiers are
/// lower-cased and trimmed.
pub fn canonical_identifier(s: &str) -> String {
    let mut t = s.trim().to_ascii_lowercase();
    for prefix in [
        "https://doi.org/",
        "http://doi.org/",
        "https://dx.doi.org/",
        "http://dx.doi.org/",
        "doi.org/",
        "doi:",
    ] {
        if let Some(rest) = t.strip_prefix(prefix) {
            t = rest.trim().to_string();
            break;
        }
    }
    t.trim_end_matches(['.', '/']).to_string()
}

fn classify_identifier(claimed: &str, candidate: &str) -> FieldVerdict {
    let (a, b) = (canonical_identifier(claimed), canonical_identifier(candidate));
    if a == b {
        return FieldVerdict::Match;
    }
    if !a.starts_with("10.") {
        // a non-DOI URL cannot be compared against a DOI
        return FieldVerdict::Unconfirmed;
    }
    if strict_containment(&a, &b) {
        return FieldVerdict::Contains;
    }
    FieldVerdict::Contradiction
}

// ---------------------------------------------------------------------------

/// Classifies every field of `parsed` against `matched` and derives score
/// and status. Without a match every present field is `UNCONFIRMED`.
pub fn verify_reference(
    reference_id: &str,
    parsed: &ParsedReference,
    matched: Option<&ExternalWork>,
    contradiction_penalty: f64,
) -> VerificationResult {
    let year = parsed.year.map(|y| y.to_string());
    let authors = (!parsed.authors.is_empty()).then(|| parsed.authors.join("; "));
    let claimed: [(FieldKind, Option<&str>); 5] = [
        (FieldKind::Title, Some(parsed.title.as_str())),
        (FieldKind::Identifier, parsed.identifier.as_deref()),
        (FieldKind::Authors, authors.as_deref()),
        (FieldKind::Year, year.as_deref()),
        (FieldKind::Venue, parsed.venue.as_deref()),
    ];

    let mut verdicts = FieldVerdicts::uniform(FieldVerdict::Absent);
    match matched {
        Some(work) => {
            let w_year = work.year.map(|y| y.to_string());
            let w_authors = (!work.authors.is_empty()).then(|| work.authors.join("; "));
            for (kind, value) in claimed {
                let candidate = match kind {
                    FieldKind::Title => Some(work.title.as_str()),
                    FieldKind::Identifier => work.doi.as_deref(),
                    FieldKind::Authors => w_authors.as_deref(),
                    FieldKind::Year => w_year.as_deref(),
                    FieldKind::Venue => work.venue.as_deref(),
                };
                verdicts.set(kind, classify_field(kind, value, candidate));
            }
        }
        None => {
            for (kind, value) in claimed {
                verdicts.set(kind, classify_field(kind, value, None));
            }
        }
    }

    let authenticity =
        authenticity_score_with(&verdicts, &FieldWeights::default(), contradiction_penalty).unwrap_or(0.0);
    VerificationResult {
        reference_id: reference_id.to_string(),
        verdicts,
        authenticity,
        status: classify_status(&verdicts, matched.is_some()),
        matched_candidate: matched.map(|w| w.id.clone()),
    }
}

/// Picks the highest-overlap candidate, then verifies against it.
pub fn match_and_verify(
    reference_id: &str,
    parsed: &ParsedReference,
    candidates: &[ExternalWork],
    threshold: f64,
    stopwords: &Stopwords,
    contradiction_penalty: f64,
) -> VerificationResult {
    let matched = crate::works::best_overlap_candidate(&parsed.title, candidates, threshold, stopwords);
    verify_reference(reference_id, parsed, matched, contradiction_penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use FieldVerdict::*;

    fn verdicts(t: FieldVerdict, i: FieldVerdict, a: FieldVerdict, y: FieldVerdict, v: FieldVerdict) -> FieldVerdicts {
        FieldVerdicts {
            title: t,
            identifier: i,
            authors: a,
            year: y,
            venue: v,
        }
    }

    #[test]
    fn score_examples() {
        assert_eq!(authenticity_score(&FieldVerdicts::uniform(Match)).unwrap(), 1.0);
        let mixed = verdicts(Match, Absent, Abbrev, Match, Contradiction);
        let want = (0.25 + 0.15 + 0.15 - 0.15) / 0.75;
        assert!((authenticity_score(&mixed).unwrap() - want).abs() < 1e-12);
        assert_eq!(authenticity_score(&FieldVerdicts::uniform(Contradiction)).unwrap(), 0.0);
        assert!(authenticity_score(&FieldVerdicts::uniform(Absent)).is_err());
    }

    #[test]
    fn weights_sum_to_one() {
        let w = FieldWeights::default();
        let s: f64 = FieldKind::ALL.iter().map(|&k| w.get(k)).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn field_examples() {
        assert_eq!(classify_field(FieldKind::Year, Some("1971"), Some("1971")), Match);
        assert_eq!(
            classify_field(FieldKind::Year, Some("1971"), Some("1972")),
            Contradiction
        );
        assert_eq!(classify_field(FieldKind::Year, Some("1971a"), Some("1971")), Abbrev);
        assert_eq!(
            classify_field(FieldKind::Authors, Some("Dahl, R."), Some("Dahl, Robert A.")),
            Abbrev
        );
        assert_eq!(
            classify_field(FieldKind::Authors, Some("Dahl, R. A."), Some("Robert A. Dahl")),
            Abbrev
        );
        assert_eq!(classify_field(FieldKind::Title, None, Some("x")), Absent);
        assert_eq!(classify_field(FieldKind::Title, Some("x"), None), Unconfirmed);
        assert!(classify_field_named("pages", Some("1"), Some("1")).is_err());
    }

    #[test]
    fn title_rules() {
        let full = "Polyarchy: Participation and Opposition";
        assert_eq!(
            classify_field(
                FieldKind::Title,
                Some("polyarchy participation & opposition"),
                Some(full)
            ),
            Abbrev
        );
        assert_eq!(classify_field(FieldKind::Title, Some("Polyarchy"), Some(full)), Abbrev);
        assert_eq!(
            classify_field(FieldKind::Title, Some("Participation and Opposition"), Some(full)),
            Contains
        );
        assert_eq!(
            classify_field(FieldKind::Title, Some("Who Governs?"), Some(full)),
            Contradiction
        );
    }

    #[test]
    fn venue_rules() {
        let v = |a, b| classify_field(FieldKind::Venue, Some(a), Some(b));
        assert_eq!(v("Journal of Political Economy", "journal of political economy"), Match);
        assert_eq!(v("J. Polit. Econ.", "Journal of Political Economy"), Abbrev);
        assert_eq!(v("APSR", "American Political Science Review"), Abbrev);
        assert_eq!(v("Science & Society", "Science and Society"), Abbrev);
        assert_eq!(v("Nature", "Nature Climate Change"), Contains);
        assert_eq!(v("The Lancet", "Econometrica"), Contradiction);
    }

    #[test]
    fn identifier_rules() {
        let v = |a, b| classify_field(FieldKind::Identifier, Some(a), Some(b));
        assert_eq!(v("https://doi.org/10.1000/XYZ", "10.1000/xyz"), Match);
        assert_eq!(v("doi:10.1000/xyz", "https://dx.doi.org/10.1000/xyz"), Match);
        assert_eq!(v("10.1000/xyz", "10.1000/abc"), Contradiction);
        assert_eq!(v("https://www.jstor.org/stable/1", "10.1000/abc"), Unconfirmed);
    }

    #[test]
    fn author_lists() {
        let a = |x, y| classify_field(FieldKind::Authors, Some(x), Some(y));
        assert_eq!(
            a("Blais, A.; Dobrzynska, A.", "André Blais; Agnieszka Dobrzynska"),
            Abbrev
        );
        assert_eq!(a("Blais, André", "André Blais"), Match);
        assert_eq!(a("Blais, A.", "André Blais; Agnieszka Dobrzynska"), Contains);
        assert_eq!(a("Smith, J.", "André Blais"), Contradiction);
    }

    #[test]
    fn status_rules() {
        assert_eq!(classify_status(&FieldVerdicts::uniform(Match), true), Status::Verified);
        assert_eq!(
            classify_status(&verdicts(Match, Match, Match, Contradiction, Match), true),
            Status::VerifiedWithError
        );
        assert_eq!(
            classify_status(&verdicts(Contains, Absent, Match, Match, Match), true),
            Status::NeedsHuman
        );
        assert_eq!(
            classify_status(&FieldVerdicts::uniform(Match), false),
            Status::Unverified
        );
        assert_eq!(
            classify_status(&verdicts(Abbrev, Unconfirmed, Abbrev, Match, Absent), true),
            Status::Verified
        );
    }

    #[test]
    fn binary_title() {
        let mut r = VerificationResult {
            reference_id: "r".into(),
            verdicts: verdicts(Match, Absent, Match, Match, Contradiction),
            authenticity: 0.0,
            status: Status::VerifiedWithError,
            matched_candidate: Some("W1".into()),
        };
        assert!(binary_title_match(&r));
        r.verdicts.title = Abbrev;
        assert!(!binary_title_match(&r));
        r.verdicts.title = Match;
        r.matched_candidate = None;
        assert!(!binary_title_match(&r));
    }

    #[test]
    fn relevance() {
        assert_eq!(relevance_value(RelevanceLabel::Yes, 0.3), 1.0);
        assert_eq!(relevance_value(RelevanceLabel::Partial, 0.5), 0.5);
        assert_eq!(relevance_value(RelevanceLabel::Partial, 0.75), 0.75);
        assert_eq!(relevance_value(RelevanceLabel::No, 0.75), 0.0);
        assert_eq!(quality(0.8, RelevanceLabel::No, 0.5), 0.0);
    }

    #[test]
    fn unmatched_reference_scores_zero() {
        let p = crate::citeparse::parse_apa("Smith, J. (2020). A made up paper. Journal of Nothing.").unwrap();
        let r = verify_reference("x", &p, None, DEFAULT_CONTRADICTION_PENALTY);
        assert_eq!(r.status, Status::Unverified);
        assert_eq!(r.authenticity, 0.0);
        assert_eq!(r.verdicts.identifier, Absent);
        assert_eq!(r.verdicts.title, Unconfirmed);
    }
}
