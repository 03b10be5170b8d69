//! Rule-based handling of APA-style citations produced by a model.
//!
//! Parsing is deterministic: anything the rules cannot handle becomes a
//! [`ParseFailure`] carrying the raw text so it can be counted and logged.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::{decompose_canonical, is_combining_mark};

/// The shipped English function-word list, one token per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedReference {
    pub authors: Vec<String>,
    pub year: Option<i32>,
    pub title: String,
    pub venue: Option<String>,
    pub identifier: Option<String>,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub reason: String,
    pub raw: String,
}

impl core::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.reason, self.raw)
    }
}

fn failure(reason: &str, raw: &str) -> ParseFailure {
    ParseFailure {
        reason: reason.to_string(),
        raw: raw.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Splitting

/// Splits a model response into candidate citation strings.
///
/// Enumeration markers and markdown emphasis are stripped; lines without a
/// parenthesized year marker (`(1971)`, `(2020a)`, `(n.d.)`) are treated as
/// commentary and dropped.
pub fn split_reference_list(raw_text: &str) -> Vec<String> {
    raw_text
        .lines()
        .filter_map(|line| {
            let cleaned: String = line.chars().filter(|&c| c != '*').collect();
            let body = strip_enumeration(cleaned.trim()).trim();
            if body.is_empty() || find_year_marker(body).is_none() {
                None
            } else {
                Some(body.to_string())
            }
        })
        .collect()
}

fn strip_enumeration(line: &str) -> &str {
    let line = line.trim_start();
    for bullet in ["-", "•", "–", "·", "+"] {
        if let Some(rest) = line.strip_prefix(bullet) {
            if rest.starts_with(char::is_whitespace) {
                return rest;
            }
        }
    }
    // [12] reference
    if let Some(rest) = line.strip_prefix('[') {
        if let Some(close) = rest.find(']') {
            if close > 0 && rest[..close].bytes().all(|b| b.is_ascii_digit()) {
                return &rest[close + 1..];
            }
        }
    }
    // 12. reference / 12) reference
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 && digits <= 3 {
        let rest = &line[digits..];
        if let Some(r) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            if r.is_empty() || r.starts_with(char::is_whitespace) {
                return r;
            }
        }
    }
    line
}

struct YearMarker {
    /// Byte range of the whole parenthesized group.
    span: Range<usize>,
    year: Option<i32>,
}

/// First `(YYYY...)` group with a plausible year, or `(n.d.)`.
fn find_year_marker(s: &str) -> Option<YearMarker> {
    let bytes = s.as_bytes();
    let mut from = 0;
    while let Some(off) = s[from..].find('(') {
        let open = from + off;
        let inner_start = open + 1;
        let close = {
            let c = s[inner_start..].find(')')?;
            inner_start + c
        };
        let inner = &s[inner_start..close];
        if inner.eq_ignore_ascii_case("n.d.") || inner.eq_ignore_ascii_case("n.d") {
            return Some(YearMarker {
                span: open..close + 1,
                year: None,
            });
        }
        if inner.len() >= 4 && bytes[inner_start..inner_start + 4].iter().all(u8::is_ascii_digit) {
            let tail = &inner[4..];
            let tail_ok = tail.is_empty()
                || tail.starts_with(',')
                || (tail.len() == 1 && tail.bytes().all(|b| b.is_ascii_lowercase()));
            let year: i32 = inner[..4].parse().ok()?;
            if tail_ok && (1400..=2100).contains(&year) {
                return Some(YearMarker {
                    span: open..close + 1,
                    year: Some(year),
                });
            }
        }
        from = open + 1;
    }
    None
}

// ---------------------------------------------------------------------------
// Parsing

const EDGE_JUNK: &[char] = &['*', '"', '“', '”', '_', ' ', '\t'];

/// Parses one APA citation: `Author(s) (Year). Title. Venue.`
pub fn parse_apa(raw: &str) -> Result<ParsedReference, ParseFailure> {
    let text = raw.trim();
    if text.is_empty() {
        return Err(failure("empty citation", raw));
    }
    let marker = find_year_marker(text).ok_or_else(|| failure("no parenthesized year", raw))?;
    let authors_text = text[..marker.span.start].trim();
    let authors = split_authors(authors_text);
    if authors.is_empty() {
        return Err(failure("no authors before year", raw));
    }

    let identifier = find_identifier(text);
    let body_end = identifier
        .as_ref()
        .map(|(r, _)| r.start)
        .filter(|&s| s >= marker.span.end)
        .unwrap_or(text.len());
    let after_year = text[marker.span.end..body_end].trim_start_matches(|c: char| c == '.' || c.is_whitespace());

    let (title_raw, rest) = split_sentence(after_year);
    let title = title_raw.trim_matches(EDGE_JUNK);
    if normalize_title(title).is_empty() {
        return Err(failure("no title after year", raw));
    }
    let venue = rest
        .trim_matches(EDGE_JUNK)
        .trim_end_matches(['.', ','])
        .trim_matches(EDGE_JUNK);
    let venue = (!venue.is_empty()).then(|| venue.to_string());

    Ok(ParsedReference {
        authors,
        year: marker.year,
        title: title.to_string(),
        venue,
        identifier: identifier.map(|(_, id)| id.to_string()),
        raw: raw.to_string(),
    })
}

/// Splits at the first sentence end: `.` followed by whitespace or end of
/// text, or `?`/`!` followed by whitespace (kept with the title).
fn split_sentence(s: &str) -> (&str, &str) {
    let mut it = s.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        let next_is_break = it.peek().is_none_or(|&(_, n)| n.is_whitespace());
        match c {
            '.' if next_is_break => return (&s[..i], &s[i + 1..]),
            '?' | '!' if next_is_break => return (&s[..i + c.len_utf8()], &s[i + c.len_utf8()..]),
            _ => {}
        }
    }
    (s, "")
}

fn find_identifier(text: &str) -> Option<(Range<usize>, &str)> {
    let mut offset = 0;
    for token in text.split_whitespace() {
        let start = offset + text[offset..].find(token).unwrap();
        offset = start + token.len();
        let lower = token.to_ascii_lowercase();
        let is_id = lower.starts_with("http://")
            || lower.starts_with("https://")
            || lower.starts_with("doi:")
            || looks_like_bare_doi(token);
        if is_id {
            let trimmed = token.trim_end_matches(['.', ',', ';', ')', ']']);
            return Some((start..start + trimmed.len(), trimmed));
        }
    }
    None
}

fn looks_like_bare_doi(token: &str) -> bool {
    let Some(rest) = token.strip_prefix("10.") else {
        return false;
    };
    let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
    digits >= 4 && rest[digits..].starts_with('/')
}

fn is_initials(seg: &str) -> bool {
    let seg = seg.trim();
    !seg.is_empty()
        && seg.split_whitespace().all(|part| {
            part.split('-').all(|p| {
                let letters: Vec<char> = p.trim_end_matches('.').chars().collect();
                !letters.is_empty() && letters.len() <= 2 && letters[0].is_uppercase() && p.ends_with('.')
            })
        })
}

/// Splits an APA author string into individual names, each a verbatim slice
/// of the input ("Dahl, R. A., & Lindblom, C. E." → two names).
pub fn split_authors(text: &str) -> Vec<String> {
    // segments separated by ',' or '&', tracked by byte range
    let mut segs: Vec<Range<usize>> = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == ',' || c == '&' {
            segs.push(start..i);
            start = i + c.len_utf8();
        }
    }
    segs.push(start..text.len());

    let trimmed = |r: &Range<usize>| -> Range<usize> {
        let s = &text[r.clone()];
        let lead = s.len() - s.trim_start().len();
        let mut inner = s.trim();
        let mut lead2 = 0;
        if let Some(rest) = inner.strip_prefix("and ") {
            lead2 = inner.len() - rest.len();
            inner = rest.trim_start();
            lead2 += rest.len() - inner.len();
        }
        let a = r.start + lead + lead2;
        a..a + inner.len()
    };

    let segs: Vec<Range<usize>> = segs.iter().map(trimmed).filter(|r| !r.is_empty()).collect();
    let mut names = Vec::new();
    let mut i = 0;
    while i < segs.len() {
        let seg = &text[segs[i].clone()];
        if seg.starts_with("et al") || seg == "..." || seg == "…" {
            i += 1;
            continue;
        }
        let mut range = segs[i].clone();
        if i + 1 < segs.len() && !is_initials(seg) && is_initials(&text[segs[i + 1].clone()]) {
            range.end = segs[i + 1].end;
            i += 1;
        }
        let name = text[range].trim_matches(EDGE_JUNK);
        if !name.is_empty() {
            names.push(name.to_string());
        }
        i += 1;
    }
    names
}

// ---------------------------------------------------------------------------
// Author names

/// Surname plus given-name initials, for initial-to-initial comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorName {
    pub surname: String,
    /// Normalized given-name tokens; single letters for initials.
    pub given: Vec<String>,
}

impl AuthorName {
    /// Accepts "Surname, G. N." and "Given Names Surname".
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        let (surname, given) = match s.split_once(',') {
            Some((sur, giv)) => (sur.trim(), giv.trim()),
            None => match s.rsplit_once(char::is_whitespace) {
                Some((giv, sur)) => (sur.trim(), giv.trim()),
                None => (s, ""),
            },
        };
        let surname = normalize_title(surname);
        if surname.is_empty() {
            return None;
        }
        let given = given
            .split(|c: char| c.is_whitespace() || c == '.' || c == '-')
            .map(normalize_title)
            .filter(|t| !t.is_empty())
            .collect();
        Some(AuthorName { surname, given })
    }

    pub fn initials(&self) -> Vec<char> {
        self.given.iter().filter_map(|g| g.chars().next()).collect()
    }

    /// True if the given-name tokens are identical (full names written out).
    pub fn same_full_name(&self, other: &AuthorName) -> bool {
        self.surname == other.surname && self.given == other.given
    }

    /// Surnames equal and the shorter initials list is a prefix of the longer.
    pub fn initials_compatible(&self, other: &AuthorName) -> bool {
        if self.surname != other.surname {
            return false;
        }
        let (a, b) = (self.initials(), other.initials());
        let n = a.len().min(b.len());
        a[..n] == b[..n]
    }
}

// ---------------------------------------------------------------------------
// Normalization

fn fold_special(c: char) -> Option<&'static str> {
    Some(match c {
        'ß' => "ss",
        'æ' | 'Æ' => "ae",
        'œ' | 'Œ' => "oe",
        'ø' | 'Ø' => "o",
        'đ' | 'Đ' | 'ð' | 'Ð' => "d",
        'ł' | 'Ł' => "l",
        'ı' => "i",
        'þ' | 'Þ' => "th",
        _ => return None,
    })
}

/// Case-, punctuation- and whitespace-insensitive form of a title: only
/// lower-case letters and digits survive; diacritics fold to base letters.
pub fn normalize_title(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if let Some(f) = fold_special(c) {
            out.push_str(f);
            continue;
        }
        decompose_canonical(c, |d| {
            if is_combining_mark(d) || !d.is_alphanumeric() {
                return;
            }
            for l in d.to_lowercase() {
                if l.is_alphanumeric() && !is_combining_mark(l) {
                    out.push(l);
                }
            }
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// One token per line; blank lines and `#` comments ignored.
    pub fn from_lines(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(normalize_title)
                .collect(),
        )
    }

    pub fn english() -> Self {
        Self::from_lines(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::english()
    }
}

/// Normalized non-stopword tokens of `s`.
pub fn content_words(s: &str, stopwords: &Stopwords) -> BTreeSet<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .map(normalize_title)
        .filter(|t| !t.is_empty() && !stopwords.contains(t))
        .collect()
}

/// |W(claimed) ∩ W(candidate)| / |W(claimed)|; 0 when the claimed title has
/// no content words.
pub fn content_word_overlap(claimed: &str, candidate: &str, stopwords: &Stopwords) -> f64 {
    let a = content_words(claimed, stopwords);
    if a.is_empty() {
        return 0.0;
    }
    let b = content_words(candidate, stopwords);
    a.intersection(&b).count() as f64 / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn parses_dahl() {
        let r =
            parse_apa("Dahl, R. A. (1971). Polyarchy: Participation and Opposition. Yale University Press.").unwrap();
        assert_eq!(r.authors, vec!["Dahl, R. A."]);
        assert_eq!(r.year, Some(1971));
        assert_eq!(r.title, "Polyarchy: Participation and Opposition");
        assert_eq!(r.venue.as_deref(), Some("Yale University Press"));
        assert_eq!(r.identifier, None);
    }

    #[test]
    fn degenerate_citation_fails() {
        let err = parse_apa("(2020). Untitled.").unwrap_err();
        assert_eq!(err.raw, "(2020). Untitled.");
        assert!(parse_apa("Smith, J. (2020). .").is_err());
        assert!(parse_apa("no year here at all").is_err());
    }

    #[test]
    fn identifier_verbatim() {
        let r = parse_apa(
            "Lengeler, C. (2004). Insecticide-treated bed nets and curtains for preventing malaria. \
             Cochrane Database of Systematic Reviews, 2. https://doi.org/10.1000/xyz",
        )
        .unwrap();
        assert_eq!(r.identifier.as_deref(), Some("https://doi.org/10.1000/xyz"));
        assert_eq!(r.venue.as_deref(), Some("Cochrane Database of Systematic Reviews, 2"));
    }

    #[test]
    fn multiple_authors_and_doi() {
        let r = parse_apa(
            "Blais, A., & Dobrzynska, A. (1998). Turnout in electoral democracies. \
             European Journal of Political Research, 33(2), 239-261. doi:10.1111/1475-6765.00382.",
        )
        .unwrap();
        assert_eq!(r.authors, vec!["Blais, A.", "Dobrzynska, A."]);
        assert_eq!(r.identifier.as_deref(), Some("doi:10.1111/1475-6765.00382"));
        assert_eq!(
            r.venue.as_deref(),
            Some("European Journal of Political Research, 33(2), 239-261")
        );
    }

    #[test]
    fn question_title_and_no_date() {
        let r = parse_apa("Sen, A. (n.d.). What is development? Oxford University Press.").unwrap();
        assert_eq!(r.year, None);
        assert_eq!(r.title, "What is development?");
        assert_eq!(r.venue.as_deref(), Some("Oxford University Press"));
    }

    #[test]
    fn authors_with_and_and_etal() {
        assert_eq!(
            split_authors("Smith, J., Jones, K. L., and Lee, M."),
            vec!["Smith, J.", "Jones, K. L.", "Lee, M."]
        );
        assert_eq!(split_authors("Smith, J., et al."), vec!["Smith, J."]);
        assert_eq!(split_authors("World Bank"), vec!["World Bank"]);
        assert_eq!(
            split_authors("Nguyen, T.-H. & Park, S."),
            vec!["Nguyen, T.-H.", "Park, S."]
        );
    }

    #[test]
    fn split_strips_markers_and_preamble() {
        let text = "Here are the references:\n\n1. Dahl, R. A. (1971). Polyarchy. Yale.\n2) Lipset, S. M. (1959). Some social requisites of democracy. APSR.\n- Key, V. O. (1949). Southern politics. Knopf.\n\nLet me know if you need more.";
        let entries = split_reference_list(text);
        assert_eq!(entries.len(), 3);
        assert!(entries[0].starts_with("Dahl"));
        assert!(entries[1].starts_with("Lipset"));
        assert!(entries[2].starts_with("Key"));
        assert!(split_reference_list("").is_empty());
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(
            normalize_title("Polyarchy: Participation and Opposition"),
            "polyarchyparticipationandopposition"
        );
        assert_eq!(normalize_title(""), "");
        assert_eq!(normalize_title("Énergie  renouvelable!"), "energierenouvelable");
    }

    #[test]
    fn overlap_examples() {
        let sw = Stopwords::from_lines("the\nof\n");
        assert_eq!(
            content_word_overlap("the effect of malaria nets", "malaria nets effect", &sw),
            1.0
        );
        assert_eq!(content_word_overlap("Polyarchy", "Polyarchy", &sw), 1.0);
        assert_eq!(content_word_overlap("voter turnout", "bed nets", &sw), 0.0);
        assert_eq!(content_word_overlap("the of", "the of", &sw), 0.0);
        assert_eq!(content_word_overlap("voter turnout rates", "turnout", &sw), 1.0 / 3.0);
    }

    #[test]
    fn author_names() {
        let a = AuthorName::parse("Dahl, R.").unwrap();
        let b = AuthorName::parse("Robert A. Dahl").unwrap();
        assert!(a.initials_compatible(&b));
        assert!(!a.same_full_name(&b));
        assert_eq!(b.initials(), vec!['r', 'a']);
        let c = AuthorName::parse("Dahl, Robert A.").unwrap();
        assert!(b.same_full_name(&c));
    }

    #[test]
    fn default_stopwords_loaded() {
        let sw = Stopwords::english();
        assert!(sw.len() >= 50);
        assert!(sw.contains("the") && sw.contains("of"));
        assert!(!sw.contains("malaria"));
    }
}
