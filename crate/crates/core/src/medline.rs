//! MEDLINE (PubMed tagged text export) parsing and import.
//!
//! Grammar: a record is a run of tag lines (`^[A-Z0-9]{1,4} *- `), each
//! optionally followed by continuation lines starting with six spaces;
//! records are separated by one or more blank lines. Parsing is total:
//! malformed lines are collected as warnings, never failures.

use crate::review::{Reference, Review};

/// One tagged record, order preserved, raw text retained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedlineRecord {
    /// (tag, joined value) pairs in file order.
    pub tags: Vec<(String, String)>,
    /// The record's lines as they appeared in the input.
    pub raw: String,
}

impl MedlineRecord {
    /// First value of a tag, if present.
    pub fn first(&self, tag: &str) -> Option<&str> {
        self.tags
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, v)| v.as_str())
    }

    /// All values of a tag, in order.
    pub fn all<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a str> {
        self.tags
            .iter()
            .filter(move |(t, _)| t == tag)
            .map(|(_, v)| v.as_str())
    }

    /// Serialise back to MEDLINE text (tags padded to four columns, no line
    /// wrapping). Round-trips tag order and values.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (tag, value) in &self.tags {
            out.push_str(&format!("{tag:<4}- {value}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    /// 1-based line number in the input.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub records: Vec<MedlineRecord>,
    pub warnings: Vec<ParseWarning>,
}

/// Parse MEDLINE text. Empty input yields an empty record list.
pub fn parse_medline(text: &str) -> ParseOutcome {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut outcome = ParseOutcome::default();

    let mut tags: Vec<(String, String)> = Vec::new();
    let mut raw = String::new();
    let mut block_had_content = false;
    let mut block_start_line = 0usize;

    let finalize = |tags: &mut Vec<(String, String)>,
                    raw: &mut String,
                    had_content: &mut bool,
                    start_line: usize,
                    outcome: &mut ParseOutcome| {
        if !tags.is_empty() {
            outcome.records.push(MedlineRecord {
                tags: std::mem::take(tags),
                raw: std::mem::take(raw),
            });
        } else if *had_content {
            outcome.warnings.push(ParseWarning {
                line: start_line,
                message: "block contains no recognizable tag line; skipped".into(),
            });
            raw.clear();
        }
        *had_content = false;
    };

    for (i, line_raw) in text.split('\n').enumerate() {
        let lineno = i + 1;
        let line = line_raw.strip_suffix('\r').unwrap_or(line_raw);

        if line.trim().is_empty() {
            finalize(
                &mut tags,
                &mut raw,
                &mut block_had_content,
                block_start_line,
                &mut outcome,
            );
            continue;
        }
        if !block_had_content {
            block_start_line = lineno;
            block_had_content = true;
        }
        raw.push_str(line);
        raw.push('\n');

        if let Some((tag, value)) = split_tag_line(line) {
            tags.push((tag.to_string(), value.to_string()));
        } else if let Some(rest) = line.strip_prefix("      ") {
            match tags.last_mut() {
                Some((_, value)) => {
                    let cont = rest.trim();
                    if !value.is_empty() && !cont.is_empty() {
                        value.push(' ');
                    }
                    value.push_str(cont);
                }
                None => outcome.warnings.push(ParseWarning {
                    line: lineno,
                    message: "continuation line with no preceding tag; skipped".into(),
                }),
            }
        } else {
            outcome.warnings.push(ParseWarning {
                line: lineno,
                message: format!("unrecognized line: {:?}", truncate(line, 40)),
            });
        }
    }
    finalize(
        &mut tags,
        &mut raw,
        &mut block_had_content,
        block_start_line,
        &mut outcome,
    );
    outcome
}

/// Parse raw bytes: strips a UTF-8 BOM and substitutes invalid sequences,
/// so arbitrary input never fails.
pub fn parse_medline_bytes(bytes: &[u8]) -> ParseOutcome {
    let bytes = bytes.strip_prefix(&[0xEF, 0xBB, 0xBF][..]).unwrap_or(bytes);
    parse_medline(&String::from_utf8_lossy(bytes))
}

/// Split a `TAG - value` line per the tag-line grammar, or None.
fn split_tag_line(line: &str) -> Option<(&str, &str)> {
    let bytes = line.as_bytes();
    let tag_len = bytes
        .iter()
        .take_while(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
        .count();
    if tag_len == 0 || tag_len > 4 {
        return None;
    }
    let mut rest = &line[tag_len..];
    let pad = rest.len() - rest.trim_start_matches(' ').len();
    rest = &rest[pad..];
    let rest = rest.strip_prefix('-')?;
    let value = rest.strip_prefix(' ').unwrap_or(rest);
    Some((&line[..tag_len], value.trim_end()))
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((idx, _)) => &s[..idx],
        None => s,
    }
}

/// Map a record to a bibliographic reference.
///
/// AU is preferred over FAU for authors; TI over BTI for the title; TA over
/// JT for the journal. The year is the first four-digit run in DP. Returns
/// None when the record has no title.
pub fn to_reference(record: &MedlineRecord) -> Option<Reference> {
    let title = record
        .first("TI")
        .or_else(|| record.first("BTI"))?
        .to_string();
    if title.is_empty() {
        return None;
    }

    let au: Vec<String> = record.all("AU").map(str::to_string).collect();
    let authors = if au.is_empty() {
        record.all("FAU").map(str::to_string).collect()
    } else {
        au
    };

    let journal = record
        .first("TA")
        .or_else(|| record.first("JT"))
        .unwrap_or_default()
        .to_string();

    let year = record.first("DP").and_then(first_four_digit_run);

    let mut identifiers = std::collections::BTreeMap::new();
    if let Some(pmid) = record.first("PMID") {
        if !pmid.is_empty() {
            identifiers.insert("PMID".to_string(), pmid.to_string());
        }
    }
    for aid in record.all("AID") {
        if let Some(doi) = aid
            .strip_suffix(" [doi]")
            .or_else(|| aid.strip_suffix("[doi]"))
        {
            identifiers.insert("DOI".to_string(), doi.trim().to_string());
        }
    }

    Some(Reference {
        authors,
        title,
        journal,
        year,
        volume: record.first("VI").map(str::to_string),
        pages: record.first("PG").map(str::to_string),
        identifiers,
    })
}

/// Convert records to references, with one warning per skipped record.
pub fn references_from_records(records: &[MedlineRecord]) -> (Vec<Reference>, Vec<String>) {
    let mut refs = Vec::new();
    let mut warnings = Vec::new();
    for (i, record) in records.iter().enumerate() {
        match to_reference(record) {
            Some(r) => refs.push(r),
            None => warnings.push(format!(
                "record {} (PMID {}) has no title; skipped",
                i + 1,
                record.first("PMID").unwrap_or("unknown")
            )),
        }
    }
    (refs, warnings)
}

fn first_four_digit_run(s: &str) -> Option<i32> {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == 4 {
                return s[start..i].parse().ok();
            }
        } else {
            i += 1;
        }
    }
    None
}

/// Result of merging references into the classification-pending list.
#[derive(Debug, Clone, Default)]
pub struct ImportOutcome {
    pub added: usize,
    /// One message per duplicate skipped (matched by PMID).
    pub skipped: Vec<String>,
}

/// Append references to the review's pending list. References whose PMID is
/// already present (pending or included) are skipped; references without a
/// PMID are always appended.
pub fn import_pending(review: &mut Review, refs: Vec<Reference>) -> ImportOutcome {
    let mut known: std::collections::BTreeSet<String> = review
        .pending_refs
        .iter()
        .chain(review.included_refs.iter())
        .filter_map(|r| r.identifiers.get("PMID").cloned())
        .collect();

    let mut outcome = ImportOutcome::default();
    for reference in refs {
        match reference.identifiers.get("PMID") {
            Some(pmid) if known.contains(pmid) => {
                outcome.skipped.push(format!(
                    "PMID {pmid} already present ({}); skipped",
                    truncate(&reference.title, 40)
                ));
            }
            Some(pmid) => {
                known.insert(pmid.clone());
                review.pending_refs.push(reference);
                outcome.added += 1;
            }
            None => {
                review.pending_refs.push(reference);
                outcome.added += 1;
            }
        }
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "PMID- 19268341\nTI  - Five-year experience with orthodontic miniscrew\n      implants: a retrospective investigation of factors\n      influencing success rates.\nAU  - Antoszewska J\nAU  - Papadopoulos MA\nTA  - Am J Orthod Dentofacial Orthop\nDP  - 2009 Aug\nVI  - 136\nPG  - 158.e1-10\nAID - 10.1016/j.ajodo.2009.03.04 [doi]\n";

    #[test]
    fn parses_single_record() {
        let out = parse_medline(SAMPLE);
        assert_eq!(out.records.len(), 1);
        assert!(out.warnings.is_empty());
        let rec = &out.records[0];
        assert_eq!(rec.first("PMID"), Some("19268341"));
        assert_eq!(
            rec.first("TI"),
            Some(
                "Five-year experience with orthodontic miniscrew implants: a retrospective \
                 investigation of factors influencing success rates."
            )
        );
        assert_eq!(rec.all("AU").count(), 2);
    }

    #[test]
    fn empty_input_is_empty_list() {
        assert!(parse_medline("").records.is_empty());
        assert!(parse_medline("\n\n\n").records.is_empty());
    }

    #[test]
    fn splits_records_on_blank_lines() {
        let text = "PMID- 1\nTI  - First\n\nPMID- 2\nTI  - Second\n\n\nPMID- 3\nTI  - Third\n";
        let out = parse_medline(text);
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.records[2].first("PMID"), Some("3"));
    }

    #[test]
    fn tolerates_crlf_and_bom() {
        let text = "\u{feff}PMID- 7\r\nTI  - Windows export\r\n\r\nPMID- 8\r\nTI  - Two\r\n";
        let out = parse_medline(text);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].first("TI"), Some("Windows export"));
    }

    #[test]
    fn unpadded_tags_accepted() {
        let out = parse_medline("PMID- 11\nTI- Short tag line\n");
        assert_eq!(out.records[0].first("TI"), Some("Short tag line"));
    }

    #[test]
    fn malformed_lines_warn_with_line_numbers() {
        let text = "PMID- 1\nTI  - Ok\nnot a tag line\nlowercase- also bad\n";
        let out = parse_medline(text);
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.warnings.len(), 2);
        assert_eq!(out.warnings[0].line, 3);
        assert_eq!(out.warnings[1].line, 4);
    }

    #[test]
    fn continuation_without_tag_warns() {
        let out = parse_medline("      orphan continuation\nPMID- 1\nTI  - T\n");
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].line, 1);
        assert_eq!(out.records.len(), 1);
    }

    #[test]
    fn block_without_tags_warns() {
        let out = parse_medline("just prose\nmore prose\n\nPMID- 5\nTI  - T\n");
        assert_eq!(out.records.len(), 1);
        assert!(out
            .warnings
            .iter()
            .any(|w| w.message.contains("no recognizable tag")));
    }

    #[test]
    fn serialization_round_trip_preserves_tags() {
        let out = parse_medline(SAMPLE);
        let text = out.records[0].to_text();
        let again = parse_medline(&text);
        assert_eq!(again.records[0].tags, out.records[0].tags);
    }

    #[test]
    fn reference_mapping() {
        let out = parse_medline(SAMPLE);
        let r = to_reference(&out.records[0]).unwrap();
        assert_eq!(r.year, Some(2009));
        assert_eq!(r.identifiers.get("PMID").unwrap(), "19268341");
        assert_eq!(
            r.identifiers.get("DOI").unwrap(),
            "10.1016/j.ajodo.2009.03.04"
        );
        assert_eq!(r.authors, vec!["Antoszewska J", "Papadopoulos MA"]);
        assert_eq!(r.journal, "Am J Orthod Dentofacial Orthop");
        assert_eq!(r.volume.as_deref(), Some("136"));
        assert_eq!(r.pages.as_deref(), Some("158.e1-10"));
        assert!(r.title.starts_with("Five-year experience"));
    }

    #[test]
    fn year_extraction_rules() {
        let record = |dp: &str| MedlineRecord {
            tags: vec![("TI".into(), "T".into()), ("DP".into(), dp.into())],
            raw: String::new(),
        };
        assert_eq!(
            to_reference(&record("2009 Jul-Aug")).unwrap().year,
            Some(2009)
        );
        assert_eq!(
            to_reference(&record("Winter 2011")).unwrap().year,
            Some(2011)
        );
        assert_eq!(to_reference(&record("no digits")).unwrap().year, None);
        // A five-digit run is not a year; the later four-digit run wins.
        assert_eq!(
            to_reference(&record("12345 then 1999")).unwrap().year,
            Some(1999)
        );
    }

    #[test]
    fn missing_dp_is_not_an_error() {
        let rec = MedlineRecord {
            tags: vec![("TI".into(), "T".into())],
            raw: String::new(),
        };
        let r = to_reference(&rec).unwrap();
        assert_eq!(r.year, None);
    }

    #[test]
    fn fau_used_when_no_au() {
        let rec = MedlineRecord {
            tags: vec![
                ("TI".into(), "T".into()),
                ("FAU".into(), "Smith, John".into()),
                ("FAU".into(), "Jones, Ann".into()),
            ],
            raw: String::new(),
        };
        let r = to_reference(&rec).unwrap();
        assert_eq!(r.authors, vec!["Smith, John", "Jones, Ann"]);
    }

    #[test]
    fn record_without_title_skipped_with_warning() {
        let recs = parse_medline("PMID- 99\nAU  - Nobody N\n").records;
        let (refs, warnings) = references_from_records(&recs);
        assert!(refs.is_empty());
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("99"));
    }

    #[test]
    fn bti_fallback_for_books() {
        let out = parse_medline("PMID- 3\nBTI - Some Book Title\n");
        let r = to_reference(&out.records[0]).unwrap();
        assert_eq!(r.title, "Some Book Title");
    }

    #[test]
    fn import_dedups_by_pmid() {
        let mut review = Review::new("X").unwrap();
        let out = parse_medline(SAMPLE);
        let (refs, _) = references_from_records(&out.records);
        let first = import_pending(&mut review, refs.clone());
        assert_eq!(first.added, 1);
        let second = import_pending(&mut review, refs);
        assert_eq!(second.added, 0);
        assert_eq!(second.skipped.len(), 1);
        assert_eq!(review.pending_refs.len(), 1);
    }

    #[test]
    fn import_always_appends_without_pmid() {
        let mut review = Review::new("X").unwrap();
        let reference = Reference {
            authors: vec![],
            title: "No identifier".into(),
            journal: String::new(),
            year: None,
            volume: None,
            pages: None,
            identifiers: Default::default(),
        };
        assert_eq!(
            import_pending(&mut review, vec![reference.clone()]).added,
            1
        );
        assert_eq!(import_pending(&mut review, vec![reference]).added, 1);
        assert_eq!(review.pending_refs.len(), 2);
    }

    #[test]
    fn parse_bytes_handles_invalid_utf8() {
        let mut bytes = SAMPLE.as_bytes().to_vec();
        bytes[20] = 0xFF;
        let out = parse_medline_bytes(&bytes);
        assert_eq!(out.records.len(), 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Parsing never panics on arbitrary input.
            #[test]
            fn parse_is_total(input in proptest::collection::vec(any::<u8>(), 0..2048)) {
                let _ = parse_medline_bytes(&input);
            }

            // Well-formed records survive a serialise/parse cycle.
            #[test]
            fn round_trip_preserves_tag_order(
                tags in proptest::collection::vec(
                    ("[A-Z0-9]{1,4}", "[ -~]{0,60}"),
                    1..12,
                ),
            ) {
                let record = MedlineRecord {
                    tags: tags
                        .iter()
                        .map(|(t, v)| (t.clone(), v.trim().to_string()))
                        .collect(),
                    raw: String::new(),
                };
                let parsed = parse_medline(&record.to_text());
                prop_assert_eq!(parsed.records.len(), 1);
                prop_assert_eq!(&parsed.records[0].tags, &record.tags);
            }
        }
    }
}
