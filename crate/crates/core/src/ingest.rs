//! Text formats for matrices, logs, and models.
//!
//! Matrix format: comma-separated, UTF-8. The first cell of the header is the
//! literal `activity`, the remaining header cells are event identifiers. Each
//! following line holds one activity label and its probability row. Lines
//! whose first non-blank character is `#` are comments and are ignored, as
//! are blank lines.
//!
//! ```text
//! activity,e1,e2,e3,e4
//! a,0.5,0.3,0.1,0.2
//! b,0.3,0.6,0.1,0.2
//! c,0.2,0.05,0.2,0.31
//! d,0,0.05,0.6,0.29
//! ```
//!
//! Log/model format: an `alphabet:` line with space-separated labels, then
//! one `trace:` line per distinct trace, optionally ending in a frequency
//! suffix `xN` (default 1). Duplicate traces are merged by summing their
//! frequencies.
//!
//! ```text
//! alphabet: a b c d
//! trace: a b c d x20
//! trace: b a c d x10
//! ```

use quick_xml::events::Event as XmlEvent;
use quick_xml::Reader as XmlReader;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::trace::{DeterministicTrace, EventLog, StochasticTrace};

/// Default number of decimal digits written per probability.
pub const DEFAULT_PRECISION: usize = 6;

fn content_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input
        .lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line))
        .filter(|(_, line)| {
            let trimmed = line.trim_start();
            !trimmed.is_empty() && !trimmed.starts_with('#')
        })
}

/// Parses the matrix format. When `alphabet` is given, row labels are checked
/// against it (rows may come in any order); otherwise the row order defines a
/// new alphabet. Values go through full stochastic validation.
pub fn parse_matrix(input: &str, alphabet: Option<&Alphabet>) -> Result<StochasticTrace> {
    let mut lines = content_lines(input);
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| Error::syntax(1, 1, "empty matrix document"))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields[0] != "activity" {
        return Err(Error::syntax(
            header_line,
            1,
            format!("header must start with `activity`, found `{}`", fields[0]),
        ));
    }
    let events = fields.len() - 1;
    if events == 0 {
        return Err(Error::syntax(header_line, 2, "header declares no events"));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != events + 1 {
            return Err(Error::syntax(
                line_no,
                fields.len().min(events + 1),
                format!("expected {} fields, found {}", events + 1, fields.len()),
            ));
        }
        let mut row = Vec::with_capacity(events);
        for (k, field) in fields[1..].iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Error::syntax(line_no, k + 2, format!("invalid probability `{field}`"))
            })?;
            row.push(value);
        }
        labels.push(fields[0].to_string());
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::syntax(header_line, 1, "matrix has no activity rows"));
    }

    match alphabet {
        None => {
            let alphabet = Alphabet::new(labels)?;
            StochasticTrace::from_rows(&alphabet, &rows)
        }
        Some(alphabet) => {
            let mut ordered: Vec<Option<Vec<f64>>> = vec![None; alphabet.len()];
            for (label, row) in labels.iter().zip(rows) {
                let index = alphabet.require(label)?;
                if ordered[index].replace(row).is_some() {
                    return Err(Error::DuplicateLabel(label.clone()));
                }
            }
            let rows: Vec<Vec<f64>> = ordered.into_iter().flatten().collect();
            StochasticTrace::from_rows(alphabet, &rows)
        }
    }
}

/// Parses the log/model format into an [`EventLog`].
pub fn parse_log(input: &str) -> Result<EventLog> {
    let mut lines = content_lines(input);
    let (first_line, first) = lines
        .next()
        .ok_or_else(|| Error::syntax(1, 1, "empty log document"))?;
    let alphabet = match first.trim().strip_prefix("alphabet:") {
        Some(rest) => Alphabet::new(rest.split_whitespace())?,
        None => return Err(Error::syntax(first_line, 1, "expected an `alphabet:` line")),
    };

    let mut entries: Vec<(DeterministicTrace, u64)> = Vec::new();
    for (line_no, line) in lines {
        let rest = line
            .trim()
            .strip_prefix("trace:")
            .ok_or_else(|| Error::syntax(line_no, 1, "expected a `trace:` line"))?;
        let mut tokens: Vec<&str> = rest.split_whitespace().collect();
        let mut frequency = 1u64;
        if let Some(last) = tokens.last() {
            if let Some(digits) = last.strip_prefix('x') {
                if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                    frequency = digits.parse().map_err(|_| {
                        Error::syntax(line_no, tokens.len(), format!("invalid frequency `{last}`"))
                    })?;
                    tokens.pop();
                }
            }
        }
        if frequency == 0 {
            return Err(Error::ZeroFrequency);
        }
        let trace = DeterministicTrace::new(&alphabet, tokens)?;
        entries.push((trace, frequency));
    }
    EventLog::new(&alphabet, entries)
}

fn render_units(units: i64, scale: i64, precision: usize) -> String {
    let whole = units / scale;
    let frac = units % scale;
    if frac == 0 {
        return whole.to_string();
    }
    let text = format!("{whole}.{frac:0precision$}");
    text.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Quantizes one column to integer multiples of `10^-precision` that sum
/// exactly to 1, assigning the leftover units to the largest rounding
/// remainders (ties toward earlier activities). Each entry moves by less
/// than one unit, and the written column always passes validation again.
fn quantize_column(column: &[f64], scale: i64) -> Vec<i64> {
    let mut units: Vec<i64> = Vec::with_capacity(column.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(column.len());
    for (i, &p) in column.iter().enumerate() {
        let exact = p * scale as f64;
        let floor = exact.floor();
        units.push(floor as i64);
        remainders.push((i, exact - floor));
    }
    let mut deficit = scale - units.iter().sum::<i64>();
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut cursor = 0usize;
    while deficit > 0 {
        units[remainders[cursor % remainders.len()].0] += 1;
        cursor += 1;
        deficit -= 1;
    }
    // A surplus only appears when the stored column itself drifts above 1;
    // shave it off the smallest remainders that still have mass.
    let mut cursor = 0usize;
    while deficit < 0 {
        let index = remainders[remainders.len() - 1 - cursor % remainders.len()].0;
        if units[index] > 0 {
            units[index] -= 1;
            deficit += 1;
        }
        cursor += 1;
    }
    units
}

/// Renders a trace in the matrix format with `precision` decimal digits
/// (trailing zeros trimmed, so one-hot matrices come out as bare `1`/`0`).
/// Parsing the result recovers every entry to within `10^-precision`.
pub fn write_matrix(sk: &StochasticTrace, precision: usize) -> String {
    let precision = precision.clamp(1, 12);
    let scale = 10i64.pow(precision as u32);
    let quantized: Vec<Vec<i64>> = (0..sk.events())
        .map(|j| quantize_column(sk.column(j), scale))
        .collect();
    let mut out = String::from("activity");
    for j in 1..=sk.events() {
        out.push_str(&format!(",e{j}"));
    }
    out.push('\n');
    for i in 0..sk.activities() {
        out.push_str(sk.alphabet().label(i));
        for column in &quantized {
            out.push(',');
            out.push_str(&render_units(column[i], scale, precision));
        }
        out.push('\n');
    }
    out
}

/// Renders a log in the log/model format. The `xN` frequency suffix is
/// omitted when the frequency is 1.
pub fn write_log(log: &EventLog) -> String {
    let mut out = format!("alphabet: {}\n", log.alphabet());
    for entry in log.entries() {
        out.push_str("trace:");
        for label in entry.trace().labels() {
            out.push(' ');
            out.push_str(label);
        }
        if entry.frequency() != 1 {
            out.push_str(&format!(" x{}", entry.frequency()));
        }
        out.push('\n');
    }
    out
}

fn xml_line(input: &str, reader: &XmlReader<&[u8]>) -> usize {
    let offset = (reader.buffer_position() as usize).min(input.len());
    input[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Minimal XES import for deterministic logs: every `<event>` inside a
/// `<trace>` contributes its `concept:name`. The alphabet is the sorted set
/// of observed names; each trace counts with frequency 1 and duplicates are
/// merged. Probability attributes have no XES representation, so this import
/// is limited to deterministic data.
pub fn parse_xes(input: &str) -> Result<EventLog> {
    fn concept_name(tag: &quick_xml::events::BytesStart<'_>, line: usize) -> Result<Option<String>> {
        let mut key = None;
        let mut value = None;
        for attr in tag.attributes() {
            let attr = attr
                .map_err(|e| Error::syntax(line, 1, format!("malformed XES attribute: {e}")))?;
            let text = attr
                .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                .map_err(|e| {
                    Error::syntax(line, 1, format!("malformed XES attribute value: {e}"))
                })?
                .into_owned();
            match attr.key.as_ref() {
                b"key" => key = Some(text),
                b"value" => value = Some(text),
                _ => {}
            }
        }
        Ok(if key.as_deref() == Some("concept:name") {
            value
        } else {
            None
        })
    }

    let mut reader = XmlReader::from_str(input);
    reader.config_mut().trim_text(true);

    let mut traces: Vec<Vec<String>> = Vec::new();
    let mut current: Option<Vec<String>> = None;
    let mut in_event = false;
    loop {
        let event = reader.read_event().map_err(|e| {
            Error::syntax(xml_line(input, &reader), 1, format!("malformed XES: {e}"))
        })?;
        match event {
            XmlEvent::Eof => break,
            XmlEvent::Start(tag) => match tag.name().as_ref() {
                b"trace" => current = Some(Vec::new()),
                b"event" => in_event = true,
                b"string" if in_event => {
                    let line = xml_line(input, &reader);
                    if let (Some(name), Some(trace)) =
                        (concept_name(&tag, line)?, current.as_mut())
                    {
                        trace.push(name);
                    }
                }
                _ => {}
            },
            // Self-closing <trace/> and <event/> contain nothing; only a
            // self-closing attribute inside an open <event> matters.
            XmlEvent::Empty(tag) => {
                if tag.name().as_ref() == b"string" && in_event {
                    let line = xml_line(input, &reader);
                    if let (Some(name), Some(trace)) =
                        (concept_name(&tag, line)?, current.as_mut())
                    {
                        trace.push(name);
                    }
                }
            }
            XmlEvent::End(tag) => match tag.name().as_ref() {
                b"trace" => {
                    if let Some(trace) = current.take() {
                        traces.push(trace);
                    }
                }
                b"event" => in_event = false,
                _ => {}
            },
            _ => {}
        }
    }

    let mut labels: Vec<String> = traces.iter().flatten().cloned().collect();
    labels.sort();
    labels.dedup();
    if labels.is_empty() {
        return Err(Error::syntax(1, 1, "XES document contains no events"));
    }
    let alphabet = Alphabet::new(labels)?;
    let entries = traces
        .into_iter()
        .map(|t| Ok((DeterministicTrace::new(&alphabet, t)?, 1)))
        .collect::<Result<Vec<_>>>()?;
    EventLog::new(&alphabet, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRIOR: &str = "\
activity,e1,e2,e3,e4
a,0.5,0.3,0.1,0.2
b,0.3,0.6,0.1,0.2
c,0.2,0.05,0.2,0.31
d,0,0.05,0.6,0.29
";

    #[test]
    fn parses_the_example_prior() {
        let trace = parse_matrix(PRIOR, None).unwrap();
        assert_eq!(trace.alphabet().labels(), ["a", "b", "c", "d"]);
        assert_eq!(trace.prob(0, 0), 0.5);
        assert_eq!(trace.prob(2, 3), 0.31);
        assert_eq!(trace.events(), 4);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let input = format!("# observation\n\n{PRIOR}");
        let trace = parse_matrix(&input, None).unwrap();
        assert_eq!(trace.events(), 4);
    }

    #[test]
    fn rejects_empty_body() {
        assert!(matches!(
            parse_matrix("", None),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix("activity,e1\n", None),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn reports_ragged_rows_with_line_number() {
        let input = "activity,e1,e2\na,0.5,0.5\nb,0.5\n";
        match parse_matrix(input, None) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reports_bad_numbers_with_position() {
        let input = "activity,e1\na,0.5\nb,abc\n";
        match parse_matrix(input, None) {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, 2);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn checks_rows_against_a_given_alphabet() {
        let alphabet = Alphabet::new(["a", "b", "c", "d"]).unwrap();
        let trace = parse_matrix(PRIOR, Some(&alphabet)).unwrap();
        assert_eq!(trace.alphabet(), &alphabet);

        let reordered = "\
activity,e1
b,0.7
a,0.3
";
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let trace = parse_matrix(reordered, Some(&ab)).unwrap();
        assert_eq!(trace.prob(0, 0), 0.3);
        assert_eq!(trace.prob(1, 0), 0.7);

        assert_eq!(
            parse_matrix(PRIOR, Some(&ab)).unwrap_err(),
            Error::UnknownLabel("c".into())
        );
    }

    #[test]
    fn missing_rows_fail_validation() {
        let input = "activity,e1\na,1\n";
        let ab = Alphabet::new(["a", "b"]).unwrap();
        assert!(matches!(
            parse_matrix(input, Some(&ab)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn parses_the_worked_example_log() {
        let input = "alphabet: a b c d\ntrace: a b c d x20\ntrace: b a c d x10\n";
        let log = parse_log(input).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.entries()[0].frequency(), 20);
        assert_eq!(log.entries()[1].frequency(), 10);
        assert_eq!(log.entries()[1].trace().to_string(), "b a c d");
        assert_eq!(log.total_frequency(), 30);
    }

    #[test]
    fn merges_duplicate_log_entries() {
        let input = "alphabet: a\ntrace: a x2\ntrace: a x3\n";
        let log = parse_log(input).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.entries()[0].frequency(), 5);
    }

    #[test]
    fn log_error_paths() {
        assert_eq!(
            parse_log("alphabet: a\ntrace: a b\n").unwrap_err(),
            Error::UnknownLabel("b".into())
        );
        assert_eq!(
            parse_log("alphabet: a\ntrace: a x0\n").unwrap_err(),
            Error::ZeroFrequency
        );
        assert!(matches!(
            parse_log("trace: a\n"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_log("alphabet: a\nfoo: a\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn frequency_defaults_to_one() {
        let log = parse_log("alphabet: a b\ntrace: a b\n").unwrap();
        assert_eq!(log.entries()[0].frequency(), 1);
    }

    #[test]
    fn matrix_round_trip_is_tight() {
        let trace = parse_matrix(PRIOR, None).unwrap();
        let text = write_matrix(&trace, DEFAULT_PRECISION);
        let back = parse_matrix(&text, Some(trace.alphabet())).unwrap();
        for j in 0..trace.events() {
            for i in 0..trace.activities() {
                assert!((trace.prob(i, j) - back.prob(i, j)).abs() <= 1e-6);
            }
        }
        // This particular matrix renders exactly.
        assert_eq!(text, PRIOR);
    }

    #[test]
    fn one_hot_writes_bare_ones_and_zeros() {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let t = DeterministicTrace::new(&alphabet, ["b", "a"]).unwrap();
        let text = write_matrix(&StochasticTrace::one_hot(&t).unwrap(), DEFAULT_PRECISION);
        assert_eq!(text, "activity,e1,e2\na,0,1\nb,1,0\n");
    }

    #[test]
    fn precision_two_renders_two_decimals() {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let trace = StochasticTrace::from_rows(&alphabet, &[vec![0.614], vec![0.386]]).unwrap();
        let text = write_matrix(&trace, 2);
        assert_eq!(text, "activity,e1\na,0.61\nb,0.39\n");
    }

    #[test]
    fn log_round_trip() {
        let input = "alphabet: a b c d\ntrace: a b c d x20\ntrace: b a c d x10\n";
        let log = parse_log(input).unwrap();
        assert_eq!(write_log(&log), input);
        assert_eq!(parse_log(&write_log(&log)).unwrap(), log);
    }

    #[test]
    fn imports_a_minimal_xes_document() {
        let xes = r#"<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <trace>
    <string key="concept:name" value="case1"/>
    <event><string key="concept:name" value="b"/></event>
    <event><string key="concept:name" value="a"/></event>
  </trace>
  <trace>
    <event><string key="concept:name" value="b"/></event>
    <event><string key="concept:name" value="a"/></event>
  </trace>
</log>
"#;
        let log = parse_xes(xes).unwrap();
        assert_eq!(log.alphabet().labels(), ["a", "b"]);
        assert_eq!(log.len(), 1);
        assert_eq!(log.entries()[0].frequency(), 2);
        assert_eq!(log.entries()[0].trace().to_string(), "b a");
    }

    #[test]
    fn rejects_malformed_xes() {
        assert!(matches!(
            parse_xes("<log><trace></log>"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn xes_ignores_self_closing_events_and_trace_level_names() {
        let xes = r#"<log>
  <trace>
    <string key="concept:name" value="not-an-activity"/>
    <event/>
    <event><string key="concept:name" value="a"/></event>
  </trace>
</log>"#;
        let log = parse_xes(xes).unwrap();
        assert_eq!(log.alphabet().labels(), ["a"]);
        assert_eq!(log.entries()[0].trace().to_string(), "a");
    }
}
