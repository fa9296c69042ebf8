//! ARPA-style text format with a versioned first line and natural-log values.
//!
//! Values are written with at least six decimal places and as many more as
//! needed to read back the identical `f64`.

use std::collections::HashMap;
use std::io::Write;

use super::{Entry, NgramError, NgramModel, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN};

pub(super) const MAGIC: &str = "# cfrewrite-ngram format=1 log=e";
const MAGIC_PREFIX: &str = "# cfrewrite-ngram";

fn fmt_value(x: f64) -> String {
    let shortest = format!("{x}");
    let decimals = shortest.split_once('.').map_or(0, |(_, frac)| frac.len());
    if decimals >= 6 {
        shortest
    } else {
        format!("{x:.6}")
    }
}

pub(super) fn write(model: &NgramModel, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "\\data\\")?;
    for (k, table) in model.tables.iter().enumerate() {
        writeln!(out, "ngram {}={}", k + 1, table.len())?;
    }
    for (k, table) in model.tables.iter().enumerate() {
        writeln!(out)?;
        writeln!(out, "\\{}-grams:", k + 1)?;
        let mut rows: Vec<(Vec<&str>, &Entry)> = table
            .iter()
            .map(|(gram, e)| (gram.iter().map(|&id| model.vocab[id as usize].as_str()).collect(), e))
            .collect();
        if k == 0 {
            // Unigrams in id order so a reloaded vocabulary keeps its layout.
            rows.sort_by_key(|(gram, _)| model.index[gram[0]]);
        } else {
            rows.sort_by(|a, b| a.0.cmp(&b.0));
        }
        for (gram, e) in rows {
            writeln!(
                out,
                "{}\t{}\t{}",
                fmt_value(e.logprob),
                gram.join(" "),
                fmt_value(e.backoff)
            )?;
        }
    }
    writeln!(out)?;
    writeln!(out, "\\end\\")?;
    out.flush()
}

fn corrupt(line: usize, message: impl Into<String>) -> NgramError {
    NgramError::Corrupt {
        line,
        message: message.into(),
    }
}

pub(super) fn read(text: &str) -> Result<NgramModel, NgramError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((_, other)) if other.starts_with(MAGIC_PREFIX) => {
            return Err(NgramError::Version(format!("unsupported header `{other}`")))
        }
        Some((_, other)) => return Err(NgramError::Version(format!("unrecognized header `{other}`"))),
        None => return Err(corrupt(0, "empty file")),
    }

    let mut declared: Vec<usize> = Vec::new();
    let mut in_data = false;
    let mut section: Option<usize> = None;
    let mut rows: Vec<Vec<(Vec<String>, Entry)>> = Vec::new();
    let mut ended = false;

    for (no, line) in lines.by_ref() {
        if line.trim().is_empty() {
            continue;
        }
        if line == "\\data\\" {
            in_data = true;
            continue;
        }
        if line == "\\end\\" {
            ended = true;
            break;
        }
        if let Some(rest) = line.strip_prefix("ngram ") {
            if !in_data || section.is_some() {
                return Err(corrupt(no, "count line outside \\data\\ section"));
            }
            let (k, n) = rest
                .split_once('=')
                .ok_or_else(|| corrupt(no, "malformed count line"))?;
            let k: usize = k.trim().parse().map_err(|_| corrupt(no, "bad order"))?;
            let n: usize = n.trim().parse().map_err(|_| corrupt(no, "bad count"))?;
            if k != declared.len() + 1 {
                return Err(corrupt(no, "orders must be listed in sequence"));
            }
            declared.push(n);
            continue;
        }
        if let Some(k) = line.strip_prefix('\\').and_then(|l| l.strip_suffix("-grams:")) {
            let k: usize = k.parse().map_err(|_| corrupt(no, "bad section header"))?;
            if k != rows.len() + 1 || k > declared.len() {
                return Err(corrupt(no, format!("unexpected section for order {k}")));
            }
            rows.push(Vec::with_capacity(declared[k - 1]));
            section = Some(k);
            continue;
        }
        let k = section.ok_or_else(|| corrupt(no, "entry before any section"))?;
        let mut fields = line.split('\t');
        let (lp, gram, bo) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(lp), Some(gram), Some(bo), None) => (lp, gram, bo),
            _ => return Err(corrupt(no, "expected three tab-separated fields")),
        };
        let logprob: f64 = lp.parse().map_err(|_| corrupt(no, "bad log-probability"))?;
        let backoff: f64 = bo.parse().map_err(|_| corrupt(no, "bad backoff"))?;
        if !logprob.is_finite() || logprob > 0.0 || !backoff.is_finite() {
            return Err(corrupt(
                no,
                "log values must be finite and log-probabilities non-positive",
            ));
        }
        let words: Vec<String> = gram.split(' ').map(str::to_string).collect();
        if words.len() != k || words.iter().any(String::is_empty) {
            return Err(corrupt(no, format!("expected {k} words")));
        }
        rows[k - 1].push((words, Entry { logprob, backoff }));
    }

    if !ended {
        return Err(corrupt(
            text.lines().count(),
            "missing \\end\\ marker (truncated file?)",
        ));
    }
    if declared.len() < 2 || rows.len() != declared.len() {
        return Err(corrupt(0, "missing n-gram sections"));
    }
    for (k, (section_rows, &n)) in rows.iter().zip(&declared).enumerate() {
        if section_rows.len() != n {
            return Err(corrupt(
                0,
                format!(
                    "{}-gram section has {} entries, header declares {n}",
                    k + 1,
                    section_rows.len()
                ),
            ));
        }
    }

    let vocab: Vec<String> = rows[0].iter().map(|(g, _)| g[0].clone()).collect();
    if vocab.len() < 3 || vocab[0] != BOS_TOKEN || vocab[1] != EOS_TOKEN || vocab[2] != UNK_TOKEN {
        return Err(corrupt(0, "unigram section must start with <s>, </s>, <unk>"));
    }
    let mut model = NgramModel::with_vocab(declared.len(), vocab);
    if model.index.len() != model.vocab.len() {
        return Err(corrupt(0, "duplicate unigram"));
    }
    for (k, section_rows) in rows.into_iter().enumerate() {
        let mut table = HashMap::with_capacity(section_rows.len());
        for (words, entry) in section_rows {
            let ids = words
                .iter()
                .map(|w| model.index.get(w).copied())
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| corrupt(0, format!("{}-gram uses a word missing from the unigrams", k + 1)))?;
            if table.insert(ids, entry).is_some() {
                return Err(corrupt(0, format!("duplicate {}-gram", k + 1)));
            }
        }
        model.tables[k] = table;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_keep_six_decimals_and_round_trip() {
        assert_eq!(fmt_value(-99.0), "-99.000000");
        assert_eq!(fmt_value(0.0), "0.000000");
        let x = (13.0f64 / 48.0).ln();
        assert_eq!(fmt_value(x).parse::<f64>().unwrap(), x);
        assert!(fmt_value(x).split_once('.').unwrap().1.len() >= 6);
    }
}
