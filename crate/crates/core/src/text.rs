//! Byte-preserving text helpers shared by the parsers and removers.

use std::path::Path;

use log::warn;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Utf8,
    Utf8Bom,
    Latin1,
}

/// Decoded file content that can be re-encoded to the original encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub text: String,
    pub encoding: Encoding,
}

const BOM: &str = "\u{feff}";

pub fn decode(bytes: &[u8], path: &Path) -> Decoded {
    match std::str::from_utf8(bytes) {
        Ok(s) => match s.strip_prefix(BOM) {
            Some(rest) => Decoded {
                text: rest.to_string(),
                encoding: Encoding::Utf8Bom,
            },
            None => Decoded {
                text: s.to_string(),
                encoding: Encoding::Utf8,
            },
        },
        Err(_) => {
            warn!("{} is not valid UTF-8, reading it as Latin-1", path.display());
            Decoded {
                text: bytes.iter().map(|&b| b as char).collect(),
                encoding: Encoding::Latin1,
            }
        }
    }
}

pub fn encode(text: &str, encoding: Encoding) -> Vec<u8> {
    match encoding {
        Encoding::Utf8 => text.as_bytes().to_vec(),
        Encoding::Utf8Bom => {
            let mut out = BOM.as_bytes().to_vec();
            out.extend_from_slice(text.as_bytes());
            out
        }
        // Removal only deletes text, so every char is still < 256.
        Encoding::Latin1 => text.chars().map(|c| c as u32 as u8).collect(),
    }
}

/// Maps byte offsets to 1-based line numbers.
#[derive(Debug, Clone)]
pub struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    pub fn line_of(&self, offset: usize) -> usize {
        match self.starts.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }
}

pub fn line_start(text: &str, offset: usize) -> usize {
    text[..offset].rfind('\n').map_or(0, |i| i + 1)
}

/// Offset of the `\n` ending the line containing `offset`, or `text.len()`.
pub fn line_end(text: &str, offset: usize) -> usize {
    text[offset..].find('\n').map_or(text.len(), |i| offset + i)
}

/// A replacement of `text[start..end]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splice {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

impl Splice {
    pub fn delete(start: usize, end: usize) -> Self {
        Splice {
            start,
            end,
            replacement: String::new(),
        }
    }
}

/// Applies non-overlapping splices.
pub fn apply_splices(text: &str, mut splices: Vec<Splice>) -> String {
    splices.sort_by_key(|s| std::cmp::Reverse(s.start));
    let mut out = text.to_string();
    let mut limit = usize::MAX;
    for s in splices {
        if s.end > limit {
            continue;
        }
        out.replace_range(s.start..s.end, &s.replacement);
        limit = s.start;
    }
    out
}

/// Span deleting the whole lines from the one holding `first` through the one
/// holding `last`. A file without a final newline keeps lacking one.
pub fn whole_lines_span(text: &str, first: usize, last: usize) -> Splice {
    let start = line_start(text, first);
    let end = line_end(text, last);
    if end < text.len() {
        return Splice::delete(start, end + 1);
    }
    // Deleting the final, unterminated line: drop the preceding line break.
    let mut start_with_break = start;
    if start > 0 {
        start_with_break -= 1;
        if start_with_break > 0 && text.as_bytes()[start_with_break - 1] == b'\r' {
            start_with_break -= 1;
        }
    }
    Splice::delete(start_with_break, end)
}

/// Physical lines of `text`, each including its terminator.
pub fn physical_lines(text: &str) -> Vec<&str> {
    text.split_inclusive('\n').collect()
}

/// Drops the given 0-based physical lines, keeping every other byte. A file
/// without a final newline keeps lacking one.
pub fn remove_lines(text: &str, doomed: &std::collections::BTreeSet<usize>) -> String {
    if doomed.is_empty() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    for (i, line) in physical_lines(text).into_iter().enumerate() {
        if !doomed.contains(&i) {
            out.push_str(line);
        }
    }
    if !text.is_empty() && !text.ends_with('\n') && out.ends_with('\n') {
        out.pop();
        if out.ends_with('\r') {
            out.pop();
        }
    }
    out
}

fn is_horizontal_ws(b: u8) -> bool {
    b == b' ' || b == b'\t'
}

/// Text after an item that still lets the item "own" its line: optional
/// comma, whitespace, optional `#` comment.
fn is_line_trailer(after: &str) -> bool {
    let rest = after.trim_start();
    let rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    rest.is_empty() || rest.starts_with('#')
}

/// Removes one element of a bracketed, comma-separated collection.
///
/// An element alone on its line(s) is removed with its whole lines,
/// including a trailing comma and comment. Otherwise the element is excised
/// with one adjacent comma and the horizontal whitespace next to it.
pub fn excise_list_item(text: &str, start: usize, end: usize) -> Splice {
    let ls = line_start(text, start);
    let le = line_end(text, end);
    if text[ls..start].trim().is_empty() && is_line_trailer(&text[end..le]) {
        return whole_lines_span(text, start, end);
    }

    let bytes = text.as_bytes();
    let mut after = end;
    while after < bytes.len() && is_horizontal_ws(bytes[after]) {
        after += 1;
    }
    if after < bytes.len() && bytes[after] == b',' {
        let mut e = after + 1;
        while e < bytes.len() && is_horizontal_ws(bytes[e]) {
            e += 1;
        }
        // Keep the line break if the comma ended the line.
        return Splice::delete(start, e);
    }

    let mut before = start;
    while before > ls && is_horizontal_ws(bytes[before - 1]) {
        before -= 1;
    }
    if before > ls && bytes[before - 1] == b',' {
        return Splice::delete(before - 1, end);
    }
    Splice::delete(start, end)
}

/// Dominant line ending of `text`.
pub fn dominant_eol(text: &str) -> &'static str {
    let crlf = text.matches("\r\n").count();
    let lf = text.matches('\n').count() - crlf;
    if crlf > lf {
        "\r\n"
    } else {
        "\n"
    }
}
