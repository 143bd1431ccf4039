use alloc::string::{String, ToString};
use alloc::vec::Vec;

const CLITICS: [&str; 7] = ["'s", "'re", "'ve", "'ll", "'d", "'m", "'t"];

/// Deterministic rule-based tokenizer.
///
/// Lowercases, splits on whitespace, detaches punctuation and splits English
/// clitics (`don't` -> `do n't`, `they're` -> `they 're`). URLs, numerals with
/// internal separators (`3.14`, `1,000`) and hyphenated words stay whole.
pub fn tokenize(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in raw.split_whitespace() {
        let lower: String = chunk
            .chars()
            .flat_map(char::to_lowercase)
            .map(|c| {
                if c == '\u{2019}' || c == '\u{2018}' {
                    '\''
                } else {
                    c
                }
            })
            .collect();
        if is_url(&lower) {
            push_url(&lower, &mut out);
        } else {
            split_chunk(&lower, &mut out);
        }
    }
    out
}

fn is_url(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://") || s.starts_with("www.")
}

fn push_url(s: &str, out: &mut Vec<String>) {
    let trimmed = s.trim_end_matches(|c: char| !c.is_alphanumeric() && c != '/');
    out.push(trimmed.to_string());
    out.extend(s[trimmed.len()..].chars().map(|c| c.to_string()));
}

fn split_chunk(s: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = s.chars().collect();
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let prev = if word.is_empty() {
            None
        } else {
            chars.get(i.wrapping_sub(1)).copied()
        };
        let next = chars.get(i + 1).copied();
        let alnum = |x: Option<char>| x.is_some_and(char::is_alphanumeric);
        let digit = |x: Option<char>| x.is_some_and(|x| x.is_ascii_digit());
        let keep = if c.is_alphanumeric() {
            true
        } else if c == '\'' {
            (alnum(prev) && alnum(next)) || (word.is_empty() && leading_clitic(&chars[i..]))
        } else if c == '-' {
            alnum(prev) && next.is_some_and(char::is_alphabetic)
        } else if matches!(c, '.' | ',' | ':' | '/') {
            digit(prev) && digit(next)
        } else {
            false
        };
        if keep {
            word.push(c);
        } else {
            flush(&mut word, out);
            out.push(c.to_string());
        }
    }
    flush(&mut word, out);
}

/// Whether `rest` (starting at an apostrophe) is a standalone clitic such as `'re`.
fn leading_clitic(rest: &[char]) -> bool {
    let tail: String = rest
        .iter()
        .take_while(|c| **c == '\'' || c.is_alphanumeric())
        .collect();
    let n = tail.chars().count();
    CLITICS.contains(&tail.as_str()) && rest.get(n).is_none_or(|c| !c.is_alphanumeric())
}

fn flush(word: &mut String, out: &mut Vec<String>) {
    if word.is_empty() {
        return;
    }
    let w = core::mem::take(word);
    if w.len() > 3 && w.ends_with("n't") {
        out.push(w[..w.len() - 3].to_string());
        out.push("n't".to_string());
        return;
    }
    if let Some(p) = w.rfind('\'') {
        if p > 0 && CLITICS.contains(&&w[p..]) {
            out.push(w[..p].to_string());
            out.push(w[p..].to_string());
            return;
        }
    }
    out.push(w);
}
