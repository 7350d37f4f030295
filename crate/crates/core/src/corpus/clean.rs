//! Text normalization for short social-media posts.
//!
//! Rules, applied to the lowercased text split on Unicode whitespace:
//!
//! * a chunk that already is a placeholder (`<url>`, `<user>`, ...) is kept;
//! * `[image]`, `[photo]`, `[video]`, `[gif]`, `[media]` and
//!   `pic.twitter.com/...` become `<media>`;
//! * after dropping leading punctuation, `http://`, `https://` and `www.`
//!   prefixes make the whole chunk `<url>`, `@x` makes it `<user>` and `#x`
//!   makes it `<hashtag>` (x alphanumeric or `_`);
//! * otherwise the chunk is scanned: each emoji sequence (a pictograph from
//!   the Misc Symbols & Pictographs, Emoticons, Transport & Map or
//!   Supplemental Symbols & Pictographs blocks, extended by ZWJ-joined
//!   pictographs, variation selectors and skin-tone modifiers) becomes one
//!   `<emoji>`; alphanumeric runs become tokens, with `'` (or `’`, folded to
//!   `'`) kept only between two alphanumerics; every other character is a
//!   token boundary.

use std::fmt;

use super::{CleanSentence, TextRecord, MIN_TOKENS};

pub const URL: &str = "<url>";
pub const USER: &str = "<user>";
pub const HASHTAG: &str = "<hashtag>";
pub const EMOJI: &str = "<emoji>";
pub const MEDIA: &str = "<media>";

pub const PLACEHOLDERS: [&str; 5] = [URL, USER, HASHTAG, EMOJI, MEDIA];

const MEDIA_MARKERS: [&str; 5] = ["[image]", "[photo]", "[video]", "[gif]", "[media]"];

const ZWJ: char = '\u{200D}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rejection {
    NonEnglish,
    TooShort,
}

impl Rejection {
    pub fn as_str(self) -> &'static str {
        match self {
            Rejection::NonEnglish => "non-english",
            Rejection::TooShort => "too-short",
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn is_pictograph(c: char) -> bool {
    matches!(c as u32,
        0x1F300..=0x1F5FF // misc symbols and pictographs
        | 0x1F600..=0x1F64F // emoticons
        | 0x1F680..=0x1F6FF // transport and map
        | 0x1F900..=0x1F9FF) // supplemental symbols and pictographs
}

fn is_skin_tone(c: char) -> bool {
    matches!(c as u32, 0x1F3FB..=0x1F3FF)
}

fn is_variation_selector(c: char) -> bool {
    c == '\u{FE0E}' || c == '\u{FE0F}'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn word_start(s: &str) -> bool {
    s.chars()
        .nth(1)
        .is_some_and(|c| c.is_alphanumeric() || c == '_')
}

fn classify_chunk(chunk: &str) -> Option<&'static str> {
    if let Some(p) = PLACEHOLDERS.iter().find(|p| **p == chunk) {
        return Some(p);
    }
    if MEDIA_MARKERS.contains(&chunk) {
        return Some(MEDIA);
    }
    let lead = chunk.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '@' && c != '#');
    if lead.starts_with("pic.twitter.com/") {
        Some(MEDIA)
    } else if lead.starts_with("http://") || lead.starts_with("https://") || lead.starts_with("www.")
    {
        Some(URL)
    } else if lead.starts_with('@') && word_start(lead) {
        Some(USER)
    } else if lead.starts_with('#') && word_start(lead) {
        Some(HASHTAG)
    } else {
        None
    }
}

fn scan_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut current = String::new();
    let mut in_emoji = false;
    let mut pending_zwj = false;

    let flush = |current: &mut String, out: &mut Vec<String>| {
        if !current.is_empty() {
            out.push(std::mem::take(current));
        }
    };

    for (i, &c) in chars.iter().enumerate() {
        if is_pictograph(c) {
            let extends = in_emoji && (pending_zwj || is_skin_tone(c));
            pending_zwj = false;
            if !extends {
                flush(&mut current, out);
                out.push(EMOJI.to_string());
                in_emoji = true;
            }
            continue;
        }
        if in_emoji && c == ZWJ {
            pending_zwj = true;
            continue;
        }
        if in_emoji && is_variation_selector(c) {
            continue;
        }
        in_emoji = false;
        pending_zwj = false;

        if c.is_alphanumeric() {
            current.push(c);
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push('\'');
        } else {
            flush(&mut current, out);
        }
    }
    flush(&mut current, out);
}

/// Tokenizes raw text without any length or language filtering.
pub fn clean_text(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    for chunk in lowered.split_whitespace() {
        match classify_chunk(chunk) {
            Some(placeholder) => tokens.push(placeholder.to_string()),
            None => scan_chunk(chunk, &mut tokens),
        }
    }
    tokens
}

pub fn clean_record(rec: &TextRecord) -> Result<CleanSentence, Rejection> {
    if !rec.lang.eq_ignore_ascii_case("en") {
        return Err(Rejection::NonEnglish);
    }
    let tokens = clean_text(&rec.text);
    if tokens.len() < MIN_TOKENS {
        return Err(Rejection::TooShort);
    }
    Ok(CleanSentence {
        tokens,
        region: rec.region.clone(),
    })
}
