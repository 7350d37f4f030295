use std::io::BufRead;

use log::debug;

use super::TextRecord;
use crate::error::Result;

/// Streams `TextRecord`s from line-delimited JSON.
///
/// Malformed lines are skipped and counted; blank lines are ignored. Only
/// read failures surface as errors.
pub struct RecordReader<R> {
    reader: R,
    line: String,
    line_no: u64,
    malformed: u64,
}

pub fn parse_records<R: BufRead>(reader: R) -> RecordReader<R> {
    RecordReader {
        reader,
        line: String::new(),
        line_no: 0,
        malformed: 0,
    }
}

impl<R> RecordReader<R> {
    pub fn malformed(&self) -> u64 {
        self.malformed
    }
}

fn valid_region(region: &str) -> bool {
    !region.is_empty()
        && region != "."
        && region != ".."
        && !region
            .chars()
            .any(|c| c == '/' || c == '\\' || c.is_whitespace() || c.is_control())
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<TextRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line.clear();
            match self.reader.read_line(&mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let trimmed = self.line.trim();
            if trimmed.is_empty() {
                continue;
            }
            match serde_json::from_str::<TextRecord>(trimmed) {
                Ok(rec) if !rec.id.is_empty() && valid_region(&rec.region) => return Some(Ok(rec)),
                Ok(_) => {
                    debug!("line {}: empty id or unusable region", self.line_no);
                    self.malformed += 1;
                }
                Err(e) => {
                    debug!("line {}: {e}", self.line_no);
                    self.malformed += 1;
                }
            }
        }
    }
}
