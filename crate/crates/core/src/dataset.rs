//! JSONL braid datasets.
//!
//! One record per line: `{"n":4,"L":10,"word":[...],"crossings":10}`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::braid::BraidWord;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub n: usize,
    #[serde(rename = "L")]
    pub slots: usize,
    pub word: Vec<i32>,
    pub crossings: usize,
}

impl From<&BraidWord> for Record {
    fn from(w: &BraidWord) -> Self {
        Self {
            n: w.strands(),
            slots: w.slots(),
            word: w.letters().to_vec(),
            crossings: w.crossing_count(),
        }
    }
}

impl Record {
    pub fn into_word(self) -> Result<BraidWord> {
        let w = BraidWord::new(self.n, self.slots, self.word)?;
        if w.crossing_count() != self.crossings {
            return Err(Error::InvalidParams(format!(
                "record claims {} crossings but the word has {}",
                self.crossings,
                w.crossing_count()
            )));
        }
        Ok(w)
    }
}

/// Braid words sharing one `(n, L)` shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    strands: usize,
    slots: usize,
    words: Vec<BraidWord>,
}

impl Dataset {
    pub fn new(words: Vec<BraidWord>) -> Result<Self> {
        let first = words.first().ok_or(Error::EmptyDataset)?;
        let (strands, slots) = (first.strands(), first.slots());
        if let Some((i, w)) = words
            .iter()
            .enumerate()
            .find(|(_, w)| w.strands() != strands || w.slots() != slots)
        {
            return Err(Error::Incompatible(format!(
                "record {i} has n={} L={}, expected n={strands} L={slots}",
                w.strands(),
                w.slots()
            )));
        }
        Ok(Self {
            strands,
            slots,
            words,
        })
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn words(&self) -> &[BraidWord] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// 90/10 split by record index. The held-out part is the last `len / 10`
    /// records; when that is empty both halves are the full dataset.
    pub fn split(&self) -> (&[BraidWord], &[BraidWord]) {
        let held = self.words.len() / 10;
        if held == 0 {
            return (&self.words, &self.words);
        }
        self.words.split_at(self.words.len() - held)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path)?);
        Self::new(parse_records(reader, &path.display().to_string())?)
    }

    pub fn write<W: Write>(&self, sink: &mut W) -> Result<()> {
        for w in &self.words {
            serde_json::to_writer(&mut *sink, &Record::from(w))?;
            sink.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parses JSONL records, skipping blank lines. Line numbers in errors are 1-based.
pub fn parse_records<R: BufRead>(reader: R, source: &str) -> Result<Vec<BraidWord>> {
    let mut words = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            path: source.to_string(),
            line: i + 1,
            reason,
        };
        let record: Record = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        words.push(record.into_word().map_err(|e| parse_err(e.to_string()))?);
    }
    Ok(words)
}
