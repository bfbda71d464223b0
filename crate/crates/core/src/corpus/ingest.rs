use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::record::PaperRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
}

/// Lazily parses JSONL records in file order.
///
/// Lenient readers skip malformed lines and count them; strict readers
/// yield an error carrying the 1-based line number and then stop.
pub struct RecordStream<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    opts: IngestOptions,
    malformed: usize,
    position_gaps: usize,
    failed: bool,
}

impl<R: BufRead> RecordStream<R> {
    pub fn new(reader: R, opts: IngestOptions) -> Self {
        RecordStream {
            lines: reader.lines(),
            line_no: 0,
            opts,
            malformed: 0,
            position_gaps: 0,
            failed: false,
        }
    }

    /// Lines skipped so far in lenient mode.
    pub fn malformed(&self) -> usize {
        self.malformed
    }

    /// Inverted-index positions that had no word.
    pub fn position_gaps(&self) -> usize {
        self.position_gaps
    }
}

impl<R: BufRead> Iterator for RecordStream<R> {
    type Item = Result<PaperRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::Malformed {
                        line: self.line_no + 1,
                        message: e.to_string(),
                    }));
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            match PaperRecord::from_json_line(&line) {
                Ok((rec, gaps)) => {
                    self.position_gaps += gaps;
                    return Some(Ok(rec));
                }
                Err(err) => {
                    let err = match err {
                        Error::Malformed { message, .. } => Error::Malformed {
                            line: self.line_no,
                            message,
                        },
                        Error::CorruptIndex { position, first, second } => Error::Malformed {
                            line: self.line_no,
                            message: format!(
                                "corrupt inverted index: position {position} claimed by {first:?} and {second:?}"
                            ),
                        },
                        other => other,
                    };
                    if self.opts.strict {
                        self.failed = true;
                        return Some(Err(err));
                    }
                    self.malformed += 1;
                }
            }
        }
    }
}

/// Opens a JSONL corpus file.
pub fn load_stream(path: &Path, opts: IngestOptions) -> Result<RecordStream<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(RecordStream::new(BufReader::new(file), opts))
}

/// Result of reading one or more corpus files to the end.
#[derive(Debug, Default)]
pub struct Loaded {
    pub records: Vec<PaperRecord>,
    pub malformed: usize,
    pub position_gaps: usize,
}

/// Reads every file in turn. Record order follows file order; callers sort
/// by [`super::order_key`] before any chronological pass.
pub fn load_all<P: AsRef<Path>>(paths: &[P], opts: IngestOptions) -> Result<Loaded> {
    let mut out = Loaded::default();
    for path in paths {
        let mut stream = load_stream(path.as_ref(), opts)?;
        for rec in stream.by_ref() {
            out.records.push(rec?);
        }
        out.malformed += stream.malformed();
        out.position_gaps += stream.position_gaps();
    }
    Ok(out)
}
