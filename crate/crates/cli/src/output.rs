use std::path::Path;

use serde::Serialize;

use hardy_core::io::{fmt17, SCHEMA_VERSION};
use hardy_core::Complex64;

use crate::CliError;

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Io(path, e))
}

/// CSV table with a fixed header; numbers go through [`fmt17`].
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    comments: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table {
            writer,
            comments: String::new(),
        }
    }

    /// A `# ...` line placed before the header.
    pub fn comment(&mut self, text: &str) {
        self.comments.push_str("# ");
        self.comments.push_str(text);
        self.comments.push('\n');
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn save(self, dir: &Path, name: &str) -> Result<(), CliError> {
        let body = self.writer.into_inner().expect("in-memory flush");
        let mut text = self.comments;
        text.push_str(&String::from_utf8(body).expect("utf-8 fields"));
        write_text(dir, name, &text)
    }
}

pub fn num(x: f64) -> String {
    fmt17(x)
}

/// `re im;re im;...`
pub fn nodes(points: &[Complex64]) -> String {
    points
        .iter()
        .map(|z| format!("{} {}", fmt17(z.re), fmt17(z.im)))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, body: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })
    .map_err(|e| CliError::Core(hardy_core::Error::Internal(e.to_string())))?;
    text.push('\n');
    write_text(dir, name, &text)
}
