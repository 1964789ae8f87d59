//! Output: JSON lines for machines, an aligned table for people.

use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use serde_json::json;
use tabwriter::TabWriter;

pub struct Report {
    json: bool,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    /// Starts a report. In JSON mode the first line records the command, its
    /// full arguments and the library version.
    pub fn new(
        json: bool,
        command: &str,
        args: &impl Serialize,
        header: Vec<&'static str>,
    ) -> Result<Self> {
        if json {
            let line = json!({
                "record": "provenance",
                "command": command,
                "version": commhide::experiment::VERSION,
                "args": args,
            });
            println!("{}", serde_json::to_string(&line)?);
        }
        Ok(Self {
            json,
            header,
            rows: Vec::new(),
        })
    }

    /// One result: `record` goes out as a JSON line, `cells` as a table row.
    pub fn row(&mut self, kind: &str, record: &impl Serialize, cells: Vec<String>) -> Result<()> {
        if self.json {
            let mut value = serde_json::to_value(record)?;
            if let Some(map) = value.as_object_mut() {
                map.insert("record".into(), json!(kind));
            }
            println!("{}", serde_json::to_string(&value)?);
        } else {
            debug_assert_eq!(cells.len(), self.header.len());
            self.rows.push(cells);
        }
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        if self.json || self.header.is_empty() {
            return Ok(());
        }
        let mut tw = TabWriter::new(std::io::stdout().lock()).padding(2);
        writeln!(tw, "{}", self.header.join("\t"))?;
        for row in &self.rows {
            writeln!(tw, "{}", row.join("\t"))?;
        }
        tw.flush()?;
        Ok(())
    }
}

pub fn f(x: f64) -> String {
    format!("{x:.4}")
}
