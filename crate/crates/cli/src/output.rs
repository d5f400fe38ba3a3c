//! CSV emission: 12-significant-digit numbers, a leading '#' comment block
//! recording the full configuration, and empty cells for domain-excluded
//! values. Identical settings produce bit-identical bytes.

use crate::CliError;
use std::fs::File;
use std::io::{BufWriter, Stdout, Write};

/// Format a value with 12 significant digits. Every emitted number is
/// finite; callers map domain-excluded cells to empty strings instead.
pub fn num(x: f64) -> String {
    debug_assert!(x.is_finite(), "CSV cell must be finite, got {x}");
    let x = if x == 0.0 { 0.0 } else { x }; // fold -0.0 into 0.0
    format!("{x:.11e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub enum Sink {
    Stdout(BufWriter<Stdout>),
    File(BufWriter<File>),
}

pub struct CsvWriter {
    sink: Sink,
}

impl CsvWriter {
    /// `-` writes to stdout, anything else to a file at that path.
    pub fn open(out: &str) -> Result<Self, CliError> {
        let sink = if out == "-" {
            Sink::Stdout(BufWriter::new(std::io::stdout()))
        } else {
            Sink::File(BufWriter::new(File::create(out)?))
        };
        Ok(Self { sink })
    }

    fn writer(&mut self) -> &mut dyn Write {
        match &mut self.sink {
            Sink::Stdout(w) => w,
            Sink::File(w) => w,
        }
    }

    /// One `# key=value` comment line.
    pub fn comment(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.writer(), "# {line}")?;
        Ok(())
    }

    /// Leading block: command name plus every resolved setting.
    pub fn preamble(
        &mut self,
        command: &str,
        settings: &[(&str, String)],
    ) -> Result<(), CliError> {
        self.comment(&format!("autoreson {command}"))?;
        for (key, value) in settings {
            self.comment(&format!("{key}={value}"))?;
        }
        Ok(())
    }

    pub fn header(&mut self, columns: &[&str]) -> Result<(), CliError> {
        writeln!(self.writer(), "{}", columns.join(","))?;
        Ok(())
    }

    pub fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        writeln!(self.writer(), "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer().flush()?;
        Ok(())
    }
}
