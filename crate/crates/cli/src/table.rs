//! Column-oriented CSV tables with `#` comment lines.
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! `f64`. Missing values are empty fields.

use std::io::{self, Write};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Self {
        Column { name: name.into(), values: values.into_iter().map(Some).collect() }
    }

    pub fn gappy(name: impl Into<String>, values: impl IntoIterator<Item = Option<f64>>) -> Self {
        Column { name: name.into(), values: values.into_iter().collect() }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    /// Comment lines before the header, without the leading `# `.
    pub meta: Vec<String>,
    pub columns: Vec<Column>,
    /// Comment lines after the last row.
    pub trailer: Vec<String>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.iter().map(|c| c.values.len()).max().unwrap_or(0)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for line in &self.meta {
            writeln!(w, "# {line}")?;
        }
        {
            let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut w);
            csv.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
            for i in 0..self.rows() {
                csv.write_record(self.columns.iter().map(|c| match c.values.get(i) {
                    Some(Some(v)) => fmt_f64(*v),
                    _ => String::new(),
                }))?;
            }
            csv.flush()?;
        }
        for line in &self.trailer {
            writeln!(w, "# {line}")?;
        }
        Ok(())
    }

    pub fn to_string_lossy(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("table output is ASCII")
    }

    pub fn parse(text: &str) -> Result<Table, String> {
        let comment = |line: &str| line.strip_prefix('#').map(|c| c.strip_prefix(' ').unwrap_or(c).to_string());
        let lines: Vec<&str> = text.lines().collect();
        let head = lines.iter().take_while(|l| l.starts_with('#')).count();
        let tail = lines[head..].iter().rev().take_while(|l| l.starts_with('#')).count();
        let body = &lines[head..lines.len() - tail];
        let Some((header, rows)) = body.split_first() else {
            return Err("no header row".into());
        };

        let mut table = Table {
            meta: lines[..head].iter().filter_map(|l| comment(l)).collect(),
            columns: header.split(',').map(|name| Column::gappy(name, [])).collect(),
            trailer: lines[lines.len() - tail..].iter().filter_map(|l| comment(l)).collect(),
        };
        let rows = rows.join("\n");
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(rows.as_bytes());
        for (n, record) in reader.records().enumerate() {
            let line = head + n + 2;
            let record = record.map_err(|e| format!("line {line}: {e}"))?;
            if record.len() != table.columns.len() {
                return Err(format!("line {line}: {} fields, expected {}", record.len(), table.columns.len()));
            }
            for (c, f) in table.columns.iter_mut().zip(record.iter()) {
                let v = if f.is_empty() {
                    None
                } else {
                    Some(f.parse::<f64>().map_err(|e| format!("line {line}: `{f}`: {e}"))?)
                };
                c.values.push(v);
            }
        }
        Ok(table)
    }
}
