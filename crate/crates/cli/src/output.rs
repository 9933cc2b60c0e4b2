//! CSV tables with a provenance comment line and fixed number formatting.

use std::io::Write;

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// Twelve significant digits, positional for moderate magnitudes and
/// scientific otherwise, without trailing zeros.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// Output rows together with sort keys and solver diagnostics.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    rows: Vec<(Vec<f64>, Vec<Cell>)>,
    /// Grid points whose solver did not converge.
    pub unconverged: Vec<String>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, ..Default::default() }
    }

    pub fn push(&mut self, key: Vec<f64>, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push((key, row));
    }

    /// Rows ordered lexicographically by key.
    fn sorted_rows(&self) -> Vec<&Vec<Cell>> {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by(|&a, &b| {
            let (ka, kb) = (&self.rows[a].0, &self.rows[b].0);
            ka.iter().zip(kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.cmp(&b))
        });
        idx.into_iter().map(|i| &self.rows[i].1).collect()
    }

    pub fn write<W: Write>(&self, out: W, provenance: &str) -> anyhow::Result<()> {
        let mut out = out;
        writeln!(out, "# {provenance}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in self.sorted_rows() {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}
