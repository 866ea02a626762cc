//! Number formatting and plain-text tables.

use std::fmt::Write as _;

/// `%.17g`: 17 significant digits, trailing zeros trimmed, round-trip exact.
pub fn csv_number(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let mantissa = trim_zeros(mantissa.to_owned());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Fixed-point with `decimals` places, ties rounded away from zero.
///
/// Works on the exact decimal expansion of `x`, so only the first dropped
/// digit decides.
pub fn round_half_away(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return csv_number(x);
    }
    // 1100 places hold every binary fraction an f64 can carry.
    let exact = format!("{:.1100}", x.abs());
    let (int_part, frac) = exact.split_once('.').expect("fixed form");
    let mut digits: Vec<u8> = int_part.bytes().chain(frac.bytes().take(decimals)).map(|b| b - b'0').collect();
    if frac.as_bytes()[decimals] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    let mut out = String::new();
    if x < 0.0 && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    out.extend(digits[..split].iter().map(|d| char::from(b'0' + d)));
    if decimals > 0 {
        out.push('.');
        out.extend(digits[split..].iter().map(|d| char::from(b'0' + d)));
    }
    out
}

/// Table cell: display text plus the full-precision value behind it.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Number { value: f64, decimals: usize },
    /// Shortest round-trip form, for inputs echoed back.
    Exact(f64),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn number(value: f64, decimals: usize) -> Self {
        Cell::Number { value, decimals }
    }

    pub fn display(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Number { value, decimals } => round_half_away(*value, *decimals),
            Cell::Exact(v) => format!("{v}"),
        }
    }

    pub fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Number { value, .. } | Cell::Exact(value) => csv_number(*value),
        }
    }

    fn is_text(&self) -> bool {
        matches!(self, Cell::Text(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Where the numbers come from (formula, numeric solve, simulation).
    pub provenance: String,
    pub notes: Vec<String>,
}

impl ReportTable {
    pub fn new(title: impl Into<String>, headers: &[&str], provenance: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            provenance: provenance.into(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Aligned text: text columns left-aligned, numbers right-aligned.
    pub fn render(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::display).collect()).collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].chars().count())
                    .chain([self.headers[j].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let left: Vec<bool> = (0..self.headers.len())
            .map(|j| self.rows.iter().all(|r| r[j].is_text()))
            .collect();

        let line = |items: &[String]| {
            let mut s = String::new();
            for (j, item) in items.iter().enumerate() {
                if j > 0 {
                    s.push_str("  ");
                }
                if left[j] {
                    let _ = write!(s, "{item:<w$}", w = widths[j]);
                } else {
                    let _ = write!(s, "{item:>w$}", w = widths[j]);
                }
            }
            s.truncate(s.trim_end().len());
            s.push('\n');
            s
        };

        let mut out = format!("{}\n", self.title);
        let _ = writeln!(out, "source: {}", self.provenance);
        out.push('\n');
        out.push_str(&line(&self.headers));
        for row in &cells {
            out.push_str(&line(row));
        }
        for note in &self.notes {
            let _ = writeln!(out, "{note}");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}
