//! Result tables and their text forms.

use std::fmt::Write as _;

use crate::config::Style;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// Not applicable for this row (a failed point, an absent value).
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TableError {
    #[error("table {0} is empty")]
    Empty(String),
    #[error("table {table}: row {row} has {got} cells, expected {want}")]
    Width { table: String, row: usize, got: usize, want: usize },
    #[error("table {table}: non-finite value in column {column}")]
    NonFinite { table: String, column: String },
}

/// Column names carry their unit, e.g. `f_rho [Hz]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Columns whose values identify a plot series.
    pub series: Vec<usize>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            series: Vec::new(),
        }
    }

    pub fn with_series(mut self, columns: &[usize]) -> Self {
        self.series = columns.to_vec();
        self
    }

    /// Append a row; non-finite numbers are refused.
    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), TableError> {
        if row.len() != self.columns.len() {
            return Err(TableError::Width {
                table: self.name.clone(),
                row: self.rows.len(),
                got: row.len(),
                want: self.columns.len(),
            });
        }
        if let Some(k) = row.iter().position(|c| matches!(c, Cell::Num(x) if !x.is_finite())) {
            return Err(TableError::NonFinite {
                table: self.name.clone(),
                column: self.columns[k].clone(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name || c.split(" [").next() == Some(name))
    }

    /// Rows grouped by series key, groups in order of first appearance.
    fn groups(&self) -> Vec<Vec<&Vec<Cell>>> {
        let mut keys: Vec<Vec<&Cell>> = Vec::new();
        let mut groups: Vec<Vec<&Vec<Cell>>> = Vec::new();
        for row in &self.rows {
            let key: Vec<&Cell> = self.series.iter().map(|&k| &row[k]).collect();
            match keys.iter().position(|k| *k == key) {
                Some(i) => groups[i].push(row),
                None => {
                    keys.push(key);
                    groups.push(vec![row]);
                }
            }
        }
        groups
    }
}

fn cell_text(c: &Cell, empty: &str) -> String {
    match c {
        Cell::Num(x) => number(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) if s.is_empty() => empty.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => empty.to_string(),
    }
}

/// Shortest round-trip form, scientific outside [1e-4, 1e15).
fn number(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render `table` in the given style. Output depends only on the table.
///
/// The gnuplot form is whitespace separated, with `?` for empty cells and
/// two blank lines between series so each one is addressable by `index`.
pub fn emit_plot_data(table: &Table, style: Style) -> Result<String, TableError> {
    if table.rows.is_empty() {
        return Err(TableError::Empty(table.name.clone()));
    }
    let mut out = String::new();
    match style {
        Style::Csv => {
            let head: Vec<String> = table.columns.iter().map(|c| csv_field(c)).collect();
            let _ = writeln!(out, "{}", head.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|c| csv_field(&cell_text(c, ""))).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        Style::GnuplotBlock => {
            let head: Vec<String> = table.columns.iter().map(|c| c.replace(' ', "")).collect();
            for (i, group) in table.groups().into_iter().enumerate() {
                if i > 0 {
                    out.push_str("\n\n");
                }
                let _ = writeln!(out, "# {}", head.join(" "));
                if !table.series.is_empty() {
                    let key: Vec<String> = table
                        .series
                        .iter()
                        .map(|&k| format!("{}={}", head[k], cell_text(&group[0][k], "?")))
                        .collect();
                    let _ = writeln!(out, "# series {i}: {}", key.join(" "));
                }
                for row in group {
                    let cells: Vec<String> = row.iter().map(|c| cell_text(c, "?").replace(' ', "_")).collect();
                    let _ = writeln!(out, "{}", cells.join(" "));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("s", &["n_over_L [1]", "x [cm]", "error"]).with_series(&[0]);
        t.push(vec![0.0.into(), 1.5.into(), Cell::Empty]).unwrap();
        t.push(vec![0.75.into(), Cell::Empty, "trap-not-formed".into()]).unwrap();
        t.push(vec![0.0.into(), 2.5.into(), Cell::Empty]).unwrap();
        t
    }

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let s = emit_plot_data(&sample(), Style::Csv).unwrap();
        assert_eq!(s, "n_over_L [1],x [cm],error\n0,1.5,\n0.75,,trap-not-formed\n0,2.5,\n");
    }

    #[test]
    fn gnuplot_groups_series_with_blank_lines() {
        let s = emit_plot_data(&sample(), Style::GnuplotBlock).unwrap();
        assert_eq!(
            s,
            "# n_over_L[1] x[cm] error\n# series 0: n_over_L[1]=0\n0 1.5 ?\n0 2.5 ?\n\n\n\
             # n_over_L[1] x[cm] error\n# series 1: n_over_L[1]=0.75\n0.75 ? trap-not-formed\n"
        );
    }

    #[test]
    fn single_row_gives_single_data_line() {
        let mut t = Table::new("one", &["a [1]"]);
        t.push(vec![3.0.into()]).unwrap();
        let s = emit_plot_data(&t, Style::GnuplotBlock).unwrap();
        assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 1);
        assert_eq!(emit_plot_data(&t, Style::Csv).unwrap().lines().count(), 2);
    }

    #[test]
    fn empty_and_non_finite_are_refused() {
        let mut t = Table::new("e", &["a [1]"]);
        assert_eq!(emit_plot_data(&t, Style::Csv), Err(TableError::Empty("e".into())));
        assert!(matches!(t.push(vec![f64::NAN.into()]), Err(TableError::NonFinite { .. })));
        assert!(matches!(t.push(vec![1.0.into(), 2.0.into()]), Err(TableError::Width { .. })));
    }

    #[test]
    fn numbers_stay_short_and_exact() {
        for (x, s) in [(0.0, "0"), (0.5, "0.5"), (3.3556e-19, "3.3556e-19"), (-2e20, "-2e20")] {
            assert_eq!(number(x), s);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn quoting_in_csv() {
        let mut t = Table::new("q", &["msg"]);
        t.push(vec!["a, \"b\"".into()]).unwrap();
        assert_eq!(emit_plot_data(&t, Style::Csv).unwrap(), "msg\n\"a, \"\"b\"\"\"\n");
    }
}
