//! Tabular records, CSV export and plot-script emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One sample of one protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub variant: String,
    pub tau: f64,
    pub time: f64,
    pub lambda: f64,
    pub lambda_dot: f64,
    pub f2: f64,
    /// `ln F²`, finite even when `F²` underflows.
    pub ln_f2: f64,
    pub excess_energy: f64,
    pub density: Option<Vec<f64>>,
}

impl RunRecord {
    pub fn log10_f2(&self) -> f64 {
        self.ln_f2 / std::f64::consts::LN_10
    }
}

/// A named numeric table written as one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<String>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column.
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .column(name)
            .ok_or_else(|| Error::Schema(format!("table `{}` has no column `{name}`", self.name)))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format_float(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Schema("empty CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Schema(format!("row {}: {e}", k + 1)))?;
            if row.len() != columns.len() {
                return Err(Error::Schema(format!("row {} has {} cells", k + 1, row.len())));
            }
            rows.push(row);
        }
        Ok(Self {
            name: name.into(),
            columns,
            rows,
        })
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Writes `table` as UTF-8 CSV with LF line endings.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    fs::write(path, table.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Plot layouts understood by [`plot_script`].
pub const FIGURE_IDS: &[&str] = &[
    "protocol",
    "fidelity_trace",
    "sweep",
    "density",
    "noise_rates",
    "transition_spectrum",
];

fn prefixed(table: &Table, prefix: &str) -> Vec<String> {
    table
        .columns
        .iter()
        .filter(|c| c.starts_with(prefix))
        .cloned()
        .collect()
}

fn require(table: &Table, cols: &[&str]) -> Result<()> {
    for c in cols {
        if table.column(c).is_none() {
            return Err(Error::Schema(format!("figure needs column `{c}` in table `{}`", table.name)));
        }
    }
    Ok(())
}

/// A standalone matplotlib script plotting `csv_file` (a path relative to
/// the script) in the layout `figure_id`.
pub fn plot_script(table: &Table, figure_id: &str, csv_file: &str, log_fidelity: bool) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::Schema(format!("table `{}` has no records to plot", table.name)));
    }
    let mut s = String::new();
    s.push_str("import os\nimport pandas as pd\nimport matplotlib.pyplot as plt\n\n");
    let _ = writeln!(
        s,
        "path = os.path.join(os.path.dirname(os.path.abspath(__file__)), {csv_file:?})"
    );
    s.push_str("df = pd.read_csv(path)\n");
    let fid_cols = |prefix_lin: &str, prefix_log: &str| {
        if log_fidelity {
            (prefixed(table, prefix_log), false)
        } else {
            (prefixed(table, prefix_lin), true)
        }
    };
    match figure_id {
        "protocol" => {
            require(table, &["t", "lambda", "lambda_cd"])?;
            s.push_str("fig, ax = plt.subplots()\n");
            s.push_str("ax.plot(df['t'], df['lambda'], 'r--', label='naive')\n");
            s.push_str("ax.plot(df['t'], df['lambda_cd'], 'b-', label='CD')\n");
            s.push_str("ax.set_xlabel('t')\nax.set_ylabel('lambda')\nax.legend()\n");
        }
        "fidelity_trace" => {
            require(table, &["t"])?;
            let (cols, logy) = fid_cols("F2_", "log10F2_");
            if cols.is_empty() {
                return Err(Error::Schema("no fidelity columns".into()));
            }
            s.push_str("fig, ax = plt.subplots()\n");
            for c in &cols {
                let _ = writeln!(s, "ax.plot(df['t'], df[{c:?}], label={c:?})");
            }
            if logy {
                s.push_str("ax.set_yscale('log')\n");
            }
            s.push_str("ax.set_xlabel('t')\nax.set_ylabel('fidelity')\nax.legend()\n");
        }
        "sweep" => {
            require(table, &["tau"])?;
            let (cols, logy) = fid_cols("F2_", "log10F2_");
            let de = prefixed(table, "dE_");
            if cols.is_empty() || de.is_empty() {
                return Err(Error::Schema("sweep needs fidelity and excess-energy columns".into()));
            }
            s.push_str("fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))\n");
            for c in &cols {
                let _ = writeln!(s, "a.plot(df['tau'], df[{c:?}], 'o-', label={c:?})");
            }
            for c in &de {
                let _ = writeln!(s, "b.plot(df['tau'], df[{c:?}], 'o-', label={c:?})");
            }
            if logy {
                s.push_str("a.set_yscale('log')\n");
            }
            s.push_str("b.set_yscale('log')\na.set_xlabel('tau')\nb.set_xlabel('tau')\n");
            s.push_str("a.set_ylabel('final fidelity')\nb.set_ylabel('excess energy')\na.legend()\nb.legend()\n");
        }
        "density" => {
            require(table, &["t", "x"])?;
            let cols = prefixed(table, "n_");
            if cols.is_empty() {
                return Err(Error::Schema("no density columns".into()));
            }
            let _ = writeln!(s, "cols = {:?}", cols);
            s.push_str("fig, axes = plt.subplots(1, len(cols), figsize=(4 * len(cols), 4), sharey=True)\n");
            s.push_str("for ax, c in zip(axes if len(cols) > 1 else [axes], cols):\n");
            s.push_str("    grid = df.pivot(index='t', columns='x', values=c)\n");
            s.push_str("    ax.pcolormesh(grid.columns, grid.index, grid.values, shading='auto')\n");
            s.push_str("    ax.set_title(c)\n    ax.set_xlabel('x')\n");
            s.push_str("axes[0].set_ylabel('t') if len(cols) > 1 else axes.set_ylabel('t')\n");
        }
        "noise_rates" => {
            require(table, &["beta"])?;
            let cols = prefixed(table, "rate_");
            if cols.is_empty() {
                return Err(Error::Schema("no rate columns".into()));
            }
            s.push_str("fig, ax = plt.subplots()\n");
            for c in &cols {
                let _ = writeln!(s, "ax.scatter(df['beta'], df[{c:?}], s=4, label={c:?})");
            }
            s.push_str("ax.set_yscale('log')\nax.set_xlabel('effective beta')\n");
            s.push_str("ax.set_ylabel('rate / S')\nax.legend()\n");
        }
        "transition_spectrum" => {
            require(table, &["omega"])?;
            let cols = prefixed(table, "gamma_");
            if cols.is_empty() {
                return Err(Error::Schema("no spectrum columns".into()));
            }
            s.push_str("fig, ax = plt.subplots()\n");
            for c in &cols {
                let _ = writeln!(s, "ax.plot(df['omega'], df[{c:?}], label={c:?})");
            }
            s.push_str("ax.set_yscale('log')\nax.set_xlabel('omega')\nax.set_ylabel('Gamma / S')\nax.legend()\n");
        }
        other => {
            return Err(Error::Schema(format!(
                "unknown figure `{other}`; expected one of {}",
                FIGURE_IDS.join(", ")
            )))
        }
    }
    s.push_str("fig.tight_layout()\nfig.savefig(os.path.splitext(path)[0] + '.png', dpi=150)\n");
    Ok(s)
}

/// Writes the script from [`plot_script`] to `path`; nothing is written on
/// error.
pub fn emit_plot_script(table: &Table, figure_id: &str, csv_file: &str, log_fidelity: bool, path: &Path) -> Result<()> {
    let text = plot_script(table, figure_id, csv_file, log_fidelity)?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(
            "trace",
            ["t", "lambda", "lambda_cd", "F2_naive", "log10F2_naive"].map(String::from).to_vec(),
        );
        t.rows.push(vec![0.0, 0.1, 0.1, 1.0, 0.0]);
        t.rows.push(vec![0.5, 1.0 / 3.0, 0.7, 2.5e-300, -299.6]);
        t
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let t = sample();
        let text = t.to_csv();
        assert!(!text.contains('\r'));
        assert!(text.starts_with("t,lambda,lambda_cd,F2_naive,log10F2_naive\n"));
        let back = Table::from_csv("trace", &text).unwrap();
        for (a, b) in t.rows.iter().flatten().zip(back.rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let empty = Table::new("e", vec!["a".into(), "b".into()]);
        assert_eq!(empty.to_csv(), "a,b\n");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        emit_csv(&empty, &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "a,b\n");
        assert!(matches!(emit_csv(&empty, &dir.path().join("missing/x.csv")), Err(Error::Io(_))));
    }

    #[test]
    fn plot_scripts() {
        let t = sample();
        let s = plot_script(&t, "protocol", "trace.csv", false).unwrap();
        assert!(s.contains("df['lambda_cd']") && s.contains("'r--'"));
        let f = plot_script(&t, "fidelity_trace", "trace.csv", false).unwrap();
        assert!(f.contains("set_yscale('log')"));
        let g = plot_script(&t, "fidelity_trace", "trace.csv", true).unwrap();
        assert!(g.contains("log10F2_naive") && !g.contains("set_yscale"));
        assert!(matches!(plot_script(&t, "noise_rates", "x.csv", false), Err(Error::Schema(_))));
        let rates = Table {
            name: "rates".into(),
            columns: ["n", "energy", "beta", "rate_naive"].map(String::from).to_vec(),
            rows: vec![vec![0.0, -1.0, 0.2, 3.0]],
        };
        let r = plot_script(&rates, "noise_rates", "rates.csv", false).unwrap();
        assert!(r.contains("scatter") && r.contains("set_yscale('log')"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.py");
        let empty = Table::new("e", t.columns.clone());
        assert!(emit_plot_script(&empty, "protocol", "e.csv", false, &p).is_err());
        assert!(!p.exists());
    }
}
