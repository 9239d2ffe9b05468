use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{ResultRow, SweepVariable};

pub const CSV_HEADER: &str =
    "sweep_var,value,p_exact,p_blocked,p_analytic,epsilon,mu_end,runtime_exact_ms,runtime_blocked_ms";

fn field(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        let _ = write!(out, "{v:e}");
    }
}

fn render(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(r.variable.name());
        let _ = write!(out, ",{:e}", r.value);
        for v in [
            r.p_exact,
            r.p_blocked,
            r.p_analytic,
            r.epsilon,
            r.mu_end,
            r.runtime_exact_ms,
            r.runtime_blocked_ms,
        ] {
            field(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    out.write_all(render(rows).as_bytes())?;
    out.flush()
}

/// Writes `rows` to `path`. Absent values become empty fields.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_csv(rows, BufWriter::new(file)).map_err(io)
}

/// Gnuplot script plotting the three probability columns of a sweep CSV.
pub fn plot_script(csv_path: &str, variable: SweepVariable) -> String {
    let xlabel = match variable {
        SweepVariable::Gradient => "gradient δω",
        SweepVariable::Rabi => "Rabi frequency Ω",
    };
    let logx = if variable == SweepVariable::Gradient {
        "set logscale x\n"
    } else {
        ""
    };
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale y\n\
         {logx}set xlabel '{xlabel}'\n\
         set ylabel 'unwanted probability'\n\
         plot '{csv_path}' using 2:3 with linespoints pt 7, \\\n     \
         '' using 2:4 with lines, \\\n     \
         '' using 2:5 with lines dt 2\n"
    )
}
