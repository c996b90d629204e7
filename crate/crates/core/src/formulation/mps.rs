use std::io::{self, Write};

use super::problem::LpProblem;

/// Row name used in MPS output: family plus a running index.
pub fn row_name(lp: &LpProblem, k: usize) -> String {
    let (row, _) = lp.rows().nth(k).expect("row index in range");
    format!("{}_{k}", row.family)
}

/// Writes `lp` in free-format MPS (objective row `COST`, columns `x<j>`).
pub fn write_mps<W: Write>(lp: &LpProblem, name: &str, mut w: W) -> io::Result<()> {
    let names: Vec<String> = lp
        .rows()
        .enumerate()
        .map(|(k, (row, _))| format!("{}_{k}", row.family))
        .collect();
    writeln!(w, "NAME {name}")?;
    writeln!(w, "ROWS")?;
    writeln!(w, " N COST")?;
    for (k, (_, is_ineq)) in lp.rows().enumerate() {
        writeln!(w, " {} {}", if is_ineq { "L" } else { "E" }, names[k])?;
    }
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars];
    for (k, (row, _)) in lp.rows().enumerate() {
        for &(j, a) in &row.coeffs {
            by_col[j].push((k, a));
        }
    }
    writeln!(w, "COLUMNS")?;
    for (j, entries) in by_col.iter().enumerate() {
        if lp.objective[j] != 0.0 {
            writeln!(w, " x{j} COST {:e}", lp.objective[j])?;
        }
        for &(k, a) in entries {
            writeln!(w, " x{j} {} {a:e}", names[k])?;
        }
    }
    writeln!(w, "RHS")?;
    for (k, (row, _)) in lp.rows().enumerate() {
        if row.rhs != 0.0 {
            writeln!(w, " RHS {} {:e}", names[k], row.rhs)?;
        }
    }
    writeln!(w, "BOUNDS")?;
    for j in 0..lp.num_vars {
        let (lo, up) = (lp.lower[j], lp.upper[j]);
        if lo == up {
            writeln!(w, " FX BND x{j} {lo:e}")?;
            continue;
        }
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            writeln!(w, " FR BND x{j}")?;
            continue;
        }
        if lo == f64::NEG_INFINITY {
            writeln!(w, " MI BND x{j}")?;
        } else if lo != 0.0 {
            writeln!(w, " LO BND x{j} {lo:e}")?;
        }
        if up.is_finite() {
            writeln!(w, " UP BND x{j} {up:e}")?;
        }
    }
    writeln!(w, "ENDATA")
}
