use std::io::Write;

use anyhow::{bail, Context, Result};

use crate::sweep::open_out;
use crate::PlotArgs;

/// Python literal for one CSV cell; "inf" and "nan" map to float().
fn py_number(cell: &str) -> Result<String> {
    match cell.trim() {
        "inf" => Ok("float('inf')".into()),
        "nan" => Ok("float('nan')".into()),
        s => {
            s.parse::<f64>().with_context(|| format!("non-numeric cell `{s}`"))?;
            Ok(s.to_string())
        }
    }
}

fn py_str(s: &str) -> String {
    format!("{s:?}")
}

pub fn run(a: &PlotArgs) -> Result<()> {
    let path = &a.input;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let comments: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let headers: Vec<String> = rd
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() < 2 || headers.iter().all(|h| h.is_empty()) {
        bail!("{} has no data columns", path.display());
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for rec in rd.records() {
        let rec = rec.with_context(|| format!("parsing {}", path.display()))?;
        for (col, cell) in columns.iter_mut().zip(rec.iter()) {
            col.push(py_number(cell).with_context(|| format!("in {}", path.display()))?);
        }
    }
    if columns[0].is_empty() {
        bail!("{} has no data rows", path.display());
    }
    let sweep_r = headers[0] == "r";
    let log_v2 = a.log_v2.unwrap_or(sweep_r);
    let x_label = if sweep_r { "r" } else { "γt" };

    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str(&format!("# generated by ndpo {} from {}\n", ndpo_core::VERSION, path.display()));
    for c in &comments {
        s.push_str(c);
        s.push('\n');
    }
    s.push_str("import matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!(
        "HEADERS = [{}]\n",
        headers.iter().map(|h| py_str(h)).collect::<Vec<_>>().join(", ")
    ));
    s.push_str("DATA = {\n");
    for (h, col) in headers.iter().zip(&columns) {
        s.push_str(&format!("    {}: [{}],\n", py_str(h), col.join(", ")));
    }
    s.push_str("}\n\n");
    s.push_str(&format!("LOG_V2 = {}\n", if log_v2 { "True" } else { "False" }));
    s.push_str(&format!("X = DATA[HEADERS[0]]\nX_LABEL = {}\n", py_str(x_label)));
    s.push_str(
        r#"
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for name in HEADERS[1:]:
    if name.startswith('v1'):
        ax1.plot(X, DATA[name], label=name)
    elif name.startswith('v2'):
        ax2.plot(X, DATA[name], label=name)
for ax, title in ((ax1, 'V1'), (ax2, 'V2')):
    ax.axhline(1.0, color='grey', linestyle='--', linewidth=0.8, label='vacuum')
    ax.set_xlabel(X_LABEL)
    ax.set_ylabel(title)
    ax.legend()
if LOG_V2:
    ax2.set_yscale('log')
fig.tight_layout()
fig.savefig(__file__.rsplit('.', 1)[0] + '.png', dpi=150)
"#,
    );

    let mut out = open_out(a.out.as_deref())?;
    out.write_all(s.as_bytes())?;
    out.flush()?;
    Ok(())
}
