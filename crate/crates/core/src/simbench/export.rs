use std::io::Write;

use super::{Dataset, SplitPair};
use crate::error::Result;

/// Writes both domains of `pair` as one CSV.
///
/// Columns: `domain, split, w, y, mu0, mu1, tau, pi`, then the shared features
/// `s_1..`, the source-private features `pr_1..` and the target-private features
/// `pt_1..`. Private columns of the other domain are left empty.
pub fn write_pair_csv<W: Write>(pair: &SplitPair, writer: W) -> Result<()> {
    let ds = pair.source.train.d_shared;
    let dr = pair.source.train.x.cols() - ds;
    let dt = pair.target.train.x.cols() - ds;
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = ["domain", "split", "w", "y", "mu0", "mu1", "tau", "pi"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=ds).map(|j| format!("s_{j}")));
    header.extend((1..=dr).map(|j| format!("pr_{j}")));
    header.extend((1..=dt).map(|j| format!("pt_{j}")));
    w.write_record(&header)?;
    for split in [&pair.source, &pair.target] {
        for (name, d) in [("train", &split.train), ("validation", &split.validation), ("test", &split.test)] {
            write_rows(&mut w, name, d, dr, dt)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_rows<W: Write>(w: &mut csv::Writer<W>, split: &str, d: &Dataset, dr: usize, dt: usize) -> Result<()> {
    let (before, after) = match d.domain {
        crate::Domain::Source => (0, dt),
        crate::Domain::Target => (dr, 0),
    };
    for i in 0..d.len() {
        let mut row = vec![
            d.domain.to_string(),
            split.to_string(),
            d.w[i].to_string(),
            d.y[i].to_string(),
            d.mu0[i].to_string(),
            d.mu1[i].to_string(),
            d.tau[i].to_string(),
            d.pi[i].to_string(),
        ];
        let x = d.x.row(i);
        row.extend(x[..d.d_shared].iter().map(f64::to_string));
        row.extend(std::iter::repeat_n(String::new(), before));
        row.extend(x[d.d_shared..].iter().map(f64::to_string));
        row.extend(std::iter::repeat_n(String::new(), after));
        w.write_record(&row)?;
    }
    Ok(())
}
