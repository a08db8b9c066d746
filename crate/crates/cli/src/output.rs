//! CSV files and run-metadata sidecars.
//!
//! Numbers are written with 17 significant digits; missing values as `nan`.
//! Data files never contain timestamps, so identical inputs give identical
//! bytes.

use std::path::Path;

use envsync::analysis::SweepPoint;
use envsync::coeffs::CoeffTrajectory;
use envsync::master::{GeneratorCoeffs, Observables};
use envsync::poles::PhaseDiagram;

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn dynamics(path: &Path, o: &Observables) -> std::io::Result<()> {
    let mut header = vec!["t", "x1", "x2", "p1", "p2", "n1", "n2", "trace", "min_eig"];
    if o.logneg.is_some() {
        header.push("logneg");
    }
    let rows = (0..o.len()).map(|k| {
        let mut row: Vec<String> = [
            o.t[k],
            o.x1[k],
            o.x2[k],
            o.p1[k],
            o.p2[k],
            o.n1[k],
            o.n2[k],
            o.trace[k],
            o.min_eig[k],
        ]
        .into_iter()
        .map(num)
        .collect();
        if let Some(ln) = &o.logneg {
            row.push(num(ln[k]));
        }
        row
    });
    write_rows(path, &header, rows)
}

pub fn coefficients(path: &Path, tr: &CoeffTrajectory) -> std::io::Result<()> {
    let header = [
        "t", "u_re", "u_im", "v_re", "v_im", "w_re", "w_im", "x_re", "x_im",
    ];
    let rows = (0..tr.len()).map(|k| {
        let mut row = vec![num(tr.time(k))];
        for z in [tr.u[k], tr.v[k], tr.w[k], tr.x[k]] {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        row
    });
    write_rows(path, &header, rows)
}

pub fn generator(path: &Path, g: &GeneratorCoeffs) -> std::io::Result<()> {
    let header = [
        "t",
        "omega11_re",
        "omega11_im",
        "omega21_re",
        "omega21_im",
        "gamma1",
        "gamma2",
    ];
    let rows = (0..g.len()).map(|k| {
        [
            g.time(k),
            g.omega11[k].re,
            g.omega11[k].im,
            g.omega21[k].re,
            g.omega21[k].im,
            g.gamma1[k],
            g.gamma2[k],
        ]
        .into_iter()
        .map(num)
        .collect()
    });
    write_rows(path, &header, rows)
}

pub fn alpha_sweep(path: &Path, points: &[SweepPoint]) -> std::io::Result<()> {
    let rows = points.iter().map(|p| {
        vec![
            num(p.alpha),
            num(p.report.dominant_freq_1),
            num(p.report.dominant_freq_2),
            p.report.locked.to_string(),
        ]
    });
    write_rows(path, &["alpha", "freq1", "freq2", "locked"], rows)
}

pub fn locking_boundary(path: &Path, curve: &[(f64, f64)]) -> std::io::Result<()> {
    let rows = curve.iter().map(|&(d, a)| vec![num(d), num(a)]);
    write_rows(path, &["delta_omega", "alpha_star"], rows)
}

pub fn phase_diagram(raster: &Path, boundary: &Path, pd: &PhaseDiagram) -> std::io::Result<()> {
    let rows = pd.deltas.iter().enumerate().flat_map(|(i, &d)| {
        pd.alphas
            .iter()
            .enumerate()
            .map(move |(j, &a)| vec![num(a), num(d), num(pd.cell(i, j))])
    });
    write_rows(
        raster,
        &["alpha", "delta_omega", "omega_prime_over_omega0"],
        rows,
    )?;
    let rows = pd.boundary.iter().map(|&(d, a)| vec![num(d), num(a)]);
    write_rows(boundary, &["delta_omega", "alpha_c"], rows)
}

pub fn metadata(path: &Path, table: toml::Table) -> std::io::Result<()> {
    let text = toml::to_string(&table).map_err(std::io::Error::other)?;
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_full_precision() {
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(-1.0), "-1.0000000000000000e0");
    }
}
