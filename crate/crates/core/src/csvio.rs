//! CSV schemas for fields, mode states and the experiment tables.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! re-running a deterministic computation reproduces the files byte for byte
//! and reading them back is lossless.

use std::io::{Read, Write};

use crate::kdv::{ActionSpectrum, ScatteringData};
use crate::line::GSeriesComparison;
use crate::string::ModeState;
use crate::{Error, Result};

fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Two columns `(x, <name>)`.
pub fn write_field<W: Write>(w: W, name: &str, x: &[f64], values: &[f64]) -> Result<()> {
    if x.len() != values.len() {
        return Err(Error::Dimension(format!("{} abscissae for {} values", x.len(), values.len())));
    }
    write_table(w, &["x", name], x.iter().zip(values).map(|(x, v)| vec![num(*x), num(*v)]))
}

fn parse(field: &str, line: usize, column: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("line {line}: column {column}: cannot parse {field:?}")))
}

fn read_columns<R: Read>(r: R, expected: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_reader(r);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.len() != expected {
        return Err(Error::InvalidArgument(format!("expected {expected} columns, header has {}", header.len())));
    }
    let mut columns = vec![Vec::new(); expected];
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        for (c, column) in columns.iter_mut().enumerate() {
            column.push(parse(&record[c], i + 2, &header[c])?);
        }
    }
    Ok(columns)
}

/// Reads an `(x, value)` file back into its two columns.
pub fn read_field<R: Read>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut c = read_columns(r, 2)?;
    let values = c.pop().unwrap_or_default();
    let x = c.pop().unwrap_or_default();
    Ok((x, values))
}

/// `(n, a_n, adot_n)`, one-based `n`.
pub fn write_modes<W: Write>(w: W, m: &ModeState) -> Result<()> {
    write_table(
        w,
        &["n", "a_n", "adot_n"],
        (0..m.modes()).map(|i| vec![(i + 1).to_string(), num(m.a()[i]), num(m.adot()[i])]),
    )
}

pub fn read_modes<R: Read>(r: R, t: f64) -> Result<ModeState> {
    let c = read_columns(r, 3)?;
    for (i, &n) in c[0].iter().enumerate() {
        if n != (i + 1) as f64 {
            return Err(Error::InvalidArgument(format!("mode rows must be n = 1, 2, …; row {} has n = {n}", i + 1)));
        }
    }
    ModeState::new(c[1].clone(), c[2].clone(), t)
}

pub fn write_gseries_comparison<W: Write>(w: W, cmp: &GSeriesComparison) -> Result<()> {
    write_table(
        w,
        &["k", "g_paper", "g_oracle", "ratio", "abs_diff"],
        cmp.rows.iter().map(|r| vec![r.k.to_string(), num(r.g_paper), num(r.g_oracle), num(r.ratio), num(r.abs_diff)]),
    )
}

/// One sample of the KdV conserved quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedRow {
    pub t: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub h_direct: f64,
}

pub fn write_conserved_series<W: Write>(w: W, rows: &[ConservedRow]) -> Result<()> {
    write_table(
        w,
        &["t", "I_1", "I_2", "I_3", "H_direct"],
        rows.iter().map(|r| vec![num(r.t), num(r.i1), num(r.i2), num(r.i3), num(r.h_direct)]),
    )
}

pub fn write_scattering<W: Write>(w: W, s: &ScatteringData, actions: &ActionSpectrum) -> Result<()> {
    if s.k_grid.len() != actions.n_of_k.len() {
        return Err(Error::Dimension("scattering and action samples differ in length".into()));
    }
    write_table(
        w,
        &["k", "re_a", "im_a", "n_k"],
        s.k_grid.iter().zip(&s.a).zip(&actions.n_of_k).map(|((k, a), n)| vec![num(*k), num(a.re), num(a.im), num(*n)]),
    )
}

pub fn write_bound_states<W: Write>(w: W, s: &ScatteringData) -> Result<()> {
    write_table(
        w,
        &["l", "k_l", "N_l"],
        s.bound_k.iter().enumerate().map(|(l, k)| vec![(l + 1).to_string(), num(*k), num(k * k)]),
    )
}

/// Free-form numeric table with a caller-supplied header.
pub fn write_rows<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(r) = rows.iter().find(|r| r.len() != header.len()) {
        return Err(Error::Dimension(format!("row of {} values under {} columns", r.len(), header.len())));
    }
    write_table(w, header, rows.iter().map(|r| r.iter().map(|x| num(*x)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_lossless() {
        let x = vec![0.0, 0.1, 0.2, 1.0 / 3.0];
        let u = vec![1e-300, -2.5, std::f64::consts::PI, 0.0];
        let mut buf = Vec::new();
        write_field(&mut buf, "u", &x, &u).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("x,u\n"));
        let (x2, u2) = read_field(buf.as_slice()).unwrap();
        assert_eq!((x2, u2), (x, u));
    }

    #[test]
    fn modes_round_trip() {
        let m = ModeState::new(vec![0.25, -1.0 / 7.0], vec![3.0, 0.0], 0.5).unwrap();
        let mut buf = Vec::new();
        write_modes(&mut buf, &m).unwrap();
        assert_eq!(read_modes(buf.as_slice(), 0.5).unwrap(), m);
    }

    #[test]
    fn malformed_input_names_the_line() {
        let err = read_field("x,u\n0,1\n0.5,abc\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(read_modes("n,a_n,adot_n\n2,0,0\n".as_bytes(), 0.0).is_err());
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        assert!(write_field(Vec::new(), "u", &[0.0], &[]).is_err());
        assert!(write_rows(Vec::new(), &["a", "b"], &[vec![1.0]]).is_err());
    }
}
