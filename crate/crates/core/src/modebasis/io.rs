// SPDX-License-Identifier: Apache-2.0

//! Columnar text and JSON persistence for waveform sets.
//!
//! Text layout: `#`-prefixed `key value` header lines, then one row per grid
//! point holding `t` followed by `re, im` pairs for every waveform.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;

use super::{BasisFamily, ModeBasis};
use crate::error::{Error, Result};
use crate::grid::{SampledWaveform, TimeGrid, WaveformKind};

/// Writes `waveforms` (sharing one grid) with extra header entries.
pub fn write_waveforms<W: Write>(
    out: &mut W,
    meta: &BTreeMap<String, String>,
    waveforms: &[SampledWaveform],
) -> Result<()> {
    let first = waveforms
        .first()
        .ok_or_else(|| Error::param("nothing to write"))?;
    let grid = *first.grid();
    for w in waveforms {
        grid.ensure_matches(w.grid())?;
    }
    for (k, v) in meta {
        writeln!(out, "# {k} {v}")?;
    }
    writeln!(out, "# grid {:.17e} {:.17e} {}", grid.t_start(), grid.dt(), grid.len())?;
    let kinds: Vec<&str> = waveforms.iter().map(|w| kind_name(w.kind())).collect();
    writeln!(out, "# kinds {}", kinds.join(" "))?;
    let mut header = String::from("t");
    for m in 0..waveforms.len() {
        header.push_str(&format!(",re_{m},im_{m}"));
    }
    writeln!(out, "{header}")?;
    for i in 0..grid.len() {
        let mut line = format!("{:.17e}", grid.time(i));
        for w in waveforms {
            let s = w.samples()[i];
            line.push_str(&format!(",{:.17e},{:.17e}", s.re, s.im));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn kind_name(kind: WaveformKind) -> &'static str {
    match kind {
        WaveformKind::ModeFunction => "mode_function",
        WaveformKind::DriveEnvelope => "drive_envelope",
        WaveformKind::Rate => "rate",
        WaveformKind::FieldRecord => "field_record",
    }
}

fn parse_kind(s: &str) -> Result<WaveformKind> {
    Ok(match s {
        "mode_function" => WaveformKind::ModeFunction,
        "drive_envelope" => WaveformKind::DriveEnvelope,
        "rate" => WaveformKind::Rate,
        "field_record" => WaveformKind::FieldRecord,
        other => return Err(Error::Parse(format!("unknown waveform kind `{other}`"))),
    })
}

/// Reads a file produced by [`write_waveforms`]; returns the header entries
/// (without `grid` and `kinds`) and the waveforms.
pub fn read_waveforms<R: BufRead>(input: R) -> Result<(BTreeMap<String, String>, Vec<SampledWaveform>)> {
    let mut meta = BTreeMap::new();
    let mut grid: Option<TimeGrid> = None;
    let mut kinds: Vec<WaveformKind> = Vec::new();
    let mut columns: Vec<Vec<C64>> = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
            match key {
                "grid" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(Error::Parse(format!("line {}: malformed grid header", lineno + 1)));
                    }
                    let t0 = parse_f64(parts[0], lineno)?;
                    let dt = parse_f64(parts[1], lineno)?;
                    let n = parts[2]
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
                    grid = Some(TimeGrid::new(t0, dt, n)?);
                }
                "kinds" => {
                    kinds = value.split_whitespace().map(parse_kind).collect::<Result<_>>()?;
                }
                _ => {
                    meta.insert(key.to_string(), value.trim().to_string());
                }
            }
            continue;
        }
        if !saw_header {
            saw_header = true;
            let n_cols = line.split(',').count();
            if n_cols < 3 || (n_cols - 1) % 2 != 0 {
                return Err(Error::Parse(format!("line {}: bad column header", lineno + 1)));
            }
            columns = vec![Vec::new(); (n_cols - 1) / 2];
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|v| parse_f64(v, lineno))
            .collect::<Result<_>>()?;
        if values.len() != 2 * columns.len() + 1 {
            return Err(Error::Parse(format!("line {}: wrong number of columns", lineno + 1)));
        }
        for (m, col) in columns.iter_mut().enumerate() {
            col.push(C64::new(values[1 + 2 * m], values[2 + 2 * m]));
        }
    }
    let grid = grid.ok_or_else(|| Error::Parse("missing grid header".into()))?;
    if kinds.is_empty() {
        kinds = vec![WaveformKind::FieldRecord; columns.len()];
    }
    if kinds.len() != columns.len() {
        return Err(Error::Parse("kinds header does not match column count".into()));
    }
    let waveforms = columns
        .into_iter()
        .zip(kinds)
        .map(|(c, k)| SampledWaveform::new_unchecked(grid, c, k))
        .collect::<Result<_>>()?;
    Ok((meta, waveforms))
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {}: `{s}`: {e}", lineno + 1)))
}

pub fn write_basis<W: Write>(out: &mut W, basis: &ModeBasis) -> Result<()> {
    let mut meta = BTreeMap::new();
    meta.insert("family".to_string(), basis.family().as_str().to_string());
    meta.insert("kappa_ph".to_string(), format!("{:.17e}", basis.kappa_ph()));
    write_waveforms(out, &meta, basis.modes())
}

pub fn read_basis<R: BufRead>(input: R) -> Result<ModeBasis> {
    let (meta, waveforms) = read_waveforms(input)?;
    let family = BasisFamily::parse(meta.get("family").map(String::as_str).unwrap_or("measured"))?;
    let kappa_ph = meta
        .get("kappa_ph")
        .ok_or_else(|| Error::Parse("missing kappa_ph header".into()))?
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("kappa_ph: {e}")))?;
    ModeBasis::new(waveforms, family, kappa_ph)
}

pub fn basis_to_json(basis: &ModeBasis) -> Result<String> {
    Ok(serde_json::to_string(basis)?)
}

pub fn basis_from_json(s: &str) -> Result<ModeBasis> {
    Ok(serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modebasis::sech_basis;

    #[test]
    fn columnar_round_trip_preserves_overlaps() {
        let kappa = 2.0 * std::f64::consts::PI * 5e6;
        let g = TimeGrid::symmetric(60.0 / kappa, 1e-9).unwrap();
        let basis = sech_basis(4, kappa, &g).unwrap();
        let mut buf = Vec::new();
        write_basis(&mut buf, &basis).unwrap();
        let back = read_basis(buf.as_slice()).unwrap();
        assert_eq!(back.family(), BasisFamily::SechOrthogonal);
        let a = basis.overlap_matrix().unwrap();
        let b = back.overlap_matrix().unwrap();
        assert!((a.entries() - b.entries()).iter().all(|d| d.norm() < 1e-9));
    }

    #[test]
    fn json_round_trip() {
        let g = TimeGrid::symmetric(1e-6, 1e-9).unwrap();
        let basis = sech_basis(2, 2.0 * std::f64::consts::PI * 5e6, &g).unwrap();
        let back = basis_from_json(&basis_to_json(&basis).unwrap()).unwrap();
        assert_eq!(back, basis);
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        let text = "# grid 0 1e-9 2\nt,re_0\n0,1\n";
        assert!(matches!(read_waveforms(text.as_bytes()), Err(Error::Parse(_))));
    }
}
