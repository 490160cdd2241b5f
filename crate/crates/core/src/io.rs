//! Field CSV: one row `i,j,value,innovation` per hull point, the innovation
//! column left empty on layer 0 and absent altogether when the field has none.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::harness::report::fmt_f64;
use crate::model::{hull_indices, Field, TriangleWindow};

pub fn write_field_csv<W: Write>(out: W, field: &Field) -> Result<()> {
    let w = field.window();
    let with_eps = field.innovations().is_some();
    let mut csv = csv::Writer::from_writer(out);
    if with_eps {
        csv.write_record(["i", "j", "value", "innovation"])?;
    } else {
        csv.write_record(["i", "j", "value"])?;
    }
    for (i, j) in hull_indices(w) {
        let v = fmt_f64(field.value(i, j).expect("hull point"));
        if with_eps {
            let e = field.innovation(i, j).map(fmt_f64).unwrap_or_default();
            csv.write_record([i.to_string(), j.to_string(), v, e])?;
        } else {
            csv.write_record([i.to_string(), j.to_string(), v])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Reads a field on window `w`. Rows outside the hull are ignored; every hull point
/// must be present. Innovations are kept only if every triangle point has one.
pub fn read_field_csv<R: Read>(input: R, w: TriangleWindow) -> Result<Field> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (ci, cj, cv) = match (col("i"), col("j"), col("value")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::InvalidConfig("field CSV needs columns i, j, value".into())),
    };
    let ce = col("innovation");
    let mut values = vec![f64::NAN; w.hull_len()];
    let mut seen = vec![false; w.hull_len()];
    let mut eps = vec![f64::NAN; w.triangle_len()];
    let mut eps_seen = 0usize;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse_int = |c: usize| -> Result<i64> {
            rec.get(c)
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| Error::InvalidConfig(format!("row {}: bad integer in column {}", line + 2, c + 1)))
        };
        let (i, j) = (parse_int(ci)?, parse_int(cj)?);
        let Some(h) = w.hull_index(i, j) else { continue };
        let v: f64 = rec
            .get(cv)
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::InvalidConfig(format!("row {}: bad value", line + 2)))?;
        values[h] = v;
        seen[h] = true;
        if let (Some(c), Some(t)) = (ce, w.triangle_index(i, j)) {
            let text = rec.get(c).unwrap_or("").trim();
            if !text.is_empty() {
                eps[t] = text
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("row {}: bad innovation", line + 2)))?;
                eps_seen += 1;
            }
        }
    }
    if let Some(h) = seen.iter().position(|s| !s) {
        let (i, j) = hull_indices(w)[h];
        return Err(Error::MissingValues(i, j));
    }
    let innovations = (eps_seen == w.triangle_len() && eps.iter().all(|e| e.is_finite())).then_some(eps);
    Field::new(w, values, innovations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::rng::{InnovationDist, RngStream};
    use crate::simulate::{simulate, SimMethod};

    #[test]
    fn roundtrip_is_exact() {
        let w = TriangleWindow::new(3, 4);
        let f = simulate(
            ModelParams::new(0.3, -0.4),
            w,
            SimMethod::BoundaryCholesky,
            InnovationDist::Gaussian,
            &mut RngStream::new(1, 0),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let back = read_field_csv(buf.as_slice(), w).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn missing_point_is_reported() {
        let text = "i,j,value\n0,0,1.0\n";
        assert!(matches!(
            read_field_csv(text.as_bytes(), TriangleWindow::new(1, 1)),
            Err(Error::MissingValues(_, _))
        ));
    }
}
