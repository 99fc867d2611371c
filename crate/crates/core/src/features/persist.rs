//! On-disk feature matrix: one JSON header line, then little-endian
//! binary32 values (row-major), binary64 window starts, one label byte per
//! row (0, 1, or 255 when unlabelled) and one validity byte per row.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::Modality;

use super::{FeatureError, FeatureMatrix, FeatureSchema};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    modality: Modality,
    names: Vec<String>,
    rows: usize,
    cols: usize,
    schema_hash: String,
}

const UNLABELLED: u8 = 255;

pub fn write_matrix(m: &FeatureMatrix, path: &Path) -> Result<(), FeatureError> {
    let header = Header {
        modality: m.schema().modality(),
        names: m.schema().names().to_vec(),
        rows: m.rows(),
        cols: m.cols(),
        schema_hash: m.schema().hash(),
    };
    let mut buf = serde_json::to_vec(&header).expect("header serializes");
    buf.push(b'\n');
    for &v in m.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    for &t in m.window_starts_s() {
        buf.extend_from_slice(&t.to_le_bytes());
    }
    match m.labels() {
        Some(l) => buf.extend(l.iter().map(|&b| b as u8)),
        None => buf.extend(std::iter::repeat_n(UNLABELLED, m.rows())),
    }
    buf.extend(m.valid().iter().map(|&b| b as u8));
    std::fs::write(path, buf).map_err(|source| FeatureError::Fs {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_matrix(path: &Path) -> Result<FeatureMatrix, FeatureError> {
    let p = path.display().to_string();
    let bad = |reason: String| FeatureError::Format {
        path: p.clone(),
        reason,
    };
    let bytes = std::fs::read(path).map_err(|source| FeatureError::Fs {
        path: p.clone(),
        source,
    })?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header: Header =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(format!("header: {e}")))?;
    let schema = FeatureSchema::new(header.modality, header.names)?;
    if schema.len() != header.cols {
        return Err(bad(format!("{} names for {} columns", schema.len(), header.cols)));
    }
    if schema.hash() != header.schema_hash {
        return Err(bad("schema hash does not match names".into()));
    }
    let (rows, cols) = (header.rows, header.cols);
    let body = &bytes[nl + 1..];
    let expected = rows * cols * 4 + rows * 8 + rows * 2;
    if body.len() != expected {
        return Err(bad(format!("body has {} bytes, expected {expected}", body.len())));
    }
    let (vals, rest) = body.split_at(rows * cols * 4);
    let (times, rest) = rest.split_at(rows * 8);
    let (labels, valid) = rest.split_at(rows);

    let mut values = Vec::with_capacity(rows * cols);
    for (i, c) in vals.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64;
        if !v.is_finite() {
            return Err(bad(format!("non-finite value at row {}", i / cols.max(1))));
        }
        values.push(v);
    }
    let window_starts_s = times
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let labels = if labels.iter().all(|&b| b == UNLABELLED) && rows > 0 {
        None
    } else {
        Some(
            labels
                .iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(bad(format!("label byte {other}"))),
                })
                .collect::<Result<Vec<_>, _>>()?,
        )
    };
    let valid = valid
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(bad(format!("validity byte {other}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureMatrix::from_parts(schema, window_starts_s, values, labels, valid))
}
