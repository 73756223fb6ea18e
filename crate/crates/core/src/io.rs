//! Point, distance-matrix and label files.
//!
//! * Points CSV: one row per point, float columns, optional header row.
//! * Points binary: `b"GKNN"`, `u32` N, `u32` D, then N·D little-endian
//!   `f64` in row-major order.
//! * Distance matrix CSV: N rows of N floats.
//! * Labels CSV: header `vertex,y`, one row per labeled vertex.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geodesic::LabelSet;
use crate::metric_space::{DistanceMatrix, PointCloud};

pub const POINTS_MAGIC: &[u8; 4] = b"GKNN";

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

/// Reads all rows as floats; a first row that does not parse is taken as a
/// header and skipped.
fn read_float_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, record) in csv_reader(path)?.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::parse(path, line, e.to_string())),
        }
    }
    Ok(rows)
}

pub fn read_points_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let rows = read_float_rows(path)?;
    if let Some((i, row)) = rows
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != rows[0].len())
    {
        return Err(Error::parse(
            path,
            i + 1,
            format!("row has {} columns, expected {}", row.len(), rows[0].len()),
        ));
    }
    PointCloud::from_rows(&rows)
}

pub fn write_points_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn encode_points_binary(cloud: &PointCloud) -> Result<Vec<u8>> {
    if !cloud.has_coordinates() {
        return Err(Error::MissingCoordinates);
    }
    let n = u32::try_from(cloud.len())
        .map_err(|_| Error::InvalidParameter("too many points for the binary format".into()))?;
    let d = cloud.dim() as u32;
    let mut buf = Vec::with_capacity(12 + cloud.coords().len() * 8);
    buf.extend_from_slice(POINTS_MAGIC);
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&d.to_le_bytes());
    for x in cloud.coords() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    Ok(buf)
}

pub fn decode_points_binary(bytes: &[u8], path: &Path) -> Result<PointCloud> {
    if bytes.len() < 12 || &bytes[..4] != POINTS_MAGIC {
        return Err(Error::parse(path, 0, "missing GKNN header"));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != n * d * 8 {
        return Err(Error::parse(
            path,
            0,
            format!(
                "expected {} payload bytes for {n}x{d}, got {}",
                n * d * 8,
                body.len()
            ),
        ));
    }
    let coords = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PointCloud::from_flat(d, coords)
}

pub fn write_points_binary(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_points_binary(cloud)?).map_err(|e| Error::io(path, e))
}

pub fn read_points_binary(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_points_binary(&bytes, path)
}

/// Dispatches on content: binary if the file starts with the magic bytes.
pub fn read_points(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(POINTS_MAGIC) {
        decode_points_binary(&bytes, path)
    } else {
        read_points_csv(path)
    }
}

pub fn read_distance_matrix_csv(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let path = path.as_ref();
    let rows = read_float_rows(path)?;
    let n = rows.len();
    if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::parse(
            path,
            i + 1,
            format!("matrix row must have {n} entries"),
        ));
    }
    DistanceMatrix::new(n, rows.concat()).map_err(|e| Error::parse(path, 0, e.to_string()))
}

/// Labels CSV with header `vertex,y`; duplicate vertices are rejected.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<LabelSet> {
    let path = path.as_ref();
    let mut reader = csv_reader(path)?;
    let mut records = reader.records();
    match records.next() {
        Some(Ok(h)) if h.len() == 2 && &h[0] == "vertex" && &h[1] == "y" => {}
        _ => return Err(Error::parse(path, 1, "expected header `vertex,y`")),
    }
    let mut pairs = Vec::new();
    for (i, record) in records.enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::parse(path, line, "expected `vertex,y`"));
        }
        let v: usize = record[0]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad vertex id `{}`", &record[0])))?;
        let y: f64 = record[1]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad response `{}`", &record[1])))?;
        pairs.push((v, y));
    }
    LabelSet::new(pairs).map_err(|e| Error::parse(path, 0, e.to_string()))
}

pub fn write_labels_csv(labels: &LabelSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("vertex,y\n");
    for (v, y) in labels.iter() {
        out.push_str(&format!("{v},{y:?}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
