//! Dataset IO and trace emission: fvecs/ivecs vector files, the seeded
//! synthetic embedding generator, and the CSV formats written by the
//! CLI.
//!
//! fvecs layout, per record: little-endian `i32` dimension `d` followed
//! by `d` little-endian `f32` values. ivecs is identical with `i32`
//! payloads. All records in a file must share `d`.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, FormatErrorKind, Result};
use crate::matrix::Matrix;
use crate::opq::DistortionTrace;
use crate::sample::{gaussian_matrix, random_rotation};

/// Leading coordinate scale of the synthetic generator, chosen so the
/// magnitudes are comparable to classic image-descriptor datasets and
/// stock learning rates transfer.
pub const SYNTHETIC_BASE_SCALE: f64 = 140.0;

/// Integer matrix for neighbor ground-truth files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i32>,
}

impl IntMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<i32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", rows * cols),
                got: format!("{}", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[i32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

fn data_err(path: &Path, kind: FormatErrorKind) -> Error {
    Error::DataFormat { path: path.display().to_string(), kind }
}

/// Reads every record of an fvecs file; an empty file yields a 0x0
/// matrix.
pub fn read_fvecs(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let mut reader = BufReader::new(File::open(path)?);
    let mut dim: Option<usize> = None;
    let mut data: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    let mut offset = 0u64;
    loop {
        let d = match reader.read_i32::<LittleEndian>() {
            Ok(d) => d,
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        };
        offset += 4;
        if d <= 0 {
            return Err(data_err(path, FormatErrorKind::BadDimension(d)));
        }
        let d = d as usize;
        match dim {
            Some(expected) if expected != d => {
                return Err(data_err(
                    path,
                    FormatErrorKind::InconsistentDimension { expected, got: d },
                ));
            }
            None => dim = Some(d),
            _ => {}
        }
        for _ in 0..d {
            match reader.read_f32::<LittleEndian>() {
                Ok(v) => data.push(v as f64),
                Err(e) if e.kind() == ErrorKind::UnexpectedEof => {
                    return Err(data_err(path, FormatErrorKind::Truncated { offset }));
                }
                Err(e) => return Err(e.into()),
            }
            offset += 4;
        }
        rows += 1;
    }
    let cols = dim.unwrap_or(0);
    Matrix::from_vec(rows, cols, data)
}

/// Writes a matrix as fvecs (values narrowed to `f32`).
pub fn write_fvecs(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for r in 0..m.rows() {
        writer.write_i32::<LittleEndian>(m.cols() as i32)?;
        for &v in m.row(r) {
            writer.write_f32::<LittleEndian>(v as f32)?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads an ivecs file (same framing as fvecs, integer payload).
pub fn read_ivecs(path: impl AsRef<Path>) -> Result<IntMatrix> {
    let path = path.as_ref();
    let mut reader = BufReader::new(File::open(path)?);
    let mut dim: Option<usize> = None;
    let mut data: Vec<i32> = Vec::new();
    let mut rows = 0usize;
    let mut offset = 0u64;
    loop {
        let d = match reader.read_i32::<LittleEndian>() {
            Ok(d) => d,
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        };
        offset += 4;
        if d <= 0 {
            return Err(data_err(path, FormatErrorKind::BadDimension(d)));
        }
        let d = d as usize;
        match dim {
            Some(expected) if expected != d => {
                return Err(data_err(
                    path,
                    FormatErrorKind::InconsistentDimension { expected, got: d },
                ));
            }
            None => dim = Some(d),
            _ => {}
        }
        for _ in 0..d {
            match reader.read_i32::<LittleEndian>() {
                Ok(v) => data.push(v),
                Err(e) if e.kind() == ErrorKind::UnexpectedEof => {
                    return Err(data_err(path, FormatErrorKind::Truncated { offset }));
                }
                Err(e) => return Err(e.into()),
            }
            offset += 4;
        }
        rows += 1;
    }
    IntMatrix::from_vec(rows, dim.unwrap_or(0), data)
}

pub fn write_ivecs(path: impl AsRef<Path>, m: &IntMatrix) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    for r in 0..m.rows() {
        writer.write_i32::<LittleEndian>(m.cols() as i32)?;
        for &v in m.row(r) {
            writer.write_i32::<LittleEndian>(v)?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Seeded synthetic embeddings with cross-subspace correlations.
///
/// Gaussian samples are scaled per coordinate so the covariance
/// eigenvalues decay geometrically with ratio `anisotropy` (eigenvalue
/// ratio `anisotropy^(n-1)` between the extreme axes), then mixed by a
/// random rotation so the principal axes straddle subspace boundaries
/// and rotation learning has something to recover.
pub fn gen_synthetic(m: usize, n: usize, anisotropy: f64, seed: u64) -> Result<Matrix> {
    if !(anisotropy > 0.0 && anisotropy <= 1.0) {
        return Err(Error::Config(format!(
            "anisotropy must lie in (0, 1], got {anisotropy}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = gaussian_matrix(m, n, &mut rng);
    for r in 0..m {
        for (c, v) in z.row_mut(r).iter_mut().enumerate() {
            *v *= SYNTHETIC_BASE_SCALE * anisotropy.powf(c as f64 / 2.0);
        }
    }
    let q = random_rotation(n, &mut rng);
    z.matmul(&q)
}

/// Base plus query sets drawn from one stream so both share the same
/// covariance structure (the mixing rotation is sampled once).
pub fn gen_synthetic_split(
    m: usize,
    q: usize,
    n: usize,
    anisotropy: f64,
    seed: u64,
) -> Result<(Matrix, Matrix)> {
    let all = gen_synthetic(m + q, n, anisotropy, seed)?;
    Ok((all.row_range(0, m), all.row_range(m, m + q)))
}

// ---------------------------------------------------------------------
// CSV formats. Columns are fixed: train traces are
// `iter,distortion,seconds`, bench records are
// `method,n,seconds_per_step,trials`. Floats are written in Rust's
// shortest round-trip form so parse-back is exact.

pub fn write_train_csv(path: impl AsRef<Path>, trace: &DistortionTrace) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iter,distortion,seconds")?;
    for row in trace.rows() {
        writeln!(w, "{},{},{:.6}", row.iter, row.distortion, row.seconds)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a train-trace CSV back into `(iter, distortion, seconds)`
/// triples; the round trip partner of [`write_train_csv`].
pub fn read_train_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, f64, f64)>> {
    let path = path.as_ref();
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line != "iter,distortion,seconds" {
                return Err(Error::Config(format!("unexpected CSV header: {line}")));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Config(format!("malformed CSV row: {line}")));
        }
        let iter: usize =
            fields[0].parse().map_err(|e| Error::Config(format!("bad iter: {e}")))?;
        let distortion: f64 =
            fields[1].parse().map_err(|e| Error::Config(format!("bad distortion: {e}")))?;
        let seconds: f64 =
            fields[2].parse().map_err(|e| Error::Config(format!("bad seconds: {e}")))?;
        rows.push((iter, distortion, seconds));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opq::TraceRow;
    use rand::Rng;
    use tempfile::tempdir;

    #[test]
    fn documented_fvecs_example_decodes() {
        // 02 00 00 00 | 00 00 80 3F | 00 00 00 40 -> one vector (1.0, 2.0)
        let dir = tempdir().unwrap();
        let path = dir.path().join("one.fvecs");
        std::fs::write(
            &path,
            [0x02, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40],
        )
        .unwrap();
        let m = read_fvecs(&path).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 2));
        assert_eq!(m.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn empty_file_is_zero_by_zero() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.fvecs");
        std::fs::write(&path, []).unwrap();
        let m = read_fvecs(&path).unwrap();
        assert_eq!((m.rows(), m.cols()), (0, 0));
    }

    #[test]
    fn truncated_record_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("trunc.fvecs");
        // d=2 but only one float present.
        std::fs::write(&path, [0x02, 0, 0, 0, 0, 0, 0x80, 0x3F]).unwrap();
        match read_fvecs(&path) {
            Err(Error::DataFormat { kind: FormatErrorKind::Truncated { .. }, .. }) => {}
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_dimension_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("mixed.fvecs");
        let mut bytes = Vec::new();
        bytes.extend([1, 0, 0, 0]);
        bytes.extend(1.0f32.to_le_bytes());
        bytes.extend([2, 0, 0, 0]);
        bytes.extend(1.0f32.to_le_bytes());
        bytes.extend(2.0f32.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        match read_fvecs(&path) {
            Err(Error::DataFormat {
                kind: FormatErrorKind::InconsistentDimension { expected: 1, got: 2 },
                ..
            }) => {}
            other => panic!("expected inconsistency error, got {other:?}"),
        }
    }

    #[test]
    fn nonpositive_dimension_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.fvecs");
        std::fs::write(&path, (-3i32).to_le_bytes()).unwrap();
        match read_fvecs(&path) {
            Err(Error::DataFormat { kind: FormatErrorKind::BadDimension(-3), .. }) => {}
            other => panic!("expected bad-dimension error, got {other:?}"),
        }
    }

    #[test]
    fn fvecs_roundtrip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        // f32-representable values: widen from f32 draws.
        let mut m = Matrix::zeros(100, 32);
        for r in 0..100 {
            for v in m.row_mut(r) {
                *v = rng.random_range(-100.0f32..100.0f32) as f64;
            }
        }
        let dir = tempdir().unwrap();
        let path = dir.path().join("round.fvecs");
        write_fvecs(&path, &m).unwrap();
        let back = read_fvecs(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn ivecs_roundtrip() {
        let gt = IntMatrix::from_vec(3, 2, vec![0, 5, 1, 4, 2, 3]).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("gt.ivecs");
        write_ivecs(&path, &gt).unwrap();
        assert_eq!(read_ivecs(&path).unwrap(), gt);
    }

    #[test]
    fn synthetic_is_deterministic_and_anisotropic() {
        let a = gen_synthetic(2000, 8, 0.5, 7).unwrap();
        let b = gen_synthetic(2000, 8, 0.5, 7).unwrap();
        assert_eq!(a, b);
        assert!(gen_synthetic(10, 4, 0.0, 1).is_err());
        assert!(gen_synthetic(10, 4, 1.5, 1).is_err());

        // Covariance eigenvalue spread approximates anisotropy^(n-1).
        // The extreme singular values of the sample matrix estimate the
        // extreme sqrt-eigenvalues of the covariance.
        let n = 8;
        let mut cov = Matrix::zeros(n, n);
        let m = a.rows() as f64;
        for r in 0..a.rows() {
            let row = a.row(r);
            for i in 0..n {
                for j in 0..n {
                    cov[(i, j)] += row[i] * row[j] / m;
                }
            }
        }
        let svd = crate::svd::svd(&cov).unwrap();
        let ratio = svd.s[n - 1] / svd.s[0];
        let expected = 0.5f64.powi((n - 1) as i32);
        assert!(
            ratio > expected * 0.4 && ratio < expected * 2.5,
            "eigenvalue ratio {ratio} vs expected {expected}"
        );
    }

    #[test]
    fn isotropic_setting_keeps_axes_balanced() {
        let a = gen_synthetic(3000, 6, 1.0, 3).unwrap();
        let mut var = vec![0.0f64; 6];
        for r in 0..a.rows() {
            for (c, &v) in a.row(r).iter().enumerate() {
                var[c] += v * v / a.rows() as f64;
            }
        }
        let max = var.iter().cloned().fold(0.0, f64::max);
        let min = var.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 1.2, "isotropic variances spread: {var:?}");
    }

    #[test]
    fn train_csv_roundtrip() {
        let mut trace = DistortionTrace::default();
        trace.push(TraceRow { iter: 0, distortion: 1.25, seconds: 0.0 });
        trace.push(TraceRow { iter: 1, distortion: 0.07775476, seconds: 0.125 });
        let dir = tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_train_csv(&path, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("iter,distortion,seconds\n"));
        assert!(text.ends_with('\n'));
        let rows = read_train_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].0, 0);
        assert_eq!(rows[0].1, 1.25);
        assert_eq!(rows[1].1, 0.07775476);
    }
}
