//! Dense square complex matrices on the quantum torus `H_N`.
//!
//! Entries are stored row-major in the position basis `e_0 … e_{N−1}`.
//! The binary file layout is
//!
//! ```text
//! magic  b"QMOP"          4 bytes
//! N      u64 LE           8 bytes
//! role   u32 LE           4 bytes
//! data   (re f64 LE, im f64 LE) × count
//! ```
//!
//! with `count = N²` for operators and `count = N` for stored spectra.

use std::io::{Read, Write};
use std::ops::{Index, IndexMut};

use matrixmultiply::{zgemm, CGemmOption};
use num_complex::Complex64;

use crate::{Error, Result};

pub const FILE_MAGIC: [u8; 4] = *b"QMOP";
const HEADER_LEN: usize = 16;

/// What a binary blob holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u32)]
pub enum Role {
    Operator = 0,
    Propagator = 1,
    InversePropagator = 2,
    Spectrum = 3,
}

impl Role {
    fn from_tag(tag: u32) -> Result<Self> {
        Ok(match tag {
            0 => Role::Operator,
            1 => Role::Propagator,
            2 => Role::InversePropagator,
            3 => Role::Spectrum,
            _ => return Err(Error::CorruptFile(format!("unknown role tag {tag}"))),
        })
    }

    fn payload_len(self, dim: usize) -> usize {
        match self {
            Role::Spectrum => dim,
            _ => dim * dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op[(i, i)] = d;
        }
        op
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                data.push(f(j, k));
            }
        }
        Self { dim, data }
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::arg(format!(
                "expected {} entries for a {dim}×{dim} operator, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Build from rows of `(re, im)` pairs. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "rows must be square");
        Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `h = 1/N`.
    pub fn h(&self) -> f64 {
        1.0 / self.dim as f64
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for j in 0..n {
            for k in 0..n {
                out.data[k * n + j] = self.data[j * n + k].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseOperator) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        if n == 0 {
            return out;
        }
        let stride = n as isize;
        // SAFETY: Complex64 is repr(C) {re, im}, layout-identical to [f64; 2];
        // all three buffers hold n×n row-major entries.
        unsafe {
            zgemm(
                CGemmOption::Standard,
                CGemmOption::Standard,
                n,
                n,
                n,
                [1.0, 0.0],
                self.data.as_ptr() as *const [f64; 2],
                stride,
                1,
                other.data.as_ptr() as *const [f64; 2],
                stride,
                1,
                [0.0, 0.0],
                out.data.as_mut_ptr() as *mut [f64; 2],
                stride,
                1,
            );
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|j| self.row(j).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[Complex64]) -> Self {
        assert_eq!(d.len(), self.dim);
        let mut out = self.clone();
        for (j, &dj) in d.iter().enumerate() {
            for x in &mut out.data[j * self.dim..(j + 1) * self.dim] {
                *x *= dj;
            }
        }
        out
    }

    /// `self · diag(d)`.
    pub fn scale_cols(&self, d: &[Complex64]) -> Self {
        assert_eq!(d.len(), self.dim);
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.dim.max(1)) {
            for (x, dk) in row.iter_mut().zip(d) {
                *x *= dk;
            }
        }
        out
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn sub(&self, other: &DenseOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &DenseOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `selfⁿ` by repeated multiplication.
    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Self::identity(self.dim);
        for _ in 0..n {
            acc = acc.matmul(self);
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// `‖A − A†‖_F / ‖A‖_F` (0 for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                acc += (self.data[j * n + k] - self.data[k * n + j].conj()).norm_sqr();
            }
        }
        let scale = self.frobenius_norm();
        if scale == 0.0 {
            0.0
        } else {
            acc.sqrt() / scale
        }
    }

    /// Largest entry strictly below the first subdiagonal.
    pub fn below_hessenberg(&self) -> f64 {
        let n = self.dim;
        let mut m: f64 = 0.0;
        for j in 2..n {
            for k in 0..j - 1 {
                m = m.max(self.data[j * n + k].norm());
            }
        }
        m
    }

    pub fn write_to(&self, role: Role, w: &mut impl Write) -> Result<()> {
        assert_ne!(role, Role::Spectrum, "use write_values for spectra");
        write_blob(w, self.dim, role, &self.data)
    }

    pub fn read_from(r: &mut impl Read) -> Result<(Self, Role)> {
        let (dim, role, data) = read_blob(r)?;
        if role == Role::Spectrum {
            return Err(Error::CorruptFile("expected an operator, found a spectrum".into()));
        }
        Ok((Self { dim, data }, role))
    }

    pub fn to_bytes(&self, role: Role) -> Vec<u8> {
        let mut buf = Vec::with_capacity(HEADER_LEN + 16 * self.data.len());
        self.write_to(role, &mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, Role)> {
        Self::read_from(&mut &bytes[..])
    }
}

impl Index<(usize, usize)> for DenseOperator {
    type Output = Complex64;

    #[inline]
    fn index(&self, (j, k): (usize, usize)) -> &Complex64 {
        &self.data[j * self.dim + k]
    }
}

impl IndexMut<(usize, usize)> for DenseOperator {
    #[inline]
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.dim + k]
    }
}

fn write_blob(w: &mut impl Write, dim: usize, role: Role, data: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * data.len());
    buf.extend_from_slice(&FILE_MAGIC);
    buf.extend_from_slice(&(dim as u64).to_le_bytes());
    buf.extend_from_slice(&(role as u32).to_le_bytes());
    for z in data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_blob(r: &mut impl Read) -> Result<(usize, Role, Vec<Complex64>)> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::CorruptFile(format!("short header: {e}")))?;
    if header[..4] != FILE_MAGIC {
        return Err(Error::CorruptFile("bad magic".into()));
    }
    let dim = u64::from_le_bytes(header[4..12].try_into().unwrap()) as usize;
    let role = Role::from_tag(u32::from_le_bytes(header[12..16].try_into().unwrap()))?;
    let count = role.payload_len(dim);
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != 16 * count {
        return Err(Error::CorruptFile(format!(
            "expected {} payload bytes, found {}",
            16 * count,
            payload.len()
        )));
    }
    let data: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::CorruptFile("non-finite entries".into()));
    }
    Ok((dim, role, data))
}

/// Serialize a list of eigenvalues with the operator header layout.
pub fn write_values(w: &mut impl Write, values: &[Complex64]) -> Result<()> {
    write_blob(w, values.len(), Role::Spectrum, values)
}

pub fn read_values(r: &mut impl Read) -> Result<Vec<Complex64>> {
    let (_, role, data) = read_blob(r)?;
    if role != Role::Spectrum {
        return Err(Error::CorruptFile("expected a spectrum".into()));
    }
    Ok(data)
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_matrix(n: usize, seed: u64) -> DenseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseOperator::from_fn(n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    pub fn random_hermitian(n: usize, seed: u64) -> DenseOperator {
        let a = random_matrix(n, seed);
        a.add(&a.adjoint()).scaled(Complex64::new(0.5, 0.0))
    }

    pub fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    fn naive_matmul(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
        let n = a.dim();
        DenseOperator::from_fn(n, |j, k| (0..n).map(|l| a[(j, l)] * b[(l, k)]).sum())
    }

    #[test]
    fn matmul_matches_naive() {
        let a = random_matrix(13, 1);
        let b = random_matrix(13, 2);
        let d = a.matmul(&b).sub(&naive_matmul(&a, &b)).max_abs();
        assert!(d < 1e-14);
    }

    #[test]
    fn identity_and_trace() {
        let i = DenseOperator::identity(5);
        assert_eq!(i.trace(), c(5.0, 0.0));
        let a = random_matrix(5, 3);
        assert_eq!(a.matmul(&i), a);
        assert!(i.hermitian_defect() == 0.0);
    }

    #[test]
    fn diagonal_scaling() {
        let a = random_matrix(4, 4);
        let d = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.0), c(0.5, 0.5)];
        let dm = DenseOperator::from_diagonal(&d);
        assert!(a.scale_rows(&d).sub(&dm.matmul(&a)).max_abs() < 1e-15);
        assert!(a.scale_cols(&d).sub(&a.matmul(&dm)).max_abs() < 1e-15);
    }

    #[test]
    fn binary_layout() {
        let a = DenseOperator::from_rows(&[vec![c(1.0, 2.0), c(3.0, 4.0)], vec![c(5.0, 6.0), c(7.0, 8.0)]]);
        let bytes = a.to_bytes(Role::Propagator);
        assert_eq!(&bytes[..4], b"QMOP");
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 16 + 4 * 16);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 2.0);
        let (b, role) = DenseOperator::from_bytes(&bytes).unwrap();
        assert_eq!((b, role), (a, Role::Propagator));
    }

    #[test]
    fn corrupt_blobs_are_rejected() {
        let a = random_matrix(3, 5);
        let mut bytes = a.to_bytes(Role::Operator);
        assert!(DenseOperator::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(DenseOperator::from_bytes(&bytes).is_err());
        assert!(DenseOperator::from_bytes(&[]).is_err());
    }

    #[test]
    fn spectrum_blob() {
        let v = vec![c(0.5, -0.25), c(1.0, 0.0)];
        let mut buf = Vec::new();
        write_values(&mut buf, &v).unwrap();
        assert_eq!(read_values(&mut &buf[..]).unwrap(), v);
        assert!(DenseOperator::from_bytes(&buf).is_err());
    }

    proptest::proptest! {
        #[test]
        fn blob_roundtrip(n in 1usize..6, seed in 0u64..1000) {
            let a = random_matrix(n, seed);
            let (b, _) = DenseOperator::from_bytes(&a.to_bytes(Role::Operator)).unwrap();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
