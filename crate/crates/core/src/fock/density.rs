use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NdpoError, Result};

/// Two-mode density operator on the truncated basis |na, nb⟩ (index na·n_cut + nb),
/// stored column-stacked: ρ_ij at i + D·j.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_cut: usize,
    data: Vec<Complex64>,
}

/// Tolerances for [`DensityMatrix::validity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityTolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub negativity: f64,
}

impl Default for ValidityTolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            trace: 1e-8,
            negativity: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub ok: bool,
}

impl DensityMatrix {
    pub fn from_vec(n_cut: usize, data: Vec<Complex64>) -> Result<Self> {
        let d = n_cut * n_cut;
        if data.len() != d * d {
            return Err(NdpoError::Config(format!(
                "density data has {} entries, expected {} for n_cut = {n_cut}",
                data.len(),
                d * d
            )));
        }
        Ok(Self { n_cut, data })
    }

    pub fn fock(n_cut: usize, na: usize, nb: usize) -> Result<Self> {
        if na >= n_cut || nb >= n_cut {
            return Err(NdpoError::Config(format!(
                "Fock state |{na},{nb}⟩ lies outside n_cut = {n_cut}"
            )));
        }
        let d = n_cut * n_cut;
        let mut data = vec![Complex64::default(); d * d];
        let i = na * n_cut + nb;
        data[i + d * i] = Complex64::new(1.0, 0.0);
        Ok(Self { n_cut, data })
    }

    pub fn vacuum(n_cut: usize) -> Self {
        Self::fock(n_cut, 0, 0).expect("vacuum fits any cutoff")
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn from_pure(n_cut: usize, psi: &[Complex64]) -> Result<Self> {
        let d = n_cut * n_cut;
        if psi.len() != d {
            return Err(NdpoError::Config(format!(
                "state vector has length {}, expected {d}",
                psi.len()
            )));
        }
        let mut data = vec![Complex64::default(); d * d];
        for j in 0..d {
            for i in 0..d {
                data[i + d * j] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self { n_cut, data })
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    /// Hilbert-space dimension n_cut².
    pub fn dim(&self) -> usize {
        self.n_cut * self.n_cut
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + self.dim() * j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i + d * i]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.data[i + d * j] - self.data[j + d * i].conj()).norm());
            }
        }
        worst
    }

    pub fn hermitize(&mut self) {
        hermitize_slice(self.dim(), &mut self.data);
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_column_slice(d, d, &self.data)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.to_dmatrix();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn validity(&self, tol: &ValidityTolerances) -> Validity {
        let hermiticity_error = self.hermiticity_error();
        let trace_error = (self.trace() - 1.0).norm();
        let min_eigenvalue = self.eigenvalues().first().copied().unwrap_or(0.0);
        Validity {
            hermiticity_error,
            trace_error,
            min_eigenvalue,
            ok: hermiticity_error <= tol.hermiticity
                && trace_error <= tol.trace
                && min_eigenvalue >= -tol.negativity,
        }
    }

    /// Population of states with either mode in the top level n_cut − 1.
    pub fn top_layer_population(&self) -> f64 {
        let n = self.n_cut;
        let d = self.dim();
        let mut p = 0.0;
        for na in 0..n {
            for nb in 0..n {
                if na == n - 1 || nb == n - 1 {
                    let i = na * n + nb;
                    p += self.data[i + d * i].re;
                }
            }
        }
        p
    }

    /// Reduced state of mode a (trace over b), as an n_cut × n_cut matrix.
    pub fn reduced_a(&self) -> DMatrix<Complex64> {
        let n = self.n_cut;
        DMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.get(i * n + k, j * n + k))
                .sum::<Complex64>()
        })
    }

    /// Writes `u64 dimension` followed by the matrix in row-major order as
    /// (re, im) pairs, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.dim();
        w.write_all(&(d as u64).to_le_bytes())?;
        for i in 0..d {
            for j in 0..d {
                let z = self.get(i, j);
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let d = u64::from_le_bytes(word) as usize;
        let n_cut = (d as f64).sqrt().round() as usize;
        if n_cut * n_cut != d {
            return Err(NdpoError::Parse(format!(
                "dimension {d} is not the square of a cutoff"
            )));
        }
        let mut data = vec![Complex64::default(); d * d];
        for i in 0..d {
            for j in 0..d {
                r.read_exact(&mut word)?;
                let re = f64::from_le_bytes(word);
                r.read_exact(&mut word)?;
                let im = f64::from_le_bytes(word);
                data[i + d * j] = Complex64::new(re, im);
            }
        }
        Ok(Self { n_cut, data })
    }
}

pub(crate) fn hermitize_slice(d: usize, data: &mut [Complex64]) {
    for j in 0..d {
        for i in 0..j {
            let avg = 0.5 * (data[i + d * j] + data[j + d * i].conj());
            data[i + d * j] = avg;
            data[j + d * i] = avg.conj();
        }
        let z = &mut data[j + d * j];
        z.im = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_is_valid() {
        let v = DensityMatrix::vacuum(3).validity(&ValidityTolerances::default());
        assert!(v.ok);
        assert!(v.min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn binary_round_trip() {
        let n = 3;
        let psi: Vec<Complex64> = (0..9)
            .map(|k| Complex64::new((k as f64).cos(), (0.3 * k as f64).sin()))
            .collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<_> = psi.iter().map(|z| z / norm).collect();
        let rho = DensityMatrix::from_pure(n, &psi).unwrap();
        let mut buf = Vec::new();
        rho.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 81 * 16);
        assert_eq!(&buf[..8], &9u64.to_le_bytes());
        // Row-major: second pair is element (0, 1).
        let re01 = f64::from_le_bytes(buf[24..32].try_into().unwrap());
        assert_eq!(re01, rho.get(0, 1).re);
        let back = DensityMatrix::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn partial_trace_and_tail() {
        let rho = DensityMatrix::fock(3, 2, 1).unwrap();
        let ra = rho.reduced_a();
        assert_eq!(ra[(2, 2)], Complex64::new(1.0, 0.0));
        assert_eq!(rho.top_layer_population(), 1.0);
        assert_eq!(DensityMatrix::vacuum(3).top_layer_population(), 0.0);
    }

    #[test]
    fn hermitize_fixes_asymmetry() {
        let mut data = vec![Complex64::default(); 16];
        data[0] = Complex64::new(1.0, 0.1);
        data[1] = Complex64::new(0.2, 0.3);
        let mut rho = DensityMatrix::from_vec(2, data).unwrap();
        assert!(rho.hermiticity_error() > 0.1);
        rho.hermitize();
        assert_eq!(rho.hermiticity_error(), 0.0);
    }
}
