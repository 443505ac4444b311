use super::config::{FockConfig, PumpConvention};
use super::ops::{commutator_terms, superoperator, CsrMatrix, Scalar, SparseOp, SuperTerm};
use crate::error::Result;
use crate::params::ModelParams;

/// Ladder operators of the truncated two-mode space, basis index na·n_cut + nb.
#[derive(Debug, Clone)]
pub struct TwoModeOps {
    pub n_cut: usize,
    pub a: SparseOp,
    pub b: SparseOp,
    pub ad: SparseOp,
    pub bd: SparseOp,
}

impl TwoModeOps {
    pub fn new(n_cut: usize) -> Self {
        let id = SparseOp::identity(n_cut);
        let a1 = SparseOp::destroy(n_cut);
        let a = a1.kron(&id);
        let b = id.kron(&a1);
        Self {
            n_cut,
            ad: a.transpose(),
            bd: b.transpose(),
            a,
            b,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_cut * self.n_cut
    }

    pub fn identity(&self) -> SparseOp {
        SparseOp::identity(self.dim())
    }
}

/// Terms of one squeezed-bath block for a mode with ladder operator `a`:
/// γ(N+1)/2 [2aρa† − a†aρ − ρa†a] + γN/2 [2a†ρa − aa†ρ − ρaa†]
/// + γM/2 [2a†ρa† + 2aρa − a†²ρ − ρa†² − a²ρ − ρa²].
pub(crate) fn squeezed_bath_terms(gamma: f64, n: f64, m: f64, a: &SparseOp) -> Vec<SuperTerm> {
    let ad = a.transpose();
    let id = SparseOp::identity(a.dim());
    let ada = ad.matmul(a);
    let aad = a.matmul(&ad);
    let a2 = a.matmul(a);
    let ad2 = ad.matmul(&ad);
    let g1 = gamma * (n + 1.0) / 2.0;
    let g2 = gamma * n / 2.0;
    let g3 = gamma * m / 2.0;
    vec![
        SuperTerm::new(2.0 * g1, a.clone(), ad.clone()),
        SuperTerm::new(-g1, ada.clone(), id.clone()),
        SuperTerm::new(-g1, id.clone(), ada),
        SuperTerm::new(2.0 * g2, ad.clone(), a.clone()),
        SuperTerm::new(-g2, aad.clone(), id.clone()),
        SuperTerm::new(-g2, id.clone(), aad),
        SuperTerm::new(2.0 * g3, ad.clone(), ad),
        SuperTerm::new(2.0 * g3, a.clone(), a.clone()),
        SuperTerm::new(-g3, ad2.clone(), id.clone()),
        SuperTerm::new(-g3, id.clone(), ad2),
        SuperTerm::new(-g3, a2.clone(), id.clone()),
        SuperTerm::new(-g3, id, a2),
    ]
}

/// Generator of the two-mode master equation on column-stacked density
/// matrices, ρ_ij at i + D·j with D = n_cut².
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub params: ModelParams,
    pub cfg: FockConfig,
    pub convention: PumpConvention,
    matrix: CsrMatrix,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.cfg.hilbert_dim()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn apply<T: Scalar>(&self, rho: &[T], out: &mut [T]) {
        self.matrix.matvec(rho, out);
    }
}

pub fn build_liouvillian(params: &ModelParams, cfg: &FockConfig) -> Result<Liouvillian> {
    build_liouvillian_with(params, cfg, PumpConvention::default())
}

/// Assembles the generator term by term; asymmetric damping rates are accepted.
pub fn build_liouvillian_with(
    params: &ModelParams,
    cfg: &FockConfig,
    convention: PumpConvention,
) -> Result<Liouvillian> {
    cfg.validate()?;
    let ops = TwoModeOps::new(cfg.n_cut);
    let res = params.reservoir();
    let pump = ops.a.matmul(&ops.b).minus(&ops.ad.matmul(&ops.bd));
    let mut terms = commutator_terms(convention.sign() * params.kappa_gamma0, &pump);
    terms.extend(squeezed_bath_terms(params.gamma_a, res.n, res.m, &ops.a));
    terms.extend(squeezed_bath_terms(params.gamma_b, res.n, res.m, &ops.b));
    let matrix = superoperator(ops.dim(), &terms);
    log::debug!(
        "liouvillian n_cut={} dim={} nnz={}",
        cfg.n_cut,
        matrix.dim(),
        matrix.nnz()
    );
    Ok(Liouvillian {
        params: *params,
        cfg: *cfg,
        convention,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ops::dissipator_terms;

    #[test]
    fn bath_block_is_a_dissipator() {
        // The printed bath block equals γ D[cosh r·a + sinh r·a†], also after truncation.
        let n_cut = 5;
        let r: f64 = 0.7;
        let a = SparseOp::destroy(n_cut);
        let l = a.scale(r.cosh()).plus(&a.transpose().scale(r.sinh()));
        let res = crate::params::reservoir_stats(r).unwrap();
        let printed = superoperator(n_cut, &squeezed_bath_terms(1.3, res.n, res.m, &a));
        let lindblad = superoperator(n_cut, &dissipator_terms(1.3, &l));
        for i in 0..n_cut * n_cut {
            for j in 0..n_cut * n_cut {
                assert!((printed.get(i, j) - lindblad.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_cutoff_rejected() {
        let p = ModelParams::symmetric(1.0, 0.1, 0.0).unwrap();
        let cfg = FockConfig {
            n_cut: 1,
            ..FockConfig::default()
        };
        assert!(build_liouvillian(&p, &cfg).is_err());
    }
}
