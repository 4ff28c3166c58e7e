//! The linear generator `dvec(ρ̃)/dt = L vec(ρ̃)`.
//!
//! With `A_jk = X_k ∘ Γ_jk` (elementwise, `(A_jk)_{ab} = X_{k,ab} Γ_jk^{ab}`) the
//! four sums of the matrix-element equation collapse to
//!
//! ```text
//! dρ̃/dt = −Σ_jk ( X_j A_jk ρ̃ − X_j ρ̃ A_jkᵀ − A_jk ρ̃ X_j + ρ̃ A_jkᵀ X_j )
//! ```
//!
//! In the eigenbasis every `X_j` and every rate is real, so `L` is a real
//! matrix acting on the row-major vectorization `α·dim + δ`. Terms are kept
//! only between pairs of the same resonance class.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};

use super::{RateTable, ResonanceClasses};
use crate::dynamics::DensityMatrix;
use crate::linalg::{c, CMatrix};
use crate::spin_chain::{Basis, EigenSystem, Network, OperatorMatrix};
use crate::{Error, Result};

/// Singular values and decay rates below `NULL_TOL·‖L‖` count as zero.
pub const NULL_TOL: f64 = 1e-12;

/// Secular interaction-picture generator.
#[derive(Debug, Clone)]
pub struct Generator {
    pub dim: usize,
    /// `dim² × dim²`, row-major vectorization.
    pub matrix: DMatrix<f64>,
    pub energies: Vec<f64>,
    pub classes: ResonanceClasses,
    /// Nonzero entries kept by the secular filter.
    pub retained: usize,
    /// Nonzero entries dropped by the secular filter.
    pub discarded: usize,
}

impl Generator {
    /// Maximum absolute column sum.
    pub fn norm(&self) -> f64 {
        self.matrix
            .column_iter()
            .map(|col| col.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `L(ρ)` for a matrix in the eigenbasis.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d, d);
        for r in 0..d * d {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for s in 0..d * d {
                let l = self.matrix[(r, s)];
                if l != 0.0 {
                    acc += rho[(s / d, s % d)] * l;
                }
            }
            out[(r / d, r % d)] = acc;
        }
        out
    }

    /// Sub-matrix of one resonance class.
    pub fn class_block(&self, class: usize) -> (Vec<usize>, DMatrix<f64>) {
        let idx = self.classes.indices(class);
        let block = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.matrix[(idx[a], idx[b])]);
        (idx, block)
    }

    /// Eigenvalue real parts of every class block, sorted ascending by
    /// magnitude.
    pub fn decay_spectrum(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for class in 0..self.classes.len() {
            let (_, block) = self.class_block(class);
            if block.nrows() == 1 {
                out.push(block[(0, 0)]);
            } else {
                out.extend(block_eigenvalues_re(block));
            }
        }
        out.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        out
    }

    /// Smallest nonzero decay rate, ignoring modes below the null threshold.
    pub fn slowest_rate(&self) -> Option<f64> {
        let floor = NULL_TOL * self.norm();
        self.decay_spectrum()
            .into_iter()
            .map(f64::abs)
            .find(|&r| r > floor)
    }
}

/// Real parts of the eigenvalues of one class block. The block is scaled to
/// unit max entry and the Schur iteration is bounded: the zero class can
/// hold rates nine decades apart, where an unbounded machine-epsilon
/// deflation test stalls.
fn block_eigenvalues_re(block: DMatrix<f64>) -> Vec<f64> {
    let scale = block.amax();
    if scale == 0.0 {
        return vec![0.0; block.nrows()];
    }
    let scaled = &block / scale;
    for eps in [1e-15, 1e-14, 1e-13, 1e-12] {
        if let Some(schur) = Schur::try_new(scaled.clone(), eps, 2000) {
            return schur.complex_eigenvalues().iter().map(|z| z.re * scale).collect();
        }
    }
    block.complex_eigenvalues().iter().map(|z| z.re).collect()
}

fn check_ops(es: &EigenSystem, rates: &RateTable, ops: &[OperatorMatrix]) -> Result<Vec<DMatrix<f64>>> {
    let dim = es.dim();
    let n = es.spec.n_sites;
    if rates.dim != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: rates.dim,
        });
    }
    if rates.n_sites != n || ops.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: if rates.n_sites != n { rates.n_sites } else { ops.len() },
        });
    }
    ops.iter()
        .map(|op| {
            if op.basis != Basis::Eigen {
                return Err(Error::BasisMismatch { expected: "eigen" });
            }
            if op.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: op.dim(),
                });
            }
            if op.matrix.iter().any(|z| z.im.abs() > 1e-12) {
                return Err(Error::InvalidChain(
                    "interaction operators must be real in the eigenbasis".into(),
                ));
            }
            Ok(op.matrix.map(|z| z.re))
        })
        .collect()
}

/// Full (unfiltered) dissipator in the eigenbasis, without the `−i[H, ·]`
/// part.
pub fn dissipator(es: &EigenSystem, rates: &RateTable, ops: &[OperatorMatrix]) -> Result<DMatrix<f64>> {
    let xs = check_ops(es, rates, ops)?;
    let dim = es.dim();
    let n = es.spec.n_sites;
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut l = DMatrix::<f64>::zeros(dim * dim, dim * dim);
    for j in 1..=n {
        let xj = &xs[j - 1];
        for k in 1..=n {
            let xk = &xs[k - 1];
            let a = DMatrix::from_fn(dim, dim, |p, q| xk[(p, q)] * rates.get(j, k, p, q));
            if a.iter().all(|&v| v == 0.0) {
                continue;
            }
            let xa = xj * &a;
            // vec(PρQ) = (P ⊗ Qᵀ) vec(ρ) for row-major vectorization.
            l += xj.kronecker(&a);
            l += a.kronecker(xj);
            l -= xa.kronecker(&id);
            l -= id.kronecker(&xa);
        }
    }
    Ok(l)
}

/// Secular generator: the dissipator with entries between different
/// resonance classes removed.
pub fn build_generator(
    es: &EigenSystem,
    rates: &RateTable,
    classes: &ResonanceClasses,
    ops: &[OperatorMatrix],
) -> Result<Generator> {
    let dim = es.dim();
    if classes.dim != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: classes.dim,
        });
    }
    let mut matrix = dissipator(es, rates, ops)?;
    let (mut retained, mut discarded) = (0, 0);
    for r in 0..dim * dim {
        for s in 0..dim * dim {
            if matrix[(r, s)] == 0.0 {
                continue;
            }
            if classes.resonant((r / dim, r % dim), (s / dim, s % dim)) {
                retained += 1;
            } else {
                matrix[(r, s)] = 0.0;
                discarded += 1;
            }
        }
    }
    Ok(Generator {
        dim,
        matrix,
        energies: es.energies.clone(),
        classes: classes.clone(),
        retained,
        discarded,
    })
}

/// `Γ̄_{αδ} = −Re L[(αδ),(αδ)]`, the self-decay rate of `ρ̃_{αδ}`.
pub fn decoherence_rate(gen: &Generator, alpha: usize, delta: usize) -> Result<f64> {
    let d = gen.dim;
    if alpha >= d || delta >= d {
        return Err(Error::Dimension {
            expected: d,
            found: alpha.max(delta) + 1,
        });
    }
    if alpha == delta {
        return Err(Error::InvalidState(format!(
            "decoherence rate needs two distinct states, got ({alpha}, {delta})"
        )));
    }
    let i = alpha * d + delta;
    Ok(-gen.matrix[(i, i)])
}

/// Classical rate matrix over populations: `W[α][β]` is the rate of `β → α`
/// for `α ≠ β` and `W[α][α]` minus the total outflow.
pub fn relaxation_rates(gen: &Generator) -> DMatrix<f64> {
    let d = gen.dim;
    DMatrix::from_fn(d, d, |a, b| gen.matrix[(a * d + a, b * d + b)])
}

/// Population transition network: an edge wherever either direction of the
/// rate exceeds `rel_threshold` times the largest off-diagonal rate.
pub fn rate_network(gen: &Generator, rel_threshold: f64) -> Network {
    let w = relaxation_rates(gen);
    let d = gen.dim;
    let mut max: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            if a != b {
                max = max.max(w[(a, b)].abs());
            }
        }
    }
    let mut edges = Vec::new();
    if max > 0.0 {
        for a in 0..d {
            for b in a + 1..d {
                if w[(a, b)].abs().max(w[(b, a)].abs()) > rel_threshold * max {
                    edges.push((a, b));
                }
            }
        }
    }
    Network::from_edges(d, edges)
}

/// Long-time limit of the generator.
///
/// Without an initial state the null space must be one-dimensional and the
/// normalized null vector is returned. With an initial state the spectral
/// projector onto the null space is applied to it, which gives the per
/// component thermal balance weighted by the initial component populations
/// (and any conserved coherences) for disconnected networks.
pub fn stationary_state(gen: &Generator, initial: Option<&DensityMatrix>) -> Result<DensityMatrix> {
    let d = gen.dim;
    let n = d * d;
    let scale = gen.norm();
    if let Some(rho) = initial {
        if rho.basis != Basis::Eigen {
            return Err(Error::BasisMismatch { expected: "eigen" });
        }
        if rho.dim() != d {
            return Err(Error::Dimension {
                expected: d,
                found: rho.dim(),
            });
        }
    }
    if scale == 0.0 {
        return match initial {
            Some(rho) => Ok(rho.clone()),
            None => Err(Error::DegenerateNullSpace { dim: n }),
        };
    }
    let svd = gen.matrix.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    let null: Vec<usize> = (0..n)
        .filter(|&i| svd.singular_values[i] <= NULL_TOL * scale)
        .collect();
    if null.is_empty() {
        return Err(Error::InvalidState(
            "generator has no stationary state (trivial null space)".into(),
        ));
    }
    let right = DMatrix::from_fn(n, null.len(), |r, c| v_t[(null[c], r)]);
    let left = DMatrix::from_fn(n, null.len(), |r, c| u[(r, null[c])]);

    let vec = match initial {
        None => {
            if null.len() != 1 {
                return Err(Error::DegenerateNullSpace { dim: null.len() });
            }
            let v = right.column(0).into_owned();
            let tr: f64 = (0..d).map(|a| v[a * d + a]).sum();
            if tr.abs() < 1e-300 {
                return Err(Error::InvalidState("null vector has zero trace".into()));
            }
            v.map(|x| c(x / tr))
        }
        Some(rho) => {
            let gram = left.transpose() * &right;
            let inv = gram.try_inverse().ok_or_else(|| {
                Error::InvalidState("zero eigenvalue of the generator is not semisimple".into())
            })?;
            let proj = &right * inv * left.transpose();
            let re = DVector::from_fn(n, |i, _| rho.matrix[(i / d, i % d)].re);
            let im = DVector::from_fn(n, |i, _| rho.matrix[(i / d, i % d)].im);
            let (pr, pi) = (&proj * re, &proj * im);
            DVector::from_fn(n, |i, _| num_complex::Complex64::new(pr[i], pi[i]))
        }
    };
    let m = CMatrix::from_fn(d, d, |a, b| vec[a * d + b]);
    let m = (&m + m.adjoint()) * c(0.5);
    DensityMatrix::new(m, Basis::Eigen)
}
