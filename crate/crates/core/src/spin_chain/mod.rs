//! Heisenberg SQUID ring: Hamiltonian, labelled eigenbasis, interaction
//! operators and their frequency components.
//!
//! Each site is a qubit in the `|0⟩ = (|↑⟩+|↓⟩)/√2`, `|1⟩ = (|↑⟩−|↓⟩)/√2`
//! basis, i.e. the eigenbasis of `σ^x`. The computational basis index puts
//! site 1 in the most significant bit. In this basis
//!
//! * `σ^x_j` is diagonal (`+1` on `|0⟩`, `−1` on `|1⟩`),
//! * `σ^z_j` flips bit `j`,
//! * `σ⃗_j·σ⃗_k` is basis independent.
//!
//! The Hamiltonian `H = Σ_j (J σ⃗_j·σ⃗_{j+1} − B σ^x_j)` on a periodic ring
//! therefore conserves the number of `|1⟩` qubits, which gives the quantum
//! number `m = N_0 − N_1`.

mod network;
mod reference;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{self, c, CMatrix, I, ONE, ZERO};
use crate::units::ghz_to_rad_per_ns;
use crate::{Error, Result};

pub use network::{connected_components, transition_network, Network};

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 4;

/// Chain parameters. Energies are angular frequencies in rad/ns (`ħ = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub heisenberg_j: f64,
    pub splitting_b: f64,
    pub periodic: bool,
}

impl ChainSpec {
    pub fn new(n_sites: usize, heisenberg_j: f64, splitting_b: f64) -> Result<Self> {
        let spec = ChainSpec {
            n_sites,
            heisenberg_j,
            splitting_b,
            periodic: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Build from energy scales in GHz: `heisenberg_ghz` is the
    /// singlet–triplet style scale `(l_max − l_min)·J/h` (8J/h for two sites,
    /// 6J/h for three, 12J/h for four) and `splitting_ghz` is `2B/h`.
    pub fn from_ghz(n_sites: usize, heisenberg_ghz: f64, splitting_ghz: f64) -> Result<Self> {
        let scale = heisenberg_scale(n_sites).ok_or(Error::UnsupportedSites(n_sites))?;
        Self::new(
            n_sites,
            ghz_to_rad_per_ns(heisenberg_ghz) / scale,
            ghz_to_rad_per_ns(splitting_ghz) / 2.0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        check_sites(self.n_sites)?;
        if !(self.heisenberg_j > 0.0) {
            return Err(Error::InvalidChain(format!(
                "heisenberg_j must be > 0, got {}",
                self.heisenberg_j
            )));
        }
        if !(self.splitting_b >= 0.0) {
            return Err(Error::InvalidChain(format!(
                "splitting_b must be >= 0, got {}",
                self.splitting_b
            )));
        }
        if !self.periodic {
            return Err(Error::InvalidChain("only periodic chains are supported".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// Spread of the Heisenberg quantum number `l` on a ring of `n` sites, used
/// to convert the GHz scale into `J`.
pub fn heisenberg_scale(n_sites: usize) -> Option<f64> {
    match n_sites {
        2 => Some(8.0),
        3 => Some(6.0),
        4 => Some(12.0),
        _ => None,
    }
}

fn check_sites(n: usize) -> Result<()> {
    if (MIN_SITES..=MAX_SITES).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedSites(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Computational,
    Eigen,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Computational => "computational",
            Basis::Eigen => "eigen",
        }
    }
}

/// Dense operator with the basis it is expressed in.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: CMatrix,
    pub basis: Basis,
    /// 1-based site for single-site interaction operators.
    pub site: Option<usize>,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix, basis: Basis) -> Self {
        OperatorMatrix {
            matrix,
            basis,
            site: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix)
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.matrix[(a, b)]
    }
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, I, -I, ZERO])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

/// `op` acting on 1-based `site`, identity elsewhere.
fn embed(op: &CMatrix, site: usize, n_sites: usize) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let mut out = CMatrix::identity(1, 1);
    for s in 1..=n_sites {
        out = linalg::kron(&out, if s == site { op } else { &id });
    }
    out
}

/// `H = Σ_j (J σ⃗_j·σ⃗_{j+1} − B σ^x_j)` with `σ⃗_{N+1} ≡ σ⃗_1`, in the
/// computational basis. For two sites both bonds `(1,2)` and `(2,1)` are
/// counted.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<OperatorMatrix> {
    check_sites(spec.n_sites)?;
    let n = spec.n_sites;
    let dim = spec.dim();
    let paulis = [pauli_x(), pauli_y(), pauli_z()];
    let mut h = CMatrix::zeros(dim, dim);
    for j in 1..=n {
        let next = j % n + 1;
        for p in &paulis {
            h += embed(p, j, n) * embed(p, next, n) * c(spec.heisenberg_j);
        }
        h -= embed(&paulis[0], j, n) * c(spec.splitting_b);
    }
    Ok(OperatorMatrix::new(h, Basis::Computational))
}

/// `X_j = σ^z_j` in the computational basis (a bit flip on site `j`).
pub fn interaction_operator(spec: &ChainSpec, site: usize) -> Result<OperatorMatrix> {
    check_sites(spec.n_sites)?;
    if site == 0 || site > spec.n_sites {
        return Err(Error::SiteOutOfRange {
            index: site,
            n_sites: spec.n_sites,
        });
    }
    Ok(OperatorMatrix {
        matrix: embed(&pauli_z(), site, spec.n_sites),
        basis: Basis::Computational,
        site: Some(site),
    })
}

/// `J_z = Σ_j X_j` in the computational basis.
pub fn collective_operator(spec: &ChainSpec) -> Result<OperatorMatrix> {
    check_sites(spec.n_sites)?;
    let dim = spec.dim();
    let mut total = CMatrix::zeros(dim, dim);
    for j in 1..=spec.n_sites {
        total += interaction_operator(spec, j)?.matrix;
    }
    Ok(OperatorMatrix::new(total, Basis::Computational))
}

/// Diagonalized chain with a labelled eigenbasis.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub spec: ChainSpec,
    /// `E_α` in rad/ns, indexed by eigenstate label (0-based `ψ_{α+1}`).
    pub energies: Vec<f64>,
    /// Columns are eigenvectors in the computational basis.
    pub basis: CMatrix,
    pub m_numbers: Vec<i32>,
    pub l_numbers: Vec<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `ω_{αβ} = E_β − E_α`: the energy released in the transition `β → α`.
    pub fn omega(&self, alpha: usize, beta: usize) -> f64 {
        self.energies[beta] - self.energies[alpha]
    }

    /// Largest transition frequency magnitude.
    pub fn max_frequency(&self) -> f64 {
        let lo = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Express a computational-basis operator in the eigenbasis.
    pub fn to_eigen(&self, op: &OperatorMatrix) -> OperatorMatrix {
        match op.basis {
            Basis::Eigen => op.clone(),
            Basis::Computational => OperatorMatrix {
                matrix: self.basis.adjoint() * &op.matrix * &self.basis,
                basis: Basis::Eigen,
                site: op.site,
            },
        }
    }

    /// Express an eigenbasis operator in the computational basis.
    pub fn to_computational(&self, op: &OperatorMatrix) -> OperatorMatrix {
        match op.basis {
            Basis::Computational => op.clone(),
            Basis::Eigen => OperatorMatrix {
                matrix: &self.basis * &op.matrix * self.basis.adjoint(),
                basis: Basis::Computational,
                site: op.site,
            },
        }
    }

    /// All interaction operators `X_1 … X_N` in the eigenbasis.
    pub fn interaction_operators(&self) -> Result<Vec<OperatorMatrix>> {
        (1..=self.spec.n_sites)
            .map(|j| interaction_operator(&self.spec, j).map(|x| self.to_eigen(&x)))
            .collect()
    }
}

/// Tolerance used to decide that two numeric eigenvalues are degenerate.
fn degeneracy_tol(h: &CMatrix) -> f64 {
    1e-9 * (1.0 + linalg::max_abs(h))
}

/// Diagonalize the chain Hamiltonian.
///
/// The Hamiltonian is block diagonal in the number of `|1⟩` qubits, so each
/// block is diagonalized separately and every eigenvector carries a definite
/// `m`. For two and three sites the degenerate subspaces are then rotated
/// onto the labelled reference states and the eigensystem is ordered by label
/// `ψ_1, ψ_2, …` (which is ascending in energy above the critical point). For
/// four sites states are sorted by energy, ties broken by descending `m`.
pub fn diagonalize(h: &OperatorMatrix, spec: &ChainSpec) -> Result<EigenSystem> {
    check_sites(spec.n_sites)?;
    let n = spec.n_sites;
    let dim = spec.dim();
    if h.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: h.dim(),
        });
    }
    if h.basis != Basis::Computational {
        return Err(Error::BasisMismatch {
            expected: "computational",
        });
    }
    let herm = h.hermiticity_error();
    if herm > 1e-12 * (1.0 + linalg::max_abs(&h.matrix)) {
        return Err(Error::InvalidChain(format!(
            "Hamiltonian is not Hermitian (error {herm:.3e})"
        )));
    }
    let tol = degeneracy_tol(&h.matrix);

    // Per-sector numeric eigenvectors, grouped into degenerate clusters.
    let mut clusters: Vec<Cluster> = Vec::new();
    for ones in 0..=n {
        let idx: Vec<usize> = (0..dim).filter(|i| i.count_ones() as usize == ones).collect();
        let k = idx.len();
        let block = DMatrix::<f64>::from_fn(k, k, |a, b| h.matrix[(idx[a], idx[b])].re);
        let eig = block.symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let m = (n - ones) as i32 - ones as i32;
        for &o in &order {
            let e = eig.eigenvalues[o];
            let mut v = vec![0.0; dim];
            for (a, &i) in idx.iter().enumerate() {
                v[i] = eig.eigenvectors[(a, o)];
            }
            match clusters.last_mut() {
                Some(cl) if cl.m == m && (e - cl.energy).abs() < tol => cl.vectors.push(v),
                _ => clusters.push(Cluster {
                    m,
                    energy: e,
                    vectors: vec![v],
                }),
            }
        }
    }

    let mut states: Vec<(f64, i32, Vec<f64>)> = match reference::table(n) {
        Some(table) => align_to_references(&clusters, table, dim)?,
        None => {
            let mut all: Vec<(f64, i32, Vec<f64>)> = clusters
                .into_iter()
                .flat_map(|cl| {
                    let m = cl.m;
                    let e = cl.energy;
                    cl.vectors.into_iter().map(move |v| (e, m, v))
                })
                .collect();
            for (_, _, v) in &mut all {
                fix_sign(v);
            }
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
            all
        }
    };

    // Rayleigh quotients give energies consistent with the aligned vectors.
    for (e, _, v) in &mut states {
        *e = rayleigh(&h.matrix, v);
    }

    let basis = CMatrix::from_fn(dim, dim, |row, col| c(states[col].2[row]));
    let energies: Vec<f64> = states.iter().map(|s| s.0).collect();
    let m_numbers: Vec<i32> = states.iter().map(|s| s.1).collect();
    let l_numbers = energies
        .iter()
        .zip(&m_numbers)
        .map(|(&e, &m)| {
            if spec.heisenberg_j != 0.0 {
                (e + f64::from(m) * spec.splitting_b) / spec.heisenberg_j
            } else {
                0.0
            }
        })
        .collect();
    Ok(EigenSystem {
        spec: *spec,
        energies,
        basis,
        m_numbers,
        l_numbers,
    })
}

/// Build the Hamiltonian and diagonalize it in one step.
pub fn eigensystem(spec: &ChainSpec) -> Result<EigenSystem> {
    diagonalize(&build_hamiltonian(spec)?, spec)
}

struct Cluster {
    m: i32,
    energy: f64,
    vectors: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rayleigh(h: &CMatrix, v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for a in 0..n {
        if v[a] == 0.0 {
            continue;
        }
        for b in 0..n {
            acc += v[a] * h[(a, b)].re * v[b];
        }
    }
    acc
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0_f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn align_to_references(
    clusters: &[Cluster],
    table: &[reference::Reference],
    dim: usize,
) -> Result<Vec<(f64, i32, Vec<f64>)>> {
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
    let mut projected: Vec<Vec<f64>> = Vec::with_capacity(table.len());
    let mut owner: Vec<usize> = Vec::with_capacity(table.len());

    for (label, r) in table.iter().enumerate() {
        let target = reference::amplitudes(r, dim);
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for (ci, cl) in clusters.iter().enumerate() {
            let mut p = vec![0.0; dim];
            for u in &cl.vectors {
                let w = dot(u, &target);
                p.iter_mut().zip(u).for_each(|(pi, ui)| *pi += w * ui);
            }
            let residual = target
                .iter()
                .zip(&p)
                .map(|(t, q)| (t - q) * (t - q))
                .sum::<f64>()
                .sqrt();
            if best.as_ref().map_or(true, |b| residual < b.1) {
                best = Some((ci, residual, p));
            }
        }
        let (ci, residual, p) = best.expect("at least one cluster");
        if residual > 1e-8 {
            return Err(Error::Alignment {
                label: label + 1,
                residual,
            });
        }
        assigned[ci].push(label);
        owner.push(ci);
        projected.push(p);
    }

    for (ci, cl) in clusters.iter().enumerate() {
        if assigned[ci].len() != cl.vectors.len() {
            let label = assigned[ci].first().map_or(0, |l| l + 1);
            return Err(Error::Alignment {
                label,
                residual: (cl.vectors.len() as f64 - assigned[ci].len() as f64).abs(),
            });
        }
    }

    // Gram–Schmidt inside each cluster, in label order.
    let mut out = Vec::with_capacity(table.len());
    let mut done: Vec<Vec<f64>> = Vec::with_capacity(table.len());
    for (label, mut v) in projected.into_iter().enumerate() {
        for prev in assigned[owner[label]].iter().filter(|&&l| l < label) {
            let u = &done[*prev];
            let w = dot(u, &v);
            v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= w * ui);
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let cl = &clusters[owner[label]];
        out.push((cl.energy, cl.m, v.clone()));
        done.push(v);
    }
    Ok(out)
}

/// `(ω, X^ω, P^ω)` for one interaction operator.
#[derive(Debug, Clone)]
pub struct FrequencyComponent {
    /// Nonnegative angular frequency (rad/ns).
    pub omega: f64,
    pub x_part: OperatorMatrix,
    pub p_part: OperatorMatrix,
    pub site_index: Option<usize>,
}

/// Default clustering tolerance for transition frequencies.
pub fn default_freq_tol(es: &EigenSystem) -> f64 {
    1e-9 * es.max_frequency().max(f64::MIN_POSITIVE)
}

/// Resolve an eigenbasis operator into components of definite transition
/// frequency.
///
/// Elements whose energy gap lies within `freq_tol` of a cluster frequency go
/// into that component. The `P` part multiplies each element by `−i` when
/// `E_β > E_α` and by `+i` when `E_α > E_β`; elements of the `ω = 0`
/// component have no `P` part. An `ω = 0` component is always returned.
pub fn frequency_components(
    op: &OperatorMatrix,
    es: &EigenSystem,
    freq_tol: f64,
) -> Result<Vec<FrequencyComponent>> {
    if op.basis != Basis::Eigen {
        return Err(Error::BasisMismatch { expected: "eigen" });
    }
    let dim = es.dim();
    if op.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: op.dim(),
        });
    }

    let mut gaps: Vec<f64> = vec![0.0];
    for a in 0..dim {
        for b in 0..dim {
            if op.matrix[(a, b)] != ZERO {
                gaps.push(es.omega(a, b).abs());
            }
        }
    }
    gaps.sort_by(f64::total_cmp);
    let mut centers: Vec<f64> = Vec::new();
    for g in gaps {
        match centers.last() {
            Some(&last) if (g - last).abs() <= freq_tol => {}
            _ => centers.push(g),
        }
    }

    let mut comps: Vec<FrequencyComponent> = centers
        .iter()
        .map(|&omega| FrequencyComponent {
            omega,
            x_part: OperatorMatrix {
                matrix: CMatrix::zeros(dim, dim),
                basis: Basis::Eigen,
                site: op.site,
            },
            p_part: OperatorMatrix {
                matrix: CMatrix::zeros(dim, dim),
                basis: Basis::Eigen,
                site: op.site,
            },
            site_index: op.site,
        })
        .collect();

    for a in 0..dim {
        for b in 0..dim {
            let x = op.matrix[(a, b)];
            if x == ZERO {
                continue;
            }
            let w = es.omega(a, b);
            let slot = centers
                .iter()
                .enumerate()
                .min_by(|p, q| (p.1 - w.abs()).abs().total_cmp(&(q.1 - w.abs()).abs()))
                .map(|(i, _)| i)
                .expect("nonempty");
            let comp = &mut comps[slot];
            comp.x_part.matrix[(a, b)] = x;
            if slot != 0 {
                comp.p_part.matrix[(a, b)] = if w > 0.0 { -I * x } else { I * x };
            }
        }
    }
    Ok(comps)
}
