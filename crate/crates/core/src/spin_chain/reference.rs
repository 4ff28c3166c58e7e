//! Labelled reference eigenstates for the two- and three-site rings.
//!
//! Each entry lists unnormalized integer amplitudes over computational basis
//! strings, site 1 first. These fix the labelling `ψ_1, ψ_2, …` used by every
//! scenario and the phase of each eigenvector inside degenerate subspaces.

pub(crate) type Reference = &'static [(&'static str, f64)];

const TWO_SITE: [Reference; 4] = [
    &[("00", 1.0)],
    &[("01", 1.0), ("10", -1.0)],
    &[("01", 1.0), ("10", 1.0)],
    &[("11", 1.0)],
];

const THREE_SITE: [Reference; 8] = [
    &[("000", 1.0)],
    &[("001", 1.0), ("100", -1.0)],
    &[("001", 1.0), ("100", 1.0), ("010", -2.0)],
    &[("001", 1.0), ("100", 1.0), ("010", 1.0)],
    &[("011", 1.0), ("110", -1.0)],
    &[("011", 1.0), ("110", 1.0), ("101", -2.0)],
    &[("011", 1.0), ("110", 1.0), ("101", 1.0)],
    &[("111", 1.0)],
];

pub(crate) fn table(n_sites: usize) -> Option<&'static [Reference]> {
    match n_sites {
        2 => Some(&TWO_SITE),
        3 => Some(&THREE_SITE),
        _ => None,
    }
}

/// Index of a basis string with site 1 as the most significant bit.
pub(crate) fn basis_index(bits: &str) -> usize {
    bits.bytes()
        .fold(0, |acc, b| (acc << 1) | usize::from(b == b'1'))
}

/// Normalized real amplitude vector of a reference state.
pub(crate) fn amplitudes(reference: Reference, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for &(bits, amp) in reference {
        v[basis_index(bits)] += amp;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}
