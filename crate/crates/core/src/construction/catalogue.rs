use super::{assemble_glm, AuxChoice, ConstructionError, GlmTableau};

/// The `(k, r, ℓ)` triples of the tabulated high-order family.
pub const CATALOGUE_TRIPLES: [(usize, usize, usize); 8] = [
    (3, 2, 2),
    (4, 4, 3),
    (6, 5, 4),
    (8, 6, 5),
    (10, 7, 6),
    (12, 9, 7),
    (14, 10, 8),
    (16, 11, 9),
];

/// Reference blended-iteration parameters, rounded to four decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceParams {
    pub k: usize,
    pub r: usize,
    pub aux: usize,
    pub gamma: f64,
    pub rho_tilde: f64,
    pub rho_inf: f64,
    pub rho_star: f64,
}

const fn rp(
    k: usize,
    r: usize,
    aux: usize,
    gamma: f64,
    rho_tilde: f64,
    rho_inf: f64,
    rho_star: f64,
) -> ReferenceParams {
    ReferenceParams {
        k,
        r,
        aux,
        gamma,
        rho_tilde,
        rho_inf,
        rho_star,
    }
}

pub const REFERENCE_GEOMETRIC: [ReferenceParams; 8] = [
    rp(3, 2, 0, 0.7223, 0.2272, 0.4355, 0.1573),
    rp(4, 4, 1, 0.6195, 0.3802, 0.9908, 0.3069),
    rp(6, 5, 1, 0.6063, 0.5734, 1.5600, 0.4729),
    rp(8, 6, 1, 0.5769, 0.6380, 1.9170, 0.5530),
    rp(10, 7, 1, 0.5502, 0.6626, 2.1887, 0.6021),
    rp(12, 9, 2, 0.5271, 0.7345, 2.6438, 0.6968),
    rp(14, 10, 2, 0.5127, 0.7366, 2.8022, 0.7183),
    rp(16, 11, 2, 0.4999, 0.7345, 2.9393, 0.7347),
];

pub const REFERENCE_RATIONAL: [ReferenceParams; 8] = [
    rp(3, 2, 0, 0.7223, 0.2272, 0.4355, 0.1573),
    rp(4, 4, 1, 0.6249, 0.3827, 0.9801, 0.3062),
    rp(6, 5, 1, 0.6082, 0.5740, 1.5520, 0.4719),
    rp(8, 6, 1, 0.5778, 0.6381, 1.9113, 0.5522),
    rp(10, 7, 1, 0.5507, 0.6625, 2.1845, 0.6015),
    rp(12, 9, 2, 0.5274, 0.7345, 2.6407, 0.6964),
    rp(14, 10, 2, 0.5130, 0.7366, 2.7998, 0.7180),
    rp(16, 11, 2, 0.5000, 0.7345, 2.9374, 0.7344),
];

/// Reference row for order `k`, if tabulated for `choice`.
pub fn reference_params(k: usize, choice: AuxChoice) -> Option<ReferenceParams> {
    let table = match choice {
        AuxChoice::Geometric => &REFERENCE_GEOMETRIC,
        AuxChoice::Rational => &REFERENCE_RATIONAL,
        AuxChoice::None => return None,
    };
    table.iter().copied().find(|p| p.k == k)
}

/// Triple used for order `k`: the tabulated one, or the BDF block `(k,k,k)`
/// for `k ≤ 2`.
pub fn catalogue_triple(k: usize) -> Option<(usize, usize, usize)> {
    match k {
        1 | 2 => Some((k, k, k)),
        _ => CATALOGUE_TRIPLES.iter().copied().find(|t| t.0 == k),
    }
}

pub fn catalogue_method(k: usize, choice: AuxChoice) -> Result<GlmTableau, ConstructionError> {
    let (k, r, ell) = catalogue_triple(k).ok_or_else(|| {
        ConstructionError::invalid(
            k,
            0,
            0,
            "order not in the catalogue (1, 2, 3, 4, 6, ..., 16)",
        )
    })?;
    assemble_glm(k, r, ell, choice)
}

/// All eight tabulated methods for `choice`.
pub fn catalogue(choice: AuxChoice) -> Result<Vec<GlmTableau>, ConstructionError> {
    CATALOGUE_TRIPLES
        .iter()
        .map(|&(k, r, ell)| assemble_glm(k, r, ell, choice))
        .collect()
}
