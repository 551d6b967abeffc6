//! Exact robustness analysis: the decodable-subgraph census and the decoding
//! probability polynomial.
//!
//! For a graph with `m` edges, `c[x]` counts the deletion sets of exactly
//! `x` edges that leave the graph decodable and `k[x] = C(m,x) - c[x]` the
//! fatal ones. With i.i.d. edge survival probability `p` (`q = 1 - p`) the
//! decoding probability is `sum_x c[x] * p^(m-x) * q^x`. All counts are
//! exact; floats appear only when a polynomial is evaluated.

mod bounds;

pub use bounds::{
    decodable_cap_at_cut, feasibility_caps, floor_equality_report, floor_extension,
    undecodable_floor, upper_bound_profile, BoundsReport, ClampedValue, FeasibilityCaps,
    FloorEquality,
};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multigraph::{MultiGraph, Scratch};
use crate::Real;

/// Census enumeration visits `2^m` subgraphs; refuse beyond this many edges
/// unless the caller raises the cap explicitly.
pub const DEFAULT_CENSUS_CAP: usize = 24;

/// Hard width limit of the subset bitmask.
const MAX_ENUM_EDGES: usize = 63;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("census over {m} edges would enumerate 2^{m} subgraphs; the cap is {cap} edges — pass an explicit higher cap to proceed")]
    CensusCap { m: usize, cap: usize },
    #[error("census enumeration supports at most {MAX_ENUM_EDGES} edges (got {m})")]
    TooManyEdges { m: usize },
    #[error("probability {p} outside [0, 1]")]
    ProbabilityRange { p: f64 },
    #[error("decodable graphs need at least as many edges as vertices (m = {m} < n = {n}); every component must keep its own loop")]
    TooFewEdges { n: usize, m: usize },
    #[error("graphs need at least one vertex here")]
    NoVertices,
    #[error("loop-cut number must be at least 1")]
    ZeroLoopCut,
    #[error("loop-cut number {loop_cut} exceeds the feasibility cap floor(2m/(n+1)) = {cap}")]
    LoopCutInfeasible { loop_cut: usize, cap: usize },
    #[error("max loops per vertex must lie in 1..=loop_cut-1 (got {max_loops} with loop cut {loop_cut})")]
    MaxLoopsRange { max_loops: usize, loop_cut: usize },
    #[error("offset {offset} outside 1..={max} for the near-cut floor")]
    OffsetRange { offset: usize, max: usize },
    #[error("census data: {0}")]
    Format(String),
}

/// Exact binomial coefficient, zero when `x > m`.
pub fn binomial(m: usize, x: usize) -> BigUint {
    if x > m {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(m), BigUint::from(x))
}

/// Exact deletion census of a graph: `c[x]` decodable, `k[x]` fatal
/// deletion sets of size `x`, for `x = 0..=m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusResult {
    pub m: usize,
    pub c: Vec<BigUint>,
    pub k: Vec<BigUint>,
    /// Smallest x with `c[x] < C(m,x)`; `None` when no deletion is ever
    /// fatal (only the empty graph).
    pub loop_cut: Option<usize>,
}

impl CensusResult {
    pub fn binomial(&self, x: usize) -> BigUint {
        binomial(self.m, x)
    }
}

/// Census with the default enumeration cap.
pub fn census(g: &MultiGraph) -> Result<CensusResult, AnalysisError> {
    census_with_cap(g, DEFAULT_CENSUS_CAP)
}

/// Census with an explicit cap acknowledgment. Single-threaded and
/// deterministic; runs in `O(2^m * m)` union-find steps.
pub fn census_with_cap(g: &MultiGraph, cap: usize) -> Result<CensusResult, AnalysisError> {
    let m = g.edge_count();
    if m > MAX_ENUM_EDGES {
        return Err(AnalysisError::TooManyEdges { m });
    }
    if m > cap {
        return Err(AnalysisError::CensusCap { m, cap });
    }
    let mut decodable = vec![0u64; m + 1];
    let mut scratch = Scratch::new();
    for mask in 0..(1u64 << m) {
        // Set bits select the deleted edges.
        let x = mask.count_ones() as usize;
        if g.decodable_if(&mut scratch, |id| mask >> id & 1 == 0) {
            decodable[x] += 1;
        }
    }
    let c: Vec<BigUint> = decodable.iter().map(|&v| BigUint::from(v)).collect();
    let k: Vec<BigUint> = c
        .iter()
        .enumerate()
        .map(|(x, cx)| binomial(m, x) - cx)
        .collect();
    let loop_cut = (0..=m).find(|&x| !k[x].is_zero());
    if c[0].is_one() {
        // Cross-check against the direct search; both sides are exact.
        let direct = g.min_loop_cut();
        match loop_cut {
            Some(x) => assert_eq!(direct.as_ref(), Ok(&x)),
            None => assert!(direct.is_err()),
        }
    }
    Ok(CensusResult { m, c, k, loop_cut })
}

/// Decoding probability as a polynomial in the survival probability `p`:
/// coefficient `x` multiplies `p^(m-x) * q^x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingPolynomial {
    coeffs: Vec<BigUint>,
}

impl DecodingPolynomial {
    pub fn from_census(census: &CensusResult) -> Self {
        Self {
            coeffs: census.c.clone(),
        }
    }

    /// Hypothetical census from per-x caps: `c[0] = 1`, `c[x] = caps[x-1]`,
    /// zero beyond (deletions past `m - n` are always fatal).
    pub fn from_caps(m: usize, caps: &[BigUint]) -> Self {
        let mut coeffs = vec![BigUint::zero(); m + 1];
        coeffs[0] = BigUint::one();
        for (i, cap) in caps.iter().enumerate() {
            coeffs[i + 1] = cap.clone();
        }
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn evaluate<F: Real>(&self, p: F) -> Result<F, AnalysisError> {
        check_probability(p)?;
        let q = F::one() - p;
        let m = self.degree();
        let mut acc = F::zero();
        for (x, coeff) in self.coeffs.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let c = F::from_f64(coeff.to_f64().unwrap_or(f64::INFINITY))
                .unwrap_or_else(F::infinity);
            acc = acc + c * p.powi((m - x) as i32) * q.powi(x as i32);
        }
        Ok(acc)
    }
}

fn check_probability<F: Real>(p: F) -> Result<(), AnalysisError> {
    if p < F::zero() || p > F::one() || p.is_nan() {
        return Err(AnalysisError::ProbabilityRange {
            p: p.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Evaluates the census polynomial at survival probability `p`.
pub fn decoding_probability<F: Real>(census: &CensusResult, p: F) -> Result<F, AnalysisError> {
    DecodingPolynomial::from_census(census).evaluate(p)
}

/// Decoding probability as the product over connected components. Equal to
/// the direct evaluation, but each component only pays for its own edges.
pub fn probability_by_components<F: Real>(g: &MultiGraph, p: F) -> Result<F, AnalysisError> {
    check_probability(p)?;
    let mut acc = F::one();
    for part in g.component_graphs() {
        let census = census_with_cap(&part, DEFAULT_CENSUS_CAP)?;
        acc = acc * decoding_probability(&census, p)?;
    }
    Ok(acc)
}

/// JSON document mirroring the census table; counts as decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusDoc {
    pub m: usize,
    pub loop_cut: Option<usize>,
    #[serde(with = "crate::serde_util::biguint_vec")]
    pub c: Vec<BigUint>,
    #[serde(with = "crate::serde_util::biguint_vec")]
    pub k: Vec<BigUint>,
}

impl CensusDoc {
    pub fn from_census(census: &CensusResult) -> Self {
        Self {
            m: census.m,
            loop_cut: census.loop_cut,
            c: census.c.clone(),
            k: census.k.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("census serializes")
    }

    pub fn from_json_str(text: &str) -> Result<CensusResult, AnalysisError> {
        let doc: CensusDoc =
            serde_json::from_str(text).map_err(|e| AnalysisError::Format(e.to_string()))?;
        if doc.c.len() != doc.m + 1 || doc.k.len() != doc.m + 1 {
            return Err(AnalysisError::Format(format!(
                "expected {} rows, got c: {}, k: {}",
                doc.m + 1,
                doc.c.len(),
                doc.k.len()
            )));
        }
        for x in 0..=doc.m {
            if &doc.c[x] + &doc.k[x] != binomial(doc.m, x) {
                return Err(AnalysisError::Format(format!(
                    "row {x}: c + k must equal C({}, {x})",
                    doc.m
                )));
            }
        }
        Ok(CensusResult {
            m: doc.m,
            c: doc.c,
            k: doc.k,
            loop_cut: doc.loop_cut,
        })
    }
}
