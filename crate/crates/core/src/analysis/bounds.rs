//! Analytic caps on the decodable census rows.
//!
//! All bounds flow from incidence-degree counting. Writing `mG` for the
//! loop-cut number and `dL` for the maximum number of loops at one vertex:
//!
//! * feasibility: a decodable graph satisfies `min_incidence <= 2m/n - 1`
//!   and `mG <= floor(2m/(n+1))`;
//! * with `theta = mG*(n+1) + n - 2m`, at least `theta + 1` deletion sets of
//!   size `mG` are fatal, capping `c[mG]` at `C(m,mG) - (theta+1)`;
//! * near the cut, `k[mG+x] >= (theta+1)*C(m-mG,x) + (n-theta)*C(m-mG-1,x-1)`
//!   for `1 <= x <= mG - dL`;
//! * fatal sets stay fatal when they grow, so any floor propagates upward:
//!   `k[x+z] >= ceil(k[x] * C(m-x,z) / C(x+z,z))`.
//!
//! [`upper_bound_profile`] chains these into the per-x cap row `D`, using
//! plain binomials below the cut, the cap at the cut, the near-cut floors up
//! to the frontier `2*mG - dL`, and ratio propagation past it. Bounds that
//! leave `[0, C(m,x)]` are clamped and flagged.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::Serialize;

use super::{binomial, AnalysisError, CensusResult};
use crate::multigraph::MultiGraph;

/// Caps implied by decodability alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeasibilityCaps {
    /// Reference cap floor(2m/n - 1) on the minimum incidence degree. The
    /// exact constraint is `n * min_incidence <= 2m - loops`; this rounded
    /// form is guaranteed only when n divides 2m, which holds for every
    /// scheme graph (m = rn).
    pub min_incidence_degree: usize,
    /// Upper bound on the loop-cut number: floor(2m/(n+1)).
    pub loop_cut: usize,
}

/// A bound clamped into its valid range; `clamped` marks a vacuous bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClampedValue {
    #[serde(with = "crate::serde_util::biguint_scalar")]
    pub value: BigUint,
    pub clamped: bool,
}

/// An intermediate floor on `k[x]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FloorEntry {
    pub x: usize,
    #[serde(with = "crate::serde_util::biguint_scalar")]
    pub floor: BigUint,
}

/// The assembled cap row with every intermediate quantity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub m: usize,
    pub loop_cut: usize,
    pub max_loops: usize,
    pub theta: i64,
    pub caps: FeasibilityCaps,
    pub cap_at_cut: ClampedValue,
    pub near_floors: Vec<FloorEntry>,
    pub tail_floors: Vec<FloorEntry>,
    /// `d[i]` caps `c[i+1]`, for deletions `1..=m-n`.
    pub d: Vec<ClampedValue>,
}

fn theta(n: usize, m: usize, loop_cut: usize) -> i64 {
    loop_cut as i64 * (n as i64 + 1) + n as i64 - 2 * m as i64
}

/// Degree-sum caps for a decodable graph on `n` vertices with `m` edges.
pub fn feasibility_caps(n: usize, m: usize) -> Result<FeasibilityCaps, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::NoVertices);
    }
    if m < n {
        return Err(AnalysisError::TooFewEdges { n, m });
    }
    Ok(FeasibilityCaps {
        min_incidence_degree: (2 * m - n) / n,
        loop_cut: 2 * m / (n + 1),
    })
}

fn check_cut(n: usize, m: usize, loop_cut: usize) -> Result<FeasibilityCaps, AnalysisError> {
    let caps = feasibility_caps(n, m)?;
    if loop_cut == 0 {
        return Err(AnalysisError::ZeroLoopCut);
    }
    if loop_cut > caps.loop_cut {
        return Err(AnalysisError::LoopCutInfeasible {
            loop_cut,
            cap: caps.loop_cut,
        });
    }
    Ok(caps)
}

/// Cap on `c[loop_cut]`: `C(m, loop_cut) - (theta + 1)`, clamped into range.
pub fn decodable_cap_at_cut(
    n: usize,
    m: usize,
    loop_cut: usize,
) -> Result<ClampedValue, AnalysisError> {
    check_cut(n, m, loop_cut)?;
    let total = BigInt::from(binomial(m, loop_cut));
    let raw = &total - BigInt::from(theta(n, m, loop_cut) + 1);
    Ok(if raw.sign() == Sign::Minus {
        ClampedValue {
            value: BigUint::zero(),
            clamped: true,
        }
    } else if raw > total {
        ClampedValue {
            value: total.to_biguint().expect("binomial is nonnegative"),
            clamped: true,
        }
    } else {
        ClampedValue {
            value: raw.to_biguint().expect("checked nonnegative"),
            clamped: false,
        }
    })
}

/// Floor on `k[loop_cut + offset]` for `1 <= offset <= loop_cut - max_loops`.
pub fn undecodable_floor(
    n: usize,
    m: usize,
    loop_cut: usize,
    max_loops: usize,
    offset: usize,
) -> Result<BigUint, AnalysisError> {
    check_cut(n, m, loop_cut)?;
    if max_loops == 0 || max_loops >= loop_cut {
        return Err(AnalysisError::MaxLoopsRange {
            max_loops,
            loop_cut,
        });
    }
    let max_offset = loop_cut - max_loops;
    if offset == 0 || offset > max_offset {
        return Err(AnalysisError::OffsetRange {
            offset,
            max: max_offset,
        });
    }
    let th = theta(n, m, loop_cut);
    let rest = m - loop_cut;
    let first = BigInt::from(th + 1) * BigInt::from(binomial(rest, offset));
    let second_binom = if rest == 0 {
        BigUint::zero()
    } else {
        binomial(rest - 1, offset - 1)
    };
    let second = (BigInt::from(n as i64) - BigInt::from(th)) * BigInt::from(second_binom);
    let sum = first + second;
    Ok(if sum.sign() == Sign::Minus {
        BigUint::zero()
    } else {
        sum.to_biguint().expect("checked nonnegative")
    })
}

/// Propagates a floor on `k[x]` upward: fatal sets stay fatal when grown, so
/// `k[x+z] >= ceil(k_x * C(m-x, z) / C(x+z, z))`. The ratio is computed in
/// exact integer arithmetic.
pub fn floor_extension(k_x: &BigUint, m: usize, x: usize, z: usize) -> BigUint {
    if z == 0 {
        return k_x.clone();
    }
    if x + z > m {
        return BigUint::zero();
    }
    let numerator = k_x * binomial(m - x, z);
    let denominator = binomial(x + z, z);
    (numerator + &denominator - BigUint::one()) / denominator
}

/// Chains every bound into the cap row `D_1..D_{m-n}`.
pub fn upper_bound_profile(
    n: usize,
    m: usize,
    loop_cut: usize,
    max_loops: usize,
) -> Result<BoundsReport, AnalysisError> {
    let caps = check_cut(n, m, loop_cut)?;
    if max_loops == 0 || max_loops >= loop_cut {
        return Err(AnalysisError::MaxLoopsRange {
            max_loops,
            loop_cut,
        });
    }
    let len = m - n;
    let cap_at_cut = decodable_cap_at_cut(n, m, loop_cut)?;
    let mut d: Vec<ClampedValue> = Vec::with_capacity(len);
    for x in 1..loop_cut.min(len + 1) {
        d.push(ClampedValue {
            value: binomial(m, x),
            clamped: false,
        });
    }
    if loop_cut <= len {
        d.push(cap_at_cut.clone());
    }

    let cap_minus_floor = |x: usize, floor: &BigUint| -> ClampedValue {
        let total = binomial(m, x);
        if floor > &total {
            ClampedValue {
                value: BigUint::zero(),
                clamped: true,
            }
        } else {
            ClampedValue {
                value: &total - floor,
                clamped: false,
            }
        }
    };

    let near_max = loop_cut - max_loops;
    let mut near_floors = Vec::new();
    for offset in 1..=near_max {
        let x = loop_cut + offset;
        if x > len {
            break;
        }
        let floor = undecodable_floor(n, m, loop_cut, max_loops, offset)?;
        d.push(cap_minus_floor(x, &floor));
        near_floors.push(FloorEntry { x, floor });
    }

    let frontier = loop_cut + near_max;
    let mut tail_floors = Vec::new();
    if frontier < len {
        let k_frontier = undecodable_floor(n, m, loop_cut, max_loops, near_max)?;
        for x in frontier + 1..=len {
            let floor = floor_extension(&k_frontier, m, frontier, x - frontier);
            d.push(cap_minus_floor(x, &floor));
            tail_floors.push(FloorEntry { x, floor });
        }
    }

    assert_eq!(d.len(), len);
    Ok(BoundsReport {
        n,
        m,
        loop_cut,
        max_loops,
        theta: theta(n, m, loop_cut),
        caps,
        cap_at_cut,
        near_floors,
        tail_floors,
        d,
    })
}

/// Outcome of the minimal-fatal-count characterization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FloorEquality {
    /// `k[loop_cut]` is not exactly `theta + 1`; nothing is implied.
    NotMet,
    /// Equality with exactly `loop_cut` loops; `alpha` vertices sit at the
    /// minimum incidence degree.
    MinimalLoops { alpha: usize },
    /// Equality with `loop_cut + 1` loops.
    ExtraLoop { alpha: usize },
    /// Equality held but the structure does not match either shape; exact
    /// censuses never produce this.
    Inconsistent {
        alpha: usize,
        beta: usize,
        loop_count: usize,
    },
}

/// When the census meets the `k[loop_cut] == theta + 1` floor exactly, the
/// graph must look one of two ways: no vertex exceeds incidence degree
/// `loop_cut + 1`, and either `theta` vertices sit at degree `loop_cut` with
/// `loop_cut` loops, or `theta + 1` of them with one extra loop.
pub fn floor_equality_report(g: &MultiGraph, census: &CensusResult) -> FloorEquality {
    let Some(loop_cut) = census.loop_cut else {
        return FloorEquality::NotMet;
    };
    if loop_cut == 0 {
        return FloorEquality::NotMet;
    }
    let th = theta(g.vertex_count(), census.m, loop_cut);
    if th < 0 || BigInt::from(census.k[loop_cut].clone()) != BigInt::from(th + 1) {
        return FloorEquality::NotMet;
    }
    let stats = g.stats();
    let alpha = stats.alpha(loop_cut);
    let beta = stats.beta(loop_cut);
    let loops = stats.loop_count;
    let th = th as usize;
    if beta == 0 && alpha == th && loops == loop_cut {
        FloorEquality::MinimalLoops { alpha }
    } else if beta == 0 && alpha == th + 1 && loops == loop_cut + 1 {
        FloorEquality::ExtraLoop { alpha }
    } else {
        FloorEquality::Inconsistent {
            alpha,
            beta,
            loop_count: loops,
        }
    }
}
