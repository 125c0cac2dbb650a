//! Curve-class arithmetic for the preset surfaces: intersection form,
//! anticanonical tangency, effective-cone tests, class enumeration, and the
//! blow-up class map.
//!
//! Coordinates are taken in the basis of effective-cone generators, so a
//! class is effective exactly when all coordinates are nonnegative. The
//! built-in presets are `p2` (rank 1, anticanonical 3H) and `f1` (rank 2
//! with pairing B.B = -1, B.F = 1, F.F = 0, anticanonical 2B + 3F).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Integer vector of coordinates in the generator basis of a preset.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CurveClass(pub Vec<i64>);

impl CurveClass {
    pub fn zero(rank: usize) -> Self {
        CurveClass(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &CurveClass) -> CurveClass {
        CurveClass(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &CurveClass) -> CurveClass {
        CurveClass(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scaled(&self, k: i64) -> CurveClass {
        CurveClass(self.0.iter().map(|a| a * k).collect())
    }

    /// Componentwise comparison: self <= other in the effective order.
    pub fn leq(&self, other: &CurveClass) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Largest k with k*self <= other componentwise (self nonzero effective).
    pub fn max_multiple_into(&self, other: &CurveClass) -> i64 {
        let mut k = i64::MAX;
        for (a, b) in self.0.iter().zip(&other.0) {
            if *a > 0 {
                k = k.min(b / a);
            } else if *b < 0 {
                return 0;
            }
        }
        if k == i64::MAX {
            0
        } else {
            k.max(0)
        }
    }

    /// Gcd of the coordinates; 0 for the zero class.
    pub fn content(&self) -> i64 {
        self.0.iter().fold(0i64, |g, &c| gcd(g, c.abs()))
    }

    pub fn parse(text: &str) -> Result<CurveClass, Error> {
        let coords: Result<Vec<i64>, _> = text
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect();
        coords
            .map(CurveClass)
            .map_err(|_| Error::schema("class", format!("cannot parse class `{text}`")))
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl fmt::Debug for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// One decomposition beta = d_e * E + sum of parts, with every part a
/// nonzero effective class of positive tangency. Parts are a multiset,
/// stored sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub d_e: i64,
    pub parts: Vec<CurveClass>,
}

/// A surface with a chosen basis of effective-cone generators, its
/// intersection pairing, anticanonical class, positive degree grading,
/// and Euler characteristic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfacePreset {
    pub id: String,
    pub rank: usize,
    pub pairing: Vec<Vec<i64>>,
    pub anticanonical: CurveClass,
    pub degree_weights: Vec<i64>,
    pub euler_char: i64,
}

impl SurfacePreset {
    /// The projective plane: basis H, pairing H.H = 1, anticanonical 3H.
    pub fn p2() -> Self {
        SurfacePreset {
            id: "p2".to_string(),
            rank: 1,
            pairing: vec![vec![1]],
            anticanonical: CurveClass(vec![3]),
            degree_weights: vec![1],
            euler_char: 3,
        }
    }

    /// The first Hirzebruch surface: basis B, F with B.B = -1, B.F = 1,
    /// F.F = 0; anticanonical 2B + 3F; degree = coordinate sum.
    pub fn f1() -> Self {
        SurfacePreset {
            id: "f1".to_string(),
            rank: 2,
            pairing: vec![vec![-1, 1], vec![1, 0]],
            anticanonical: CurveClass(vec![2, 3]),
            degree_weights: vec![1, 1],
            euler_char: 4,
        }
    }

    pub fn by_id(id: &str) -> Option<Self> {
        match id {
            "p2" => Some(Self::p2()),
            "f1" => Some(Self::f1()),
            _ => None,
        }
    }

    /// Validate a custom preset: symmetric pairing, positive tangency and
    /// degree on every generator.
    pub fn validate(&self) -> Result<(), Error> {
        if self.pairing.len() != self.rank || self.pairing.iter().any(|r| r.len() != self.rank) {
            return Err(Error::schema("pairing", "matrix is not rank x rank"));
        }
        for i in 0..self.rank {
            for j in 0..self.rank {
                if self.pairing[i][j] != self.pairing[j][i] {
                    return Err(Error::schema("pairing", "matrix is not symmetric"));
                }
            }
        }
        if self.anticanonical.rank() != self.rank {
            return Err(Error::schema("anticanonical", "wrong length"));
        }
        if self.degree_weights.len() != self.rank {
            return Err(Error::schema("degree_weights", "wrong length"));
        }
        if self.degree_weights.iter().any(|&w| w < 1) {
            return Err(Error::schema("degree_weights", "weights must be >= 1"));
        }
        for i in 0..self.rank {
            let mut gen = CurveClass::zero(self.rank);
            gen.0[i] = 1;
            if self.tangency(&gen) <= 0 {
                return Err(Error::schema(
                    "anticanonical",
                    format!("generator {i} has nonpositive tangency"),
                ));
            }
        }
        Ok(())
    }

    fn check_rank(&self, c: &CurveClass) -> Result<(), Error> {
        if c.rank() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: c.rank(),
            });
        }
        Ok(())
    }

    /// Intersection number a . b through the pairing matrix.
    pub fn dot(&self, a: &CurveClass, b: &CurveClass) -> Result<i64, Error> {
        self.check_rank(a)?;
        self.check_rank(b)?;
        let mut acc = 0i64;
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += a.0[i] * self.pairing[i][j] * b.0[j];
            }
        }
        Ok(acc)
    }

    /// Tangency against the anticanonical class.
    pub fn tangency(&self, b: &CurveClass) -> i64 {
        self.dot(b, &self.anticanonical)
            .expect("class from this preset")
    }

    pub fn is_effective(&self, c: &CurveClass) -> bool {
        c.rank() == self.rank && c.0.iter().all(|&x| x >= 0)
    }

    pub fn degree(&self, c: &CurveClass) -> i64 {
        c.0.iter()
            .zip(&self.degree_weights)
            .map(|(a, w)| a * w)
            .sum()
    }

    /// All effective classes of degree <= dmax, ordered by degree, then by
    /// lexicographic coordinates.
    pub fn enumerate_effective_upto(&self, dmax: i64) -> Vec<CurveClass> {
        let mut out = Vec::new();
        let mut current = vec![0i64; self.rank];
        self.enumerate_rec(0, dmax, &mut current, &mut out);
        out.sort_by_key(|c| (self.degree(c), c.0.clone()));
        out
    }

    fn enumerate_rec(&self, idx: usize, budget: i64, current: &mut Vec<i64>, out: &mut Vec<CurveClass>) {
        if idx == self.rank {
            out.push(CurveClass(current.clone()));
            return;
        }
        let w = self.degree_weights[idx];
        let mut v = 0;
        while v * w <= budget {
            current[idx] = v;
            self.enumerate_rec(idx + 1, budget - v * w, current, out);
            v += 1;
        }
        current[idx] = 0;
    }

    /// Every decomposition beta = d_e * E + sum of parts with at most nmax
    /// parts, each part a nonzero effective class with positive tangency.
    /// Exhaustive and duplicate-free; parts are canonical multisets.
    pub fn decompose_for_delta(&self, beta: &CurveClass, nmax: usize) -> Result<Vec<Decomposition>, Error> {
        self.check_rank(beta)?;
        if !self.is_effective(beta) {
            return Err(Error::schema("class", format!("{beta} is not effective")));
        }
        let e = &self.anticanonical;
        let e_grows = e.0.iter().any(|&x| x > 0);
        let mut out = Vec::new();
        let mut d_e = 0i64;
        loop {
            let used = e.scaled(d_e);
            if !used.leq(beta) {
                break;
            }
            let remainder = beta.sub(&used);
            let candidates: Vec<CurveClass> = self
                .enumerate_effective_upto(self.degree(&remainder))
                .into_iter()
                .filter(|c| !c.is_zero() && c.leq(&remainder) && self.tangency(c) > 0)
                .collect();
            let mut parts = Vec::new();
            split_rec(&candidates, 0, &remainder, nmax, &mut parts, &mut |ps| {
                out.push(Decomposition {
                    d_e,
                    parts: ps.to_vec(),
                });
            });
            d_e += 1;
            if !e_grows {
                break; // guards custom presets with a degenerate E
            }
        }
        Ok(out)
    }
}

fn split_rec(
    candidates: &[CurveClass],
    idx: usize,
    remaining: &CurveClass,
    nmax: usize,
    parts: &mut Vec<CurveClass>,
    emit: &mut impl FnMut(&[CurveClass]),
) {
    if remaining.is_zero() {
        emit(parts);
        return;
    }
    if idx >= candidates.len() || parts.len() >= nmax {
        return;
    }
    let c = &candidates[idx];
    // skip this candidate entirely
    split_rec(candidates, idx + 1, remaining, nmax, parts, emit);
    // or use it with multiplicity >= 1
    let mut used = 0;
    let mut rem = remaining.clone();
    while c.leq(&rem) && parts.len() < nmax {
        rem = rem.sub(c);
        parts.push(c.clone());
        used += 1;
        split_rec(candidates, idx + 1, &rem, nmax, parts, emit);
    }
    for _ in 0..used {
        parts.pop();
    }
}

/// The class pulled back from a degree-d plane curve through the blown-up
/// point: (d-1) B + d F on the f1 preset.
pub fn blowup_class_map(d: i64) -> CurveClass {
    assert!(d >= 1, "degree must be positive");
    CurveClass(vec![d - 1, d])
}
