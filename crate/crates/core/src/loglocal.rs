//! The log-local principle: the variable change to the elliptic frame,
//! the genus-1 divisor-sum series, the delta_1 discrepancy, the genus-1
//! identity residual, and the full discrepancy sum against a stationary
//! oracle.
//!
//! Conventions used throughout:
//! - the class parameter e of the vertex kernels is tangency + 1, so the
//!   maximal-tangency order of the class is e - 1;
//! - the n-th term of the elliptic frame change carries the sign
//!   (-1)^((E.E) n), which the substitution of the frame variable into the
//!   divisor-sum series produces;
//! - parts of genus 0 with no extra psi-power are allowed in the
//!   discrepancy sum (they are the expansion of the frame-change
//!   exponential), and unordered decorated decompositions divide by their
//!   symmetry factor.

use num::{One, Zero};

use crate::error::Error;
use crate::genus_series::{
    kernel_k1, kernel_v2, kernel_v3, rat, rat_int, GenusSeries, Rational, SeriesError,
};
use crate::invariant_store::{
    nv_exp, nv_mul, sigma_minus_one, InvariantKind, InvariantTable, NovikovSeries,
    StationaryKey, StationaryOracle, TableView,
};
use crate::surface_lattice::{CurveClass, SurfacePreset};

/// Divisor-sum coefficients sigma_{-1}(n) = sum over k | n of 1/k for
/// n = 1..nmax: the degree-n coefficients of the genus-1 series of the
/// elliptic curve.
pub fn elliptic_g1_series(nmax: i64) -> Vec<Rational> {
    (1..=nmax).map(sigma_minus_one).collect()
}

/// The elliptic frame variable: sign (-1)^(E.E) carried as an explicit
/// scalar, times Q^E exp(sum over positive-tangency classes of
/// (-1)^(c.E) (c.E) R_0(c) Q^c).
#[derive(Clone, Debug, PartialEq)]
pub struct QtildeSeries {
    pub sign: i64,
    pub series: NovikovSeries,
}

fn tangency_sign(e: i64) -> Rational {
    rat_int(if e.rem_euclid(2) == 0 { 1 } else { -1 })
}

/// The inner sum of the frame change over classes of positive tangency up
/// to the degree cap; every queried entry must be present.
fn frame_change_argument(
    preset: &SurfacePreset,
    view: &TableView,
    degree_cap: i64,
    box_bound: Option<&CurveClass>,
) -> Result<NovikovSeries, Error> {
    let mut s = NovikovSeries::zero(preset, degree_cap, 0);
    for c in preset.enumerate_effective_upto(degree_cap) {
        if c.is_zero() {
            continue;
        }
        if let Some(bound) = box_bound {
            if !c.leq(bound) {
                continue;
            }
        }
        let t = preset.tangency(&c);
        if t <= 0 {
            continue;
        }
        let r0 = view.get_strict(InvariantKind::LogMax, &c, 0)?;
        let coeff = tangency_sign(t) * rat_int(t) * r0;
        s.add_term(preset, c, &GenusSeries::constant(coeff, 0));
    }
    Ok(s)
}

/// Frame change (-1)^(E.E) Q^E exp(...). Strict over every
/// positive-tangency class up to the degree cap.
pub fn qtilde_series(
    preset: &SurfacePreset,
    table: &InvariantTable,
    degree_cap: i64,
) -> Result<QtildeSeries, Error> {
    let view = TableView::new(table);
    let ee = preset
        .dot(&preset.anticanonical, &preset.anticanonical)
        .expect("anticanonical class");
    let arg = frame_change_argument(preset, &view, degree_cap, None)?;
    let exp = nv_exp(preset, &arg)?;
    let mut qe = NovikovSeries::zero(preset, degree_cap, 0);
    qe.add_term(preset, preset.anticanonical.clone(), &GenusSeries::one(0));
    let series = nv_mul(preset, &qe, &exp)?;
    Ok(QtildeSeries {
        sign: if ee.rem_euclid(2) == 0 { 1 } else { -1 },
        series,
    })
}

/// delta_1(beta): the Q^beta coefficient of
/// sum over n >= 1 of sigma_{-1}(n) (-1)^((E.E) n) Q^(n E) exp(n S),
/// with S the frame-change argument. Vanishes whenever beta - E is not
/// effective, and only reads entries strictly below beta in the
/// effective order.
pub fn delta1_view(
    preset: &SurfacePreset,
    beta: &CurveClass,
    view: &TableView,
) -> Result<Rational, Error> {
    let e_class = &preset.anticanonical;
    let ee = preset.dot(e_class, e_class).expect("anticanonical class");
    let first = beta.sub(e_class);
    if !preset.is_effective(&first) {
        return Ok(Rational::zero());
    }
    let degree_cap = preset.degree(beta);
    let arg = frame_change_argument(preset, view, degree_cap, Some(&first))?;
    let mut total = Rational::zero();
    let mut n = 1i64;
    loop {
        let used = e_class.scaled(n);
        if !used.leq(beta) {
            break;
        }
        let target = beta.sub(&used);
        let exp = nv_exp(preset, &arg.scale(&rat_int(n)))?;
        let coeff = exp.coefficient(&target).coefficient(0)?;
        let sign = tangency_sign(ee * n);
        total += sigma_minus_one(n) * sign * coeff;
        n += 1;
    }
    Ok(total)
}

/// Convenience wrapper over [`delta1_view`] with a fresh strict view.
pub fn delta1(
    preset: &SurfacePreset,
    beta: &CurveClass,
    table: &InvariantTable,
) -> Result<Rational, Error> {
    delta1_view(preset, beta, &TableView::new(table))
}

/// Residual of the genus-1 log-local identity at one class:
/// N_1 - [ (-1)^(e+1)/e R_1 + (-1)^(e+1) e R_0 / 24 + delta_1 ],
/// with e the tangency of the class on this pair. The formal log term of
/// the generating-series identity contributes to no effective class and
/// is dropped. Zero signals the identity holds on the given data.
pub fn genus1_loglocal(
    preset: &SurfacePreset,
    beta: &CurveClass,
    n1_local: &Rational,
    r1_max: &Rational,
    table: &InvariantTable,
) -> Result<Rational, Error> {
    let view = TableView::new(table);
    genus1_loglocal_view(preset, beta, n1_local, r1_max, &view)
}

pub fn genus1_loglocal_view(
    preset: &SurfacePreset,
    beta: &CurveClass,
    n1_local: &Rational,
    r1_max: &Rational,
    view: &TableView,
) -> Result<Rational, Error> {
    let e = preset.tangency(beta);
    if e <= 0 || beta.is_zero() {
        return Err(Error::ZeroTangency(e));
    }
    let r0 = view.get_strict(InvariantKind::LogMax, beta, 0)?;
    let d1 = delta1_view(preset, beta, view)?;
    let sign = tangency_sign(e + 1);
    let rhs = &sign * r1_max / rat_int(e) + sign * rat_int(e) * r0 * rat(1, 24) + d1;
    Ok(n1_local - rhs)
}

/// How to read "partitions of a into g boxes" in the symmetry factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AutMode {
    /// Partitions of a into at most g parts (the default reading).
    #[default]
    AtMost,
    /// Partitions of a into exactly g parts.
    Exactly,
}

/// Number of partitions of n into at most k parts (or exactly k parts).
fn partition_count(n: i64, k: i64, mode: AutMode) -> u64 {
    if n < 0 || k < 0 {
        return 0;
    }
    match mode {
        AutMode::AtMost => {
            // partitions of n into at most k parts = partitions of n into
            // parts of size <= k, by conjugation
            let n = n as usize;
            let k = k as usize;
            let mut table = vec![0u64; n + 1];
            table[0] = 1;
            for part in 1..=k.min(n) {
                for total in part..=n {
                    table[total] += table[total - part];
                }
            }
            table[n]
        }
        AutMode::Exactly => {
            // exactly k parts = at most k parts minus at most k-1 parts
            let am = partition_count(n, k, AutMode::AtMost);
            let fewer = if k == 0 {
                0
            } else {
                partition_count(n, k - 1, AutMode::AtMost)
            };
            if n == 0 && k == 0 {
                1
            } else if n == 0 {
                0
            } else {
                am - fewer
            }
        }
    }
}

/// Product over markings of the number of partitions of a_i into g_i
/// boxes. Returns 0 for configurations admitting no partition (such a
/// term does not occur in the sum).
pub fn aut_factor(a: &[i64], gs: &[i64], mode: AutMode) -> u64 {
    assert_eq!(a.len(), gs.len(), "decoration vectors must align");
    let mut acc = 1u64;
    for (ai, gi) in a.iter().zip(gs) {
        acc *= partition_count(*ai, *gi, mode);
        if acc == 0 {
            return 0;
        }
    }
    acc
}

/// One evaluated term of the discrepancy enumeration, for verbose traces.
#[derive(Clone, Debug)]
pub struct DeltaTerm {
    pub genus: i64,
    pub d_e: i64,
    pub parts: Vec<(CurveClass, i64, i64)>,
    pub h: i64,
    pub m: i64,
    pub value: Rational,
}

/// The discrepancy Delta(g, beta): outer factor (e - 1) times the
/// genus-g coefficient of
/// [ (-1)^e (e-1) Stat + (K1 - 1) * R_twopoint ] * F_V2(e) * F_V3,
/// where Stat enumerates splittings of the genus over decorated
/// decompositions beta = d_e E + sum of parts and queries the stationary
/// oracle for each generated key.
pub fn delta_full(
    preset: &SurfacePreset,
    beta: &CurveClass,
    genus: i64,
    view: &TableView,
    oracle: &StationaryOracle,
    nmax: usize,
    aut_mode: AutMode,
) -> Result<Rational, Error> {
    Ok(delta_full_trace(preset, beta, genus, view, oracle, nmax, aut_mode)?.0)
}

pub fn delta_full_trace(
    preset: &SurfacePreset,
    beta: &CurveClass,
    genus: i64,
    view: &TableView,
    oracle: &StationaryOracle,
    nmax: usize,
    aut_mode: AutMode,
) -> Result<(Rational, Vec<DeltaTerm>), Error> {
    assert!(genus >= 0, "genus must be nonnegative");
    let tangency = preset.tangency(beta);
    let e = tangency + 1;
    if e < 2 {
        return Err(SeriesError::InvalidTangency(e).into());
    }
    let ee = preset
        .dot(&preset.anticanonical, &preset.anticanonical)
        .expect("anticanonical class");
    let mut trace = Vec::new();

    // stationary correction series, genus slot by genus slot
    let mut stat = GenusSeries::zero(genus);
    if genus >= 1 {
        let decompositions = preset.decompose_for_delta(beta, nmax)?;
        for gv in 1..=genus {
            let mut acc = Rational::zero();
            for dec in &decompositions {
                let groups = group_parts(&dec.parts);
                let mut decorations = Vec::new();
                enumerate_decorations(&groups, 0, gv, 2 * gv - 2, &mut Vec::new(), &mut decorations);
                for decoration in decorations {
                    let g_sum: i64 = decoration.iter().map(|(_, g, _)| g).sum();
                    let a_sum: i64 = decoration.iter().map(|(_, _, a)| a).sum();
                    let h = gv - g_sum;
                    let m = 2 * gv - 2 - a_sum;
                    if h < 0 || m < 0 {
                        continue;
                    }
                    let a_parts: Vec<i64> = decoration.iter().map(|(_, _, a)| *a).collect();
                    let g_parts: Vec<i64> = decoration.iter().map(|(_, g, _)| *g).collect();
                    let aut = aut_factor(&a_parts, &g_parts, aut_mode);
                    if aut == 0 {
                        continue;
                    }
                    let key = StationaryKey::new(h, a_parts.clone(), m, dec.d_e);
                    let stationary = oracle.query(&key)?;
                    if stationary.is_zero() {
                        continue;
                    }
                    let mut product = Rational::one();
                    for (class, g_j, _) in &decoration {
                        let t = preset.tangency(class);
                        let r = view.get_strict(InvariantKind::LogMax, class, *g_j)?;
                        product *= tangency_sign(t) * rat_int(t) * r;
                    }
                    if product.is_zero() {
                        continue;
                    }
                    let sym = symmetry_factor(&decoration);
                    let ee_pow = if m == 0 {
                        Rational::one()
                    } else {
                        let mut p = Rational::one();
                        for _ in 0..m {
                            p *= rat_int(ee);
                        }
                        p
                    };
                    let sign = tangency_sign(gv - 1 + ee * dec.d_e);
                    let weight =
                        sign * ee_pow / (factorial(m) * rat_int(aut as i64) * rat_int(sym));
                    let value = weight * stationary * product;
                    if !value.is_zero() {
                        trace.push(DeltaTerm {
                            genus: gv,
                            d_e: dec.d_e,
                            parts: decoration.clone(),
                            h,
                            m,
                            value: value.clone(),
                        });
                    }
                    acc += value;
                }
            }
            stat = stat.add(&GenusSeries::monomial(gv, acc, genus));
        }
    }

    // one-marking correction series (K1 - 1) * R_twopoint
    let k1 = kernel_k1(genus);
    let mut corr = GenusSeries::zero(genus);
    for gv in 1..=genus {
        let mut acc = Rational::zero();
        for i in 0..gv {
            let r = view.get_strict(InvariantKind::LogTwoPoint, beta, i)?;
            acc += r * k1.coefficient(gv - i)?;
        }
        corr = corr.add(&GenusSeries::monomial(gv, acc, genus));
    }

    let inner = stat
        .scale(&(tangency_sign(e) * rat_int(e - 1)))
        .add(&corr);
    let f2 = kernel_v2(e, genus)?;
    let f3 = kernel_v3(genus);
    let assembled = inner.mul(&f2.mul(&f3)?)?;
    let delta = assembled.coefficient(genus)? * rat_int(e - 1);
    Ok((delta, trace))
}

fn factorial(n: i64) -> Rational {
    let mut acc = Rational::one();
    for i in 2..=n {
        acc *= rat_int(i);
    }
    acc
}

fn group_parts(parts: &[CurveClass]) -> Vec<(CurveClass, usize)> {
    let mut groups: Vec<(CurveClass, usize)> = Vec::new();
    for p in parts {
        match groups.last_mut() {
            Some((c, n)) if c == p => *n += 1,
            _ => groups.push((p.clone(), 1)),
        }
    }
    groups
}

/// Enumerate unordered decorations: for each group of identical parts, a
/// nondecreasing sequence of (genus, psi-power) pairs, pruned by the
/// total genus and psi budgets.
fn enumerate_decorations(
    groups: &[(CurveClass, usize)],
    idx: usize,
    g_budget: i64,
    a_budget: i64,
    current: &mut Vec<(CurveClass, i64, i64)>,
    out: &mut Vec<Vec<(CurveClass, i64, i64)>>,
) {
    if g_budget < 0 || a_budget < 0 {
        return;
    }
    if idx == groups.len() {
        out.push(current.clone());
        return;
    }
    let (class, count) = &groups[idx];
    let mut seq = Vec::with_capacity(*count);
    fill_group(
        class, *count, (0, 0), g_budget, a_budget, &mut seq, groups, idx, current, out,
    );
}

#[allow(clippy::too_many_arguments)]
fn fill_group(
    class: &CurveClass,
    remaining: usize,
    min_pair: (i64, i64),
    g_budget: i64,
    a_budget: i64,
    seq: &mut Vec<(i64, i64)>,
    groups: &[(CurveClass, usize)],
    idx: usize,
    current: &mut Vec<(CurveClass, i64, i64)>,
    out: &mut Vec<Vec<(CurveClass, i64, i64)>>,
) {
    if remaining == 0 {
        let added = seq.len();
        for (g, a) in seq.iter() {
            current.push((class.clone(), *g, *a));
        }
        enumerate_decorations(groups, idx + 1, g_budget, a_budget, current, out);
        for _ in 0..added {
            current.pop();
        }
        return;
    }
    for g in 0..=g_budget {
        for a in 0..=a_budget {
            if (g, a) < min_pair {
                continue;
            }
            seq.push((g, a));
            fill_group(
                class,
                remaining - 1,
                (g, a),
                g_budget - g,
                a_budget - a,
                seq,
                groups,
                idx,
                current,
                out,
            );
            seq.pop();
        }
    }
}

/// Product of factorials of multiplicities of identical decorated parts;
/// dividing by it makes the sum range over unordered configurations.
fn symmetry_factor(decoration: &[(CurveClass, i64, i64)]) -> i64 {
    let mut sorted = decoration.to_vec();
    sorted.sort();
    let mut sym = 1i64;
    let mut run = 1i64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
            sym *= run;
        } else {
            run = 1;
        }
    }
    sym
}
