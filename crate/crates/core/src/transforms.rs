//! Resummation and conversion maps between the invariant families:
//! BPS <-> Gromov-Witten multiple-cover resummation, the genus-1 closed
//! form, the open-closed sign map, the genus-0 log-local conversion, and
//! the two-point <-> maximal-tangency series relation.
//!
//! The resummed generating function carries the genus-g data at
//! h^(2g - 2), so its genus-0 part sits at the u^-1 pole and the genus-1
//! part at u^0.

use crate::error::Error;
use crate::genus_series::{kernel_k1, kernel_sin_power, kernel_v3, rat, GenusSeries, Rational, SeriesError};
use crate::invariant_store::{InvariantKind, InvariantTable, NovikovSeries};
use crate::surface_lattice::{CurveClass, SurfacePreset};

/// Multiple-cover resummation of a BPS table:
/// F = sum over beta, g, k of (n_(g,beta) / k) (2 sin(k h/2))^(2g-2) Q^(k beta),
/// truncated by the degree cap.
pub fn gv_to_gw(
    preset: &SurfacePreset,
    table: &InvariantTable,
    degree_cap: i64,
    genus_cap: i64,
) -> NovikovSeries {
    let mut out = NovikovSeries::zero(preset, degree_cap, genus_cap);
    for ((kind, class, genus), value) in table.iter() {
        if *kind != InvariantKind::GvLocal || class.is_zero() {
            continue;
        }
        let d = preset.degree(class);
        if d <= 0 {
            continue;
        }
        let mut k = 1i64;
        while k * d <= degree_cap {
            let kernel = kernel_sin_power(*genus, k, genus_cap);
            out.add_term(
                preset,
                class.scaled(k),
                &kernel.scale(&(value.clone() * rat(1, k))),
            );
            k += 1;
        }
    }
    out
}

/// Invert the multiple-cover resummation by induction on degree, then on
/// the h-power. Returns the unique BPS table reproducing the series, or
/// `NotInImage` when a residual term survives at the caps.
pub fn gw_to_gv(preset: &SurfacePreset, f: &NovikovSeries) -> Result<InvariantTable, Error> {
    let genus_cap = f.genus_cap;
    let degree_cap = f.degree_cap;
    let mut table = InvariantTable::new(&preset.id, genus_cap, degree_cap);
    let mut residual = f.clone();
    let classes: Vec<CurveClass> = preset
        .enumerate_effective_upto(degree_cap)
        .into_iter()
        .filter(|c| !c.is_zero())
        .collect();
    for class in &classes {
        let mut series = residual.coefficient(class);
        if series.is_zero() {
            continue;
        }
        // peel off n_g from the h^(2g-2) slot; each kernel starts there
        // with leading coefficient 1
        let mut extracted: Vec<(i64, Rational)> = Vec::new();
        for g in 0..=genus_cap + 1 {
            let slot = g - 1;
            if slot > series.cap() {
                break;
            }
            let c = series.coefficient(slot)?;
            if c.is_zero() {
                continue;
            }
            if g > genus_cap {
                return Err(Error::NotInImage {
                    class: class.to_string(),
                    upow: slot,
                });
            }
            series = series.sub(&kernel_sin_power(g, 1, genus_cap).scale(&c));
            extracted.push((g, c));
        }
        if !series.is_zero() {
            let upow = series.min_upow().unwrap_or(0);
            return Err(Error::NotInImage {
                class: class.to_string(),
                upow,
            });
        }
        // subtract the multiple covers this class feeds into
        let d = preset.degree(class);
        for (g, n) in &extracted {
            table.insert(InvariantKind::GvLocal, class.clone(), *g, n.clone());
            let mut k = 2i64;
            while k * d <= degree_cap {
                let kernel = kernel_sin_power(*g, k, genus_cap);
                residual.add_term(
                    preset,
                    class.scaled(k),
                    &kernel.scale(&(-n.clone() * rat(1, k))),
                );
                k += 1;
            }
        }
        // clear the processed class
        let processed = residual.coefficient(class);
        residual.add_term(preset, class.clone(), &processed.neg());
    }
    Ok(table)
}

/// Genus-1 multiple-cover closed form at a primitive class:
/// n_1 = N_1 - N_0 / 12. The general path is [`gw_to_gv`].
pub fn genus1_gv_closed_form(n0_gw: &Rational, n1_gw: &Rational) -> Rational {
    n1_gw - n0_gw * rat(1, 12)
}

/// Entrywise sign map n_g -> (-1)^(g+1) n_g between a closed BPS family
/// and the winding-1 open one. Applying it twice is the identity.
pub fn open_closed_sign(
    table: &InvariantTable,
    from: InvariantKind,
    to: InvariantKind,
) -> InvariantTable {
    let mut out = InvariantTable::new(&table.preset_id, table.genus_cap, table.degree_cap);
    for ((kind, class, genus), value) in table.iter() {
        if *kind != from {
            continue;
        }
        let sign = if genus % 2 == 0 { -1 } else { 1 };
        out.insert(to, class.clone(), *genus, value * rat(sign, 1));
    }
    out
}

/// Genus-0 log-local conversion: R_0 = (-1)^(e-1) e N_0 with e the
/// tangency of the class on the given pair.
pub fn loglocal_g0(preset: &SurfacePreset, beta: &CurveClass, n0_local: &Rational) -> Result<Rational, Error> {
    let e = preset.tangency(beta);
    if e <= 0 {
        return Err(Error::ZeroTangency(e));
    }
    let sign = if (e - 1) % 2 == 0 { 1 } else { -1 };
    Ok(n0_local * rat(sign * e, 1))
}

/// Inverse direction of [`loglocal_g0`]: N_0 = (-1)^(e-1) R_0 / e.
pub fn local_g0_from_log(preset: &SurfacePreset, beta: &CurveClass, r0: &Rational) -> Result<Rational, Error> {
    let e = preset.tangency(beta);
    if e <= 0 {
        return Err(Error::ZeroTangency(e));
    }
    let sign = if (e - 1) % 2 == 0 { 1 } else { -1 };
    Ok(r0 * rat(sign, e))
}

/// Two-point genus-0 invariant from the local BPS number of the blown-up
/// geometry: R_(0,(1,e-1)) = (-1)^e (e-1) n_0.
pub fn two_point_from_local_g0(e: i64, n0: &Rational) -> Result<Rational, Error> {
    if e < 2 {
        return Err(SeriesError::InvalidTangency(e).into());
    }
    let sign = if e % 2 == 0 { 1 } else { -1 };
    Ok(n0 * rat(sign * (e - 1), 1))
}

/// Maximal-tangency series of the blown-up pair from the two-point series
/// of the base pair: hat(R) = R * K1 genus by genus, so
/// hat(R)_g = R_g + sum over i < g of R_i N(g-i, 1).
pub fn hat_from_two_point(r_twopoint: &GenusSeries) -> GenusSeries {
    r_twopoint
        .mul(&kernel_k1(r_twopoint.cap()))
        .expect("correction kernel is pole-free")
}

/// Inverse of [`hat_from_two_point`]: R = hat(R) * (2 sin(h/2) / h).
pub fn two_point_from_hat(r_hat: &GenusSeries) -> GenusSeries {
    r_hat
        .mul(&kernel_v3(r_hat.cap()))
        .expect("kernel is pole-free")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus_series::rat_int;
    use rand::{Rng, SeedableRng};

    fn cc(coords: &[i64]) -> CurveClass {
        CurveClass(coords.to_vec())
    }

    fn random_table(preset: &SurfacePreset, seed: u64, genus_cap: i64, degree_cap: i64) -> InvariantTable {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = InvariantTable::new(&preset.id, genus_cap, degree_cap);
        for c in preset.enumerate_effective_upto(degree_cap) {
            if c.is_zero() {
                continue;
            }
            for g in 0..=genus_cap {
                if rng.gen_bool(0.4) {
                    t.insert(
                        InvariantKind::GvLocal,
                        c.clone(),
                        g,
                        rat(rng.gen_range(-20..21), 1 + rng.gen_range(0..5)),
                    );
                }
            }
        }
        t
    }

    #[test]
    fn gv_to_gw_single_class_examples() {
        let p = SurfacePreset::p2();
        let mut t = InvariantTable::new("p2", 2, 6);
        t.insert(InvariantKind::GvLocal, cc(&[1]), 0, rat_int(1));
        let f = gv_to_gw(&p, &t, 6, 2);
        // double cover: coefficient of Q^(2 beta) at h^-2 is 1/8
        assert_eq!(f.coefficient(&cc(&[2])).coefficient(-1).unwrap(), rat(1, 8));
        // genus-1 entry contributes through the constant kernel
        let mut t1 = InvariantTable::new("p2", 2, 6);
        t1.insert(InvariantKind::GvLocal, cc(&[1]), 1, rat(5, 7));
        let f1 = gv_to_gw(&p, &t1, 6, 2);
        assert_eq!(f1.coefficient(&cc(&[1])).coefficient(0).unwrap(), rat(5, 7));
        // empty table
        let empty = InvariantTable::new("p2", 2, 6);
        assert!(gv_to_gw(&p, &empty, 6, 2).is_zero());
    }

    #[test]
    fn gw_to_gv_inverts_by_hand_at_depth_one() {
        // F = Q^beta (h^-2 + 1/12 + h^2/240 + ...) at a primitive-degree
        // class is the pure genus-0 kernel: n_0 = 1, nothing else
        let p = SurfacePreset::p2();
        let mut f = NovikovSeries::zero(&p, 2, 3);
        f.add_term(&p, cc(&[1]), &kernel_sin_power(0, 1, 3));
        let t = gw_to_gv(&p, &f).unwrap();
        assert_eq!(t.get(InvariantKind::GvLocal, &cc(&[1]), 0), rat_int(1));
        assert_eq!(t.count_kind(InvariantKind::GvLocal), 1);
        // zero series -> empty table
        let t0 = gw_to_gv(&p, &NovikovSeries::zero(&p, 2, 3)).unwrap();
        assert!(t0.is_empty());
    }

    #[test]
    fn gv_gw_round_trip_randomized() {
        for preset in [SurfacePreset::p2(), SurfacePreset::f1()] {
            for seed in 0..6u64 {
                let t = random_table(&preset, seed, 4, 6);
                let f = gv_to_gw(&preset, &t, 6, 4);
                let back = gw_to_gv(&preset, &f).unwrap();
                assert_eq!(back, t, "preset {} seed {}", preset.id, seed);
            }
        }
    }

    #[test]
    fn gw_to_gv_rejects_non_image() {
        let p = SurfacePreset::p2();
        // a bare h^2 term at a primitive class cannot come from the
        // resummation at genus cap 1
        let mut f = NovikovSeries::zero(&p, 2, 1);
        f.add_term(&p, cc(&[1]), &GenusSeries::monomial(1, rat_int(1), 1));
        // g=2 kernel would start at u^1 but the cap is 1
        assert!(matches!(
            gw_to_gv(&p, &f),
            Err(Error::NotInImage { .. })
        ));
    }

    #[test]
    fn genus1_closed_form_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n0 = rat(rng.gen_range(-30..30), 1 + rng.gen_range(0..6));
            let n1 = rat(rng.gen_range(-30..30), 1 + rng.gen_range(0..6));
            let big_n1 = &n1 + &n0 * rat(1, 12);
            assert_eq!(genus1_gv_closed_form(&n0, &big_n1), n1);
        }
        assert_eq!(genus1_gv_closed_form(&rat_int(0), &rat_int(0)), rat_int(0));
    }

    #[test]
    fn genus1_closed_form_agrees_with_gw_to_gv() {
        let p = SurfacePreset::p2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n0 = rat(rng.gen_range(-20..20), 1 + rng.gen_range(0..4));
            let n1 = rat(rng.gen_range(-20..20), 1 + rng.gen_range(0..4));
            let mut t = InvariantTable::new("p2", 1, 2);
            t.insert(InvariantKind::GvLocal, cc(&[1]), 0, n0.clone());
            t.insert(InvariantKind::GvLocal, cc(&[1]), 1, n1.clone());
            let f = gv_to_gw(&p, &t, 2, 1);
            let series = f.coefficient(&cc(&[1]));
            let n0_gw = series.coefficient(-1).unwrap();
            let n1_gw = series.coefficient(0).unwrap();
            assert_eq!(n1_gw, &n1 + &n0 * rat(1, 12));
            assert_eq!(genus1_gv_closed_form(&n0_gw, &n1_gw), n1);
        }
    }

    #[test]
    fn open_closed_sign_map() {
        let mut t = InvariantTable::new("f1", 3, 4);
        t.insert(InvariantKind::GvLocal, cc(&[0, 1]), 0, rat_int(-2));
        t.insert(InvariantKind::GvLocal, cc(&[0, 1]), 1, rat_int(7));
        t.insert(InvariantKind::GvLocal, cc(&[0, 1]), 2, rat(3, 5));
        let open = open_closed_sign(&t, InvariantKind::GvLocal, InvariantKind::OpenBps);
        assert_eq!(open.get(InvariantKind::OpenBps, &cc(&[0, 1]), 0), rat_int(2));
        assert_eq!(open.get(InvariantKind::OpenBps, &cc(&[0, 1]), 1), rat_int(7));
        assert_eq!(open.get(InvariantKind::OpenBps, &cc(&[0, 1]), 2), rat(-3, 5));
        let back = open_closed_sign(&open, InvariantKind::OpenBps, InvariantKind::GvLocal);
        assert_eq!(back, t);
    }

    #[test]
    fn loglocal_g0_examples_and_round_trip() {
        let f1 = SurfacePreset::f1();
        // tangency 1 class: R0 = N0
        let b = cc(&[1, 0]);
        assert_eq!(loglocal_g0(&f1, &b, &rat_int(1)).unwrap(), rat_int(1));
        // tangency 3 class: R0 = 3 N0
        let bf = cc(&[1, 1]);
        assert_eq!(loglocal_g0(&f1, &bf, &rat_int(3)).unwrap(), rat_int(9));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for c in f1.enumerate_effective_upto(4) {
            if c.is_zero() {
                continue;
            }
            for _ in 0..3 {
                let n0 = rat(rng.gen_range(-20..20), 1 + rng.gen_range(0..5));
                let r0 = loglocal_g0(&f1, &c, &n0).unwrap();
                assert_eq!(local_g0_from_log(&f1, &c, &r0).unwrap(), n0);
            }
        }
        let zero = CurveClass::zero(2);
        assert!(matches!(
            loglocal_g0(&f1, &zero, &rat_int(1)),
            Err(Error::ZeroTangency(0))
        ));
    }

    #[test]
    fn two_point_from_local_examples() {
        assert_eq!(two_point_from_local_g0(2, &rat_int(1)).unwrap(), rat_int(1));
        assert_eq!(two_point_from_local_g0(3, &rat_int(-2)).unwrap(), rat_int(4));
        assert!(two_point_from_local_g0(1, &rat_int(1)).is_err());
    }

    #[test]
    fn hat_relation_round_trip_and_coefficients() {
        let r = GenusSeries::from_terms(&[(0, rat_int(4)), (1, rat(-1, 2))], 1).unwrap();
        let hat = hat_from_two_point(&r);
        // genus 0 unchanged, genus 1 picks up R0/24
        assert_eq!(hat.coefficient(0).unwrap(), rat_int(4));
        assert_eq!(hat.coefficient(1).unwrap(), rat(-1, 2) + rat(4, 24));
        assert_eq!(two_point_from_hat(&hat), r);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let terms: Vec<(i64, Rational)> = (0..=3)
                .map(|g| (g, rat(rng.gen_range(-9..10), 1 + rng.gen_range(0..4))))
                .collect();
            let r = GenusSeries::from_terms(&terms, 3).unwrap();
            assert_eq!(two_point_from_hat(&hat_from_two_point(&r)), r);
        }
    }
}
