//! End-to-end identity checks: the projective-bundle correspondence, its
//! genus-1 form, the blow-up variant, the open-closed variant, and the
//! structure constants of the theta multiplication. Each check reads its
//! dataset strictly: a needed-but-missing invariant is an error naming
//! the key, never a silent zero.

use std::collections::BTreeMap;
use std::fmt;

use num::Zero;

use crate::degeneration::{assemble_nz, DegenerationInput};
use crate::error::Error;
use crate::genus_series::{
    kernel_sin_power, kernel_v2, kernel_v3, rat, rat_int, GenusSeries, Rational, SeriesError,
};
use crate::invariant_store::{Dataset, InvariantKind, TableView};
use crate::loglocal::{delta1_view, delta_full, AutMode};
use crate::surface_lattice::{CurveClass, SurfacePreset};

/// Genus and degree truncation for a check run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub genus: i64,
    pub degree: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualEntry {
    pub class: CurveClass,
    pub genus: i64,
    pub value: Rational,
}

/// Outcome of one identity check: per-class per-genus residuals, the
/// pass flag (all residuals zero), and every dataset key the check read.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub identity: String,
    pub preset: String,
    pub genus_cap: i64,
    pub degree_cap: i64,
    pub residuals: Vec<ResidualEntry>,
    pub pass: bool,
    pub queried: Vec<String>,
}

impl CheckReport {
    fn new(identity: &str, preset: &str, caps: Caps) -> Self {
        CheckReport {
            identity: identity.to_string(),
            preset: preset.to_string(),
            genus_cap: caps.genus,
            degree_cap: caps.degree,
            residuals: Vec::new(),
            pass: true,
            queried: Vec::new(),
        }
    }

    fn push(&mut self, class: CurveClass, genus: i64, value: Rational) {
        if !value.is_zero() {
            self.pass = false;
        }
        self.residuals.push(ResidualEntry {
            class,
            genus,
            value,
        });
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "identity {} on preset {} (genus cap {}, degree cap {}): {}",
            self.identity,
            self.preset,
            self.genus_cap,
            self.degree_cap,
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        for r in &self.residuals {
            writeln!(
                f,
                "  class {:<10} genus {:<2} residual {}",
                r.class.to_string(),
                r.genus,
                crate::genus_series::format_rational(&r.value)
            )?;
        }
        Ok(())
    }
}

/// The per-class kernel of the correspondence:
/// (-1)^e (e-1)^2 F_V2(e) F_V3. Its genus-0 coefficient is 1, which is
/// the genus-0 collapse of the identity.
pub fn c_series(e: i64, cap: i64) -> Result<GenusSeries, Error> {
    if e < 2 {
        return Err(SeriesError::InvalidTangency(e).into());
    }
    let sign = if e % 2 == 0 { 1 } else { -1 };
    let prod = kernel_v2(e, cap)?.mul(&kernel_v3(cap))?;
    Ok(prod.scale(&rat(sign * (e - 1) * (e - 1), 1)))
}

/// Tangency + 1: the order parameter the vertex kernels take for a class
/// of the blown-up pair.
fn class_e(preset: &SurfacePreset, class: &CurveClass) -> Result<i64, Error> {
    let e = preset.tangency(class) + 1;
    if e < 2 {
        return Err(SeriesError::InvalidTangency(e).into());
    }
    Ok(e)
}

/// The bundle series at one class: read directly when present, otherwise
/// assembled from the two-point log series through the degeneration.
fn z_series(
    preset: &SurfacePreset,
    view: &TableView,
    class: &CurveClass,
    genus_cap: i64,
) -> Result<GenusSeries, Error> {
    if view.table().has_kind_at(InvariantKind::GwZ, class) {
        let mut s = GenusSeries::zero(genus_cap);
        for g in 0..=genus_cap {
            let v = view.get_strict(InvariantKind::GwZ, class, g)?;
            s = s.add(&GenusSeries::monomial(g, v, genus_cap));
        }
        return Ok(s);
    }
    if view.table().has_kind_at(InvariantKind::LogTwoPoint, class) {
        let mut r = GenusSeries::zero(genus_cap);
        for g in 0..=genus_cap {
            let v = view.get_strict(InvariantKind::LogTwoPoint, class, g)?;
            r = r.add(&GenusSeries::monomial(g, v, genus_cap));
        }
        return assemble_nz(&DegenerationInput {
            e: class_e(preset, class)?,
            r_twopoint: r,
            genus_cap,
        });
    }
    Err(Error::MissingInvariant {
        kind: InvariantKind::GwZ.as_str().to_string(),
        class: class.to_string(),
        genus: 0,
    })
}

/// The local series sum over g of N_g h^(2g) at one class: read directly
/// when present, otherwise resummed from the BPS family of the given
/// kind (with the open-closed sign when resumming from the open family).
fn local_gw_series(
    preset: &SurfacePreset,
    view: &TableView,
    class: &CurveClass,
    genus_cap: i64,
    bps_kind: InvariantKind,
) -> Result<GenusSeries, Error> {
    if bps_kind == InvariantKind::GvLocal && view.table().has_kind_at(InvariantKind::GwLocal, class)
    {
        let mut s = GenusSeries::zero(genus_cap);
        for g in 0..=genus_cap {
            let v = view.get_strict(InvariantKind::GwLocal, class, g)?;
            s = s.add(&GenusSeries::monomial(g, v, genus_cap));
        }
        return Ok(s);
    }
    // string-framed resummation: genus-g data sits at u^(g-1); shift back
    // into the h^(2g) frame at the end
    let kernel_cap = genus_cap.max(1);
    let mut resummed = GenusSeries::zero(kernel_cap);
    let content = class.content();
    for k in 1..=content.max(1) {
        if content % k != 0 {
            continue;
        }
        let divisor = CurveClass(class.0.iter().map(|c| c / k).collect());
        if !preset.is_effective(&divisor) || divisor.is_zero() {
            continue;
        }
        for g in 0..=genus_cap {
            let n = view.get_strict(bps_kind, &divisor, g)?;
            let n = if bps_kind == InvariantKind::OpenBps {
                // closed BPS from the winding-1 open family
                let sign = if g % 2 == 0 { -1 } else { 1 };
                n * rat_int(sign)
            } else {
                n
            };
            resummed = resummed.add(&kernel_sin_power(g, k, kernel_cap).scale(&(n * rat(1, k))));
        }
    }
    let mut out = GenusSeries::zero(genus_cap);
    for g in 0..=genus_cap {
        out = out.add(&GenusSeries::monomial(
            g,
            resummed.coefficient(g - 1)?,
            genus_cap,
        ));
    }
    Ok(out)
}

/// Classes a check runs over: the support of the bundle data, or of the
/// two-point data when no bundle entries exist. The zero class and the
/// formal frame term contribute to no effective coefficient and are
/// excluded.
fn check_classes(ds: &Dataset, caps: Caps) -> Vec<CurveClass> {
    let mut classes = ds.table.classes_of_kind(InvariantKind::GwZ);
    if classes.is_empty() {
        classes = ds.table.classes_of_kind(InvariantKind::LogTwoPoint);
    }
    classes
        .into_iter()
        .filter(|c| !c.is_zero() && ds.preset.degree(c) <= caps.degree)
        .collect()
}

/// The correspondence at every genus up to the cap: residual per
/// (class, genus) of the bundle series minus
/// [ c_series(e) * local series - Delta(g, class) ].
pub fn check_theorem_main(ds: &Dataset, caps: Caps) -> Result<CheckReport, Error> {
    check_main_with_kind(ds, caps, InvariantKind::GvLocal, "main")
}

fn check_main_with_kind(
    ds: &Dataset,
    caps: Caps,
    bps_kind: InvariantKind,
    identity: &str,
) -> Result<CheckReport, Error> {
    let view = TableView::new(&ds.table);
    let mut report = CheckReport::new(identity, &ds.preset.id, caps);
    for class in check_classes(ds, caps) {
        let e = class_e(&ds.preset, &class)?;
        let lhs = z_series(&ds.preset, &view, &class, caps.genus)?;
        let n_series = local_gw_series(&ds.preset, &view, &class, caps.genus, bps_kind)?;
        let convolved = c_series(e, caps.genus)?.mul(&n_series)?;
        for g in 0..=caps.genus {
            let delta = delta_full(
                &ds.preset,
                &class,
                g,
                &view,
                &ds.oracle,
                usize::MAX >> 1,
                AutMode::AtMost,
            )?;
            let residual =
                lhs.coefficient(g)? - (convolved.coefficient(g)? - delta);
            report.push(class.clone(), g, residual);
        }
    }
    report.queried = view.queried_keys();
    Ok(report)
}

/// The genus-1 form: residual of N(bundle, genus 1) - (n_1 - delta_1)
/// per class.
pub fn check_maing1(ds: &Dataset) -> Result<CheckReport, Error> {
    let caps = Caps {
        genus: 1,
        degree: ds.table.degree_cap,
    };
    let view = TableView::new(&ds.table);
    let mut report = CheckReport::new("maing1", &ds.preset.id, caps);
    for class in check_classes(ds, caps) {
        let z1 = z_series(&ds.preset, &view, &class, 1)?.coefficient(1)?;
        let n1 = view.get_strict(InvariantKind::GvLocal, &class, 1)?;
        let d1 = delta1_view(&ds.preset, &class, &view)?;
        report.push(class.clone(), 1, z1 - (n1 - d1));
    }
    report.queried = view.queried_keys();
    Ok(report)
}

/// The blow-up form at genus 1: residual of
/// N(bundle, genus 1) - (N(blow-up, 1) - N(blow-up, 0)/12 - delta_1).
/// When no blow-up entries are present, the flop identification with the
/// local family is used.
pub fn check_blowup(ds: &Dataset) -> Result<CheckReport, Error> {
    let caps = Caps {
        genus: 1,
        degree: ds.table.degree_cap,
    };
    let view = TableView::new(&ds.table);
    let mut report = CheckReport::new("blowup", &ds.preset.id, caps);
    for class in check_classes(ds, caps) {
        let z1 = z_series(&ds.preset, &view, &class, 1)?.coefficient(1)?;
        let kind = if view.table().has_kind_at(InvariantKind::GwW, &class) {
            InvariantKind::GwW
        } else {
            InvariantKind::GwLocal
        };
        let w0 = view.get_strict(kind, &class, 0)?;
        let w1 = view.get_strict(kind, &class, 1)?;
        let d1 = delta1_view(&ds.preset, &class, &view)?;
        report.push(class.clone(), 1, z1 - (w1 - w0 * rat(1, 12) - d1));
    }
    report.queried = view.queried_keys();
    Ok(report)
}

/// Open-closed consistency: per-key residuals of
/// n_g(closed) - (-1)^(g+1) n_g(open), followed by the full series
/// identity run with the sign-mapped open family in place of the closed
/// one (when bundle or two-point data is present to check it against).
pub fn check_open_closed(ds: &Dataset, caps: Caps) -> Result<CheckReport, Error> {
    let view = TableView::new(&ds.table);
    let mut report = CheckReport::new("open-closed", &ds.preset.id, caps);
    let mut keys: BTreeMap<(CurveClass, i64), ()> = BTreeMap::new();
    for ((kind, class, genus), _) in ds.table.iter() {
        if *kind == InvariantKind::GvLocal || *kind == InvariantKind::OpenBps {
            keys.insert((class.clone(), *genus), ());
        }
    }
    for (class, genus) in keys.keys() {
        let closed = view.get_strict(InvariantKind::GvLocal, class, *genus)?;
        let open = view.get_strict(InvariantKind::OpenBps, class, *genus)?;
        let sign = if genus % 2 == 0 { -1 } else { 1 };
        report.push(class.clone(), *genus, closed - open * rat_int(sign));
    }
    let queried_phase1 = view.queried_keys();
    if ds.table.has_kind(InvariantKind::GwZ) || ds.table.has_kind(InvariantKind::LogTwoPoint) {
        let series_report = check_main_with_kind(ds, caps, InvariantKind::OpenBps, "open-closed")?;
        for r in series_report.residuals {
            report.push(r.class, r.genus, r.value);
        }
        let mut merged = queried_phase1;
        merged.extend(series_report.queried);
        merged.sort();
        merged.dedup();
        report.queried = merged;
    } else {
        report.queried = queried_phase1;
    }
    Ok(report)
}

/// Genus-0 two-point invariants keyed by (class, fixed order, varying
/// order), the inputs of the theta structure constants.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TwoPointTable {
    entries: BTreeMap<(CurveClass, i64, i64), Rational>,
}

impl TwoPointTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, class: CurveClass, a: i64, b: i64, value: Rational) {
        self.entries.insert((class, a, b), value);
    }

    pub fn get_strict(&self, class: &CurveClass, a: i64, b: i64) -> Result<Rational, Error> {
        self.entries
            .get(&(class.clone(), a, b))
            .cloned()
            .ok_or_else(|| Error::MissingInvariant {
                kind: format!("two_point({a},{b})"),
                class: class.to_string(),
                genus: 0,
            })
    }
}

/// Structure constant of the theta multiplication:
/// N^beta_(p,q,r) = (p - r) R_(0,(q, p-r)) + (q - r) R_(0,(p, q-r)).
/// Terms with zero prefactor never query the table; no divisions occur.
pub fn theta_structure(
    p_ord: i64,
    q_ord: i64,
    r_ord: i64,
    beta: &CurveClass,
    table: &TwoPointTable,
) -> Result<Rational, Error> {
    assert!(p_ord >= 1 && q_ord >= 1 && r_ord >= 0, "invalid contact orders");
    let mut total = Rational::zero();
    if p_ord != r_ord {
        let r = table.get_strict(beta, q_ord, p_ord - r_ord)?;
        total += rat_int(p_ord - r_ord) * r;
    }
    if q_ord != r_ord {
        let r = table.get_strict(beta, p_ord, q_ord - r_ord)?;
        total += rat_int(q_ord - r_ord) * r;
    }
    Ok(total)
}
