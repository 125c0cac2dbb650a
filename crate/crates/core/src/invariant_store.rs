//! Typed storage, dataset I/O, and Novikov-ring packaging for the
//! invariant families the correspondences consume.
//!
//! - [`InvariantTable`]: keyed store (kind, class, genus) -> rational
//! - [`TableView`]: strict read wrapper that records every queried key and
//!   turns a missing key into a hard error (the identity checks run in
//!   strict mode; silently-zero inputs would make them meaningless)
//! - [`StationaryOracle`]: stationary invariants of the elliptic curve,
//!   with the genus-1 family built in and everything else table-backed
//! - [`NovikovSeries`]: finitely supported map class -> genus series with
//!   graded truncation
//! - [`load_dataset`] / [`save_dataset`]: JSON files, byte-stable on the
//!   canonical form

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::genus_series::{format_rational, parse_rational, rat, GenusSeries, Rational};
use crate::surface_lattice::{CurveClass, SurfacePreset};

/// The invariant families, tagged the way the correspondences consume them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InvariantKind {
    /// Local BPS numbers of the blown-up geometry.
    GvLocal,
    /// Local Gromov-Witten numbers of the blown-up geometry.
    GwLocal,
    /// Maximal-tangency log invariants of the surface pair (one relative
    /// point of full order).
    LogMax,
    /// Two-point log invariants with contact orders (1, e-1).
    LogTwoPoint,
    /// One-pointed invariants of the projective bundle.
    GwZ,
    /// Unmarked invariants of the blown-up bundle.
    GwW,
    /// Open BPS invariants at winding 1.
    OpenBps,
}

impl InvariantKind {
    pub const ALL: [InvariantKind; 7] = [
        InvariantKind::GvLocal,
        InvariantKind::GwLocal,
        InvariantKind::LogMax,
        InvariantKind::LogTwoPoint,
        InvariantKind::GwZ,
        InvariantKind::GwW,
        InvariantKind::OpenBps,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InvariantKind::GvLocal => "gv_local",
            InvariantKind::GwLocal => "gw_local",
            InvariantKind::LogMax => "log_max",
            InvariantKind::LogTwoPoint => "log_two_point",
            InvariantKind::GwZ => "gw_z",
            InvariantKind::GwW => "gw_w",
            InvariantKind::OpenBps => "open_bps",
        }
    }

    pub fn from_str_tag(s: &str) -> Option<InvariantKind> {
        InvariantKind::ALL.iter().copied().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for InvariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Keyed store of exact invariant values within genus and degree caps.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantTable {
    pub preset_id: String,
    pub genus_cap: i64,
    pub degree_cap: i64,
    entries: BTreeMap<(InvariantKind, CurveClass, i64), Rational>,
}

impl InvariantTable {
    pub fn new(preset_id: &str, genus_cap: i64, degree_cap: i64) -> Self {
        InvariantTable {
            preset_id: preset_id.to_string(),
            genus_cap,
            degree_cap,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, kind: InvariantKind, class: CurveClass, genus: i64, value: Rational) {
        self.entries.insert((kind, class, genus), value);
    }

    /// Lenient read: absent means zero.
    pub fn get(&self, kind: InvariantKind, class: &CurveClass, genus: i64) -> Rational {
        self.entries
            .get(&(kind, class.clone(), genus))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, kind: InvariantKind, class: &CurveClass, genus: i64) -> bool {
        self.entries.contains_key(&(kind, class.clone(), genus))
    }

    /// True if the table has any entry of this kind at this class.
    pub fn has_kind_at(&self, kind: InvariantKind, class: &CurveClass) -> bool {
        self.entries
            .range((kind, class.clone(), i64::MIN)..=(kind, class.clone(), i64::MAX))
            .next()
            .is_some()
    }

    pub fn has_kind(&self, kind: InvariantKind) -> bool {
        self.entries.keys().any(|(k, _, _)| *k == kind)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(InvariantKind, CurveClass, i64), &Rational)> {
        self.entries.iter()
    }

    /// Distinct classes carrying entries of the given kind, sorted.
    pub fn classes_of_kind(&self, kind: InvariantKind) -> Vec<CurveClass> {
        let mut out: Vec<CurveClass> = self
            .entries
            .keys()
            .filter(|(k, _, _)| *k == kind)
            .map(|(_, c, _)| c.clone())
            .collect();
        out.dedup();
        out
    }

    pub fn count_kind(&self, kind: InvariantKind) -> usize {
        self.entries.keys().filter(|(k, _, _)| *k == kind).count()
    }
}

/// Strict reader over an [`InvariantTable`] that records queried keys.
/// Every identity check goes through one of these so its report can list
/// exactly which dataset keys it consumed.
pub struct TableView<'a> {
    table: &'a InvariantTable,
    queried: RefCell<BTreeSet<(InvariantKind, CurveClass, i64)>>,
}

impl<'a> TableView<'a> {
    pub fn new(table: &'a InvariantTable) -> Self {
        TableView {
            table,
            queried: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn table(&self) -> &InvariantTable {
        self.table
    }

    /// Strict read: a missing key is a hard error naming the key.
    pub fn get_strict(
        &self,
        kind: InvariantKind,
        class: &CurveClass,
        genus: i64,
    ) -> Result<Rational, Error> {
        self.queried
            .borrow_mut()
            .insert((kind, class.clone(), genus));
        if let Some(v) = self.table.entries.get(&(kind, class.clone(), genus)) {
            Ok(v.clone())
        } else {
            Err(Error::MissingInvariant {
                kind: kind.as_str().to_string(),
                class: class.to_string(),
                genus,
            })
        }
    }

    /// Keys queried so far, rendered `kind[class]@genus`.
    pub fn queried_keys(&self) -> Vec<String> {
        self.queried
            .borrow()
            .iter()
            .map(|(k, c, g)| format!("{}[{}]@{}", k, c, g))
            .collect()
    }
}

/// Key of a stationary invariant of the elliptic curve: genus h, the
/// sorted vector of extra psi-powers a, the count m of transverse
/// point-psi insertions, and the degree d.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StationaryKey {
    pub h: i64,
    pub a: Vec<i64>,
    pub m: i64,
    pub d: i64,
}

impl StationaryKey {
    /// Normalized key: the integrand is symmetric in the markings, so the
    /// a-vector is stored sorted.
    pub fn new(h: i64, mut a: Vec<i64>, m: i64, d: i64) -> Self {
        a.sort_unstable();
        StationaryKey { h, a, m, d }
    }
}

/// Sum of reciprocals of divisors of n (n >= 1).
pub fn sigma_minus_one(n: i64) -> Rational {
    assert!(n >= 1);
    let mut acc = Rational::zero();
    for k in 1..=n {
        if n % k == 0 {
            acc += rat(1, k);
        }
    }
    acc
}

/// Pluggable provider of stationary invariants of the elliptic curve.
///
/// The full genus-1 family is built in:
/// - dimension rule: the invariant vanishes unless sum(a) + m = 2h - 2;
/// - degree d >= 1: d^n * sigma_{-1}(d) for n point insertions;
/// - degree 0: -1/24 with one point insertion, 0 otherwise.
///
/// Every other dimension-consistent query must be present in the backing
/// table; a missing one is a hard error, never a silent zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StationaryOracle {
    table: BTreeMap<StationaryKey, Rational>,
}

impl StationaryOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: StationaryKey, value: Rational) {
        self.table.insert(key, value);
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StationaryKey, &Rational)> {
        self.table.iter()
    }

    pub fn query(&self, key: &StationaryKey) -> Result<Rational, Error> {
        let asum: i64 = key.a.iter().sum();
        if key.h < 0 || key.m < 0 || key.d < 0 || key.a.iter().any(|&x| x < 0) {
            return Ok(Rational::zero());
        }
        // virtual-dimension vanishing
        if asum + key.m != 2 * key.h - 2 {
            return Ok(Rational::zero());
        }
        if key.h == 1 {
            // dimension forces a = 0^n, m = 0 here
            let n = key.a.len() as i64;
            if key.d == 0 {
                return Ok(if n == 1 { rat(-1, 24) } else { Rational::zero() });
            }
            let mut v = sigma_minus_one(key.d);
            for _ in 0..n {
                v *= rat(key.d, 1);
            }
            return Ok(v);
        }
        if let Some(v) = self.table.get(key) {
            return Ok(v.clone());
        }
        // normalized lookup in case the caller did not sort
        let norm = StationaryKey::new(key.h, key.a.clone(), key.m, key.d);
        if let Some(v) = self.table.get(&norm) {
            return Ok(v.clone());
        }
        Err(Error::MissingStationary {
            h: key.h,
            a: key.a.clone(),
            m: key.m,
            d: key.d,
        })
    }
}

/// Finitely supported map class -> genus series, truncated by a positive
/// degree grading. The absent class is the zero series.
#[derive(Clone, Debug, PartialEq)]
pub struct NovikovSeries {
    pub preset_id: String,
    pub degree_cap: i64,
    pub genus_cap: i64,
    terms: BTreeMap<CurveClass, GenusSeries>,
}

impl NovikovSeries {
    pub fn zero(preset: &SurfacePreset, degree_cap: i64, genus_cap: i64) -> Self {
        NovikovSeries {
            preset_id: preset.id.clone(),
            degree_cap,
            genus_cap,
            terms: BTreeMap::new(),
        }
    }

    /// The multiplicative unit Q^0 * 1.
    pub fn unit(preset: &SurfacePreset, degree_cap: i64, genus_cap: i64) -> Self {
        let mut s = Self::zero(preset, degree_cap, genus_cap);
        s.add_term(preset, CurveClass::zero(preset.rank), &GenusSeries::one(genus_cap));
        s
    }

    /// Add a series at a class; terms beyond the degree cap are dropped
    /// and zero series pruned.
    pub fn add_term(&mut self, preset: &SurfacePreset, class: CurveClass, series: &GenusSeries) {
        if preset.degree(&class) > self.degree_cap {
            return;
        }
        let clipped = series.truncated(self.genus_cap);
        let entry = self
            .terms
            .entry(class.clone())
            .or_insert_with(|| GenusSeries::zero(self.genus_cap));
        *entry = entry.add(&clipped);
        if entry.is_zero() {
            self.terms.remove(&class);
        }
    }

    pub fn coefficient(&self, class: &CurveClass) -> GenusSeries {
        self.terms
            .get(class)
            .cloned()
            .unwrap_or_else(|| GenusSeries::zero(self.genus_cap))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (&CurveClass, &GenusSeries)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, s: &Rational) -> NovikovSeries {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.scale(s);
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        self.terms.retain(|_, v| !v.is_zero());
    }

    fn check_same(&self, other: &NovikovSeries) -> Result<(), Error> {
        if self.preset_id != other.preset_id {
            return Err(Error::PresetMismatch {
                left: self.preset_id.clone(),
                right: other.preset_id.clone(),
            });
        }
        Ok(())
    }
}

pub fn nv_add(a: &NovikovSeries, b: &NovikovSeries) -> Result<NovikovSeries, Error> {
    a.check_same(b)?;
    let mut out = a.clone();
    out.degree_cap = a.degree_cap.min(b.degree_cap);
    out.genus_cap = a.genus_cap.min(b.genus_cap);
    out.terms = BTreeMap::new();
    for (c, s) in a.terms.iter().chain(b.terms.iter()) {
        let clipped = s.truncated(out.genus_cap);
        let entry = out
            .terms
            .entry(c.clone())
            .or_insert_with(|| GenusSeries::zero(out.genus_cap));
        *entry = entry.add(&clipped);
    }
    out.prune();
    Ok(out)
}

/// Convolution over class addition, truncated by the degree cap;
/// coefficients multiply as genus series.
pub fn nv_mul(
    preset: &SurfacePreset,
    a: &NovikovSeries,
    b: &NovikovSeries,
) -> Result<NovikovSeries, Error> {
    a.check_same(b)?;
    let mut out = NovikovSeries::zero(
        preset,
        a.degree_cap.min(b.degree_cap),
        a.genus_cap.min(b.genus_cap),
    );
    for (ca, sa) in &a.terms {
        for (cb, sb) in &b.terms {
            let c = ca.add(cb);
            if preset.degree(&c) > out.degree_cap {
                continue;
            }
            let prod = sa.mul(sb)?;
            out.add_term(preset, c, &prod);
        }
    }
    Ok(out)
}

/// exp(a) = sum a^k / k!, finite under the degree grading. The argument
/// must be nilpotent: no term at the zero class.
pub fn nv_exp(preset: &SurfacePreset, a: &NovikovSeries) -> Result<NovikovSeries, Error> {
    let zero_class = CurveClass::zero(preset.rank);
    if a.terms.contains_key(&zero_class) {
        return Err(Error::NonNilpotentArgument);
    }
    let mut out = NovikovSeries::unit(preset, a.degree_cap, a.genus_cap);
    let mut power = NovikovSeries::unit(preset, a.degree_cap, a.genus_cap);
    let mut kfact = Rational::one();
    let mut k = 1i64;
    loop {
        power = nv_mul(preset, &power, a)?;
        if power.is_zero() {
            break;
        }
        kfact *= rat(k, 1);
        out = nv_add(&out, &power.scale(&(Rational::one() / &kfact)))?;
        k += 1;
    }
    Ok(out)
}

/// log(a) = sum (-1)^(k+1) (a - 1)^k / k, finite under the grading. The
/// argument must have constant term exactly 1 at the zero class.
pub fn nv_log(preset: &SurfacePreset, a: &NovikovSeries) -> Result<NovikovSeries, Error> {
    let zero_class = CurveClass::zero(preset.rank);
    if a.coefficient(&zero_class) != GenusSeries::one(a.genus_cap) {
        return Err(Error::NonUnitConstantTerm);
    }
    let mut shifted = a.clone();
    shifted.terms.remove(&zero_class);
    let mut out = NovikovSeries::zero(preset, a.degree_cap, a.genus_cap);
    let mut power = NovikovSeries::unit(preset, a.degree_cap, a.genus_cap);
    let mut k = 1i64;
    loop {
        power = nv_mul(preset, &power, &shifted)?;
        if power.is_zero() {
            break;
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        out = nv_add(&out, &power.scale(&rat(sign, k)))?;
        k += 1;
    }
    Ok(out)
}

/// Package one invariant family as a generating function
/// sum t[kind, beta, g] h^(2g) Q^beta. Missing entries are zero.
pub fn table_to_novikov(
    preset: &SurfacePreset,
    table: &InvariantTable,
    kind: InvariantKind,
) -> NovikovSeries {
    let mut out = NovikovSeries::zero(preset, table.degree_cap, table.genus_cap);
    for ((k, class, genus), value) in table.iter() {
        if *k != kind || *genus < 0 || *genus > table.genus_cap {
            continue;
        }
        out.add_term(
            preset,
            class.clone(),
            &GenusSeries::monomial(*genus, value.clone(), table.genus_cap),
        );
    }
    out
}

/// A loaded dataset: the preset, the invariant table, and the stationary
/// oracle. Immutable after load; reads are concurrent-safe.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub preset: SurfacePreset,
    pub table: InvariantTable,
    pub oracle: StationaryOracle,
}

#[derive(Serialize, Deserialize)]
struct RawPresetObject {
    rank: usize,
    pairing: Vec<Vec<i64>>,
    anticanonical: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<Vec<i64>>>,
    degree_weights: Vec<i64>,
    euler_char: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawPreset {
    Id(String),
    Object(RawPresetObject),
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    kind: String,
    class: Vec<i64>,
    genus: i64,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct RawStationary {
    h: i64,
    a: Vec<i64>,
    m: i64,
    d: i64,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct RawDataset {
    preset: RawPreset,
    genus_cap: i64,
    degree_cap: i64,
    entries: Vec<RawEntry>,
    #[serde(default)]
    stationary: Vec<RawStationary>,
}

fn parse_value(field: &str, input: &str) -> Result<Rational, Error> {
    parse_rational(input).map_err(|e| match e {
        crate::genus_series::SeriesError::Parse { input, reason } => {
            Error::RationalParse { input, reason }
        }
        other => Error::schema(field, other.to_string()),
    })
}

/// Parse and validate a dataset from its JSON text.
pub fn dataset_from_json(text: &str) -> Result<Dataset, Error> {
    let raw: RawDataset = serde_json::from_str(text)
        .map_err(|e| Error::schema("dataset", format!("invalid JSON: line {}: {}", e.line(), e)))?;
    let preset = match raw.preset {
        RawPreset::Id(id) => SurfacePreset::by_id(&id)
            .ok_or_else(|| Error::schema("preset", format!("unknown preset id `{id}`")))?,
        RawPreset::Object(obj) => {
            let preset = SurfacePreset {
                id: obj.id.unwrap_or_else(|| "custom".to_string()),
                rank: obj.rank,
                pairing: obj.pairing,
                anticanonical: CurveClass(obj.anticanonical),
                degree_weights: obj.degree_weights,
                euler_char: obj.euler_char,
            };
            preset.validate()?;
            if let Some(gens) = obj.generators {
                for (i, g) in gens.iter().enumerate() {
                    let mut unit = vec![0i64; preset.rank];
                    if i < preset.rank {
                        unit[i] = 1;
                    }
                    if g != &unit {
                        return Err(Error::schema(
                            "generators",
                            "generators must be the coordinate basis",
                        ));
                    }
                }
            }
            preset
        }
    };
    if raw.genus_cap < 0 {
        return Err(Error::schema("genus_cap", "must be >= 0"));
    }
    if raw.degree_cap < 0 {
        return Err(Error::schema("degree_cap", "must be >= 0"));
    }
    let mut table = InvariantTable::new(&preset.id, raw.genus_cap, raw.degree_cap);
    for (i, e) in raw.entries.iter().enumerate() {
        let field = format!("entries[{i}]");
        let kind = InvariantKind::from_str_tag(&e.kind)
            .ok_or_else(|| Error::schema(&field, format!("unknown kind `{}`", e.kind)))?;
        let class = CurveClass(e.class.clone());
        if class.rank() != preset.rank {
            return Err(Error::schema(
                &field,
                format!("class {class} has wrong rank for preset {}", preset.id),
            ));
        }
        if !preset.is_effective(&class) {
            return Err(Error::schema(&field, format!("class {class} is not effective")));
        }
        if preset.degree(&class) > raw.degree_cap {
            return Err(Error::schema(
                &field,
                format!("class {class} exceeds degree cap {}", raw.degree_cap),
            ));
        }
        if e.genus < 0 || e.genus > raw.genus_cap {
            return Err(Error::schema(
                &field,
                format!("genus {} outside 0..={}", e.genus, raw.genus_cap),
            ));
        }
        let value = parse_value(&field, &e.value)?;
        table.insert(kind, class, e.genus, value);
    }
    let mut oracle = StationaryOracle::new();
    for (i, s) in raw.stationary.iter().enumerate() {
        let field = format!("stationary[{i}]");
        if s.h < 0 || s.m < 0 || s.d < 0 || s.a.iter().any(|&x| x < 0) {
            return Err(Error::schema(&field, "negative index"));
        }
        let value = parse_value(&field, &s.value)?;
        oracle.insert(StationaryKey::new(s.h, s.a.clone(), s.m, s.d), value);
    }
    Ok(Dataset {
        preset,
        table,
        oracle,
    })
}

/// Serialize a dataset in canonical form: sorted entries, `p/q` rationals,
/// two-space indentation. save . load is the identity on this form.
pub fn dataset_to_json(ds: &Dataset) -> String {
    let preset = if SurfacePreset::by_id(&ds.preset.id).as_ref() == Some(&ds.preset) {
        RawPreset::Id(ds.preset.id.clone())
    } else {
        RawPreset::Object(RawPresetObject {
            rank: ds.preset.rank,
            pairing: ds.preset.pairing.clone(),
            anticanonical: ds.preset.anticanonical.0.clone(),
            generators: None,
            degree_weights: ds.preset.degree_weights.clone(),
            euler_char: ds.preset.euler_char,
            id: Some(ds.preset.id.clone()),
        })
    };
    let entries: Vec<RawEntry> = ds
        .table
        .iter()
        .map(|((kind, class, genus), value)| RawEntry {
            kind: kind.as_str().to_string(),
            class: class.0.clone(),
            genus: *genus,
            value: format_rational(value),
        })
        .collect();
    let stationary: Vec<RawStationary> = ds
        .oracle
        .iter()
        .map(|(k, v)| RawStationary {
            h: k.h,
            a: k.a.clone(),
            m: k.m,
            d: k.d,
            value: format_rational(v),
        })
        .collect();
    let raw = RawDataset {
        preset,
        genus_cap: ds.table.genus_cap,
        degree_cap: ds.table.degree_cap,
        entries,
        stationary,
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("serializable");
    text.push('\n');
    text
}

pub fn load_dataset(path: &Path) -> Result<Dataset, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    dataset_from_json(&text)
}

pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<(), Error> {
    std::fs::write(path, dataset_to_json(ds)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus_series::rat_int;

    fn f1() -> SurfacePreset {
        SurfacePreset::f1()
    }

    fn cc(coords: &[i64]) -> CurveClass {
        CurveClass(coords.to_vec())
    }

    fn single(preset: &SurfacePreset, class: &[i64], series: GenusSeries, dcap: i64) -> NovikovSeries {
        let mut s = NovikovSeries::zero(preset, dcap, series.cap());
        s.add_term(preset, cc(class), &series);
        s
    }

    #[test]
    fn nv_mul_unit_and_class_addition() {
        let p = f1();
        let a = single(&p, &[1, 0], GenusSeries::one(2), 6);
        let unit = NovikovSeries::unit(&p, 6, 2);
        assert_eq!(nv_mul(&p, &a, &unit).unwrap(), a);
        let b = single(&p, &[0, 1], GenusSeries::one(2), 6);
        let ab = nv_mul(&p, &a, &b).unwrap();
        assert_eq!(ab.coefficient(&cc(&[1, 1])), GenusSeries::one(2));
        assert_eq!(ab.len(), 1);
    }

    #[test]
    fn nv_mul_matches_brute_force_double_loop() {
        use rand::{Rng, SeedableRng};
        let p = f1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let classes = p.enumerate_effective_upto(3);
            let mut a = NovikovSeries::zero(&p, 4, 1);
            let mut b = NovikovSeries::zero(&p, 4, 1);
            for c in &classes {
                if rng.gen_bool(0.6) {
                    a.add_term(
                        &p,
                        c.clone(),
                        &GenusSeries::constant(rat(rng.gen_range(-9..9), 1 + rng.gen_range(0..4)), 1),
                    );
                }
                if rng.gen_bool(0.6) {
                    b.add_term(
                        &p,
                        c.clone(),
                        &GenusSeries::constant(rat(rng.gen_range(-9..9), 1 + rng.gen_range(0..4)), 1),
                    );
                }
            }
            let prod = nv_mul(&p, &a, &b).unwrap();
            // brute force: scan every target class, sum over all splittings
            for target in p.enumerate_effective_upto(4) {
                let mut acc = GenusSeries::zero(1);
                for (ca, sa) in a.support() {
                    let rest = target.sub(ca);
                    if p.is_effective(&rest) {
                        acc = acc.add(&sa.mul(&b.coefficient(&rest)).unwrap());
                    }
                }
                assert_eq!(prod.coefficient(&target), acc, "class {target}");
            }
        }
    }

    #[test]
    fn nv_exp_examples() {
        let p = f1();
        let zero = NovikovSeries::zero(&p, 6, 1);
        assert_eq!(nv_exp(&p, &zero).unwrap(), NovikovSeries::unit(&p, 6, 1));
        // exp(c Q^beta) = sum c^k Q^(k beta) / k!
        let c = rat(3, 2);
        let a = single(&p, &[1, 1], GenusSeries::constant(c.clone(), 1), 6);
        let e = nv_exp(&p, &a).unwrap();
        let mut kfact = Rational::one();
        let mut cpow = Rational::one();
        for k in 1..=3i64 {
            kfact *= rat(k, 1);
            cpow *= &c;
            assert_eq!(
                e.coefficient(&cc(&[k, k])),
                GenusSeries::constant(cpow.clone() / &kfact, 1),
                "k={k}"
            );
        }
        // non-nilpotent argument is rejected
        let bad = NovikovSeries::unit(&p, 6, 1);
        assert!(matches!(nv_exp(&p, &bad), Err(Error::NonNilpotentArgument)));
    }

    #[test]
    fn nv_log_examples_and_round_trip() {
        use rand::{Rng, SeedableRng};
        let p = f1();
        let unit = NovikovSeries::unit(&p, 6, 1);
        assert_eq!(nv_log(&p, &unit).unwrap(), NovikovSeries::zero(&p, 6, 1));
        // -log(1 - Q^beta) = sum Q^(k beta) / k
        let mut one_minus = NovikovSeries::unit(&p, 6, 0);
        one_minus.add_term(&p, cc(&[0, 1]), &GenusSeries::constant(rat_int(-1), 0));
        let l = nv_log(&p, &one_minus).unwrap().scale(&rat_int(-1));
        for k in 1..=6i64 {
            assert_eq!(
                l.coefficient(&cc(&[0, k])),
                GenusSeries::constant(rat(1, k), 0)
            );
        }
        assert!(matches!(
            nv_log(&p, &NovikovSeries::zero(&p, 4, 0)),
            Err(Error::NonUnitConstantTerm)
        ));
        // exp . log and log . exp round trips on random data
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let mut nilp = NovikovSeries::zero(&p, 4, 1);
            for c in p.enumerate_effective_upto(3) {
                if !c.is_zero() && rng.gen_bool(0.5) {
                    nilp.add_term(
                        &p,
                        c,
                        &GenusSeries::constant(rat(rng.gen_range(-6..7), 1 + rng.gen_range(0..3)), 1),
                    );
                }
            }
            let e = nv_exp(&p, &nilp).unwrap();
            assert_eq!(nv_log(&p, &e).unwrap(), nilp);
            let mut unital = e.clone();
            // also check exp(log(x)) = x on the exponential image
            unital = nv_exp(&p, &nv_log(&p, &unital).unwrap()).unwrap();
            assert_eq!(unital, e);
        }
    }

    #[test]
    fn nv_exp_is_a_homomorphism() {
        use rand::{Rng, SeedableRng};
        let p = f1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let mut a = NovikovSeries::zero(&p, 4, 1);
            let mut b = NovikovSeries::zero(&p, 4, 1);
            for c in p.enumerate_effective_upto(3) {
                if c.is_zero() {
                    continue;
                }
                if rng.gen_bool(0.5) {
                    a.add_term(&p, c.clone(), &GenusSeries::constant(rat(rng.gen_range(-5..6), 2), 1));
                }
                if rng.gen_bool(0.5) {
                    b.add_term(&p, c, &GenusSeries::constant(rat(rng.gen_range(-5..6), 3), 1));
                }
            }
            let sum = nv_add(&a, &b).unwrap();
            let lhs = nv_exp(&p, &sum).unwrap();
            let rhs = nv_mul(&p, &nv_exp(&p, &a).unwrap(), &nv_exp(&p, &b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn table_to_novikov_round_trip() {
        let p = f1();
        let mut t = InvariantTable::new("f1", 2, 5);
        assert!(table_to_novikov(&p, &t, InvariantKind::GvLocal).is_zero());
        t.insert(InvariantKind::GvLocal, cc(&[1, 1]), 1, rat(5, 3));
        t.insert(InvariantKind::GvLocal, cc(&[0, 1]), 0, rat_int(-2));
        t.insert(InvariantKind::LogMax, cc(&[0, 1]), 0, rat_int(99));
        let nv = table_to_novikov(&p, &t, InvariantKind::GvLocal);
        assert_eq!(nv.len(), 2);
        assert_eq!(
            nv.coefficient(&cc(&[1, 1])).coefficient(1).unwrap(),
            rat(5, 3)
        );
        assert_eq!(
            nv.coefficient(&cc(&[0, 1])).coefficient(0).unwrap(),
            rat_int(-2)
        );
    }

    #[test]
    fn oracle_builtin_and_strictness() {
        let oracle = StationaryOracle::new();
        // genus-1 family: divisor sums
        assert_eq!(
            oracle.query(&StationaryKey::new(1, vec![], 0, 4)).unwrap(),
            rat(7, 4)
        );
        assert_eq!(
            oracle.query(&StationaryKey::new(1, vec![], 0, 6)).unwrap(),
            rat_int(2)
        );
        assert_eq!(
            oracle.query(&StationaryKey::new(1, vec![0, 0], 0, 3)).unwrap(),
            rat(4, 3) * rat_int(9)
        );
        // degree 0: the single-point genus-1 value, zero otherwise
        assert_eq!(
            oracle.query(&StationaryKey::new(1, vec![0], 0, 0)).unwrap(),
            rat(-1, 24)
        );
        assert_eq!(
            oracle.query(&StationaryKey::new(1, vec![], 0, 0)).unwrap(),
            Rational::zero()
        );
        // dimension rule kills mismatched queries
        assert_eq!(
            oracle.query(&StationaryKey::new(0, vec![0], 0, 2)).unwrap(),
            Rational::zero()
        );
        // a dimension-consistent higher-genus query without data is a
        // hard error naming the key
        let err = oracle.query(&StationaryKey::new(2, vec![], 2, 1));
        match err {
            Err(Error::MissingStationary { h, m, d, .. }) => {
                assert_eq!((h, m, d), (2, 2, 1));
            }
            other => panic!("expected MissingStationary, got {other:?}"),
        }
        // backed by the table it resolves
        let mut oracle = StationaryOracle::new();
        oracle.insert(StationaryKey::new(2, vec![], 2, 1), rat(1, 1920));
        assert_eq!(
            oracle.query(&StationaryKey::new(2, vec![], 2, 1)).unwrap(),
            rat(1, 1920)
        );
    }

    #[test]
    fn strict_view_records_and_errors() {
        let mut t = InvariantTable::new("f1", 1, 5);
        t.insert(InvariantKind::GvLocal, cc(&[0, 1]), 0, rat_int(-2));
        let view = TableView::new(&t);
        assert_eq!(
            view.get_strict(InvariantKind::GvLocal, &cc(&[0, 1]), 0).unwrap(),
            rat_int(-2)
        );
        assert!(matches!(
            view.get_strict(InvariantKind::GvLocal, &cc(&[0, 1]), 1),
            Err(Error::MissingInvariant { .. })
        ));
        let keys = view.queried_keys();
        assert_eq!(keys.len(), 2);
        assert_eq!(keys[0], "gv_local[0,1]@0");
    }

    #[test]
    fn dataset_minimal_and_malformed() {
        let text = r#"{
            "preset": "f1",
            "genus_cap": 1,
            "degree_cap": 4,
            "entries": [
                {"kind": "gv_local", "class": [0,1], "genus": 0, "value": "-2"}
            ]
        }"#;
        let ds = dataset_from_json(text).unwrap();
        assert_eq!(ds.preset.id, "f1");
        assert_eq!(ds.table.len(), 1);
        let bad = text.replace("\"-2\"", "\"1/0\"");
        assert!(matches!(
            dataset_from_json(&bad),
            Err(Error::RationalParse { .. })
        ));
        let bad_kind = text.replace("gv_local", "bogus");
        assert!(matches!(dataset_from_json(&bad_kind), Err(Error::Schema { .. })));
    }

    #[test]
    fn dataset_canonical_round_trip_is_byte_stable() {
        let mut ds = Dataset {
            preset: SurfacePreset::f1(),
            table: InvariantTable::new("f1", 1, 6),
            oracle: StationaryOracle::new(),
        };
        ds.table.insert(InvariantKind::GvLocal, cc(&[2, 3]), 1, rat_int(9));
        ds.table.insert(InvariantKind::LogMax, cc(&[1, 0]), 0, rat_int(1));
        ds.oracle.insert(StationaryKey::new(2, vec![1, 0], 1, 2), rat(35, 3));
        let text1 = dataset_to_json(&ds);
        let ds2 = dataset_from_json(&text1).unwrap();
        assert_eq!(ds2, ds);
        let text2 = dataset_to_json(&ds2);
        assert_eq!(text1, text2);
    }

    #[test]
    fn dataset_inline_preset() {
        let text = r#"{
            "preset": {"id": "toy", "rank": 1, "pairing": [[1]], "anticanonical": [3],
                       "degree_weights": [1], "euler_char": 3},
            "genus_cap": 0,
            "degree_cap": 3,
            "entries": [{"kind": "log_max", "class": [1], "genus": 0, "value": "9/2"}]
        }"#;
        let ds = dataset_from_json(text).unwrap();
        assert_eq!(ds.preset.rank, 1);
        assert_eq!(
            ds.table.get(InvariantKind::LogMax, &cc(&[1]), 0),
            rat(9, 2)
        );
    }
}
