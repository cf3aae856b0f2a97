//! Z-graded vertex algebras: mode tables, translation, vacuum, axiom checks.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::{BasisKey, DegreeWindow, GradedBasis, GradedVector};
use crate::scalar::{binomial, GaussQ, Scalar};

/// Exact mode data for a concrete algebra, without degree truncation.
///
/// Implementations answer `a_(k) c` for basis elements of any degree; the
/// windowed [`VertexAlgebra`] is materialized from these answers.
pub trait ModeSource: Send + Sync {
    fn name(&self) -> &str;
    /// Lowest degree carrying a nonzero component.
    fn min_degree(&self) -> i32;
    fn dim(&self, degree: i32) -> usize;
    fn label(&self, key: BasisKey) -> String;
    fn parse_label(&self, label: &str) -> Option<BasisKey>;
    fn vacuum(&self) -> GradedVector;
    fn translate(&self, c: BasisKey) -> GradedVector;
    fn mode(&self, a: BasisKey, k: i32, c: BasisKey) -> GradedVector;
}

/// Sparse `a_(k)` entries for basis `a`, `k ∈ [−K, K]`, restricted to a window.
#[derive(Clone, Debug)]
pub struct ModeTable {
    cap: i32,
    window: DegreeWindow,
    floor: i32,
    entries: HashMap<(BasisKey, i32, BasisKey), GradedVector>,
}

impl ModeTable {
    pub fn cap(&self) -> i32 {
        self.cap
    }

    pub fn window(&self) -> DegreeWindow {
        self.window
    }

    /// Number of stored nonzero entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry lookup. `None` means the output degree leaves the window or `|k|`
    /// exceeds the cap; a stored absence inside the window is zero, and so is
    /// any output of negative degree.
    pub fn get(&self, a: BasisKey, k: i32, c: BasisKey) -> Option<GradedVector> {
        if k.abs() > self.cap {
            return None;
        }
        let out = a.degree + c.degree - k - 1;
        if out < self.floor {
            return Some(GradedVector::zero());
        }
        if !self.window.contains(out) {
            return None;
        }
        Some(self.entries.get(&(a, k, c)).cloned().unwrap_or_default())
    }
}

/// Result of one axiom check, restricted to a window and mode cap.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// Number of identities actually compared.
    pub checked: usize,
    /// Identities skipped because an intermediate left the window.
    pub skipped: usize,
    pub max_residual: f64,
    pub exact_zero: bool,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            skipped: 0,
            max_residual: 0.0,
            exact_zero: true,
        }
    }

    fn record(&mut self, residual: &GradedVector) {
        self.checked += 1;
        if !residual.is_zero() {
            self.exact_zero = false;
            self.max_residual = self.max_residual.max(residual.norm());
        }
    }

    pub fn passed(&self) -> bool {
        self.exact_zero
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LocalityOutcome {
    /// Minimal order, with the number of commutator coefficients compared.
    Order { n: i32, tested: usize },
    /// No order up to the search cap annihilates the windowed commutator.
    Undetermined { cap: i32 },
    /// The pair's degree bound exceeds `K+1`, so its commutators involve
    /// modes outside the table.
    BeyondCap { bound: i32 },
}

pub struct VertexAlgebra {
    source: Arc<dyn ModeSource>,
    basis: GradedBasis,
    vacuum: GradedVector,
    translation: BTreeMap<BasisKey, GradedVector>,
    modes: ModeTable,
    extended: Mutex<HashMap<(BasisKey, i32, BasisKey), GradedVector>>,
}

impl std::fmt::Debug for VertexAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VertexAlgebra")
            .field("model", &self.source.name())
            .field("window", &self.basis.window())
            .field("cap", &self.modes.cap)
            .finish()
    }
}

impl VertexAlgebra {
    /// Materialize the windowed structure from a mode source.
    pub fn from_source(
        source: Arc<dyn ModeSource>,
        window: DegreeWindow,
        cap: i32,
    ) -> Result<Self> {
        if cap < 1 {
            return Err(Error::Config(format!(
                "mode cap must be at least 1, got {cap}"
            )));
        }
        let source_floor = source.min_degree();
        let window = window.clamp_below(source_floor);
        let labels = window
            .degrees()
            .map(|d| {
                (0..source.dim(d))
                    .map(|i| source.label(BasisKey::new(d, i)))
                    .collect()
            })
            .collect();
        let basis = GradedBasis::new(window, labels)?;
        let vacuum = source.vacuum();
        if vacuum.homogeneous_degree() != Some(0) {
            return Err(Error::Structural(
                "vacuum must be homogeneous of degree 0".into(),
            ));
        }
        let keys: Vec<BasisKey> = basis.keys().collect();
        let mut translation = BTreeMap::new();
        for &c in &keys {
            let t = source.translate(c);
            if !t.is_zero() && t.homogeneous_degree() != Some(c.degree + 1) {
                return Err(Error::Structural(format!(
                    "T does not raise degree on {}",
                    source.label(c)
                )));
            }
            translation.insert(c, t);
        }
        let mut entries = HashMap::new();
        for &a in &keys {
            for k in -cap..=cap {
                for &c in &keys {
                    let out = a.degree + c.degree - k - 1;
                    if !window.contains(out) {
                        continue;
                    }
                    let v = source.mode(a, k, c);
                    if v.is_zero() {
                        continue;
                    }
                    if v.homogeneous_degree() != Some(out) {
                        return Err(Error::Structural(format!(
                            "mode {}({}) {} has wrong degree",
                            source.label(a),
                            k,
                            source.label(c)
                        )));
                    }
                    entries.insert((a, k, c), v);
                }
            }
        }
        Ok(Self {
            source,
            basis,
            vacuum,
            translation,
            modes: ModeTable {
                cap,
                window,
                floor: source_floor,
                entries,
            },
            extended: Mutex::new(HashMap::new()),
        })
    }

    pub fn name(&self) -> &str {
        self.source.name()
    }

    pub fn source(&self) -> &Arc<dyn ModeSource> {
        &self.source
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn window(&self) -> DegreeWindow {
        self.basis.window()
    }

    pub fn cap(&self) -> i32 {
        self.modes.cap
    }

    pub fn min_degree(&self) -> i32 {
        self.source.min_degree()
    }

    pub fn vacuum(&self) -> &GradedVector {
        &self.vacuum
    }

    pub fn modes(&self) -> &ModeTable {
        &self.modes
    }

    pub fn translation(&self) -> &BTreeMap<BasisKey, GradedVector> {
        &self.translation
    }

    /// Basis element by label, falling back to the model's parser for states
    /// outside the window.
    pub fn key(&self, label: &str) -> Result<BasisKey> {
        self.basis
            .find(label)
            .or_else(|| self.source.parse_label(label))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown basis label '{label}' for model {}",
                    self.name()
                ))
            })
    }

    /// Basis vector for a label.
    pub fn state(&self, label: &str) -> Result<GradedVector> {
        Ok(GradedVector::basis(self.key(label)?))
    }

    pub fn label(&self, key: BasisKey) -> String {
        self.source.label(key)
    }

    /// Parse a state written as `label` or a sum `c1*label1 + c2*label2` with
    /// integer or `p/q` coefficients.
    pub fn parse_state(&self, text: &str) -> Result<GradedVector> {
        let mut v = GradedVector::zero();
        for raw in text.split('+') {
            let part = raw.trim();
            if part.is_empty() {
                return Err(Error::Config(format!("malformed state '{text}'")));
            }
            let (coeff, label) = match part.split_once('*') {
                Some((c, l)) => (parse_coefficient(c.trim())?, l.trim()),
                None => (GaussQ::int(1), part),
            };
            v.add_term(self.key(label)?, coeff);
        }
        Ok(v)
    }

    /// `T` on a basis element, any degree.
    pub fn translate_key(&self, c: BasisKey) -> GradedVector {
        match self.translation.get(&c) {
            Some(t) => t.clone(),
            None => self.source.translate(c),
        }
    }

    pub fn translate<S: Scalar>(&self, v: &GradedVector<S>) -> GradedVector<S> {
        let mut out = GradedVector::zero();
        for (&c, x) in v.terms() {
            out.axpy(x, &lift(&self.translate_key(c)));
        }
        out
    }

    /// `a_(k) c` for basis elements without window or cap restriction.
    pub fn mode_ext(&self, a: BasisKey, k: i32, c: BasisKey) -> GradedVector {
        if let Some(v) = self.modes.get(a, k, c) {
            if self.modes.window.contains(a.degree) && self.modes.window.contains(c.degree) {
                return v;
            }
        }
        let out = a.degree + c.degree - k - 1;
        if out < self.source.min_degree() {
            return GradedVector::zero();
        }
        if let Some(v) = self
            .extended
            .lock()
            .expect("mode cache poisoned")
            .get(&(a, k, c))
        {
            return v.clone();
        }
        let v = self.source.mode(a, k, c);
        self.extended
            .lock()
            .expect("mode cache poisoned")
            .insert((a, k, c), v.clone());
        v
    }

    /// Bilinear extension of [`mode_ext`](Self::mode_ext).
    pub fn apply_mode_ext<S: Scalar>(
        &self,
        a: &GradedVector<S>,
        k: i32,
        c: &GradedVector<S>,
    ) -> GradedVector<S> {
        let mut out = GradedVector::zero();
        for (&ak, ac) in a.terms() {
            for (&ck, cc) in c.terms() {
                let v = self.mode_ext(ak, k, ck);
                if !v.is_zero() {
                    out.axpy(&(ac.clone() * cc.clone()), &lift(&v));
                }
            }
        }
        out
    }

    /// Windowed mode application with cap and window checks.
    pub fn mode_apply(&self, a: &GradedVector, k: i32, b: &GradedVector) -> Result<GradedVector> {
        let cap = self.modes.cap;
        if k.abs() > cap {
            return Err(Error::ModeCap { k, cap });
        }
        let w = self.window();
        for (key, _) in a.terms().chain(b.terms()) {
            w.check(key.degree)?;
        }
        let mut out = GradedVector::zero();
        for (&ak, ac) in a.terms() {
            for (&bk, bc) in b.terms() {
                let v = self.modes.get(ak, k, bk).ok_or(Error::WindowViolation {
                    degree: ak.degree + bk.degree - k - 1,
                    lo: w.lo,
                    hi: w.hi,
                })?;
                out.axpy(&(ac.clone() * bc.clone()), &v);
            }
        }
        Ok(out)
    }

    /// Table-only application; `None` when some term leaves the window.
    fn table_apply(&self, a: BasisKey, k: i32, v: &GradedVector) -> Option<GradedVector> {
        let mut out = GradedVector::zero();
        for (&c, x) in v.terms() {
            let e = self.modes.get(a, k, c)?;
            out.axpy(x, &e);
        }
        Some(out)
    }

    fn table_translate(&self, v: &GradedVector) -> Option<GradedVector> {
        let hi = self.window().hi;
        let mut out = GradedVector::zero();
        for (c, x) in v.terms() {
            if c.degree + 1 > hi {
                return None;
            }
            out.axpy(x, self.translation.get(c)?);
        }
        Some(out)
    }

    /// Coefficient of `x^{-p-1-N} y^{-q-1}`-style index `(p, q)` of
    /// `(x−y)^N [Y(a,x), Y(b,y)]` applied to `c`.
    fn locality_coefficient(
        &self,
        a: BasisKey,
        b: BasisKey,
        n: i32,
        p: i32,
        q: i32,
        c: BasisKey,
    ) -> Option<GradedVector> {
        let start = GradedVector::basis(c);
        let mut acc = GradedVector::zero();
        for j in 0..=n {
            let ka = p + n - j;
            let kb = q + j;
            let ab = self
                .table_apply(b, kb, &start)
                .and_then(|v| self.table_apply(a, ka, &v))?;
            let ba = self
                .table_apply(a, ka, &start)
                .and_then(|v| self.table_apply(b, kb, &v))?;
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let coeff = GaussQ::int(sign * binomial(n as i64, j as i64) as i64);
            acc.axpy(&coeff, &ab.sub(&ba));
        }
        Some(acc)
    }

    /// Smallest `N ≤ n_cap` annihilating the windowed commutator of `Y(a,x)` and `Y(b,y)`.
    ///
    /// Pairs whose degree bound `|a|+|b|−min_degree` exceeds `K+1` are not
    /// searched: their commutators involve products `a_(n)b` with `n > K`,
    /// which the table cannot see.
    pub fn check_locality(&self, a: BasisKey, b: BasisKey, n_cap: i32) -> LocalityOutcome {
        let cap = self.modes.cap;
        let bound = a.degree + b.degree - self.source.min_degree();
        if bound > cap + 1 {
            return LocalityOutcome::BeyondCap { bound };
        }
        let w = self.window();
        let keys: Vec<BasisKey> = self.basis.keys().collect();
        for n in 0..=n_cap {
            let mut tested = 0;
            let mut clean = true;
            'outer: for p in -cap..=cap - n {
                for q in -cap..=cap {
                    if q + n > cap {
                        break;
                    }
                    for &c in &keys {
                        let out = a.degree + b.degree + c.degree - p - q - n - 2;
                        if !w.contains(out) {
                            continue;
                        }
                        if let Some(v) = self.locality_coefficient(a, b, n, p, q, c) {
                            tested += 1;
                            if !v.is_zero() {
                                clean = false;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            if clean && tested > 0 {
                return LocalityOutcome::Order { n, tested };
            }
        }
        LocalityOutcome::Undetermined { cap: n_cap }
    }

    /// `[T, a_(k)] = −k a_(k−1)` on every windowed basis vector, plus `T|0⟩ = 0`.
    pub fn check_translation(&self, a: &GradedVector) -> CheckReport {
        let mut report = CheckReport::new("translation");
        let cap = self.modes.cap;
        match self.table_translate(&self.vacuum) {
            Some(t) => report.record(&t),
            None => report.skipped += 1,
        }
        for k in (-cap + 1)..=cap {
            for c in self.basis.keys() {
                let cv = GradedVector::basis(c);
                let lhs = self
                    .apply_table_vec(a, k, &cv)
                    .and_then(|v| self.table_translate(&v));
                let rhs = self
                    .table_translate(&cv)
                    .and_then(|tc| self.apply_table_vec(a, k, &tc));
                let low = self.apply_table_vec(a, k - 1, &cv);
                match (lhs, rhs, low) {
                    (Some(l), Some(r), Some(m)) => {
                        let mut res = l.sub(&r);
                        res.axpy(&GaussQ::int(k as i64), &m);
                        report.record(&res);
                    }
                    _ => report.skipped += 1,
                }
            }
        }
        report
    }

    fn apply_table_vec(&self, a: &GradedVector, k: i32, v: &GradedVector) -> Option<GradedVector> {
        let mut out = GradedVector::zero();
        for (&ak, ac) in a.terms() {
            let part = self.table_apply(ak, k, v)?;
            out.axpy(ac, &part);
        }
        Some(out)
    }

    /// `a_(−1)|0⟩ = a` and `a_(k)|0⟩ = 0` for `0 ≤ k ≤ K`.
    pub fn check_creation(&self, a: &GradedVector) -> CheckReport {
        let mut report = CheckReport::new("creation");
        match self.apply_table_vec(a, -1, &self.vacuum) {
            Some(v) => report.record(&v.sub(a)),
            None => report.skipped += 1,
        }
        for k in 0..=self.modes.cap {
            match self.apply_table_vec(a, k, &self.vacuum) {
                Some(v) => report.record(&v),
                None => report.skipped += 1,
            }
        }
        report
    }

    /// `|0⟩_(k) = δ_{k,−1} id` on the window.
    pub fn check_vacuum(&self) -> CheckReport {
        let mut report = CheckReport::new("vacuum");
        let cap = self.modes.cap;
        for c in self.basis.keys() {
            let cv = GradedVector::basis(c);
            for k in -cap..=cap {
                match self.apply_table_vec(&self.vacuum, k, &cv) {
                    Some(v) => {
                        let res = if k == -1 { v.sub(&cv) } else { v };
                        report.record(&res);
                    }
                    None => report.skipped += 1,
                }
            }
        }
        report
    }

    /// Rebuild `T` from `Ta = a_(−2)|0⟩` and confirm the vacuum is the only
    /// basis state acting as the identity.
    pub fn derive_t_and_vacuum(&self) -> Result<(BTreeMap<BasisKey, GradedVector>, GradedVector)> {
        let mut derived = BTreeMap::new();
        for a in self.basis.keys() {
            let t = self.apply_mode_ext(&GradedVector::basis(a), -2, &self.vacuum);
            let stored = self.translate_key(a);
            if t != stored {
                return Err(Error::Structural(format!(
                    "reconstructed T differs from stored T on {}",
                    self.label(a)
                )));
            }
            derived.insert(a, t);
        }
        // a = a_(-1)|0⟩ by creation, so Y(a,x) = id forces a = |0⟩.
        let mut identities = Vec::new();
        for a in self.basis.keys() {
            let av = GradedVector::basis(a);
            let is_identity = self.basis.keys().all(|c| {
                let cv = GradedVector::basis(c);
                (-self.modes.cap..=self.modes.cap).all(|k| {
                    match self.apply_table_vec(&av, k, &cv) {
                        Some(v) => {
                            if k == -1 {
                                v == cv
                            } else {
                                v.is_zero()
                            }
                        }
                        None => true,
                    }
                })
            });
            if is_identity {
                identities.push(av);
            }
        }
        for v in &identities {
            if *v != self.vacuum {
                return Err(Error::Structural(
                    "a non-vacuum state acts as the identity".into(),
                ));
            }
        }
        let recovered = self.apply_mode_ext(&self.vacuum, -1, &self.vacuum);
        if recovered != self.vacuum {
            return Err(Error::Structural("vacuum does not reproduce itself".into()));
        }
        Ok((derived, recovered))
    }

    /// Minimal `N ≥ 0` with `a_(n) b = 0` for all `n ≥ N`, from the table.
    ///
    /// The degree bound gives `a_(n) b = 0` once `|a|+|b|−n−1` drops below
    /// the minimal degree; if that threshold is beyond the cap the order is
    /// undetermined.
    pub fn vanishing_order(&self, a: &GradedVector, b: &GradedVector) -> Result<i32> {
        let w = self.window();
        for (key, _) in a.terms().chain(b.terms()) {
            w.check(key.degree)?;
        }
        let (Some(amax), Some(bmax)) = (a.max_degree(), b.max_degree()) else {
            return Ok(0);
        };
        let threshold = amax + bmax - self.source.min_degree();
        let cap = self.modes.cap;
        if threshold > cap + 1 {
            return Err(Error::Undetermined(format!(
                "vanishing order may exceed mode cap {cap}"
            )));
        }
        let mut n = threshold - 1;
        while n >= 0 {
            match self.apply_table_vec(a, n, b) {
                Some(v) if !v.is_zero() => return Ok(n + 1),
                Some(_) => n -= 1,
                None => {
                    return Err(Error::Undetermined(format!(
                        "mode {n} leaves the window before the order is found"
                    )))
                }
            }
        }
        Ok(0)
    }

    /// Vanishing order computed from unbounded modes; always determined for
    /// bounded-below models.
    pub fn vanishing_order_ext(&self, a: &GradedVector, b: &GradedVector) -> i32 {
        let (Some(amax), Some(bmax)) = (a.max_degree(), b.max_degree()) else {
            return 0;
        };
        let mut n = amax + bmax - self.source.min_degree() - 1;
        while n >= 0 {
            if !self.apply_mode_ext(a, n, b).is_zero() {
                return n + 1;
            }
            n -= 1;
        }
        0
    }
}

/// Change coefficient field from the exact Gaussian rationals.
pub fn lift<S: Scalar>(v: &GradedVector) -> GradedVector<S> {
    GradedVector::from_terms(v.terms().map(|(&k, c)| (k, S::from_gauss(c))))
}

fn parse_coefficient(s: &str) -> Result<GaussQ> {
    let bad = || Error::Config(format!("bad coefficient '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(GaussQ::frac(n, d))
        }
        None => Ok(GaussQ::int(s.parse().map_err(|_| bad())?)),
    }
}
