//! Graded vector spaces with finite bases per degree.
//!
//! A [`GradedVector`] is a finitely supported element of `V = ⊕ V_k`. A
//! [`WindowedCompletion`] is an element of the completion `∏ V_k` restricted to
//! a [`DegreeWindow`]; everything outside the window is either known to vanish
//! (below, for bounded-below models) or not represented (above).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{GaussQ, Scalar};

/// Closed degree interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreeWindow {
    pub lo: i32,
    pub hi: i32,
}

impl DegreeWindow {
    pub fn new(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::Config(format!("empty degree window [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, k: i32) -> bool {
        self.lo <= k && k <= self.hi
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }

    pub fn check(&self, k: i32) -> Result<()> {
        if self.contains(k) {
            Ok(())
        } else {
            Err(Error::WindowViolation {
                degree: k,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// Raise `lo` to a model's minimal degree.
    pub fn clamp_below(self, min_degree: i32) -> Self {
        Self {
            lo: self.lo.max(min_degree),
            hi: self.hi.max(min_degree),
        }
    }
}

impl fmt::Display for DegreeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A basis element: its degree and its position in the model's ordered basis of `V_degree`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisKey {
    pub degree: i32,
    pub index: usize,
}

impl BasisKey {
    pub const fn new(degree: i32, index: usize) -> Self {
        Self { degree, index }
    }
}

/// Labeled bases of `V_k` for every `k` in a window.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedBasis {
    window: DegreeWindow,
    labels: Vec<Vec<String>>,
}

impl GradedBasis {
    pub fn new(window: DegreeWindow, labels: Vec<Vec<String>>) -> Result<Self> {
        if labels.len() != (window.hi - window.lo + 1) as usize {
            return Err(Error::Config("label table does not match window".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in labels.iter().flatten() {
            if !seen.insert(l.as_str()) {
                return Err(Error::Config(format!("duplicate basis label {l}")));
            }
        }
        Ok(Self { window, labels })
    }

    pub fn window(&self) -> DegreeWindow {
        self.window
    }

    /// `dim V_k`; zero outside the window.
    pub fn dim(&self, k: i32) -> usize {
        if self.window.contains(k) {
            self.labels[(k - self.window.lo) as usize].len()
        } else {
            0
        }
    }

    pub fn total_dim(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    pub fn label(&self, key: BasisKey) -> Option<&str> {
        if !self.window.contains(key.degree) {
            return None;
        }
        self.labels[(key.degree - self.window.lo) as usize]
            .get(key.index)
            .map(String::as_str)
    }

    pub fn find(&self, label: &str) -> Option<BasisKey> {
        self.keys().find(|k| self.label(*k) == Some(label))
    }

    /// All basis keys, ordered by degree then index.
    pub fn keys(&self) -> impl Iterator<Item = BasisKey> + '_ {
        self.window
            .degrees()
            .flat_map(move |d| (0..self.dim(d)).map(move |i| BasisKey::new(d, i)))
    }

    pub fn keys_in_degree(&self, k: i32) -> impl Iterator<Item = BasisKey> {
        (0..self.dim(k)).map(move |i| BasisKey::new(k, i))
    }
}

/// Finitely supported element of `V`.
#[derive(Clone, PartialEq)]
pub struct GradedVector<S: Scalar = GaussQ> {
    terms: BTreeMap<BasisKey, S>,
}

pub type ComplexVector = GradedVector<Complex64>;

impl<S: Scalar> Default for GradedVector<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> fmt::Debug for GradedVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| format!("{:?}·e[{},{}]", c, k.degree, k.index))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<S: Scalar> GradedVector<S> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(key: BasisKey) -> Self {
        Self::from_term(key, S::one())
    }

    pub fn from_term(key: BasisKey, c: S) -> Self {
        let mut v = Self::zero();
        v.add_term(key, c);
        v
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (BasisKey, S)>) -> Self {
        let mut v = Self::zero();
        for (k, c) in terms {
            v.add_term(k, c);
        }
        v
    }

    pub fn add_term(&mut self, key: BasisKey, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: &S, other: &Self) {
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(*k, c.clone() * v.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(&S::one(), other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(&(-S::one()), other);
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero();
        out.axpy(c, self);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: BasisKey) -> S {
        self.terms.get(&key).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisKey, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degrees carrying nonzero components, ascending.
    pub fn degrees(&self) -> Vec<i32> {
        let mut ds: Vec<i32> = self.terms.keys().map(|k| k.degree).collect();
        ds.dedup();
        ds
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.keys().next().map(|k| k.degree)
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.keys().next_back().map(|k| k.degree)
    }

    /// `Some(k)` iff the vector is nonzero and supported in degree `k` only.
    pub fn homogeneous_degree(&self) -> Option<i32> {
        match self.degrees().as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    /// Projection `p_k` onto `V_k`.
    pub fn component(&self, k: i32) -> Self {
        Self {
            terms: self
                .terms
                .range(BasisKey::new(k, 0)..=BasisKey::new(k, usize::MAX))
                .map(|(a, b)| (*a, b.clone()))
                .collect(),
        }
    }

    /// Max absolute coefficient in the model basis.
    pub fn norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> ComplexVector {
        GradedVector {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, c.to_complex()))
                .collect(),
        }
    }
}

impl ComplexVector {
    /// Largest entrywise deviation.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }
}

/// The `ℂ^×` action: multiply the degree-`l` component by `z^l`.
pub fn scale_action<S: Scalar>(z: &S, v: &GradedVector<S>) -> Result<GradedVector<S>> {
    if z.is_zero() {
        return Err(Error::InvalidScalar("scale action by zero".into()));
    }
    let mut out = GradedVector::zero();
    let mut powers: BTreeMap<i32, S> = BTreeMap::new();
    for (k, c) in v.terms() {
        let p = match powers.get(&k.degree) {
            Some(p) => p.clone(),
            None => {
                let p = z
                    .powi(k.degree)
                    .ok_or_else(|| Error::InvalidScalar("scale action by zero".into()))?;
                powers.insert(k.degree, p.clone());
                p
            }
        };
        out.add_term(*k, p * c.clone());
    }
    Ok(out)
}

/// Element of `∏_k V_k` restricted to a window, stored densely per degree.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedCompletion<S: Scalar = Complex64> {
    window: DegreeWindow,
    components: Vec<Vec<S>>,
    below_window_zero: bool,
}

impl<S: Scalar> WindowedCompletion<S> {
    pub fn zero(basis: &GradedBasis) -> Self {
        let window = basis.window();
        let components = window
            .degrees()
            .map(|d| vec![S::zero(); basis.dim(d)])
            .collect();
        Self {
            window,
            components,
            below_window_zero: true,
        }
    }

    /// Zero element with the same shape as `other`.
    pub fn zero_like(other: &Self) -> Self {
        let components = other
            .components
            .iter()
            .map(|c| vec![S::zero(); c.len()])
            .collect();
        Self {
            window: other.window,
            components,
            below_window_zero: other.below_window_zero,
        }
    }

    pub fn window(&self) -> DegreeWindow {
        self.window
    }

    /// Whether the represented element is known to vanish below the window.
    pub fn below_window_zero(&self) -> bool {
        self.below_window_zero
    }

    pub fn set_below_window_zero(&mut self, flag: bool) {
        self.below_window_zero = flag;
    }

    pub fn component(&self, k: i32) -> Result<&[S]> {
        self.window.check(k)?;
        Ok(&self.components[(k - self.window.lo) as usize])
    }

    pub fn add_to(&mut self, key: BasisKey, c: S) -> Result<()> {
        self.window.check(key.degree)?;
        let slot = self.components[(key.degree - self.window.lo) as usize]
            .get_mut(key.index)
            .ok_or_else(|| {
                Error::Index(format!(
                    "basis index {} in degree {}",
                    key.index, key.degree
                ))
            })?;
        *slot += c;
        Ok(())
    }

    /// Adds every term of `v` that lies in the window; terms above are dropped,
    /// terms below are an error when the completion claims to vanish there.
    pub fn accumulate(&mut self, v: &GradedVector<S>) -> Result<()> {
        for (k, c) in v.terms() {
            if k.degree > self.window.hi {
                continue;
            }
            if k.degree < self.window.lo {
                if self.below_window_zero {
                    return Err(Error::WindowViolation {
                        degree: k.degree,
                        lo: self.window.lo,
                        hi: self.window.hi,
                    });
                }
                continue;
            }
            self.add_to(*k, c.clone())?;
        }
        Ok(())
    }

    /// Projection `p_k`.
    pub fn project(&self, k: i32) -> Result<GradedVector<S>> {
        let comp = self.component(k)?;
        Ok(GradedVector::from_terms(
            comp.iter()
                .enumerate()
                .map(|(i, c)| (BasisKey::new(k, i), c.clone())),
        ))
    }

    /// The sum of all projections as a finitely supported vector.
    pub fn to_vector(&self) -> GradedVector<S> {
        let mut out = GradedVector::zero();
        for d in self.window.degrees() {
            out.axpy(&S::one(), &self.project(d).expect("degree in window"));
        }
        out
    }

    pub fn norm_in_degree(&self, k: i32) -> Result<f64> {
        Ok(self
            .component(k)?
            .iter()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max))
    }

    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = self.clone();
        for v in out.components.iter_mut().flatten() {
            *v = v.clone() * c.clone();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.window != other.window {
            return Err(Error::Config("window mismatch".into()));
        }
        let mut out = self.clone();
        for (a, b) in out
            .components
            .iter_mut()
            .flatten()
            .zip(other.components.iter().flatten())
        {
            *a += b.clone();
        }
        out.below_window_zero = self.below_window_zero && other.below_window_zero;
        Ok(out)
    }

    /// Per-degree max deviation `(degree, |x_k - y_k|_∞)`.
    pub fn residuals(&self, other: &Self) -> Result<Vec<(i32, f64)>> {
        if self.window != other.window {
            return Err(Error::Config("window mismatch".into()));
        }
        Ok(self
            .window
            .degrees()
            .zip(self.components.iter().zip(&other.components))
            .map(|(d, (a, b))| {
                let r = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x.clone() - y.clone()).magnitude())
                    .fold(0.0, f64::max);
                (d, r)
            })
            .collect())
    }

    pub fn max_residual(&self, other: &Self) -> Result<f64> {
        Ok(self
            .residuals(other)?
            .into_iter()
            .map(|(_, r)| r)
            .fold(0.0, f64::max))
    }

    /// Per-degree deviation relative to `max(1, |x_k|, |y_k|)`.
    pub fn max_relative_residual(&self, other: &Self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (d, r) in self.residuals(other)? {
            let scale = 1f64
                .max(self.norm_in_degree(d)?)
                .max(other.norm_in_degree(d)?);
            worst = worst.max(r / scale);
        }
        Ok(worst)
    }
}

impl WindowedCompletion<GaussQ> {
    pub fn to_complex(&self) -> WindowedCompletion<Complex64> {
        WindowedCompletion {
            window: self.window,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(Scalar::to_complex).collect())
                .collect(),
            below_window_zero: self.below_window_zero,
        }
    }
}

/// Embed `v ∈ V` into the completion over `basis`'s window.
pub fn embed<S: Scalar>(v: &GradedVector<S>, basis: &GradedBasis) -> Result<WindowedCompletion<S>> {
    let w = basis.window();
    let mut out = WindowedCompletion::zero(basis);
    for (k, c) in v.terms() {
        w.check(k.degree)?;
        out.add_to(*k, c.clone())?;
    }
    Ok(out)
}

/// `p_k(x)`, the degree-`k` component.
pub fn project<S: Scalar>(x: &WindowedCompletion<S>, k: i32) -> Result<GradedVector<S>> {
    x.project(k)
}
