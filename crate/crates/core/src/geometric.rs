//! Geometric multiplication `μ` built from a vertex algebra, its two
//! evaluation paths and the geometric axiom checks.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::{scale_action, BasisKey, ComplexVector, GradedVector, WindowedCompletion};
use crate::laurent::{eval_vector, ExponentWindow, MultiLaurent, PoleClearingPoly};
use crate::scalar::{cpowi, GaussQ, Scalar};
use crate::va_core::{lift, VertexAlgebra};

/// Negative-exponent margin scanned by the polynomiality witness.
pub const WITNESS_MARGIN: i32 = 2;

/// Per-tuple data: locality matrix, pole-clearing polynomial and the
/// per-degree polynomials `p_l(g·f)`.
pub struct TupleData {
    keys: Vec<BasisKey>,
    orders: Vec<Vec<u32>>,
    g: PoleClearingPoly,
    degree_sum: i32,
    components: Mutex<BTreeMap<i32, Arc<MultiLaurent<GradedVector>>>>,
    states: Mutex<HashMap<(usize, Vec<i32>), GradedVector>>,
}

impl TupleData {
    pub fn keys(&self) -> &[BasisKey] {
        &self.keys
    }

    pub fn orders(&self) -> &[Vec<u32>] {
        &self.orders
    }

    pub fn pole_clearing(&self) -> &PoleClearingPoly {
        &self.g
    }

    /// `Σα` on the support of `p_l(g·f)`.
    pub fn hyperplane(&self, l: i32) -> i32 {
        self.g.total_degree() + l - self.degree_sum
    }
}

/// Evidence that a truncated sum has converged in one degree.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConvergenceCertificate {
    pub degree: i32,
    /// Norms of the last retained shells, oldest first.
    pub shells: Vec<f64>,
    /// Largest ratio of consecutive shells.
    pub ratio: f64,
    /// Geometric extrapolation of everything past the last shell.
    pub tail: f64,
    /// Truncation parameter at which the shells were taken.
    pub retained: i32,
    /// Description of the sampled set the estimate refers to.
    pub compact: String,
}

impl ConvergenceCertificate {
    pub fn from_shells(degree: i32, shells: Vec<f64>, retained: i32, compact: String) -> Self {
        let last = shells.len().saturating_sub(3);
        let tail_shells = &shells[last..];
        let mut ratio: f64 = 0.0;
        for w in tail_shells.windows(2) {
            let r = if w[0] == 0.0 {
                if w[1] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w[1] / w[0]
            };
            ratio = ratio.max(r);
        }
        let s = tail_shells.last().copied().unwrap_or(0.0);
        let tail = if s == 0.0 {
            0.0
        } else if ratio < 1.0 {
            s * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        Self {
            degree,
            shells: tail_shells.to_vec(),
            ratio,
            tail,
            retained,
            compact,
        }
    }
}

/// Value of the ordered mode sum with per-degree certificates.
#[derive(Clone, Debug)]
pub struct OrderedValue {
    pub value: WindowedCompletion,
    pub certificates: Vec<ConvergenceCertificate>,
}

impl OrderedValue {
    /// Largest tail relative to `max(1, |x_l|)`.
    pub fn max_relative_tail(&self) -> f64 {
        self.certificates
            .iter()
            .map(|c| {
                let n = self.value.norm_in_degree(c.degree).unwrap_or(0.0);
                c.tail / n.max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// `μ` attached to a vertex algebra.
pub struct GeometricStructure {
    va: Arc<VertexAlgebra>,
    m_max: usize,
    tuples: Mutex<HashMap<Vec<BasisKey>, Arc<TupleData>>>,
    /// Target relative tail for the ordered path.
    pub ordered_tol: f64,
    /// Largest excess of intermediate degree over the window for the ordered path.
    pub ordered_depth_cap: i32,
}

fn check_off_diagonal(z: &[Complex64]) -> Result<()> {
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            if z[i] == z[j] {
                return Err(Error::Diagonal { i, j });
            }
        }
    }
    Ok(())
}

/// Integer vectors of length `m`, entries `≥ lo`, summing to `total`.
pub fn compositions(m: usize, total: i32, lo: i32) -> Vec<Vec<i32>> {
    fn go(m: usize, total: i32, lo: i32, prefix: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if m == 1 {
            if total >= lo {
                prefix.push(total);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        let rest_min = lo * (m as i32 - 1);
        let mut x = lo;
        while x + rest_min <= total {
            prefix.push(x);
            go(m - 1, total - x, lo, prefix, out);
            prefix.pop();
            x += 1;
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(m, total, lo, &mut Vec::new(), &mut out);
    out
}

impl GeometricStructure {
    pub fn new(va: Arc<VertexAlgebra>, m_max: usize) -> Self {
        Self {
            va,
            m_max,
            tuples: Mutex::new(HashMap::new()),
            ordered_tol: 1e-13,
            ordered_depth_cap: 48,
        }
    }

    pub fn algebra(&self) -> &Arc<VertexAlgebra> {
        &self.va
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    fn check_arity(&self, m: usize) -> Result<()> {
        if m > self.m_max {
            return Err(Error::Config(format!(
                "arity {m} exceeds m_max = {}",
                self.m_max
            )));
        }
        Ok(())
    }

    /// Locality order of two basis elements from the unbounded modes.
    pub fn locality_order(&self, a: BasisKey, b: BasisKey) -> u32 {
        let (av, bv) = (GradedVector::basis(a), GradedVector::basis(b));
        let n1 = self.va.vanishing_order_ext(&av, &bv);
        let n2 = self.va.vanishing_order_ext(&bv, &av);
        n1.max(n2).max(0) as u32
    }

    /// Cached data for a basis tuple, built on first use.
    pub fn tuple(&self, keys: &[BasisKey]) -> Result<Arc<TupleData>> {
        if let Some(t) = self.tuples.lock().expect("tuple cache poisoned").get(keys) {
            return Ok(t.clone());
        }
        let m = keys.len();
        let mut orders = vec![vec![0u32; m]; m];
        for i in 0..m {
            for j in (i + 1)..m {
                orders[i][j] = self.locality_order(keys[i], keys[j]);
            }
        }
        let g = PoleClearingPoly::new(m, orders.clone())?;
        let data = Arc::new(TupleData {
            keys: keys.to_vec(),
            orders,
            g,
            degree_sum: keys.iter().map(|k| k.degree).sum(),
            components: Mutex::new(BTreeMap::new()),
            states: Mutex::new(HashMap::new()),
        });
        self.tuples
            .lock()
            .expect("tuple cache poisoned")
            .insert(keys.to_vec(), data.clone());
        Ok(data)
    }

    /// Coefficient of `x^e` in `Y(a_1,x_1)…Y(a_m,x_m)|0⟩`.
    fn series_coefficient(&self, t: &TupleData, i: usize, e: &[i32]) -> GradedVector {
        let m = t.keys.len();
        if i == m {
            return self.va.vacuum().clone();
        }
        let key = (i, e.to_vec());
        if let Some(v) = t.states.lock().expect("state cache poisoned").get(&key) {
            return v.clone();
        }
        let inner = self.series_coefficient(t, i + 1, &e[1..]);
        let v = if inner.is_zero() {
            inner
        } else {
            let a = GradedVector::basis(t.keys[i]);
            self.va.apply_mode_ext(&a, -e[0] - 1, &inner)
        };
        t.states
            .lock()
            .expect("state cache poisoned")
            .insert(key, v.clone());
        v
    }

    /// Coefficient of `x^γ` in `g·f`.
    fn cleared_coefficient(&self, t: &TupleData, gamma: &[i32]) -> GradedVector {
        let mut acc = GradedVector::zero();
        for (beta, r) in t.g.coeffs() {
            let e: Vec<i32> = gamma.iter().zip(beta).map(|(x, y)| x - y).collect();
            let c = self.series_coefficient(t, 0, &e);
            if !c.is_zero() {
                acc.axpy(&GaussQ::int(*r as i64), &c);
            }
        }
        acc
    }

    /// `p_l(g·f)` for a basis tuple, with the polynomiality witness enforced.
    ///
    /// Every exponent on the hyperplane `Σα = deg g + l − Σ|a_i|` with entries
    /// `≥ −WITNESS_MARGIN` is computed; a nonzero coefficient at a negative
    /// exponent is an axiom violation.
    pub fn component(&self, keys: &[BasisKey], l: i32) -> Result<Arc<MultiLaurent<GradedVector>>> {
        let t = self.tuple(keys)?;
        self.component_of(&t, l)
    }

    fn component_of(&self, t: &TupleData, l: i32) -> Result<Arc<MultiLaurent<GradedVector>>> {
        if let Some(c) = t
            .components
            .lock()
            .expect("component cache poisoned")
            .get(&l)
        {
            return Ok(c.clone());
        }
        let m = t.keys.len();
        let total = t.hyperplane(l);
        let mut poly = MultiLaurent::new(ExponentWindow::uniform(m, 0, total.max(0))?);
        if m == 0 {
            if l == 0 {
                poly = MultiLaurent::constant(0, self.va.vacuum().clone());
            }
        } else if l >= self.va.min_degree() {
            for gamma in compositions(m, total, -WITNESS_MARGIN) {
                let c = self.cleared_coefficient(t, &gamma);
                if c.is_zero() {
                    continue;
                }
                if gamma.iter().any(|&x| x < 0) {
                    return Err(Error::AxiomViolation(format!(
                        "g·f has a negative exponent {gamma:?} in degree {l}"
                    )));
                }
                poly.add_term(gamma, &c)?;
            }
        }
        let poly = Arc::new(poly);
        t.components
            .lock()
            .expect("component cache poisoned")
            .insert(l, poly.clone());
        Ok(poly)
    }

    /// Re-run the witness on a basis tuple for degree `l`: polynomial, and every
    /// stored exponent on the hyperplane.
    pub fn witness(&self, keys: &[BasisKey], l: i32) -> Result<()> {
        let t = self.tuple(keys)?;
        let p = self.component_of(&t, l)?;
        let total = t.hyperplane(l);
        for (e, _) in p.terms() {
            if e.iter().any(|&x| x < 0) || e.iter().sum::<i32>() != total {
                return Err(Error::AxiomViolation(format!(
                    "exponent {e:?} breaks the witness in degree {l}"
                )));
            }
        }
        Ok(())
    }

    fn g_value(t: &TupleData, z: &[Complex64]) -> Result<Complex64> {
        let v = t.g.eval_factored(z);
        if v.norm() == 0.0 {
            check_off_diagonal(z)?;
            return Err(Error::Domain("pole-clearing factor vanishes".into()));
        }
        Ok(v)
    }

    /// Degree-`l` component of `μ` on a basis tuple.
    pub fn basis_component(
        &self,
        keys: &[BasisKey],
        z: &[Complex64],
        l: i32,
    ) -> Result<ComplexVector> {
        let t = self.tuple(keys)?;
        let p = self.component_of(&t, l)?;
        if p.is_empty() {
            return Ok(ComplexVector::zero());
        }
        let v = eval_vector(&p, z)?;
        let g = Self::g_value(&t, z)?;
        Ok(v.scale(&(Complex64::new(1.0, 0.0) / g)))
    }

    /// Degree components of `μ(a, z)` for arbitrary states, by multilinearity.
    pub fn mu_components<S: Scalar>(
        &self,
        a: &[GradedVector<S>],
        z: &[Complex64],
        degrees: impl IntoIterator<Item = i32> + Clone,
    ) -> Result<BTreeMap<i32, ComplexVector>> {
        if a.len() != z.len() {
            return Err(Error::Config("one point per insertion".into()));
        }
        self.check_arity(a.len())?;
        check_off_diagonal(z)?;
        let mut out: BTreeMap<i32, ComplexVector> = degrees
            .clone()
            .into_iter()
            .map(|l| (l, ComplexVector::zero()))
            .collect();
        for (keys, coeff) in expand_tuples(a) {
            for l in degrees.clone() {
                let v = self.basis_component(&keys, z, l)?;
                if !v.is_zero() {
                    out.get_mut(&l).expect("degree present").axpy(&coeff, &v);
                }
            }
        }
        Ok(out)
    }

    /// `μ(a, z)` anywhere off the diagonals, from `g(z)^{-1}[g·f]_{x=z}`.
    pub fn mu_continued<S: Scalar>(
        &self,
        a: &[GradedVector<S>],
        z: &[Complex64],
    ) -> Result<WindowedCompletion> {
        let w = self.va.window();
        let comps = self.mu_components(a, z, w.lo..=w.hi)?;
        let mut out = WindowedCompletion::zero(self.va.basis());
        for v in comps.values() {
            out.accumulate(v)?;
        }
        Ok(out)
    }

    /// `μ(a, z)` on `|z_1| > … > |z_m|` by summing `Y(a_1,z_1)…Y(a_m,z_m)|0⟩`.
    ///
    /// Intermediate degrees are truncated at a depth `D`; the shells between
    /// `D−6, D−4, D−2, D` certify the remainder. `D` grows until the relative
    /// tail drops below `ordered_tol` or reaches `hi + ordered_depth_cap`.
    pub fn mu_ordered<S: Scalar>(
        &self,
        a: &[GradedVector<S>],
        z: &[Complex64],
    ) -> Result<OrderedValue> {
        if a.len() != z.len() {
            return Err(Error::Config("one point per insertion".into()));
        }
        check_off_diagonal(z)?;
        for i in 1..z.len() {
            if !(z[i - 1].norm() > z[i].norm()) {
                return Err(Error::Domain(format!(
                    "|z_{}| ≤ |z_{}|: points are not radially ordered; use the continued evaluation",
                    i,
                    i + 1
                )));
            }
        }
        let w = self.va.window();
        let mut depth = w.hi + 10;
        loop {
            let value = self.ordered_sum(a, z, depth)?;
            let cap_reached = depth >= w.hi + self.ordered_depth_cap;
            if value.max_relative_tail() <= self.ordered_tol || cap_reached {
                return Ok(value);
            }
            depth += 6;
        }
    }

    fn ordered_sum<S: Scalar>(
        &self,
        a: &[GradedVector<S>],
        z: &[Complex64],
        depth: i32,
    ) -> Result<OrderedValue> {
        let w = self.va.window();
        let lo = self.va.min_degree();
        let m = a.len();
        // states grouped by the largest intermediate degree seen so far
        let mut states: BTreeMap<i32, ComplexVector> = BTreeMap::new();
        states.insert(0.max(lo), lift(self.va.vacuum()));
        for i in (0..m).rev() {
            let (top, bottom) = if i == 0 {
                (w.hi, w.lo.max(lo))
            } else {
                (depth, lo)
            };
            let mut next: BTreeMap<i32, ComplexVector> = BTreeMap::new();
            for (&label, v) in &states {
                for (&c, x) in v.terms() {
                    for (&ak, ac) in a[i].terms() {
                        let s = ak.degree + c.degree - 1;
                        let coeff = ac.to_complex() * x;
                        for k in (s - top)..=(s - bottom) {
                            let out = self.va.mode_ext(ak, k, c);
                            if out.is_zero() {
                                continue;
                            }
                            let zk = cpowi(z[i], -k - 1).ok_or(Error::Pole { index: i })?;
                            let d = s - k;
                            let slot = next.entry(label.max(d)).or_default();
                            slot.axpy(&(coeff * zk), &lift(&out));
                        }
                    }
                }
            }
            states = next;
        }
        let partial = |d: i32| -> ComplexVector {
            let mut acc = ComplexVector::zero();
            for (_, v) in states.range(..=d) {
                acc = acc.add(v);
            }
            acc
        };
        let cuts: Vec<i32> = (0..4).map(|j| depth - 6 + 2 * j).collect();
        let sums: Vec<ComplexVector> = cuts.iter().map(|&d| partial(d)).collect();
        let mut value = WindowedCompletion::zero(self.va.basis());
        value.accumulate(&sums[3])?;
        let compact = format!(
            "point {:?}",
            z.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>()
        );
        let certificates = w
            .degrees()
            .map(|l| {
                let shells = sums
                    .windows(2)
                    .map(|p| p[1].component(l).sub(&p[0].component(l)).norm())
                    .collect();
                ConvergenceCertificate::from_shells(l, shells, depth, compact.clone())
            })
            .collect();
        Ok(OrderedValue {
            value,
            certificates,
        })
    }
}

/// Expand a tuple of vectors into basis tuples with complex weights.
pub fn expand_tuples<S: Scalar>(a: &[GradedVector<S>]) -> Vec<(Vec<BasisKey>, Complex64)> {
    let mut out = vec![(Vec::new(), Complex64::new(1.0, 0.0))];
    for v in a {
        let mut next = Vec::new();
        for (keys, c) in &out {
            for (&k, x) in v.terms() {
                let mut ks: Vec<BasisKey> = keys.clone();
                ks.push(k);
                next.push((ks, c * x.to_complex()));
            }
        }
        out = next;
    }
    out
}

/// Per-degree comparison of two evaluations.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Residual {
    pub name: String,
    /// Largest `‖x_l − y_l‖ / max(1, ‖x_l‖, ‖y_l‖)` over the window.
    pub residual: f64,
    pub per_degree: Vec<(i32, f64)>,
}

impl Residual {
    pub fn compare(name: &str, x: &WindowedCompletion, y: &WindowedCompletion) -> Result<Self> {
        let mut per_degree = Vec::new();
        let mut worst: f64 = 0.0;
        for l in x.window().degrees() {
            let d = x
                .component(l)?
                .iter()
                .zip(y.component(l)?)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let scale = x.norm_in_degree(l)?.max(y.norm_in_degree(l)?).max(1.0);
            per_degree.push((l, d / scale));
            worst = worst.max(d / scale);
        }
        Ok(Self {
            name: name.to_string(),
            residual: worst,
            per_degree,
        })
    }
}

/// Associativity comparison with the certificate for the sum over inner degrees.
#[derive(Clone, Debug, Serialize)]
pub struct AssociativityReport {
    pub residual: Residual,
    /// Largest inner degree retained.
    pub retained: i32,
    pub certificates: Vec<ConvergenceCertificate>,
    /// Largest certified tail relative to `max(1, |x_l|)`.
    pub tail: f64,
}

/// One term `μ(…, a_i(k)a_j, z_j, …)(z_i − z_j)^{−k−1}` of an operator product expansion.
#[derive(Clone, Debug)]
pub struct OpeTerm {
    pub k: i32,
    pub i: usize,
    pub j: usize,
    /// Insertions with `a_i` removed and `a_j` replaced by `a_i(k)a_j`.
    pub states: Vec<GradedVector>,
}

fn scale_by_degree(x: &WindowedCompletion, lambda: Complex64) -> Result<WindowedCompletion> {
    let mut out = WindowedCompletion::zero_like(x);
    for l in x.window().degrees() {
        let f = cpowi(lambda, l).ok_or(Error::InvalidScalar("zero scale".into()))?;
        out.accumulate(&x.project(l)?.scale(&f))?;
    }
    Ok(out)
}

impl GeometricStructure {
    /// `‖μ(a,z) − μ(a^σ, z^σ)‖` with `(a^σ)_i = a_{σ(i)}`.
    pub fn check_permutation<S: Scalar>(
        &self,
        a: &[GradedVector<S>],
        z: &[Complex64],
        sigma: &[usize],
    ) -> Result<Residual> {
        let m = a.len();
        let mut seen = vec![false; m];
        if sigma.len() != m
            || sigma
                .iter()
                .any(|&s| s >= m || std::mem::replace(&mut seen[s], true))
        {
            return Err(Error::Config(format!(
                "{sigma:?} is not a permutation of {m} insertions"
            )));
        }
        let x = self.mu_continued(a, z)?;
        let a2: Vec<GradedVector<S>> = sigma.iter().map(|&s| a[s].clone()).collect();
        let z2: Vec<Complex64> = sigma.iter().map(|&s| z[s]).collect();
        let y = self.mu_continued(&a2, &z2)?;
        Residual::compare("permutation", &x, &y)
    }

    /// `λ.μ(a, z)` against `μ(λ.a, λz)`.
    pub fn check_equivariance<S: Scalar>(
        &self,
        a: &[GradedVector<S>],
        z: &[Complex64],
        lambda: Complex64,
    ) -> Result<Residual> {
        if lambda.norm() == 0.0 {
            return Err(Error::InvalidScalar("equivariance needs λ ≠ 0".into()));
        }
        let x = scale_by_degree(&self.mu_continued(a, z)?, lambda)?;
        let a2: Vec<ComplexVector> = a
            .iter()
            .map(|v| scale_action(&lambda, &v.to_complex()))
            .collect::<Result<_>>()?;
        let z2: Vec<Complex64> = z.iter().map(|zi| zi * lambda).collect();
        let y = self.mu_continued(&a2, &z2)?;
        Residual::compare("equivariance", &x, &y)
    }

    /// `μ(a, 0) = a`, compared exactly on the cached polynomials.
    pub fn check_insertion_at_zero(&self, a: &GradedVector) -> Result<bool> {
        let w = self.va.window();
        for l in w.degrees() {
            let mut value = GradedVector::zero();
            for (&k, c) in a.terms() {
                let p = self.component(&[k], l)?;
                value.axpy(c, &p.coeff(&[0]));
            }
            if value != a.component(l) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Polynomiality of every degree of `g·f` for `(a, b)`; returns the `N_12` used.
    pub fn check_meromorphicity(&self, a: &GradedVector, b: &GradedVector) -> Result<u32> {
        let mut n = 0;
        for (&ka, _) in a.terms() {
            for (&kb, _) in b.terms() {
                let t = self.tuple(&[ka, kb])?;
                for l in self.va.window().degrees() {
                    self.witness(&[ka, kb], l)?;
                }
                n = n.max(t.orders[0][1]);
            }
        }
        Ok(n)
    }

    /// `Σ_k μ(a_1,z_1,…,a_m,z_m, p_k μ(b,w), z_{m+1})` against
    /// `μ(a_1,z_1,…,a_m,z_m, b_1,w_1+z_{m+1},…)`.
    ///
    /// With `k_max = None` the inner sum runs until its certified tail is
    /// negligible; otherwise it stops at degree `k_max`.
    pub fn check_associativity<S: Scalar>(
        &self,
        a: &[GradedVector<S>],
        b: &[GradedVector<S>],
        z: &[Complex64],
        w: &[Complex64],
        k_max: Option<i32>,
    ) -> Result<AssociativityReport> {
        let m = a.len();
        if z.len() != m + 1 || w.len() != b.len() {
            return Err(Error::Config(
                "associativity needs m+1 outer and n inner points".into(),
            ));
        }
        let reach = w.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let gap = z[..m]
            .iter()
            .map(|zj| (zj - z[m]).norm())
            .fold(f64::INFINITY, f64::min);
        if !(reach < gap) {
            return Err(Error::Domain(format!(
                "inner points reach {reach} but the nearest outer point is {gap} away"
            )));
        }
        let outer: Vec<ComplexVector> = a.iter().map(|v| v.to_complex()).collect();
        let lo = self.va.min_degree();
        let hi = self.va.window().hi;
        let cap = k_max.unwrap_or(hi + 40);
        let mut lhs = WindowedCompletion::zero(self.va.basis());
        let mut norms: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
        let mut k = lo;
        let mut certificates = Vec::new();
        let mut tail = f64::INFINITY;
        while k <= cap {
            let inner = self
                .mu_components(b, w, [k])?
                .remove(&k)
                .unwrap_or_default();
            let term = if inner.is_zero() {
                WindowedCompletion::zero(self.va.basis())
            } else {
                let mut args = outer.clone();
                args.push(inner);
                self.mu_continued(&args, z)?
            };
            lhs = lhs.add(&term)?;
            for l in self.va.window().degrees() {
                norms.entry(l).or_default().push(term.norm_in_degree(l)?);
            }
            if (k - lo) % 2 == 1 && k - lo >= 5 {
                certificates = self.pair_certificates(&norms, k, z, w);
                tail = certificates
                    .iter()
                    .map(|c| c.tail / lhs.norm_in_degree(c.degree).unwrap_or(0.0).max(1.0))
                    .fold(0.0, f64::max);
                if k_max.is_none() && tail <= 1e-13 {
                    break;
                }
            }
            k += 1;
        }
        let k = k.min(cap);
        if certificates.is_empty() {
            certificates = self.pair_certificates(&norms, k, z, w);
            tail = certificates.iter().map(|c| c.tail).fold(0.0, f64::max);
        }
        let mut args = outer;
        let mut points = z[..m].to_vec();
        for (bi, wi) in b.iter().zip(w) {
            args.push(bi.to_complex());
            points.push(wi + z[m]);
        }
        let rhs = self.mu_continued(&args, &points)?;
        Ok(AssociativityReport {
            residual: Residual::compare("associativity", &lhs, &rhs)?,
            retained: k,
            certificates,
            tail,
        })
    }

    fn pair_certificates(
        &self,
        norms: &BTreeMap<i32, Vec<f64>>,
        k: i32,
        z: &[Complex64],
        w: &[Complex64],
    ) -> Vec<ConvergenceCertificate> {
        let compact = format!(
            "outer {:?}, inner {:?}",
            z.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>(),
            w.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>()
        );
        norms
            .iter()
            .map(|(&l, ns)| {
                // shells of two consecutive inner degrees, aligned to the end
                let start = ns.len() % 2;
                let shells = ns[start..].chunks(2).map(|c| c.iter().sum()).collect();
                ConvergenceCertificate::from_shells(l, shells, k, compact.clone())
            })
            .collect()
    }

    /// Terms of the expansion of `μ(a, z)` around `z_i → z_j`, for the `order`
    /// largest mode indices `k ≤ N_ij − 1`.
    pub fn ope_expand(
        &self,
        a: &[GradedVector],
        i: usize,
        j: usize,
        order: usize,
    ) -> Result<Vec<OpeTerm>> {
        if i >= j || j >= a.len() {
            return Err(Error::Index(format!(
                "need i < j < {}, got ({i}, {j})",
                a.len()
            )));
        }
        let n = self.va.vanishing_order_ext(&a[i], &a[j]);
        let mut terms = Vec::new();
        for t in 0..order as i32 {
            let k = n - 1 - t;
            let prod = self.va.apply_mode_ext(&a[i], k, &a[j]);
            let states: Vec<GradedVector> = a
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != i)
                .map(|(p, v)| if p == j { prod.clone() } else { v.clone() })
                .collect();
            terms.push(OpeTerm { k, i, j, states });
        }
        Ok(terms)
    }

    /// Whether `|z_i − z_j| < min_{l ≠ i,j} |z_l − z_j|`.
    pub fn in_ope_domain(z: &[Complex64], i: usize, j: usize) -> bool {
        let d = (z[i] - z[j]).norm();
        z.iter()
            .enumerate()
            .filter(|&(l, _)| l != i && l != j)
            .all(|(_, zl)| d < (zl - z[j]).norm())
    }

    /// Sum of OPE terms at `z`.
    pub fn ope_partial_sum(
        &self,
        terms: &[OpeTerm],
        z: &[Complex64],
    ) -> Result<WindowedCompletion> {
        let mut out = WindowedCompletion::zero(self.va.basis());
        let Some(first) = terms.first() else {
            return Ok(out);
        };
        let (i, j) = (first.i, first.j);
        if !Self::in_ope_domain(z, i, j) {
            return Err(Error::Domain(format!(
                "point is outside the expansion domain of ({i}, {j})"
            )));
        }
        let rest: Vec<Complex64> = z
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != i)
            .map(|(_, c)| *c)
            .collect();
        let diff = z[i] - z[j];
        for t in terms {
            if t.states.iter().any(GradedVector::is_zero) {
                continue;
            }
            let factor = cpowi(diff, -t.k - 1).ok_or(Error::Diagonal { i, j })?;
            out = out.add(&self.mu_continued(&t.states, &rest)?.scale(&factor))?;
        }
        Ok(out)
    }

    /// `w.x = Σ_k μ(p_k(x), w)`.
    pub fn translate_action(
        &self,
        w: Complex64,
        x: &WindowedCompletion,
    ) -> Result<WindowedCompletion> {
        if !x.below_window_zero() {
            return Err(Error::Domain(
                "the affine action needs a bounded-below vector".into(),
            ));
        }
        let mut out = WindowedCompletion::zero(self.va.basis());
        for k in x.window().degrees() {
            let xk = x.project(k)?;
            if xk.is_zero() {
                continue;
            }
            out = out.add(&self.mu_continued(&[xk], &[w])?)?;
        }
        Ok(out)
    }

    /// Action of `(λ, w) ∈ ℂ^× ⋉ ℂ`: scale by `λ`, then translate by `w`.
    pub fn affine_action(
        &self,
        lambda: Complex64,
        w: Complex64,
        x: &WindowedCompletion,
    ) -> Result<WindowedCompletion> {
        if lambda.norm() == 0.0 {
            return Err(Error::InvalidScalar("λ must be nonzero".into()));
        }
        let scaled = scale_by_degree(x, lambda)?;
        self.translate_action(w, &scaled)
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Points with `|z_1| > … > |z_m|`, consecutive modulus ratios in `[0.06, 0.12]`.
pub fn ordered_points(m: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut r = rng.gen_range(0.8..1.6);
            (0..m)
                .map(|_| {
                    let z = random_unit(&mut rng) * r;
                    r *= rng.gen_range(0.06..0.12);
                    z
                })
                .collect()
        })
        .collect()
}

/// Points with `|z_1| < … < |z_m|`.
pub fn anti_ordered_points(m: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    ordered_points(m, count, seed ^ 0x5eed)
        .into_iter()
        .map(|mut p| {
            p.reverse();
            p
        })
        .collect()
}

/// Points in the disk of radius 2 with pairwise distances at least `0.3`.
pub fn generic_points(m: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let p: Vec<Complex64> = (0..m)
            .map(|_| random_unit(&mut rng) * rng.gen_range(0.2..2.0))
            .collect();
        let ok = (0..m).all(|i| ((i + 1)..m).all(|j| (p[i] - p[j]).norm() >= 0.3));
        if ok {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::{embed, DegreeWindow};
    use crate::models::build_model;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn boson(m_max: usize) -> GeometricStructure {
        let va = build_model("free_boson", DegreeWindow::new(0, 4).unwrap(), 5).unwrap();
        GeometricStructure::new(Arc::new(va), m_max)
    }

    fn vac_coeff(g: &GeometricStructure, x: &WindowedCompletion) -> Complex64 {
        let vac = *g.algebra().vacuum().terms().next().unwrap().0;
        x.to_vector().coeff(vac)
    }

    #[test]
    fn two_point_function() {
        let g = boson(2);
        let b = g.algebra().state("b").unwrap();
        for (z, w) in [
            (c(2.0, 0.0), c(1.0, 0.0)),
            (c(0.3, 1.0), c(-1.0, 0.5)),
            (c(1.0, 0.0), c(2.0, 0.0)),
        ] {
            let v = g.mu_continued(&[b.clone(), b.clone()], &[z, w]).unwrap();
            let expected = (z - w).powi(-2);
            assert!((vac_coeff(&g, &v) - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn four_point_wick_sum() {
        let g = boson(4);
        let b = g.algebra().state("b").unwrap();
        let z = [c(1.5, 0.2), c(-0.4, 1.1), c(0.7, -0.9), c(-1.3, -0.6)];
        let v = g.mu_continued(&vec![b; 4], &z).unwrap();
        let p = |i: usize, j: usize| (z[i] - z[j]).powi(-2);
        let expected = p(0, 1) * p(2, 3) + p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2);
        assert!((vac_coeff(&g, &v) - expected).norm() < 1e-12 * expected.norm().max(1.0));
    }

    #[test]
    fn single_insertion_is_exponential_of_translation() {
        let g = boson(1);
        let va = g.algebra().clone();
        let z = c(0.6, -0.3);
        let v = g
            .mu_continued(&[va.state("b").unwrap()], &[z])
            .unwrap()
            .to_vector();
        for n in 0..4 {
            let key = va.key(&format!("b(-{})", n + 1)).unwrap();
            assert!((v.coeff(key) - z.powi(n)).norm() < 1e-14, "n = {n}");
        }
        let x = embed(&va.state("b").unwrap().to_complex(), va.basis()).unwrap();
        let moved = g.translate_action(z, &x).unwrap();
        assert!(
            moved
                .max_residual(&g.mu_continued(&[va.state("b").unwrap()], &[z]).unwrap())
                .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn composition_counts() {
        // stars and bars: C(total − m·lo + m − 1, m − 1)
        assert_eq!(compositions(2, 3, 0).len(), 4);
        assert_eq!(compositions(3, 2, 0).len(), 6);
        assert_eq!(compositions(2, 0, -2).len(), 5);
        assert!(compositions(3, 4, -1)
            .iter()
            .all(|v| v.iter().sum::<i32>() == 4 && v.iter().all(|&x| x >= -1)));
    }

    #[test]
    fn tuple_orders_and_hyperplane() {
        let g = boson(3);
        let b = g.algebra().key("b").unwrap();
        let t = g.tuple(&[b, b, b]).unwrap();
        assert_eq!(t.orders()[0][1], 2);
        assert_eq!(t.orders()[1][2], 2);
        assert_eq!(t.pole_clearing().total_degree(), 6);
        assert_eq!(t.hyperplane(1), 6 + 1 - 3);
    }

    #[test]
    fn path_errors() {
        let g = boson(2);
        let b = g.algebra().state("b").unwrap();
        let two = [b.clone(), b.clone()];
        assert_eq!(
            g.mu_continued(&two, &[c(1.0, 0.0), c(1.0, 0.0)])
                .unwrap_err(),
            Error::Diagonal { i: 0, j: 1 }
        );
        assert!(matches!(
            g.mu_ordered(&two, &[c(1.0, 0.0), c(2.0, 0.0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            g.mu_continued(
                &[b.clone(), b.clone(), b],
                &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn ope_of_two_bosons() {
        let g = boson(3);
        let b = g.algebra().state("b").unwrap();
        let terms = g
            .ope_expand(&[b.clone(), b.clone(), b.clone()], 0, 1, 3)
            .unwrap();
        assert_eq!(
            terms.iter().map(|t| t.k).collect::<Vec<_>>(),
            vec![1, 0, -1]
        );
        assert_eq!(&terms[0].states[0], g.algebra().vacuum());
        assert!(terms[1].states[0].is_zero());
        assert!(!GeometricStructure::in_ope_domain(
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)],
            0,
            1
        ));
    }

    #[test]
    fn seeded_points() {
        for p in ordered_points(3, 5, 7) {
            assert!(p[0].norm() > p[1].norm() && p[1].norm() > p[2].norm());
        }
        for p in anti_ordered_points(3, 5, 7) {
            assert!(p[0].norm() < p[1].norm() && p[1].norm() < p[2].norm());
        }
        for p in generic_points(3, 5, 7) {
            assert!(
                (p[0] - p[1]).norm() >= 0.3
                    && (p[1] - p[2]).norm() >= 0.3
                    && (p[0] - p[2]).norm() >= 0.3
            );
        }
        assert_eq!(ordered_points(2, 3, 11), ordered_points(2, 3, 11));
    }

    #[test]
    fn certificate_geometric_tail() {
        let cert = ConvergenceCertificate::from_shells(0, vec![1.0, 0.5, 0.25], 10, String::new());
        assert!((cert.ratio - 0.5).abs() < 1e-15);
        assert!((cert.tail - 0.25).abs() < 1e-15);
    }
}
