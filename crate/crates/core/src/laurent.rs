//! Multivariate formal Laurent series with bounded exponent windows.
//!
//! Series are finite: every stored exponent lies inside a declared
//! per-variable window, and products report overflow instead of truncating.
//! The pole-clearing polynomial `∏_{i<j} (x_i - x_j)^{N_ij}` and the
//! region-dependent expansion of its inverse live here too, together with a
//! trapezoidal contour rule for reading off Laurent coefficients numerically.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grading::{ComplexVector, GradedBasis, GradedVector, WindowedCompletion};
use crate::scalar::{binomial, cpowi, GaussQ, Scalar};

/// Something that can sit in front of a monomial.
pub trait Coefficient: Clone + PartialEq + Debug + Send + Sync {
    type Field: Scalar;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    /// `self += c · other`
    fn add_scaled(&mut self, c: &Self::Field, other: &Self);
}

macro_rules! scalar_coefficient {
    ($t:ty) => {
        impl Coefficient for $t {
            type Field = $t;
            fn zero() -> Self {
                <$t as Scalar>::zero()
            }
            fn is_zero(&self) -> bool {
                <$t as Scalar>::is_zero(self)
            }
            fn add_scaled(&mut self, c: &$t, other: &Self) {
                *self += c.clone() * other.clone();
            }
        }
    };
}

scalar_coefficient!(GaussQ);
scalar_coefficient!(Complex64);

impl<S: Scalar> Coefficient for GradedVector<S> {
    type Field = S;
    fn zero() -> Self {
        GradedVector::zero()
    }
    fn is_zero(&self) -> bool {
        GradedVector::is_zero(self)
    }
    fn add_scaled(&mut self, c: &S, other: &Self) {
        self.axpy(c, other);
    }
}

/// Per-variable closed exponent intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentWindow {
    bounds: Vec<(i32, i32)>,
}

impl ExponentWindow {
    pub fn new(bounds: Vec<(i32, i32)>) -> Result<Self> {
        if bounds.iter().any(|(lo, hi)| lo > hi) {
            return Err(Error::Config(format!("empty exponent window {bounds:?}")));
        }
        Ok(Self { bounds })
    }

    pub fn uniform(arity: usize, lo: i32, hi: i32) -> Result<Self> {
        Self::new(vec![(lo, hi); arity])
    }

    pub fn arity(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(i32, i32)] {
        &self.bounds
    }

    pub fn contains(&self, e: &[i32]) -> bool {
        e.len() == self.bounds.len()
            && e.iter()
                .zip(&self.bounds)
                .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    /// Minkowski sum with another window.
    pub fn plus(&self, other: &Self) -> Self {
        Self {
            bounds: self
                .bounds
                .iter()
                .zip(&other.bounds)
                .map(|((a, b), (c, d))| (a + c, b + d))
                .collect(),
        }
    }

    /// Largest `|e_i|` over the window.
    pub fn max_abs(&self) -> i32 {
        self.bounds
            .iter()
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Finite Laurent series `Σ c_α x^α` in `arity` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiLaurent<C: Coefficient> {
    window: ExponentWindow,
    terms: BTreeMap<Vec<i32>, C>,
}

impl<C: Coefficient> MultiLaurent<C> {
    pub fn new(window: ExponentWindow) -> Self {
        Self {
            window,
            terms: BTreeMap::new(),
        }
    }

    /// The constant series `c` in `arity` variables.
    pub fn constant(arity: usize, c: C) -> Self {
        let mut s = Self::new(ExponentWindow::uniform(arity, 0, 0).expect("nonempty"));
        s.terms.insert(vec![0; arity], c);
        s.prune();
        s
    }

    pub fn arity(&self) -> usize {
        self.window.arity()
    }

    pub fn window(&self) -> &ExponentWindow {
        &self.window
    }

    /// Add `c x^e`; the exponent must lie in the window.
    pub fn add_term(&mut self, e: Vec<i32>, c: &C) -> Result<()> {
        if !self.window.contains(&e) {
            return Err(Error::ExponentOverflow { exponent: e });
        }
        if c.is_zero() {
            return Ok(());
        }
        let one = <C::Field as Scalar>::one();
        let slot = self.terms.entry(e.clone()).or_insert_with(C::zero);
        slot.add_scaled(&one, c);
        if slot.is_zero() {
            self.terms.remove(&e);
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn coeff(&self, e: &[i32]) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// No stored exponent is negative.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x >= 0))
    }

    pub fn scale(&self, c: &C::Field) -> Self {
        let mut out = Self::new(self.window.clone());
        for (e, v) in &self.terms {
            let mut t = C::zero();
            t.add_scaled(c, v);
            if !t.is_zero() {
                out.terms.insert(e.clone(), t);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c)?;
        }
        Ok(out)
    }

    /// Product with a scalar series; exact, with the Minkowski-sum window.
    pub fn mul_scalar_series(&self, s: &MultiLaurent<C::Field>) -> Result<Self>
    where
        C::Field: Coefficient<Field = C::Field>,
    {
        if self.arity() != s.arity() {
            return Err(Error::Config("arity mismatch in series product".into()));
        }
        let mut out = Self::new(self.window.plus(&s.window));
        for (e1, c1) in &self.terms {
            for (e2, c2) in &s.terms {
                let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let slot = out.terms.entry(e).or_insert_with(C::zero);
                slot.add_scaled(c2, c1);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Restrict to exponents inside `window`, discarding the rest.
    pub fn restrict(&self, window: ExponentWindow) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| window.contains(e))
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self { window, terms }
    }

    /// Set the trailing variable to zero: keep the `x_m^0` part, drop the variable.
    /// Errors if a negative power of that variable is present.
    pub fn at_last_zero(&self) -> Result<Self> {
        let m = self.arity();
        if m == 0 {
            return Err(Error::Index("no variable to specialize".into()));
        }
        if self.terms.keys().any(|e| e[m - 1] < 0) {
            return Err(Error::Pole { index: m - 1 });
        }
        let window = ExponentWindow::new(self.window.bounds[..m - 1].to_vec())?;
        let mut out = Self::new(window);
        for (e, c) in &self.terms {
            if e[m - 1] == 0 {
                out.terms.insert(e[..m - 1].to_vec(), c.clone());
            }
        }
        Ok(out)
    }
}

/// `∏_{i<j} (x_i - x_j)^{N_ij}` with its integer coefficients `r_β` expanded.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleClearingPoly {
    arity: usize,
    orders: Vec<Vec<u32>>,
    coeffs: BTreeMap<Vec<i32>, i128>,
}

impl PoleClearingPoly {
    /// `orders[i][j]` for `i < j` gives `N_ij`; other entries are ignored.
    pub fn new(arity: usize, orders: Vec<Vec<u32>>) -> Result<Self> {
        if orders.len() != arity || orders.iter().any(|r| r.len() != arity) {
            return Err(Error::Config(
                "locality matrix must be arity × arity".into(),
            ));
        }
        let mut coeffs: BTreeMap<Vec<i32>, i128> = BTreeMap::new();
        coeffs.insert(vec![0; arity], 1);
        for i in 0..arity {
            for j in (i + 1)..arity {
                for _ in 0..orders[i][j] {
                    let mut next: BTreeMap<Vec<i32>, i128> = BTreeMap::new();
                    for (e, c) in &coeffs {
                        let mut ei = e.clone();
                        ei[i] += 1;
                        *next.entry(ei).or_insert(0) += c;
                        let mut ej = e.clone();
                        ej[j] += 1;
                        *next.entry(ej).or_insert(0) -= c;
                    }
                    next.retain(|_, c| *c != 0);
                    coeffs = next;
                }
            }
        }
        Ok(Self {
            arity,
            orders,
            coeffs,
        })
    }

    /// The constant polynomial 1.
    pub fn one(arity: usize) -> Self {
        Self::new(arity, vec![vec![0; arity]; arity]).expect("square")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn order(&self, i: usize, j: usize) -> u32 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.orders[a][b]
    }

    pub fn orders(&self) -> &[Vec<u32>] {
        &self.orders
    }

    /// `Σ_{i<j} N_ij`; every monomial has this total degree.
    pub fn total_degree(&self) -> i32 {
        let mut d = 0;
        for i in 0..self.arity {
            for j in (i + 1)..self.arity {
                d += self.orders[i][j] as i32;
            }
        }
        d
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Vec<i32>, &i128)> {
        self.coeffs.iter()
    }

    /// Exponent bounds per variable over the support.
    pub fn exponent_window(&self) -> ExponentWindow {
        let mut bounds = vec![(i32::MAX, i32::MIN); self.arity];
        for e in self.coeffs.keys() {
            for (b, &x) in bounds.iter_mut().zip(e) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        ExponentWindow::new(bounds).expect("support is nonempty")
    }

    pub fn as_series<S: Scalar + Coefficient<Field = S>>(&self) -> MultiLaurent<S> {
        let mut s = MultiLaurent::new(self.exponent_window());
        for (e, c) in &self.coeffs {
            s.terms.insert(e.clone(), S::from_i64(*c as i64));
        }
        s
    }

    /// Evaluate from the expanded coefficients.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(e, c)| {
                let mono: Complex64 = e
                    .iter()
                    .zip(z)
                    .map(|(&k, &zi)| cpowi(zi, k).expect("nonnegative exponent"))
                    .product();
                mono * (*c as f64)
            })
            .sum()
    }

    /// Evaluate the product form directly.
    pub fn eval_factored(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for i in 0..self.arity {
            for j in (i + 1)..self.arity {
                acc *= (z[i] - z[j]).powi(self.orders[i][j] as i32);
            }
        }
        acc
    }
}

/// `s · g`, exact, with the window enlarged by the exponent range of `g`.
pub fn poly_mul<C: Coefficient>(
    s: &MultiLaurent<C>,
    p: &PoleClearingPoly,
) -> Result<MultiLaurent<C>> {
    let target = s.window.plus(&p.exponent_window());
    poly_mul_within(s, p, target)
}

/// `s · g` into a caller-fixed window; any nonzero coefficient outside it is an error.
pub fn poly_mul_within<C: Coefficient>(
    s: &MultiLaurent<C>,
    p: &PoleClearingPoly,
    window: ExponentWindow,
) -> Result<MultiLaurent<C>> {
    if s.arity() != p.arity() || window.arity() != p.arity() {
        return Err(Error::Config("arity mismatch in polynomial product".into()));
    }
    let mut terms: BTreeMap<Vec<i32>, C> = BTreeMap::new();
    for (e1, c1) in &s.terms {
        for (e2, r) in &p.coeffs {
            let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
            let slot = terms.entry(e).or_insert_with(C::zero);
            slot.add_scaled(&<C::Field as Scalar>::from_i64(*r as i64), c1);
        }
    }
    terms.retain(|_, c| !c.is_zero());
    if let Some(e) = terms.keys().find(|e| !window.contains(e)) {
        return Err(Error::ExponentOverflow {
            exponent: e.clone(),
        });
    }
    Ok(MultiLaurent { window, terms })
}

/// Product of annuli `r_i < |z_i| < R_i`, nested along `ordering` (outermost first).
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusRegion {
    ordering: Vec<usize>,
    radii: Vec<(f64, f64)>,
}

impl AnnulusRegion {
    /// `radii[v]` are the bounds of variable `v`.
    pub fn new(ordering: Vec<usize>, radii: Vec<(f64, f64)>) -> Result<Self> {
        let m = ordering.len();
        let mut seen = vec![false; m];
        for &v in &ordering {
            if v >= m || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Region(format!("{ordering:?} is not a permutation")));
            }
        }
        if radii.len() != m {
            return Err(Error::Region("one radius pair per variable".into()));
        }
        if radii.iter().any(|(r, big_r)| !(0.0 <= *r && r < big_r)) {
            return Err(Error::Region("annulus must satisfy 0 ≤ r < R".into()));
        }
        for w in ordering.windows(2) {
            let (outer, inner) = (w[0], w[1]);
            if radii[inner].1 > radii[outer].0 {
                return Err(Error::Region(format!(
                    "annulus of x{inner} reaches into the annulus of x{outer}; ordering is not strict"
                )));
            }
        }
        Ok(Self { ordering, radii })
    }

    /// Canonical nested annuli for an ordering: position `t` gets `(4^{-t}/2, 4^{-t})·2`.
    pub fn from_ordering(ordering: Vec<usize>) -> Result<Self> {
        let m = ordering.len();
        let mut radii = vec![(0.0, 0.0); m];
        for (t, &v) in ordering.iter().enumerate() {
            let big = 2.0 * 0.25f64.powi(t as i32);
            radii
                .get_mut(v)
                .ok_or_else(|| Error::Region("bad variable".into()))?
                .clone_from(&(big / 2.0, big));
        }
        Self::new(ordering, radii)
    }

    /// `|x_1| > … > |x_m|`.
    pub fn standard(arity: usize) -> Self {
        Self::from_ordering((0..arity).collect()).expect("identity permutation")
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn rank(&self, var: usize) -> usize {
        self.ordering
            .iter()
            .position(|&v| v == var)
            .expect("variable in ordering")
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        z.iter()
            .zip(&self.radii)
            .all(|(zi, (r, big))| *r < zi.norm() && zi.norm() < *big)
    }

    /// Weight `Σ rank(v)·e_v`; geometric-series corrections raise it.
    pub fn weight(&self, e: &[i32]) -> i64 {
        e.iter()
            .enumerate()
            .map(|(v, &x)| self.rank(v) as i64 * x as i64)
            .sum()
    }
}

/// Laurent expansion of `1/g` on `region`, keeping all terms of depth ≤ `order`.
///
/// Depth is the region weight minus the weight of the leading monomial, so
/// `expand_inverse_g(g)·g` equals 1 up to terms of depth `> order`.
pub fn expand_inverse_g<S>(
    p: &PoleClearingPoly,
    region: &AnnulusRegion,
    order: i32,
) -> Result<MultiLaurent<S>>
where
    S: Scalar + Coefficient<Field = S>,
{
    let m = p.arity();
    if region.ordering().len() != m {
        return Err(Error::Region(
            "region arity differs from polynomial arity".into(),
        ));
    }
    if order < 0 {
        return Err(Error::Region("negative truncation order".into()));
    }
    let mut lead = vec![0i32; m];
    let mut factors: Vec<(usize, usize, u32)> = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let n = p.order(i, j);
            if n == 0 {
                continue;
            }
            let (dom, sub) = if region.rank(i) < region.rank(j) {
                (i, j)
            } else {
                (j, i)
            };
            lead[dom] -= n as i32;
            factors.push((dom, sub, n));
        }
    }
    let lead_weight = region.weight(&lead);
    let mut partial_lead = vec![0i32; m];
    let mut acc: BTreeMap<Vec<i32>, S> = BTreeMap::new();
    acc.insert(vec![0; m], S::one());
    for &(dom, sub, n) in &factors {
        // (x_i - x_j)^{-n} expanded in x_sub/x_dom; sign (-1)^n when the later variable dominates.
        let sign: i64 = if dom < sub || n % 2 == 0 { 1 } else { -1 };
        partial_lead[dom] -= n as i32;
        let partial_weight = region.weight(&partial_lead);
        let mut next: BTreeMap<Vec<i32>, S> = BTreeMap::new();
        for (e, c) in &acc {
            for k in 0..=order {
                let mut e2 = e.clone();
                e2[dom] -= n as i32 + k;
                e2[sub] += k;
                if region.weight(&e2) - partial_weight > order as i64 {
                    break;
                }
                let coef = S::from_i64(sign * binomial(n as i64 + k as i64 - 1, k as i64) as i64);
                let slot = next.entry(e2).or_insert_with(<S as Scalar>::zero);
                *slot += c.clone() * coef;
            }
        }
        next.retain(|_, c| !Scalar::is_zero(c));
        acc = next;
    }
    debug_assert_eq!(partial_lead, lead);
    acc.retain(|e, _| region.weight(e) - lead_weight <= order as i64);
    let mut bounds: Vec<(i32, i32)> = vec![(i32::MAX, i32::MIN); m];
    for e in acc.keys() {
        for (b, &x) in bounds.iter_mut().zip(e) {
            b.0 = b.0.min(x);
            b.1 = b.1.max(x);
        }
    }
    let mut out = MultiLaurent::new(ExponentWindow::new(bounds)?);
    out.terms = acc;
    Ok(out)
}

/// Default truncation order for `1/g`: target window width plus `deg g`.
pub fn default_inverse_order(target_width: i32, p: &PoleClearingPoly) -> i32 {
    target_width + p.total_degree()
}

/// Evaluate a vector-coefficient series at `z`, placing the result in `basis`'s window.
pub fn eval_at<S: Scalar>(
    s: &MultiLaurent<GradedVector<S>>,
    z: &[Complex64],
    basis: &GradedBasis,
) -> Result<WindowedCompletion<Complex64>> {
    let v = eval_vector(s, z)?;
    let mut out = WindowedCompletion::zero(basis);
    out.accumulate(&v)?;
    Ok(out)
}

/// Evaluate a vector-coefficient series at `z` as a finitely supported vector.
pub fn eval_vector<S: Scalar>(
    s: &MultiLaurent<GradedVector<S>>,
    z: &[Complex64],
) -> Result<ComplexVector> {
    if z.len() != s.arity() {
        return Err(Error::Config(
            "point arity differs from series arity".into(),
        ));
    }
    let mut out = ComplexVector::zero();
    for (e, c) in s.terms() {
        let mut mono = Complex64::new(1.0, 0.0);
        for (i, (&k, &zi)) in e.iter().zip(z).enumerate() {
            mono *= cpowi(zi, k).ok_or(Error::Pole { index: i })?;
        }
        out.axpy(&mono, &c.to_complex());
    }
    Ok(out)
}

/// Evaluate a scalar series at `z`.
pub fn eval_scalar<S: Scalar + Coefficient<Field = S>>(
    s: &MultiLaurent<S>,
    z: &[Complex64],
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (e, c) in s.terms() {
        let mut mono = c.to_complex();
        for (i, (&k, &zi)) in e.iter().zip(z).enumerate() {
            mono *= cpowi(zi, k).ok_or(Error::Pole { index: i })?;
        }
        acc += mono;
    }
    Ok(acc)
}

/// Default node count for the contour rule: `2·K_max + 5`.
pub fn default_nodes(k_max: i32) -> usize {
    (2 * k_max.unsigned_abs() + 5) as usize
}

/// Trapezoidal approximation of `(1/2πi)∮_{|z|=r} z^{-k-1} h(z) dz` for every `k` in `[k_lo, k_hi]`.
///
/// `h` returns a fixed-length sample vector; the result holds one coefficient
/// vector per `k`. Exact for Laurent polynomials whose exponents lie in
/// `[-(M-1)/2, (M-1)/2]`.
pub fn laurent_coefficients<F>(
    h: F,
    radius: f64,
    k_lo: i32,
    k_hi: i32,
    samples: usize,
) -> Result<Vec<(i32, Vec<Complex64>)>>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>>,
{
    if !(radius > 0.0) {
        return Err(Error::Domain("contour radius must be positive".into()));
    }
    if k_lo > k_hi {
        return Err(Error::Config("empty coefficient range".into()));
    }
    let max_k = k_lo.abs().max(k_hi.abs());
    if samples < (2 * max_k + 1) as usize {
        return Err(Error::Aliasing {
            samples,
            max_exponent: max_k,
        });
    }
    let nodes: Vec<Complex64> = (0..samples)
        .map(|j| {
            Complex64::from_polar(
                radius,
                2.0 * std::f64::consts::PI * j as f64 / samples as f64,
            )
        })
        .collect();
    let values: Vec<Vec<Complex64>> = nodes.iter().map(|&z| h(z)).collect::<Result<_>>()?;
    let width = values.first().map(Vec::len).unwrap_or(0);
    if values.iter().any(|v| v.len() != width) {
        return Err(Error::Config("sample vectors differ in length".into()));
    }
    let mut out = Vec::new();
    for k in k_lo..=k_hi {
        let mut acc = vec![Complex64::new(0.0, 0.0); width];
        for (z, v) in nodes.iter().zip(&values) {
            let w = z.powi(-k);
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x * w;
            }
        }
        for a in &mut acc {
            *a /= samples as f64;
        }
        out.push((k, acc));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::BasisKey;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pole_clearing_matches_factored_form() {
        let g =
            PoleClearingPoly::new(3, vec![vec![0, 2, 1], vec![0, 0, 3], vec![0, 0, 0]]).unwrap();
        assert_eq!(g.total_degree(), 6);
        for (e, _) in g.coeffs() {
            assert_eq!(e.iter().sum::<i32>(), 6);
        }
        let z = [
            Complex64::new(0.3, 1.1),
            Complex64::new(-0.7, 0.2),
            Complex64::new(1.4, -0.5),
        ];
        assert!((g.eval(&z) - g.eval_factored(&z)).norm() < 1e-12);
    }

    #[test]
    fn multiplying_by_one_is_identity() {
        let mut s = MultiLaurent::<GaussQ>::new(ExponentWindow::uniform(2, -3, 3).unwrap());
        s.add_term(vec![-2, 1], &GaussQ::int(5)).unwrap();
        s.add_term(vec![0, 3], &GaussQ::frac(1, 2)).unwrap();
        let out = poly_mul(&s, &PoleClearingPoly::one(2)).unwrap();
        assert_eq!(
            out.terms().collect::<Vec<_>>(),
            s.terms().collect::<Vec<_>>()
        );
    }

    #[test]
    fn product_distributes_over_linear_factor() {
        // (v - x1^{-1} x2 v) · (x1 - x2) = x1 v - 2 x2 v + x1^{-1} x2^2 v
        let v = GradedVector::<GaussQ>::basis(BasisKey::new(1, 0));
        let mut s = MultiLaurent::new(ExponentWindow::uniform(2, -2, 2).unwrap());
        s.add_term(vec![0, 0], &v).unwrap();
        s.add_term(vec![-1, 1], &v.scale(&GaussQ::int(-1))).unwrap();
        let g = PoleClearingPoly::new(2, vec![vec![0, 1], vec![0, 0]]).unwrap();
        let out = poly_mul(&s, &g).unwrap();
        assert_eq!(out.coeff(&[1, 0]), v);
        assert_eq!(out.coeff(&[0, 1]), v.scale(&GaussQ::int(-2)));
        assert_eq!(out.coeff(&[-1, 2]), v);
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn overflow_is_reported_with_exponent() {
        let mut s = MultiLaurent::<GaussQ>::new(ExponentWindow::uniform(2, 0, 1).unwrap());
        s.add_term(vec![1, 1], &GaussQ::int(1)).unwrap();
        let g = PoleClearingPoly::new(2, vec![vec![0, 1], vec![0, 0]]).unwrap();
        let err = poly_mul_within(&s, &g, ExponentWindow::uniform(2, 0, 1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ExponentOverflow { .. }));
        assert!(s.add_term(vec![2, 0], &GaussQ::int(1)).is_err());
    }

    #[test]
    fn geometric_series_in_both_regions() {
        let g = PoleClearingPoly::new(2, vec![vec![0, 1], vec![0, 0]]).unwrap();
        let outer = expand_inverse_g::<GaussQ>(&g, &AnnulusRegion::standard(2), 4).unwrap();
        for n in 0..=4 {
            assert_eq!(outer.coeff(&[-n - 1, n]), GaussQ::int(1));
        }
        assert_eq!(outer.len(), 5);
        let inner =
            expand_inverse_g::<GaussQ>(&g, &AnnulusRegion::from_ordering(vec![1, 0]).unwrap(), 4)
                .unwrap();
        for n in 0..=4 {
            assert_eq!(inner.coeff(&[n, -n - 1]), GaussQ::int(-1));
        }
        assert_eq!(inner.len(), 5);
    }

    #[test]
    fn inverse_times_g_is_one_up_to_order() {
        let g =
            PoleClearingPoly::new(3, vec![vec![0, 1, 1], vec![0, 0, 1], vec![0, 0, 0]]).unwrap();
        for ordering in [vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]] {
            let region = AnnulusRegion::from_ordering(ordering).unwrap();
            let order = 6;
            let inv = expand_inverse_g::<GaussQ>(&g, &region, order).unwrap();
            // Oracle: plain term-by-term multiplication of the two expanded series.
            let mut prod: BTreeMap<Vec<i32>, GaussQ> = BTreeMap::new();
            for (e1, c1) in inv.terms() {
                for (e2, r) in g.coeffs() {
                    let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                    *prod.entry(e).or_insert_with(<GaussQ as Scalar>::zero) +=
                        c1.clone() * GaussQ::int(*r as i64);
                }
            }
            prod.retain(|_, v| !Scalar::is_zero(v));
            assert_eq!(prod.get(&vec![0, 0, 0]), Some(&GaussQ::int(1)));
            for e in prod.keys().filter(|e| **e != vec![0, 0, 0]) {
                assert!(
                    region.weight(e) > order as i64,
                    "{e:?} survives below order"
                );
            }
        }
    }

    #[test]
    fn region_validation() {
        assert!(AnnulusRegion::new(vec![0, 0], vec![(0.5, 1.0), (0.1, 0.2)]).is_err());
        assert!(AnnulusRegion::new(vec![0, 1], vec![(0.5, 1.0), (0.1, 0.7)]).is_err());
        assert!(AnnulusRegion::new(vec![0, 1], vec![(0.5, 1.0), (0.1, 0.5)]).is_ok());
        assert!(AnnulusRegion::standard(3).contains(&[c(1.5), c(0.3), c(0.1)]));
    }

    #[test]
    fn evaluation() {
        let v = GradedVector::<GaussQ>::basis(BasisKey::new(0, 0));
        let mut s = MultiLaurent::new(ExponentWindow::uniform(1, -2, 0).unwrap());
        s.add_term(vec![-2], &v).unwrap();
        let out = eval_vector(&s, &[c(2.0)]).unwrap();
        assert!((out.coeff(BasisKey::new(0, 0)) - c(0.25)).norm() < 1e-15);
        assert!(matches!(
            eval_vector(&s, &[c(0.0)]),
            Err(Error::Pole { index: 0 })
        ));
        let k = MultiLaurent::constant(2, v.clone());
        assert_eq!(eval_vector(&k, &[c(3.0), c(-1.0)]).unwrap(), v.to_complex());
    }

    #[test]
    fn contour_rule_on_monomials() {
        let sq = laurent_coefficients(|z| Ok(vec![z * z]), 1.0, -3, 3, 11).unwrap();
        for (k, v) in &sq {
            let want = if *k == 2 { 1.0 } else { 0.0 };
            assert!((v[0] - c(want)).norm() < 1e-12, "k={k}");
        }
        let inv = laurent_coefficients(|z| Ok(vec![z.inv()]), 0.7, -2, 2, 7).unwrap();
        for (k, v) in &inv {
            let want = if *k == -1 { 1.0 } else { 0.0 };
            assert!((v[0] - c(want)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn contour_rule_reports_aliasing() {
        let r = laurent_coefficients(|z| Ok(vec![z]), 1.0, -4, 4, 8);
        assert!(matches!(
            r,
            Err(Error::Aliasing {
                samples: 8,
                max_exponent: 4
            })
        ));
        assert_eq!(default_nodes(4), 13);
    }
}
