//! Étale-local chart of the expanded family `X[n] -> A^{n+1}` and its torus
//! action, checked by exact rational sampling.
//!
//! Equations, for `2 <= k <= n` in the chain and `1 <= k <= n` in the last
//! family:
//!
//! ```text
//! x0(1) t1        = x x1(1)
//! y0(1) t_{n+1}   = y y1(1)
//! y1(k-1) y0(k) t_{n+2-k} = y0(k-1) y1(k)
//! y0(n) x z       = y1(n) t1
//! x0(k) y0(n+1-k) z = x1(k) y1(n+1-k)
//! ```

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{rat, Rational};

pub const RETRY_LIMIT: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChartError {
    #[error("no nondegenerate sample after {0} draws")]
    RetriesExhausted(usize),
    #[error("torus element has {found} factors, chart needs {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("torus factors must be nonzero")]
    ZeroFactor,
}

/// Homogeneous coordinates on a `P^1`, never normalized.
#[derive(Clone, Debug, Serialize)]
pub struct ProjPair(pub Rational, pub Rational);

impl ProjPair {
    pub fn new(a: Rational, b: Rational) -> Option<Self> {
        (!a.is_zero() || !b.is_zero()).then_some(Self(a, b))
    }

    pub fn same_point(&self, other: &ProjPair) -> bool {
        &self.0 * &other.1 == &self.1 * &other.0
    }
}

impl PartialEq for ProjPair {
    fn eq(&self, other: &Self) -> bool {
        self.same_point(other)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartPoint {
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
    /// `t[0] = t_1, ..., t[n] = t_{n+1}`.
    pub t: Vec<Rational>,
    /// `proj_x[k - 1] = (x0(k) : x1(k))`.
    pub proj_x: Vec<ProjPair>,
    /// `proj_y[k - 1] = (y0(k) : y1(k))`.
    pub proj_y: Vec<ProjPair>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusElement {
    pub tau: Vec<Rational>,
}

impl TorusElement {
    pub fn new(tau: Vec<Rational>) -> Result<Self, ChartError> {
        if tau.iter().any(Zero::is_zero) {
            return Err(ChartError::ZeroFactor);
        }
        Ok(Self { tau })
    }

    pub fn identity(n: usize) -> Self {
        Self { tau: vec![Rational::one(); n] }
    }

    pub fn compose(&self, other: &TorusElement) -> TorusElement {
        TorusElement { tau: self.tau.iter().zip(&other.tau).map(|(a, b)| a * b).collect() }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { tau: (0..n).map(|_| nonzero(&mut rng)).collect() }
    }
}

/// A violated equation, named as in the module docs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquationFailure {
    pub equation: String,
    pub index: usize,
}

impl ChartPoint {
    pub fn depth(&self) -> usize {
        self.t.len() - 1
    }

    fn prod_t(&self) -> Rational {
        self.t.iter().fold(Rational::one(), |acc, t| acc * t)
    }

    /// Every defining equation that fails at this point.
    pub fn equation_failures(&self) -> Vec<EquationFailure> {
        let n = self.depth();
        let mut out = Vec::new();
        let mut check = |ok: bool, equation: &str, index: usize| {
            if !ok {
                out.push(EquationFailure { equation: equation.into(), index });
            }
        };
        if n == 0 {
            check(&self.x * &self.y * &self.z == self.t[0], "xyz=t1", 0);
            return out;
        }
        if self.proj_x.len() != n || self.proj_y.len() != n {
            check(false, "shape", 0);
            return out;
        }
        let (x1, y1) = (&self.proj_x[0], &self.proj_y[0]);
        check(&x1.0 * &self.t[0] == &self.x * &x1.1, "x0(1)t1=x*x1(1)", 1);
        check(&y1.0 * &self.t[n] == &self.y * &y1.1, "y0(1)t_{n+1}=y*y1(1)", 1);
        for k in 2..=n {
            let (prev, cur) = (&self.proj_y[k - 2], &self.proj_y[k - 1]);
            check(&prev.1 * &cur.0 * &self.t[n + 1 - k] == &prev.0 * &cur.1, "y-chain", k);
        }
        let yn = &self.proj_y[n - 1];
        check(&yn.0 * &self.x * &self.z == &yn.1 * &self.t[0], "y0(n)xz=y1(n)t1", n);
        for k in 1..=n {
            let (a, b) = (&self.proj_x[k - 1], &self.proj_y[n - k]);
            check(&a.0 * &b.0 * &self.z == &a.1 * &b.1, "x0(k)y0(n+1-k)z=x1(k)y1(n+1-k)", k);
        }
        out
    }

    pub fn satisfies_equations(&self) -> bool {
        self.equation_failures().is_empty()
    }
}

fn nonzero(rng: &mut ChaCha8Rng) -> Rational {
    let num = loop {
        let v: i64 = rng.gen_range(-9..=9);
        if v != 0 {
            break v;
        }
    };
    rat(num, rng.gen_range(1..=9))
}

fn draw(n: usize, rng: &mut ChaCha8Rng) -> Option<ChartPoint> {
    let t: Vec<Rational> = (0..=n).map(|_| nonzero(rng)).collect();
    let x = nonzero(rng);
    let y = nonzero(rng);
    let denom = &x * &y;
    if denom.is_zero() {
        return None;
    }
    let z = t.iter().fold(Rational::one(), |acc, ti| acc * ti) / denom;
    // x(k) = (x / (t1 ... tk) : 1), y(k) = (y / (t_{n+1} ... t_{n+2-k}) : 1),
    // each rescaled by a random factor.
    let mut proj_x = Vec::with_capacity(n);
    let mut acc = Rational::one();
    for ti in t.iter().take(n) {
        acc *= ti;
        let s = nonzero(rng);
        proj_x.push(ProjPair::new(&s * &x / &acc, s)?);
    }
    let mut proj_y = Vec::with_capacity(n);
    let mut acc = Rational::one();
    for ti in t.iter().rev().take(n) {
        acc *= ti;
        let s = nonzero(rng);
        proj_y.push(ProjPair::new(&s * &y / &acc, s)?);
    }
    Some(ChartPoint { x, y, z, t, proj_x, proj_y })
}

/// A point of the dense torus chart at depth `n`, deterministic in `seed`.
pub fn sample_chart_point(n: usize, seed: u64) -> Result<ChartPoint, ChartError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_LIMIT {
        if let Some(p) = draw(n, &mut rng) {
            if p.satisfies_equations() {
                return Ok(p);
            }
        }
    }
    Err(ChartError::RetriesExhausted(RETRY_LIMIT))
}

pub fn verify_product_identity(p: &ChartPoint) -> bool {
    &p.x * &p.y * &p.z == p.prod_t()
}

fn act_on_t(g: &TorusElement, t: &[Rational]) -> Vec<Rational> {
    let n = g.tau.len();
    (0..=n)
        .map(|i| {
            let mut v = t[i].clone();
            if i < n {
                v *= &g.tau[i];
            }
            if i > 0 {
                v /= &g.tau[i - 1];
            }
            v
        })
        .collect()
}

fn check_shape(g: &TorusElement, p: &ChartPoint) -> Result<(), ChartError> {
    if g.tau.len() != p.depth() {
        return Err(ChartError::ShapeMismatch { expected: p.depth(), found: g.tau.len() });
    }
    Ok(())
}

/// Torus action: `t` as `(τ1 t1, τ1⁻¹τ2 t2, ..., τn⁻¹ t_{n+1})`,
/// `(x0(k) : x1(k)) -> (x0(k) : τk x1(k))` and
/// `(y0(n+1-k) : y1(n+1-k)) -> (τk y0(n+1-k) : y1(n+1-k))`; `x, y, z` fixed.
pub fn act(g: &TorusElement, p: &ChartPoint) -> Result<ChartPoint, ChartError> {
    check_shape(g, p)?;
    let n = p.depth();
    let mut out = p.clone();
    out.t = act_on_t(g, &p.t);
    for k in 1..=n {
        out.proj_x[k - 1].1 *= &g.tau[k - 1];
        out.proj_y[n - k].0 *= &g.tau[k - 1];
    }
    Ok(out)
}

/// The scaling with `τk` on the opposite homogeneous coordinates:
/// `(τk x0 : x1)` and `(y0 : τk y1)`, same action on `t`. Kept to document
/// that it does not preserve the chart.
pub fn act_opposite_scaling(g: &TorusElement, p: &ChartPoint) -> Result<ChartPoint, ChartError> {
    check_shape(g, p)?;
    let n = p.depth();
    let mut out = p.clone();
    out.t = act_on_t(g, &p.t);
    for k in 1..=n {
        out.proj_x[k - 1].0 *= &g.tau[k - 1];
        out.proj_y[n - k].1 *= &g.tau[k - 1];
    }
    Ok(out)
}

/// Whether `a0 b0 z = a1 b1` determines `b` from `a` and `a` from `b`:
/// both coefficient vectors `(a0 z, -a1)` and `(b0 z, -b1)` are nonzero.
pub fn pins_each_other(a: &ProjPair, b: &ProjPair, z: &Rational) -> bool {
    let nonzero = |p: &ProjPair| !(&p.0 * z).is_zero() || !p.1.is_zero();
    nonzero(a) && nonzero(b)
}

/// Points on `x = y = 0` with the given `z`: random pairs `x(k)` and the
/// `y(n+1-k)` solving the coupling equation, plus the coordinate points.
fn coincidence_samples(z: &Rational, seed: u64, count: usize) -> Vec<(ProjPair, ProjPair)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut axes = vec![ProjPair(Rational::one(), Rational::zero()), ProjPair(Rational::zero(), Rational::one())];
    for _ in 0..count {
        axes.push(ProjPair(nonzero(&mut rng), nonzero(&mut rng)));
    }
    for a in axes {
        // a0 b0 z = a1 b1  <=  b = (a1 : a0 z); fall back to (1 : 0) if degenerate
        let b = ProjPair::new(a.1.clone(), &a.0 * z).unwrap_or(ProjPair(Rational::one(), Rational::zero()));
        out.push((a, b));
    }
    out
}

pub fn delta_coincidence_on(z: &Rational, seed: u64, samples: usize) -> bool {
    coincidence_samples(z, seed, samples).iter().all(|(a, b)| pins_each_other(a, b, z))
}

/// On `x = y = 0`, `z != 0` the components `Δ1(k)` and `Δ2(n+1-k)` are
/// identified by the coupling equation.
pub fn delta_coincidence_check(n: usize, k: usize) -> bool {
    if k == 0 || k > n {
        return false;
    }
    let seed = (n as u64) << 32 | k as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..8).all(|i| delta_coincidence_on(&nonzero(&mut rng), seed.wrapping_add(i), 100))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleFailure {
    pub seed: u64,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub n: usize,
    pub samples: usize,
    pub failures: Vec<SampleFailure>,
}

/// Samples `samples` points from consecutive seeds and checks the equations,
/// the product identity and invariance under a random torus element.
pub fn verify_batch(n: usize, samples: usize, seed: u64) -> VerifyReport {
    use rayon::prelude::*;
    let failures: Vec<SampleFailure> = (0..samples as u64)
        .into_par_iter()
        .flat_map_iter(|i| {
            let s = seed.wrapping_add(i);
            let mut out = Vec::new();
            let fail = |check: &str, detail: String| SampleFailure { seed: s, check: check.into(), detail };
            match sample_chart_point(n, s) {
                Err(e) => out.push(fail("sample", e.to_string())),
                Ok(p) => {
                    for f in p.equation_failures() {
                        out.push(fail("equation", format!("{} (k={})", f.equation, f.index)));
                    }
                    if !verify_product_identity(&p) {
                        out.push(fail("product", "x*y*z != t1*...*t_{n+1}".into()));
                    }
                    let g = TorusElement::random(n, s ^ 0x9e37_79b9_7f4a_7c15);
                    match act(&g, &p) {
                        Ok(q) => {
                            for f in q.equation_failures() {
                                out.push(fail("torus", format!("{} (k={})", f.equation, f.index)));
                            }
                            if q.prod_t() != p.prod_t() || !verify_product_identity(&q) {
                                out.push(fail("torus", "product of t not invariant".into()));
                            }
                        }
                        Err(e) => out.push(fail("torus", e.to_string())),
                    }
                }
            }
            out
        })
        .collect();
    VerifyReport { pass: failures.is_empty(), n, samples, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    #[test]
    fn sampled_points_satisfy_everything() {
        for n in 0..=4 {
            for seed in 0..50 {
                let p = sample_chart_point(n, seed).unwrap();
                assert!(p.satisfies_equations(), "n={n} seed={seed}: {:?}", p.equation_failures());
                assert!(verify_product_identity(&p));
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_chart_point(3, 7).unwrap(), sample_chart_point(3, 7).unwrap());
        assert_ne!(sample_chart_point(3, 7).unwrap(), sample_chart_point(3, 8).unwrap());
    }

    #[test]
    fn product_identity_is_not_vacuous() {
        let mut p = sample_chart_point(1, 3).unwrap();
        p.t[0] += int(1);
        assert!(!verify_product_identity(&p));
        assert!(!p.satisfies_equations());
    }

    #[test]
    fn identity_acts_trivially() {
        let p = sample_chart_point(2, 11).unwrap();
        assert_eq!(act(&TorusElement::identity(2), &p).unwrap(), p);
    }

    #[test]
    fn depth_one_action() {
        let p = sample_chart_point(1, 5).unwrap();
        let g = TorusElement::new(vec![int(2)]).unwrap();
        let q = act(&g, &p).unwrap();
        assert_eq!(q.t, vec![&p.t[0] * int(2), &p.t[1] / int(2)]);
        assert!(q.satisfies_equations());
        assert!(verify_product_identity(&q));
    }

    #[test]
    fn opposite_scaling_breaks_first_equation() {
        let p = sample_chart_point(1, 5).unwrap();
        let g = TorusElement::new(vec![int(2)]).unwrap();
        let q = act_opposite_scaling(&g, &p).unwrap();
        let failed: Vec<String> = q.equation_failures().into_iter().map(|f| f.equation).collect();
        assert!(failed.contains(&"x0(1)t1=x*x1(1)".to_string()), "{failed:?}");
    }

    #[test]
    fn action_is_a_group_action() {
        for n in 1..=3 {
            for seed in 0..20 {
                let p = sample_chart_point(n, seed).unwrap();
                let g = TorusElement::random(n, seed + 100);
                let h = TorusElement::random(n, seed + 200);
                let lhs = act(&g, &act(&h, &p).unwrap()).unwrap();
                assert_eq!(lhs, act(&g.compose(&h), &p).unwrap());
            }
        }
    }

    #[test]
    fn shape_and_zero_checks() {
        let p = sample_chart_point(2, 1).unwrap();
        assert_eq!(act(&TorusElement::identity(1), &p).unwrap_err(), ChartError::ShapeMismatch { expected: 2, found: 1 });
        assert_eq!(TorusElement::new(vec![int(0)]).unwrap_err(), ChartError::ZeroFactor);
    }

    #[test]
    fn projective_pairs_compare_projectively() {
        assert_eq!(ProjPair(int(1), int(2)), ProjPair(int(3), int(6)));
        assert_ne!(ProjPair(int(1), int(2)), ProjPair(int(2), int(1)));
        assert!(ProjPair::new(int(0), int(0)).is_none());
    }

    #[test]
    fn coincidence_holds_off_z_zero() {
        assert!(delta_coincidence_check(1, 1));
        assert!(delta_coincidence_check(2, 1));
        assert!(delta_coincidence_check(2, 2));
        assert!(delta_coincidence_check(3, 2));
        assert!(!delta_coincidence_check(2, 3));
    }

    #[test]
    fn coincidence_fails_on_z_zero() {
        assert!(!delta_coincidence_on(&Rational::zero(), 0, 10));
        let axis = ProjPair(int(1), int(0));
        assert!(!pins_each_other(&axis, &axis, &Rational::zero()));
    }

    #[test]
    fn batch_report() {
        let r = verify_batch(2, 64, 42);
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(r.samples, 64);
    }
}
