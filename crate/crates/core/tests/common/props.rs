//! Randomized identity checks shared by the property tests and the
//! acceptance runner. Each suite returns the number of trials it ran.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

use paf_core::coframe::StructureFunctions;
use paf_core::expr::{is_zero, Chart, Scalar};
use paf_core::flags::{linear_flag, LinearDistribution};
use paf_core::forms::{lie_bracket, DiffeoMap, Frame, KForm, VectorField};
use paf_core::sample::SampleConfig;

pub type SuiteResult = Result<usize, String>;

pub const VARS3: &[&str] = &["x1", "x2", "x3"];

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, max_shrink_iters: 64, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn finish<T: std::fmt::Debug>(cases: u32, r: Result<(), TestError<T>>) -> SuiteResult {
    r.map(|_| cases as usize).map_err(|e| e.to_string())
}

fn cfg() -> SampleConfig {
    SampleConfig::default().with_samples(24)
}

fn chart(vars: &[&str]) -> Chart {
    Chart::new("X", vars).unwrap()
}

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

/// Random expression text over `vars`, built from sums, products, a
/// bounded quotient and a few elementary functions. Smooth on all of ℝⁿ.
pub fn expr(vars: &'static [&'static str], depth: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        3 => prop::sample::select(vars).prop_map(String::from),
        1 => (-3i32..=3).prop_map(|k| format!("({k})")),
    ];
    leaf.prop_recursive(depth, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(({a})/4)")),
            inner.clone().prop_map(|a| format!("({a})/(2 + ({a})^2)")),
        ]
    })
    .boxed()
}

fn field3(depth: u32) -> impl Strategy<Value = [String; 3]> {
    [expr(VARS3, depth), expr(VARS3, depth), expr(VARS3, depth)]
}

fn field(c: &Chart, comps: &[String]) -> Result<VectorField, TestCaseError> {
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    ok(VectorField::parse(c, &refs))
}

fn scalar(c: &Chart, text: &str) -> Result<Scalar, TestCaseError> {
    ok(Scalar::parse(text, c))
}

/// `[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]] = 0`.
pub fn jacobi(cases: u32) -> SuiteResult {
    let c = chart(VARS3);
    let r = runner(cases).run(&(field3(2), field3(2), field3(2)), |(x, y, z)| {
        let (x, y, z) = (field(&c, &x)?, field(&c, &y)?, field(&c, &z)?);
        let br = |a: &VectorField, b: &VectorField| ok(lie_bracket(a, b));
        let sum = ok(ok(br(&x, &br(&y, &z)?)?.add(&br(&y, &br(&z, &x)?)?))?.add(&br(&z, &br(&x, &y)?)?))?;
        let v = ok(sum.is_zero(&cfg()))?;
        check(v.is_zero(), || format!("Jacobi sum is {v:?}"))
    });
    finish(cases, r)
}

/// `d(dθ) = 0` for a random 1-form and `d(df) = 0` for a random function.
pub fn d_squared(cases: u32) -> SuiteResult {
    let c = chart(VARS3);
    let r = runner(cases).run(&(field3(3), expr(VARS3, 3)), |(theta, f)| {
        let refs: Vec<&str> = theta.iter().map(String::as_str).collect();
        let theta = ok(KForm::parse_one_form(&c, &refs))?;
        let dd = ok(ok(theta.d())?.d())?;
        check(dd.is_exact_zero(), || format!("d(dθ) = {dd:?}"))?;
        let f = KForm::function(&c, scalar(&c, &f)?);
        let ddf = ok(ok(f.d())?.d())?;
        check(ddf.is_exact_zero(), || format!("d(df) = {ddf:?}"))
    });
    finish(cases, r)
}

/// `dθ(X,Y) = X(θ(Y)) − Y(θ(X)) − θ([X,Y])`.
pub fn cartan_formula(cases: u32) -> SuiteResult {
    let c = chart(VARS3);
    let r = runner(cases).run(&(field3(2), field3(2), field3(2)), |(theta, x, y)| {
        let refs: Vec<&str> = theta.iter().map(String::as_str).collect();
        let theta = ok(KForm::parse_one_form(&c, &refs))?;
        let (x, y) = (field(&c, &x)?, field(&c, &y)?);
        let lhs = ok(ok(theta.d())?.apply(&[&x, &y]))?;
        let ty = ok(theta.apply(&[&y]))?;
        let tx = ok(theta.apply(&[&x]))?;
        let tb = ok(theta.apply(&[&ok(lie_bracket(&x, &y))?]))?;
        let rhs = x.apply_to(&ty).sub(&y.apply_to(&tx)).sub(&tb);
        let v = ok(is_zero(&lhs.sub(&rhs), &c, &cfg()))?;
        check(v.is_zero(), || format!("Cartan formula residual is {v:?}"))
    });
    finish(cases, r)
}

/// A random function bounded away from zero: `exp(f/4)`.
fn positive(vars: &'static [&'static str]) -> impl Strategy<Value = String> {
    expr(vars, 2).prop_map(|f| format!("exp(({f})/4)"))
}

/// Rescaling the control, `(a₀, a₁) → (a₀, b₂a₁)`, multiplies `T¹₁₂` by `b₂`.
pub fn gauge_dim2(cases: u32) -> SuiteResult {
    const V: &[&str] = &["x1", "x2"];
    let c = chart(V);
    let strat = (positive(V), expr(V, 2), positive(V), positive(V));
    let r = runner(cases).run(&strat, |(p, q, s, b2)| {
        // Triangular frame, so it is invertible everywhere.
        let a0 = field(&c, &[p, q])?;
        let a1 = field(&c, &["0".into(), s])?;
        let b2 = scalar(&c, &b2)?;
        let base = ok(StructureFunctions::from_frame(&ok(Frame::new(&c, vec![a0.clone(), a1.clone()]))?, &cfg()))?;
        let moved = ok(StructureFunctions::from_frame(&ok(Frame::new(&c, vec![a0, a1.scale(&b2)]))?, &cfg()))?;
        let diff = moved.c(0, 0, 1).sub(&b2.mul(base.c(0, 0, 1)));
        let v = ok(is_zero(&diff, &c, &cfg()))?;
        check(v.is_zero(), || format!("T1_12 law residual is {v:?}"))
    });
    finish(cases, r)
}

/// Under `ṽ₁ = v₁, ṽ₂ = b₂v₂, ṽ₃ = a₃v₁ + b₃v₂ + c₃v₃`:
/// `T̃³₁₂ = (b₂/c₃)T³₁₂` and `T̃¹₁₂ = b₂(T¹₁₂ − (a₃/c₃)T³₁₂)`.
pub fn gauge_dim3(cases: u32) -> SuiteResult {
    let c = chart(VARS3);
    let frame = (positive(VARS3), expr(VARS3, 1), expr(VARS3, 1), positive(VARS3), expr(VARS3, 1), positive(VARS3));
    let gauge = (expr(VARS3, 1), positive(VARS3), expr(VARS3, 1), positive(VARS3));
    let r = runner(cases).run(&(frame, gauge), |((f1, g1, g2, f2, g3, f3), (a3, b2, b3, c3))| {
        let v1 = field(&c, &[f1, g1, g2])?;
        let v2 = field(&c, &["0".into(), f2, g3])?;
        let v3 = field(&c, &["0".into(), "0".into(), f3])?;
        let (a3, b2, b3, c3) = (scalar(&c, &a3)?, scalar(&c, &b2)?, scalar(&c, &b3)?, scalar(&c, &c3)?);
        let base = ok(StructureFunctions::from_frame(&ok(Frame::new(&c, vec![v1.clone(), v2.clone(), v3.clone()]))?, &cfg()))?;
        let w3 = ok(VectorField::combination(&c, &[(a3.clone(), &v1), (b3, &v2), (c3.clone(), &v3)]))?;
        let moved = ok(StructureFunctions::from_frame(&ok(Frame::new(&c, vec![v1, v2.scale(&b2), w3]))?, &cfg()))?;
        let ratio = ok(a3.div(&c3))?;
        let t3 = moved.c(2, 0, 1).sub(&ok(b2.div(&c3))?.mul(base.c(2, 0, 1)));
        let t1 = moved.c(0, 0, 1).sub(&b2.mul(&base.c(0, 0, 1).sub(&ratio.mul(base.c(2, 0, 1)))));
        for (name, d) in [("T3_12", t3), ("T1_12", t1)] {
            let v = ok(is_zero(&d, &c, &cfg()))?;
            check(v.is_zero(), || format!("{name} law residual is {v:?}"))?;
        }
        Ok(())
    });
    finish(cases, r)
}

pub fn heisenberg() -> LinearDistribution {
    let c = chart(&["x1", "x2", "x3"]);
    let g = vec![VectorField::parse(&c, &["1", "0", "0"]).unwrap(), VectorField::parse(&c, &["0", "1", "x1"]).unwrap()];
    LinearDistribution::new(&c, g).unwrap()
}

pub fn engel() -> LinearDistribution {
    let c = chart(&["x1", "x2", "x3", "x4"]);
    let g = vec![
        VectorField::parse(&c, &["1", "0", "0", "0"]).unwrap(),
        VectorField::parse(&c, &["0", "1", "x1", "x3"]).unwrap(),
    ];
    LinearDistribution::new(&c, g).unwrap()
}

/// `∂₁` and `∂₂ + x¹∂₃ + (x¹)²∂₄ + x¹x²∂₅`.
pub fn cartan_model() -> LinearDistribution {
    let c = chart(&["x1", "x2", "x3", "x4", "x5"]);
    let g = vec![
        VectorField::parse(&c, &["1", "0", "0", "0", "0"]).unwrap(),
        VectorField::parse(&c, &["0", "1", "x1", "x1^2", "x1*x2"]).unwrap(),
    ];
    LinearDistribution::new(&c, g).unwrap()
}

/// `x ↦ LUx + b` with unit-triangular integer `L`, `U`, so the inverse is
/// again integral and can be written down exactly.
pub fn affine_map_pub(c: &Chart, l: &[i64], u: &[i64], b: &[i64]) -> DiffeoMap {
    let n = c.dim();
    let mut lm = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut um = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..i {
            lm[(i, j)] = l[k] as f64;
            um[(j, i)] = u[k] as f64;
            k += 1;
        }
    }
    let a = &lm * &um;
    let inv = a.clone().try_inverse().expect("unimodular");
    let vars: Vec<String> = c.variables().iter().map(|v| v.to_string()).collect();
    let row = |m: &nalgebra::DMatrix<f64>, i: usize, shift: f64| {
        let mut s = format!("({})", shift.round() as i64);
        for (j, v) in vars.iter().enumerate() {
            s.push_str(&format!(" + ({})*{v}", m[(i, j)].round() as i64));
        }
        s
    };
    let bv = nalgebra::DVector::from_iterator(n, b[..n].iter().map(|&x| x as f64));
    let back = -(&inv * &bv);
    let fwd: Vec<String> = (0..n).map(|i| row(&a, i, bv[i])).collect();
    let inv_txt: Vec<String> = (0..n).map(|i| row(&inv, i, back[i])).collect();
    let f: Vec<&str> = fwd.iter().map(String::as_str).collect();
    let g: Vec<&str> = inv_txt.iter().map(String::as_str).collect();
    DiffeoMap::parse(c, c, &f, &g).unwrap()
}

/// Growth vectors of the Heisenberg, Engel and Cartan fixtures are unchanged
/// by random affine changes of coordinates.
pub fn growth_invariance(cases: u32) -> SuiteResult {
    let fixtures = [heisenberg(), engel(), cartan_model()];
    let cfg = SampleConfig::default().with_samples(30);
    let base: Vec<Vec<usize>> = fixtures.iter().map(|d| linear_flag(d, &cfg).unwrap().growth).collect();
    let ints = |k: usize| prop::collection::vec(-2i64..=2, k);
    let r = runner(cases).run(&(0usize..3, ints(10), ints(10), ints(5)), |(which, l, u, b)| {
        let d = &fixtures[which];
        let map = affine_map_pub(d.chart(), &l, &u, &b);
        ok(map.check_inverse(&cfg))?;
        let moved = ok(d.pushforward(&map))?;
        let g = ok(linear_flag(&moved, &cfg))?.growth;
        check(g == base[which], || format!("growth {g:?}, expected {:?}", base[which]))
    });
    finish(cases, r)
}

/// Symbolic partials agree with central differences to relative 1e-6.
pub fn finite_differences(cases: u32) -> SuiteResult {
    let c = chart(VARS3);
    let strat = (expr(VARS3, 3), 0usize..3, prop::array::uniform3(-1.0f64..1.0));
    let r = runner(cases).run(&strat, |(f, k, x)| {
        let f = scalar(&c, &f)?;
        let var = c.variable(k).to_string();
        let df = f.diff(&var);
        let at = |v: Vec<f64>| ok(f.eval(&c, &c.point(v, Vec::new())));
        let exact = ok(df.eval(&c, &c.point(x.to_vec(), Vec::new())))?;
        let h = 1e-5;
        let (mut up, mut down) = (x.to_vec(), x.to_vec());
        up[k] += h;
        down[k] -= h;
        let fd = (at(up)? - at(down)?) / (2.0 * h);
        check((exact - fd).abs() <= 1e-6 * exact.abs().max(1.0), || {
            format!("∂{var}({f}) = {exact} but central difference gives {fd}")
        })
    });
    finish(cases, r)
}

/// A named suite and its trial count.
pub type Suite = (&'static str, fn(u32) -> SuiteResult, u32);

/// Suites with their trial counts, in the order they are reported.
pub const SUITES: &[Suite] = &[
    ("jacobi", jacobi, 200),
    ("d_squared", d_squared, 200),
    ("cartan_formula", cartan_formula, 200),
    ("gauge_dim2", gauge_dim2, 100),
    ("gauge_dim3", gauge_dim3, 100),
    ("growth_invariance", growth_invariance, 20),
    ("finite_differences", finite_differences, 200),
];
