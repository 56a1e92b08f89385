#![allow(dead_code)]

pub mod props;
pub mod formulas;

use std::collections::BTreeMap;

use paf_core::expr::{Chart, Interval, Scalar};
use paf_core::flags::AffineDistribution;
use paf_core::forms::VectorField;

pub fn chart3(lo2: f64) -> Chart {
    let b = [Interval::new(-1.0, 1.0).unwrap(), Interval::new(lo2, lo2 + 1.5).unwrap(), Interval::new(-1.0, 1.0).unwrap()];
    Chart::with_box("X", &["x1", "x2", "x3"], &b).unwrap()
}

pub fn chart2(lo2: f64) -> Chart {
    let b = [Interval::new(-1.0, 1.0).unwrap(), Interval::new(lo2, lo2 + 1.5).unwrap()];
    Chart::with_box("X", &["x1", "x2"], &b).unwrap()
}

pub fn system(c: &Chart, drift: &[&str], controls: &[&[&str]]) -> AffineDistribution {
    let gens = controls.iter().map(|g| VectorField::parse(c, g).unwrap()).collect();
    AffineDistribution::new(c, VectorField::parse(c, drift).unwrap(), gens).unwrap()
}

/// Expands a formula written with named functions and their partials,
/// e.g. `J_x2 - J*J_x3x3/2`, by substituting the given scalars.
pub fn formula(template: &str, funcs: &BTreeMap<&str, Scalar>, chart: &Chart) -> Scalar {
    let mut out = String::new();
    let chars: Vec<char> = template.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let prev_ident = i > 0 && (chars[i - 1].is_ascii_alphanumeric() || chars[i - 1] == '_');
        if !prev_ident && funcs.contains_key(c.to_string().as_str()) {
            let mut f = funcs[c.to_string().as_str()].clone();
            let mut j = i + 1;
            if j < chars.len() && chars[j] == '_' {
                j += 1;
                while j + 1 < chars.len() && chars[j] == 'x' && chars[j + 1].is_ascii_digit() {
                    f = f.diff(&format!("x{}", chars[j + 1]));
                    j += 2;
                }
            }
            if j >= chars.len() || !(chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                out.push_str(&format!("({f})"));
                i = j;
                continue;
            }
        }
        out.push(c);
        i += 1;
    }
    Scalar::parse(&out, chart).unwrap_or_else(|e| panic!("{e}: {out}"))
}
