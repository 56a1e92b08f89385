//! Numeric evaluation of candidate generators at a fixed set of sample points.

use crate::expr::{Chart, ExprError, Point};
use crate::forms::linalg::{numeric_rank, singular_values};
use crate::forms::VectorField;
use crate::sample::{map, sample_with, Exec, SampleConfig};

use super::{FlagError, TypeCheck};

type Column = Option<Vec<f64>>;

pub(super) struct Probe {
    chart: Chart,
    exec: Exec,
    points: Vec<Point>,
    drift: Option<(VectorField, Vec<Column>)>,
    fields: Vec<VectorField>,
    values: Vec<Vec<Column>>,
}

/// Ranks of one set of columns across the sample points.
pub(super) struct RankStats {
    pub mode: usize,
    pub max: usize,
    pub outlier: Option<(Point, usize)>,
    ranks: Vec<Option<usize>>,
    points: Vec<Point>,
}

impl RankStats {
    pub fn first_below(&self, r: usize) -> Option<Point> {
        self.ranks.iter().zip(&self.points).find(|(k, _)| matches!(k, Some(k) if *k < r)).map(|(_, p)| p.clone())
    }
}

fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| u + t * (v - u)).collect();
    Point { vars: mix(&a.vars, &b.vars), params: mix(&a.params, &b.params) }
}

fn det(m: &[Vec<f64>]) -> f64 {
    crate::forms::linalg::numeric_det(m)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn minor(rows: &[Vec<f64>], pick_rows: &[usize], pick_cols: &[usize]) -> f64 {
    let m: Vec<Vec<f64>> = pick_rows.iter().map(|&r| pick_cols.iter().map(|&c| rows[r][c]).collect()).collect();
    det(&m)
}

impl Probe {
    pub fn new(
        chart: &Chart,
        drift: Option<&VectorField>,
        generators: &[VectorField],
        cfg: &SampleConfig,
    ) -> Result<Self, FlagError> {
        let samples = sample_with(chart, cfg, cfg.samples.max(1), |p| {
            if let Some(d) = drift {
                d.eval(p)?;
            }
            for g in generators {
                g.eval(p)?;
            }
            Ok(())
        })
        .map_err(ExprError::from)?;
        let points: Vec<Point> = samples.into_iter().map(|s| s.point).collect();
        let mut probe =
            Probe { chart: chart.clone(), exec: cfg.exec, points, drift: None, fields: Vec::new(), values: Vec::new() };
        if let Some(d) = drift {
            let vals = probe.evaluate(d);
            probe.drift = Some((d.clone(), vals));
        }
        Ok(probe)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    fn evaluate(&self, v: &VectorField) -> Vec<Column> {
        map(&self.points, self.exec, |p| v.eval(p).ok())
    }

    pub fn field_count(&self) -> usize {
        self.fields.len()
    }

    pub fn field(&self, i: usize) -> &VectorField {
        &self.fields[i]
    }

    pub fn push(&mut self, v: VectorField) -> usize {
        let vals = self.evaluate(&v);
        self.fields.push(v);
        self.values.push(vals);
        self.fields.len() - 1
    }

    /// Adds `v` to `kept` if it raises the typical rank.
    pub fn offer(&mut self, v: VectorField, kept: &mut Vec<usize>) {
        let before = if kept.is_empty() { 0 } else { self.rank_stats(kept, false).mode };
        let i = self.push(v);
        kept.push(i);
        if self.rank_stats(kept, false).mode <= before {
            kept.pop();
        }
    }

    fn rows_at(&self, idx: &[usize], with_drift: bool, k: usize) -> Option<Vec<Vec<f64>>> {
        let mut rows = Vec::with_capacity(idx.len() + 1);
        if with_drift {
            rows.push(self.drift.as_ref()?.1[k].clone()?);
        }
        for &i in idx {
            rows.push(self.values[i][k].clone()?);
        }
        Some(rows)
    }

    fn rows_at_point(&self, idx: &[usize], with_drift: bool, p: &Point) -> Option<Vec<Vec<f64>>> {
        let mut rows = Vec::with_capacity(idx.len() + 1);
        if with_drift {
            rows.push(self.drift.as_ref()?.0.eval(p).ok()?);
        }
        for &i in idx {
            rows.push(self.fields[i].eval(p).ok()?);
        }
        Some(rows)
    }

    pub fn rank_stats(&self, idx: &[usize], with_drift: bool) -> RankStats {
        let ks: Vec<usize> = (0..self.points.len()).collect();
        let ranks: Vec<Option<usize>> =
            map(&ks, self.exec, |&k| self.rows_at(idx, with_drift, k).map(|rows| numeric_rank(&rows)));
        let mut counts = vec![0usize; self.chart.dim() + 2];
        for r in ranks.iter().flatten() {
            counts[*r] += 1;
        }
        let mode = (0..counts.len()).rev().max_by_key(|&r| counts[r]).unwrap_or(0);
        let max = ranks.iter().flatten().copied().max().unwrap_or(0);
        let outlier = ranks
            .iter()
            .zip(&self.points)
            .find(|(r, _)| matches!(r, Some(r) if *r != mode))
            .map(|(r, p)| (p.clone(), r.unwrap_or(0)));
        RankStats { mode, max, outlier, ranks, points: self.points.clone() }
    }

    /// Looks for a rank drop between samples: picks the maximal minor at the
    /// first sample, and bisects between two samples where it changes sign.
    /// A located zero only counts if the full matrix is numerically rank
    /// deficient there.
    fn sign_change_witness(&self, idx: &[usize], with_drift: bool, rank: usize) -> Option<Point> {
        if rank == 0 {
            return None;
        }
        let k0 = (0..self.points.len()).find(|&k| self.rows_at(idx, with_drift, k).is_some())?;
        let rows0 = self.rows_at(idx, with_drift, k0)?;
        let (mut best, mut pick) = (0.0, None);
        for rs in subsets(rows0.len(), rank) {
            for cs in subsets(self.chart.dim(), rank) {
                let v = minor(&rows0, &rs, &cs).abs();
                if v > best {
                    best = v;
                    pick = Some((rs.clone(), cs));
                }
            }
        }
        let (rs, cs) = pick?;
        let f = |p: &Point| self.rows_at_point(idx, with_drift, p).map(|rows| minor(&rows, &rs, &cs));
        let values: Vec<Option<f64>> =
            (0..self.points.len()).map(|k| self.rows_at(idx, with_drift, k).map(|rows| minor(&rows, &rs, &cs))).collect();
        let s0 = values[k0]?.signum();
        let mut tries = 0;
        for (k, v) in values.iter().enumerate() {
            let Some(v) = v else { continue };
            if v.signum() == s0 || *v == 0.0 {
                continue;
            }
            tries += 1;
            if tries > 8 {
                break;
            }
            let (mut a, mut b) = (self.points[k0].clone(), self.points[k].clone());
            let mut ok = true;
            for _ in 0..80 {
                let mid = lerp(&a, &b, 0.5);
                match f(&mid) {
                    Some(m) if m.signum() == s0 => a = mid,
                    Some(_) => b = mid,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let rows = self.rows_at_point(idx, with_drift, &a)?;
            let s = singular_values(&rows);
            let top = s.first().copied().unwrap_or(0.0);
            if s.len() < rank || s[rank - 1] <= 1e-6 * top {
                return Some(a);
            }
        }
        None
    }

    pub fn type_check(&self, name: String, idx: &[usize], with_drift: bool, stats: &RankStats) -> TypeCheck {
        if let Some((p, r)) = &stats.outlier {
            return TypeCheck {
                name,
                passed: false,
                dimension: stats.mode,
                witness: Some(p.clone()),
                detail: Some(format!("dimension {r} here, {} at most samples", stats.mode)),
            };
        }
        match self.sign_change_witness(idx, with_drift, stats.mode) {
            Some(w) => TypeCheck {
                name,
                passed: false,
                dimension: stats.mode,
                witness: Some(w),
                detail: Some("dimension drops between samples".into()),
            },
            None => TypeCheck { name, passed: true, dimension: stats.mode, witness: None, detail: None },
        }
    }
}
