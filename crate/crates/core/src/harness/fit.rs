use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HarnessError, MetricsRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals in log2 space.
    pub residual: f64,
    pub points: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Least squares on `(log2 n, log2 median value)` after grouping samples by
/// `n`. Needs at least three distinct `n` and positive medians.
pub fn fit_scaling(samples: &[(usize, f64)]) -> Result<Fit, HarnessError> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(n, v) in samples {
        groups.entry(n).or_default().push(v);
    }
    if groups.len() < 3 {
        return Err(HarnessError::Config(format!(
            "a scaling fit needs at least 3 distinct n, got {}",
            groups.len()
        )));
    }
    let mut pts = Vec::with_capacity(groups.len());
    for (n, vals) in groups {
        let m = median(vals);
        if m <= 0.0 || n == 0 {
            return Err(HarnessError::Config(format!("median {m} at n = {n} cannot be log-scaled")));
        }
        pts.push(((n as f64).log2(), m.log2()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(Fit {
        slope,
        intercept,
        residual: (ss / k).sqrt(),
        points: pts.len(),
    })
}

/// Numeric field `name` anywhere in the record's JSON form (top level
/// first, then nested objects in field order). A dotted name such as
/// `depth.work` is an exact path instead.
pub fn record_field(rec: &MetricsRecord, name: &str) -> Option<f64> {
    fn find(v: &serde_json::Value, name: &str) -> Option<f64> {
        let obj = v.as_object()?;
        if let Some(x) = obj.get(name).and_then(|x| x.as_f64()) {
            return Some(x);
        }
        obj.values().find_map(|c| find(c, name))
    }
    let v = serde_json::to_value(rec).ok()?;
    if name.contains('.') {
        return name.split('.').try_fold(&v, |v, k| v.get(k))?.as_f64();
    }
    find(&v, name)
}

/// [`fit_scaling`] over `field` of records, grouped by graph size.
pub fn fit_records(records: &[MetricsRecord], field: &str) -> Result<Fit, HarnessError> {
    let samples: Vec<(usize, f64)> = records
        .iter()
        .map(|r| {
            record_field(r, field)
                .map(|v| (r.n, v))
                .ok_or_else(|| HarnessError::Config(format!("record has no numeric field `{field}`")))
        })
        .collect::<Result<_, _>>()?;
    fit_scaling(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_powers() {
        let lin: Vec<(usize, f64)> = (4..10).map(|e| (1usize << e, (1u64 << e) as f64)).collect();
        let f = fit_scaling(&lin).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-9);
        assert!(f.residual < 1e-9);
        let root: Vec<(usize, f64)> = (4..10).map(|e| (1usize << e, ((1u64 << e) as f64).sqrt())).collect();
        assert!((fit_scaling(&root).unwrap().slope - 0.5).abs() < 1e-9);
    }

    #[test]
    fn medians_per_size() {
        let s = vec![(2, 1.0), (2, 100.0), (2, 2.0), (4, 4.0), (8, 8.0), (8, 8.0)];
        let f = fit_scaling(&s).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-9);
        assert_eq!(f.points, 3);
    }

    #[test]
    fn too_few_sizes() {
        assert!(fit_scaling(&[(2, 1.0), (4, 2.0), (4, 3.0)]).is_err());
        assert!(fit_scaling(&[]).is_err());
    }
}
