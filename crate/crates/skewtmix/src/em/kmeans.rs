//! k-means partitioning used to seed the EM algorithm: several restarts of
//! Lloyd's algorithm, each scored by the likelihood of the moment-based
//! start it induces.

use std::collections::HashSet;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::mix_seed;
use crate::DataMatrix;

use super::estep::loglik_only;
use super::init::init_params;

/// CDF tolerance used only for ranking candidate labelings; the winner is
/// refined later under the caller's own tolerance.
const SCORE_TOL: f64 = 1e-3;

/// Variance-split value at which candidate labelings are scored.
const SCORE_A: f64 = 0.5;

/// Attempts at redrawing centers when a restart produces an empty cluster.
const RESEED_TRIES: usize = 32;

const SWEEP_LIMIT: usize = 50;

/// Partition the rows of `dat` into g clusters. Runs `restarts`
/// random-point Lloyd's restarts (at most 50 sweeps each) on a winsorized
/// copy of the data (heavy-tailed samples otherwise trap Lloyd's algorithm
/// in singleton outlier clusters), deduplicates the resulting labelings,
/// and returns the one whose moment-based starting parameters give the
/// highest mixture log likelihood. Labels are 1-based and always refer to
/// the original rows.
pub fn kmeans_partition(
    dat: &DataMatrix,
    g: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = dat.n();
    if g == 0 {
        return Err(Error::InvalidParameter("need at least one cluster".into()));
    }
    if n < g {
        return Err(Error::InvalidParameter(format!(
            "cannot split {n} observations into {g} clusters"
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("need at least one restart".into()));
    }
    if g == 1 {
        return Ok(vec![1; n]);
    }

    let clamped = winsorize(dat);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut best: Option<(f64, Vec<usize>)> = None;
    // Least-degenerate labeling seen, kept as a last resort: the size of
    // its smallest class, and the labels.
    let mut fallback: Option<(usize, Vec<usize>)> = None;
    for r in 0..restarts {
        let labels = lloyd_once(&clamped, g, &mut rng)?;
        let labels = canonicalize(labels, g);
        if !seen.insert(labels.clone()) {
            continue;
        }
        let smallest = {
            let mut counts = vec![0usize; g];
            for &l in &labels {
                counts[l - 1] += 1;
            }
            counts.into_iter().min().unwrap_or(0)
        };
        if fallback.as_ref().map_or(true, |(s, _)| smallest > *s) {
            fallback = Some((smallest, labels.clone()));
        }
        let score = match init_params(dat, &labels, SCORE_A) {
            Ok(start) => loglik_only(dat, &start, SCORE_TOL, mix_seed(seed, &[r as u64]))
                .unwrap_or(f64::NEG_INFINITY),
            Err(_) => f64::NEG_INFINITY,
        };
        if score.is_finite() {
            match &best {
                Some((s, _)) if *s >= score => {}
                _ => best = Some((score, labels)),
            }
        }
    }
    best.map(|(_, l)| l)
        .or(fallback.map(|(_, l)| l))
        .ok_or_else(|| Error::SingularStart("k-means produced no usable labeling".into()))
}

/// Copy of the data with every coordinate clamped to median ± 8 scaled
/// MADs. Only cluster seeding looks at the copy, so the clamping cannot
/// bias any estimate; it merely stops far outliers from hijacking centers.
fn winsorize(dat: &DataMatrix) -> DataMatrix {
    let n = dat.n();
    let p = dat.p();
    let mut rows = dat.rows.clone();
    let mut col = vec![0.0f64; n];
    for i in 0..p {
        for j in 0..n {
            col[j] = rows[(j, i)];
        }
        let med = median_in_place(&mut col);
        for v in col.iter_mut() {
            *v = (*v - med).abs();
        }
        let mad = 1.4826 * median_in_place(&mut col);
        if mad > 0.0 {
            let (lo, hi) = (med - 8.0 * mad, med + 8.0 * mad);
            for j in 0..n {
                rows[(j, i)] = rows[(j, i)].clamp(lo, hi);
            }
        }
    }
    DataMatrix::new(rows, dat.columns.clone()).expect("same shape as input")
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite data"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One restart of Lloyd's algorithm; redraws its starting centers when a
/// cluster empties out.
fn lloyd_once(dat: &DataMatrix, g: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let n = dat.n();
    let p = dat.p();
    'reseed: for _ in 0..RESEED_TRIES {
        // g distinct random rows as starting centers
        let mut picks: Vec<usize> = Vec::with_capacity(g);
        while picks.len() < g {
            let c = rng.random_range(0..n);
            if !picks.contains(&c) {
                picks.push(c);
            }
        }
        let mut centers: Vec<DVector<f64>> =
            picks.iter().map(|&j| dat.rows.row(j).transpose()).collect();

        let mut labels = vec![0usize; n];
        for _sweep in 0..SWEEP_LIMIT {
            let mut changed = false;
            for j in 0..n {
                let y = dat.rows.row(j);
                let mut arg = 0usize;
                let mut bestd = f64::INFINITY;
                for (h, c) in centers.iter().enumerate() {
                    let mut d2 = 0.0;
                    for i in 0..p {
                        let diff = y[i] - c[i];
                        d2 += diff * diff;
                    }
                    if d2 < bestd {
                        bestd = d2;
                        arg = h;
                    }
                }
                if labels[j] != arg + 1 {
                    labels[j] = arg + 1;
                    changed = true;
                }
            }
            let mut counts = vec![0usize; g];
            for &l in &labels {
                counts[l - 1] += 1;
            }
            if counts.iter().any(|&c| c == 0) {
                continue 'reseed;
            }
            if !changed {
                break;
            }
            for (h, center) in centers.iter_mut().enumerate() {
                let mut sum = DVector::zeros(p);
                for j in 0..n {
                    if labels[j] == h + 1 {
                        sum += dat.rows.row(j).transpose();
                    }
                }
                *center = sum / counts[h] as f64;
            }
        }
        return Ok(labels);
    }
    Err(Error::SingularStart(format!(
        "k-means could not seed {g} non-empty clusters in {RESEED_TRIES} attempts"
    )))
}

/// Relabel clusters by order of first appearance so that permuted copies of
/// the same partition compare equal.
fn canonicalize(labels: Vec<usize>, g: usize) -> Vec<usize> {
    let mut map = vec![0usize; g + 1];
    let mut next = 0usize;
    let mut out = Vec::with_capacity(labels.len());
    for l in labels {
        if map[l] == 0 {
            next += 1;
            map[l] = next;
        }
        out.push(map[l]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn separated_data() -> DataMatrix {
        // two tight spherical clusters 100 units apart
        let mut rows = DMatrix::zeros(40, 2);
        for j in 0..20 {
            rows[(j, 0)] = (j as f64) * 0.01;
            rows[(j, 1)] = (j as f64) * -0.02;
        }
        for j in 20..40 {
            rows[(j, 0)] = 100.0 + (j as f64) * 0.01;
            rows[(j, 1)] = 100.0 - (j as f64) * 0.02;
        }
        DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap()
    }

    #[test]
    fn separated_clusters_are_recovered() {
        let dat = separated_data();
        let labels = kmeans_partition(&dat, 2, 5, 1).unwrap();
        assert!(labels[..20].iter().all(|&l| l == labels[0]));
        assert!(labels[20..].iter().all(|&l| l == labels[20]));
        assert_ne!(labels[0], labels[20]);
    }

    #[test]
    fn one_cluster_is_trivial() {
        let dat = separated_data();
        assert_eq!(kmeans_partition(&dat, 1, 3, 0).unwrap(), vec![1; 40]);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let dat = separated_data();
        let a = kmeans_partition(&dat, 2, 4, 7).unwrap();
        let b = kmeans_partition(&dat, 2, 4, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonical_form_merges_permuted_labelings() {
        assert_eq!(
            canonicalize(vec![2, 2, 1, 3, 1], 3),
            canonicalize(vec![1, 1, 3, 2, 3], 3)
        );
    }

    #[test]
    fn too_few_rows_rejected() {
        let dat = DataMatrix::new(DMatrix::zeros(2, 1), vec!["x".into()]).unwrap();
        assert!(kmeans_partition(&dat, 3, 2, 0).is_err());
    }

    #[test]
    fn extreme_outliers_do_not_become_singleton_clusters() {
        // Two usable groups plus two points thousands of units away; the
        // winsorized seeding keeps the outliers inside the bulk clusters
        // instead of isolating them.
        let mut rows = DMatrix::zeros(42, 2);
        for j in 0..20 {
            rows[(j, 0)] = (j as f64) * 0.05;
            rows[(j, 1)] = (j as f64) * 0.03;
        }
        for j in 20..40 {
            rows[(j, 0)] = 10.0 + (j as f64) * 0.05;
            rows[(j, 1)] = 10.0 - (j as f64) * 0.03;
        }
        rows[(40, 0)] = 9000.0;
        rows[(40, 1)] = -7500.0;
        rows[(41, 0)] = -6000.0;
        rows[(41, 1)] = 8800.0;
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let labels = kmeans_partition(&dat, 2, 8, 3).unwrap();
        let mut counts = [0usize; 2];
        for &l in &labels {
            counts[l - 1] += 1;
        }
        assert!(counts.iter().all(|&c| c >= 20), "counts: {counts:?}");
    }
}
