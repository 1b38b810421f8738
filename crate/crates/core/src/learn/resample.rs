//! Minority-class oversampling. Originals are kept in order and the added
//! rows follow them, each with a record of where it came from.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::features::DocMatrix;
use crate::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "origin", rename_all = "snake_case")]
pub enum SampleOrigin {
    Original {
        row: usize,
    },
    Copy {
        of: usize,
    },
    /// `x[base] + gap * (x[neighbor] - x[base])`
    Interpolated {
        base: usize,
        neighbor: usize,
        gap: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub x: DocMatrix,
    pub y: Vec<bool>,
    pub origins: Vec<SampleOrigin>,
    pub warning: Option<String>,
}

/// Minority label, its rows, and how many rows it is short by.
fn minority(y: &[bool]) -> Result<(bool, Vec<usize>, usize), LearnError> {
    let pos = y.iter().filter(|&&b| b).count();
    let neg = y.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(LearnError::SingleClass);
    }
    let label = pos < neg;
    let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
    Ok((label, rows, pos.abs_diff(neg)))
}

fn originals(x: &DocMatrix, y: &[bool]) -> Result<Resampled, LearnError> {
    if x.n_rows() != y.len() {
        return Err(LearnError::ShapeMismatch {
            rows: x.n_rows(),
            labels: y.len(),
        });
    }
    Ok(Resampled {
        x: x.clone(),
        y: y.to_vec(),
        origins: (0..y.len()).map(|row| SampleOrigin::Original { row }).collect(),
        warning: None,
    })
}

/// Duplicates uniformly drawn minority rows until both classes have equal counts.
pub fn random_oversample(x: &DocMatrix, y: &[bool], seed: u64) -> Result<Resampled, LearnError> {
    let mut out = originals(x, y)?;
    let (label, rows, deficit) = minority(y)?;
    let mut rng = seeded_rng(seed);
    for _ in 0..deficit {
        let of = rows[rng.gen_range(0..rows.len())];
        out.x.push_row(x.row(of).iter());
        out.y.push(label);
        out.origins.push(SampleOrigin::Copy { of });
    }
    Ok(out)
}

/// SMOTE: each synthetic row interpolates a random minority row towards one
/// of its `k_neighbors` nearest minority rows (Euclidean, ties to the lower
/// index). A minority of one falls back to [`random_oversample`].
pub fn smote(x: &DocMatrix, y: &[bool], k_neighbors: usize, seed: u64) -> Result<Resampled, LearnError> {
    if k_neighbors == 0 {
        return Err(LearnError::InvalidSpec("smote needs k_neighbors >= 1".into()));
    }
    let mut out = originals(x, y)?;
    let (label, rows, deficit) = minority(y)?;
    if rows.len() < 2 {
        let mut r = random_oversample(x, y, seed)?;
        r.warning = Some("minority class has a single sample; used random oversampling instead of smote".into());
        return Ok(r);
    }
    let mut rng = seeded_rng(seed);
    let draws: Vec<(usize, f64, f64)> = (0..deficit)
        .map(|_| (rng.gen_range(0..rows.len()), rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();
    let mut bases: Vec<usize> = draws.iter().map(|d| d.0).collect();
    bases.sort_unstable();
    bases.dedup();
    let k = k_neighbors.min(rows.len() - 1);
    let neighbours: BTreeMap<usize, Vec<usize>> = bases
        .par_iter()
        .map(|&b| {
            let q = x.row(rows[b]);
            let mut d: Vec<(f64, usize)> = (0..rows.len())
                .filter(|&o| o != b)
                .map(|o| (q.squared_distance(&x.row(rows[o])), o))
                .collect();
            d.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            (b, d.into_iter().take(k).map(|(_, o)| o).collect())
        })
        .collect();
    for (b, pick, gap) in draws {
        let nn = &neighbours[&b];
        let n = nn[((pick * nn.len() as f64) as usize).min(nn.len() - 1)];
        let (base, neighbor) = (rows[b], rows[n]);
        out.x.push_row(interpolate(x, base, neighbor, gap));
        out.y.push(label);
        out.origins.push(SampleOrigin::Interpolated { base, neighbor, gap });
    }
    Ok(out)
}

fn interpolate(x: &DocMatrix, a: usize, b: usize, gap: f64) -> Vec<(usize, f64)> {
    let (ra, rb) = (x.row(a), x.row(b));
    let mut merged: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for (j, v) in ra.iter() {
        merged.entry(j).or_default().0 = v;
    }
    for (j, v) in rb.iter() {
        merged.entry(j).or_default().1 = v;
    }
    merged
        .into_iter()
        .map(|(j, (va, vb))| (j, va + gap * (vb - va)))
        .collect()
}
