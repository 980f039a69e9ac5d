//! Empirical estimators over independent samples.
//!
//! Sample `i` always comes from stream `i`, and per-batch integer tallies are
//! merged in batch order, so every estimate is a deterministic function of
//! `(model, seed, samples)` regardless of thread count.

use super::{sample_zeros, LabSettings, ZeroSample};
use crate::density::CoefficientModel;
use crate::engine::Rect;
use crate::error::{Error, Result};
use crate::rng::par_batches;
use serde::{Deserialize, Serialize};
use std::io::Write;

const BATCH: u64 = 1024;

/// Integration cell: a half-open real interval or an upper-half-plane rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cell {
    Real { lo: f64, hi: f64 },
    Complex { re: (f64, f64), im: (f64, f64) },
}

impl Cell {
    fn validate(&self) -> Result<()> {
        match *self {
            Cell::Real { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::Input(format!("degenerate interval [{lo}, {hi})")));
                }
                Ok(())
            }
            Cell::Complex { re, im } => Rect::new(re, im).map(|_| ()),
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Cell::Real { lo, hi } => hi - lo,
            Cell::Complex { re, im } => (re.1 - re.0) * (im.1 - im.0),
        }
    }

    /// Zeros of the sample inside the cell (upper-half-plane zeros for rectangles).
    pub fn count(&self, z: &ZeroSample) -> u64 {
        match *self {
            Cell::Real { lo, hi } => z.real_count(lo, hi) as u64,
            Cell::Complex { re, im } => {
                let r = Rect { re, im };
                z.complex_pairs.iter().filter(|p| r.contains(**p)).count() as u64
            }
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Unflagged samples that entered the estimate.
    pub used: u64,
    pub flagged: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    sum: u128,
    sum_sq: u128,
}

impl Tally {
    fn push(&mut self, v: u64) {
        self.sum += v as u128;
        self.sum_sq += (v as u128) * (v as u128);
    }

    fn add(&mut self, o: &Tally) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn mean_and_stderr(&self, n: u64) -> (f64, f64) {
        if n == 0 {
            return (0.0, 0.0);
        }
        let nf = n as f64;
        let mean = self.sum as f64 / nf;
        if n < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq as f64 - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (mean, (var / nf).sqrt())
    }
}

struct Tallies {
    per: Vec<Tally>,
    used: u64,
    flagged: u64,
}

/// Runs `stats` over every unflagged sample and sums its integer outputs.
fn tally<F>(model: &CoefficientModel, settings: &LabSettings, width: usize, stats: F) -> Tallies
where
    F: Fn(&ZeroSample, &mut [u64]) + Sync + Send,
{
    let parts = par_batches(settings.samples, BATCH, |_, range| {
        let mut per = vec![Tally::default(); width];
        let mut buf = vec![0u64; width];
        let (mut used, mut flagged) = (0u64, 0u64);
        for i in range {
            let z = sample_zeros(model, i, settings);
            if z.flagged {
                flagged += 1;
                continue;
            }
            used += 1;
            buf.iter_mut().for_each(|b| *b = 0);
            stats(&z, &mut buf);
            for (t, &v) in per.iter_mut().zip(&buf) {
                t.push(v);
            }
        }
        (per, used, flagged)
    });
    let mut out = Tallies {
        per: vec![Tally::default(); width],
        used: 0,
        flagged: 0,
    };
    for (per, used, flagged) in parts {
        for (a, b) in out.per.iter_mut().zip(&per) {
            a.add(b);
        }
        out.used += used;
        out.flagged += flagged;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub cell: Cell,
    /// Mean number of zeros in the cell.
    pub mass: f64,
    pub mass_stderr: f64,
    /// `mass / measure`.
    pub density: f64,
    pub density_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub cells: Vec<CellEstimate>,
    pub used: u64,
    pub flagged: u64,
}

fn check_samples(settings: &LabSettings) -> Result<()> {
    if settings.samples == 0 {
        return Err(Error::Input("samples must be positive".into()));
    }
    Ok(())
}

/// Mean zero count per cell divided by the cell measure.
pub fn estimate_density(model: &CoefficientModel, cells: &[Cell], settings: &LabSettings) -> Result<DensityEstimate> {
    check_samples(settings)?;
    for c in cells {
        c.validate()?;
    }
    let t = tally(model, settings, cells.len(), |z, out| {
        for (o, c) in out.iter_mut().zip(cells) {
            *o = c.count(z);
        }
    });
    let cells = cells
        .iter()
        .zip(&t.per)
        .map(|(c, tl)| {
            let (mass, se) = tl.mean_and_stderr(t.used);
            let m = c.measure();
            let (density, density_stderr) = if m.is_finite() { (mass / m, se / m) } else { (0.0, 0.0) };
            CellEstimate {
                cell: *c,
                mass,
                mass_stderr: se,
                density,
                density_stderr,
            }
        })
        .collect();
    Ok(DensityEstimate {
        cells,
        used: t.used,
        flagged: t.flagged,
    })
}

/// Pairwise disjoint real intervals and upper-half-plane rectangles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxFamily {
    real: Vec<(f64, f64)>,
    rects: Vec<Rect>,
}

impl BoxFamily {
    pub fn new(real: Vec<(f64, f64)>, rects: Vec<Rect>) -> Result<Self> {
        if real.is_empty() && rects.is_empty() {
            return Err(Error::Input("a box family needs at least one set".into()));
        }
        for &(a, b) in &real {
            if !(a < b) {
                return Err(Error::Input(format!("degenerate interval [{a}, {b})")));
            }
        }
        for r in &rects {
            r.validate().map_err(|e| Error::Input(e.to_string()))?;
            if !(r.im.0 > 0.0) {
                return Err(Error::Input(format!("rectangle {r:?} touches the real axis")));
            }
        }
        let overlap = |a: (f64, f64), b: (f64, f64)| a.0 < b.1 && b.0 < a.1;
        for i in 0..real.len() {
            for j in i + 1..real.len() {
                if overlap(real[i], real[j]) {
                    return Err(Error::Input(format!("intervals {:?} and {:?} overlap", real[i], real[j])));
                }
            }
        }
        for i in 0..rects.len() {
            for j in i + 1..rects.len() {
                if overlap(rects[i].re, rects[j].re) && overlap(rects[i].im, rects[j].im) {
                    return Err(Error::Input(format!(
                        "rectangles {:?} and {:?} overlap",
                        rects[i], rects[j]
                    )));
                }
            }
        }
        Ok(Self { real, rects })
    }

    pub fn real(&self) -> &[(f64, f64)] {
        &self.real
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    fn cells(&self) -> Vec<Cell> {
        self.real
            .iter()
            .map(|&(lo, hi)| Cell::Real { lo, hi })
            .chain(self.rects.iter().map(|r| Cell::Complex { re: r.re, im: r.im }))
            .collect()
    }
}

/// Sample mean of `Π_i μ(B_i)`.
pub fn estimate_mixed_moment(model: &CoefficientModel, boxes: &BoxFamily, settings: &LabSettings) -> Result<LabEstimate> {
    check_samples(settings)?;
    let cells = boxes.cells();
    let t = tally(model, settings, 1, |z, out| {
        out[0] = cells.iter().map(|c| c.count(z)).product();
    });
    let (value, stderr) = t.per[0].mean_and_stderr(t.used);
    Ok(LabEstimate {
        value,
        stderr,
        used: t.used,
        flagged: t.flagged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfEntry {
    pub real_count: usize,
    /// Number of conjugate pairs, `(n − real_count)/2`.
    pub l: usize,
    pub probability: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub degree: usize,
    /// Counts `n, n − 2, ...`.
    pub entries: Vec<PmfEntry>,
    pub used: u64,
    pub flagged: u64,
}

/// Empirical distribution of the number of real zeros.
pub fn real_count_pmf(model: &CoefficientModel, settings: &LabSettings) -> Result<Pmf> {
    check_samples(settings)?;
    let n = model.degree();
    let width = n / 2 + 1;
    let t = tally(model, settings, width, |z, out| {
        let l = z.complex_pairs.len();
        if l < out.len() {
            out[l] = 1;
        }
    });
    let entries = (0..width)
        .map(|l| {
            let (p, _) = t.per[l].mean_and_stderr(t.used);
            let se = if t.used > 0 { (p * (1.0 - p) / t.used as f64).sqrt() } else { 0.0 };
            PmfEntry {
                real_count: n - 2 * l,
                l,
                probability: p,
                stderr: se,
            }
        })
        .collect();
    Ok(Pmf {
        degree: n,
        entries,
        used: t.used,
        flagged: t.flagged,
    })
}

#[derive(Serialize)]
struct SampleRecord<'a> {
    coefficients: &'a [f64],
    real_roots: &'a [f64],
    complex_pairs: Vec<[f64; 2]>,
    residual: f64,
    flagged: bool,
}

/// Writes one JSON object per sample, in sample order. Returns the flagged count.
pub fn write_samples<W: Write>(model: &CoefficientModel, settings: &LabSettings, out: &mut W) -> Result<u64> {
    check_samples(settings)?;
    const CHUNK: u64 = 64 * BATCH;
    let mut flagged = 0;
    let mut start = 0;
    while start < settings.samples {
        let len = CHUNK.min(settings.samples - start);
        let lines = par_batches(len, BATCH, |_, range| {
            let mut buf = Vec::new();
            let mut f = 0u64;
            for i in range {
                let z = sample_zeros(model, start + i, settings);
                f += z.flagged as u64;
                let rec = SampleRecord {
                    coefficients: &z.coefficients,
                    real_roots: &z.real_roots,
                    complex_pairs: z.complex_pairs.iter().map(|p| [p.re, p.im]).collect(),
                    residual: z.residual,
                    flagged: z.flagged,
                };
                serde_json::to_writer(&mut buf, &rec).expect("serializing a sample record");
                buf.push(b'\n');
            }
            (buf, f)
        });
        for (buf, f) in lines {
            out.write_all(&buf).map_err(|e| Error::Input(format!("writing samples: {e}")))?;
            flagged += f;
        }
        start += len;
    }
    Ok(flagged)
}
