//! Globally adaptive Gauss–Kronrod quadrature (7/15-point pairs) in one
//! dimension, nested over boxes, with tangent maps for infinite limits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutcome {
    pub value: f64,
    pub error: f64,
    pub evals: u64,
    pub converged: bool,
}

impl QuadOutcome {
    pub const ZERO: QuadOutcome = QuadOutcome {
        value: 0.0,
        error: 0.0,
        evals: 0,
        converged: true,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cap on the number of subintervals per one-dimensional pass.
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_intervals: 200,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    aux: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 15-point Kronrod panel. The integrand returns `(value, aux)`; `aux` is
/// integrated with the Kronrod weights and carried along without driving
/// refinement (nested integration uses it for inner error estimates).
fn kronrod<F: FnMut(f64) -> (f64, f64)>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (fc, ac) = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut aux = WGK[7] * ac;
    let mut abs_sum = WGK[7] * fc.abs();
    let mut fv = [0.0; 15];
    fv[7] = fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, a1) = f(c - dx);
        let (f2, a2) = f(c + dx);
        fv[i] = f1;
        fv[14 - i] = f2;
        k += WGK[i] * (f1 + f2);
        aux += WGK[i] * (a1 + a2);
        abs_sum += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * k;
    let mut asc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        asc += WGK[i] * ((fv[i] - mean).abs() + (fv[14 - i] - mean).abs());
    }
    let hl = h.abs();
    let asc = asc * hl;
    let abs_sum = abs_sum * hl;
    let mut err = ((k - g) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * abs_sum;
    if round > f64::MIN_POSITIVE {
        err = err.max(round);
    }
    Segment {
        a,
        b,
        value: k * h,
        aux: aux * h,
        error: err,
    }
}

/// Adaptive integration of `f` over `[a, b]` with initial cuts at `breaks`.
/// Returns the outcome and the integral of the auxiliary channel.
pub fn integrate_with_aux<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    settings: &QuadSettings,
) -> (QuadOutcome, f64) {
    if a == b {
        return (QuadOutcome::ZERO, 0.0);
    }
    if a > b {
        let (o, aux) = integrate_with_aux(f, b, a, breaks, settings);
        return (
            QuadOutcome {
                value: -o.value,
                ..o
            },
            -aux,
        );
    }
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (b - a));
    let mut nodes = Vec::with_capacity(cuts.len() + 2);
    nodes.push(a);
    nodes.extend(cuts);
    nodes.push(b);

    let mut heap = BinaryHeap::new();
    let mut evals = 0u64;
    for w in nodes.windows(2) {
        heap.push(kronrod(&mut f, w[0], w[1]));
        evals += 15;
    }
    let max_intervals = settings.max_intervals.max(heap.len());
    let mut converged = false;
    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if err <= settings.abs_tol.max(settings.rel_tol * total.abs()) {
            converged = true;
            break;
        }
        if heap.len() >= max_intervals {
            break;
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        heap.push(kronrod(&mut f, worst.a, mid));
        heap.push(kronrod(&mut f, mid, worst.b));
        evals += 30;
    }
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segs.iter().map(|s| s.value).sum();
    let error = segs.iter().map(|s| s.error).sum();
    let aux = segs.iter().map(|s| s.aux).sum();
    (
        QuadOutcome {
            value,
            error,
            evals,
            converged,
        },
        aux,
    )
}

pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    settings: &QuadSettings,
) -> QuadOutcome {
    integrate_with_aux(|x| (f(x), 0.0), a, b, breaks, settings).0
}

/// Change of variable that turns a possibly infinite interval into a finite one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisMap {
    Finite(f64, f64),
    /// `x = tan s`, `s ∈ (−π/2, π/2)`.
    Whole,
    /// `x = a + tan s`, `s ∈ [0, π/2)`.
    Above(f64),
    /// `x = b − tan s`, `s ∈ [0, π/2)`.
    Below(f64),
}

impl AxisMap {
    pub fn new(lo: f64, hi: f64) -> Self {
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => AxisMap::Finite(lo, hi),
            (false, false) => AxisMap::Whole,
            (true, false) => AxisMap::Above(lo),
            (false, true) => AxisMap::Below(hi),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match *self {
            AxisMap::Finite(a, b) => (a, b),
            AxisMap::Whole => (-FRAC_PI_2, FRAC_PI_2),
            AxisMap::Above(_) | AxisMap::Below(_) => (0.0, FRAC_PI_2),
        }
    }

    /// `(x(s), |dx/ds|)`.
    #[inline]
    pub fn point(&self, s: f64) -> (f64, f64) {
        match *self {
            AxisMap::Finite(..) => (s, 1.0),
            AxisMap::Whole => {
                let c = s.cos();
                (s.tan(), 1.0 / (c * c))
            }
            AxisMap::Above(a) => {
                let c = s.cos();
                (a + s.tan(), 1.0 / (c * c))
            }
            AxisMap::Below(b) => {
                let c = s.cos();
                (b - s.tan(), 1.0 / (c * c))
            }
        }
    }

    pub fn inverse(&self, x: f64) -> f64 {
        match *self {
            AxisMap::Finite(..) => x,
            AxisMap::Whole => x.atan(),
            AxisMap::Above(a) => (x - a).atan(),
            AxisMap::Below(b) => (b - x).atan(),
        }
    }
}

#[inline]
fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// One-dimensional integral over a possibly infinite interval.
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    settings: &QuadSettings,
) -> QuadOutcome {
    let map = AxisMap::new(lo, hi);
    let (a, b) = map.domain();
    let mapped: Vec<f64> = breaks.iter().map(|&x| map.inverse(x)).collect();
    integrate(
        |s| {
            let (x, j) = map.point(s);
            if !x.is_finite() || !j.is_finite() {
                return 0.0;
            }
            finite_or_zero(f(x) * j)
        },
        a,
        b,
        &mapped,
        settings,
    )
}

/// Iterated adaptive integration over a product of (possibly infinite) intervals.
///
/// The last coordinate is innermost. `breaks(prefix)` returns the points where
/// the integrand (or, for outer levels, the inner integral) is non-smooth in
/// coordinate `prefix.len()` once the preceding ones are fixed to `prefix`.
/// Level `j` works to an absolute tolerance divided by the volume of the outer
/// levels so that the total error budget is shared.
pub struct NestedQuad<'a> {
    pub settings: QuadSettings,
    pub breaks: Option<&'a (dyn Fn(&[f64]) -> Vec<f64> + Sync)>,
}

impl NestedQuad<'_> {
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: &F, bounds: &[(f64, f64)]) -> QuadOutcome {
        let d = bounds.len();
        if d == 0 {
            return QuadOutcome {
                value: finite_or_zero(f(&[])),
                error: 0.0,
                evals: 1,
                converged: true,
            };
        }
        let maps: Vec<AxisMap> = bounds.iter().map(|&(lo, hi)| AxisMap::new(lo, hi)).collect();
        if bounds.iter().any(|&(lo, hi)| lo >= hi) {
            return QuadOutcome::ZERO;
        }
        let mut point = vec![0.0; d];
        let mut evals = 0u64;
        let mut converged = true;
        let (value, error) = self.level(f, &maps, 0, 1.0, &mut point, &mut evals, &mut converged);
        QuadOutcome {
            value,
            error,
            evals,
            converged,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn level<F: Fn(&[f64]) -> f64>(
        &self,
        f: &F,
        maps: &[AxisMap],
        j: usize,
        outer_volume: f64,
        point: &mut Vec<f64>,
        evals: &mut u64,
        converged: &mut bool,
    ) -> (f64, f64) {
        let d = maps.len();
        let (a, b) = maps[j].domain();
        let settings = QuadSettings {
            abs_tol: self.settings.abs_tol / outer_volume,
            rel_tol: self.settings.rel_tol * 0.5f64.powi(j as i32),
            max_intervals: self.settings.max_intervals,
        };
        let breaks: Vec<f64> = match self.breaks {
            Some(bf) => bf(&point[..j])
                .into_iter()
                .map(|x| maps[j].inverse(x))
                .collect(),
            None => Vec::new(),
        };
        if j + 1 == d {
            let mut local = point.clone();
            let (o, _) = integrate_with_aux(
                |s| {
                    let (x, jac) = maps[j].point(s);
                    if !x.is_finite() || !jac.is_finite() {
                        return (0.0, 0.0);
                    }
                    local[j] = x;
                    (finite_or_zero(f(&local) * jac), 0.0)
                },
                a,
                b,
                &breaks,
                &settings,
            );
            *evals += o.evals;
            *converged &= o.converged;
            return (o.value, o.error);
        }
        let width = b - a;
        let (o, inner_err) = integrate_with_aux(
            |s| {
                let (x, jac) = maps[j].point(s);
                if !x.is_finite() || !jac.is_finite() {
                    return (0.0, 0.0);
                }
                point[j] = x;
                let (v, e) = self.level(f, maps, j + 1, outer_volume * width, point, evals, converged);
                (finite_or_zero(v * jac), finite_or_zero(e * jac))
            },
            a,
            b,
            &breaks,
            &settings,
        );
        *evals += o.evals;
        *converged &= o.converged;
        (o.value, o.error + inner_err.abs())
    }
}
