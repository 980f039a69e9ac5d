//! Randomly shifted Halton point sets.

const PRIMES: [u64; 40] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173,
];

pub const MAX_DIM: usize = PRIMES.len();

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// Point `index` of the Halton sequence in `out.len()` dimensions, rotated by
/// `shift` modulo 1 (Cranley–Patterson).
pub fn shifted_halton(index: u64, shift: &[f64], out: &mut [f64]) {
    assert!(out.len() <= MAX_DIM, "Halton dimension {} exceeds {MAX_DIM}", out.len());
    for (j, o) in out.iter_mut().enumerate() {
        let mut u = radical_inverse(index + 1, PRIMES[j]) + shift[j];
        if u >= 1.0 {
            u -= 1.0;
        }
        *o = u;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput_base_two() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
        assert_eq!(radical_inverse(5, 3), 2.0 / 3.0 + 1.0 / 9.0);
    }

    #[test]
    fn shifted_points_stay_in_unit_cube() {
        let shift = [0.9, 0.3, 0.999];
        let mut p = [0.0; 3];
        for i in 0..1000 {
            shifted_halton(i, &shift, &mut p);
            assert!(p.iter().all(|u| (0.0..1.0).contains(u)));
        }
    }

    #[test]
    fn equidistribution_beats_loose_bound() {
        // Mean of x*y over 4096 points of the 2-d set approximates 1/4.
        let mut p = [0.0; 2];
        let mut acc = 0.0;
        for i in 0..4096 {
            shifted_halton(i, &[0.0, 0.0], &mut p);
            acc += p[0] * p[1];
        }
        assert!((acc / 4096.0 - 0.25).abs() < 2e-3);
    }
}
