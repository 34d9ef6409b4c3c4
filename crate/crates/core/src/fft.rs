//! Thin helpers over `rustfft` for tensor grids with the same length on every axis.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Unnormalised in-place DFT along every axis of a row-major cube with side `n`.
/// `inverse` selects the `e^{+i}` kernel.
pub fn fft_cube(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut lane = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_exact_mut(n) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, slot) in lane.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                fft.process_with_scratch(&mut lane, &mut scratch);
                for (i, v) in lane.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Signed frequency index of DFT bin `q` for transform length `n`, in `[-n/2, n/2)`.
pub fn signed_index(q: usize, n: usize) -> i64 {
    let q = q as i64;
    let n = n as i64;
    if q >= (n + 1) / 2 {
        q - n
    } else {
        q
    }
}

/// Storage position of the signed index `j` in a length-`n` transform.
pub fn wrap_index(j: i64, n: usize) -> usize {
    j.rem_euclid(n as i64) as usize
}

/// Smallest length `>= n` whose prime factors are 2, 3 and 5.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Decomposes a flat row-major index of a cube with side `n` into per-axis indices.
pub fn unflatten(mut flat: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}
