//! Iterative radix-2 Cooley–Tukey FFT.
//!
//! Twiddle factors are evaluated directly with `sin_cos` for each index rather
//! than by recurrence, which keeps the round-trip error near machine precision
//! for the sizes used by the circulant matvec (up to a few thousand points).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Returns the transform of `v`. The inverse includes the 1/N normalization.
pub fn fft(v: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    let mut out = v.to_vec();
    fft_in_place(&mut out, direction)?;
    Ok(out)
}

pub fn fft_in_place(data: &mut [Complex64], direction: Direction) -> Result<()> {
    let n = data.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Size(n));
    }
    if n == 1 {
        return Ok(());
    }
    bit_reverse(data);

    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let (s, c) = (sign * 2.0 * PI * k as f64 / n as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for chunk in data.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[k * stride];
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }

    if direction == Direction::Inverse {
        let scale = 1.0 / n as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
    Ok(())
}

fn bit_reverse(data: &mut [Complex64]) {
    let n = data.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
}

/// Linear convolution of two real sequences via zero-padded FFT.
/// Output length is `a.len() + b.len() - 1`.
pub fn convolve_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa = zero_padded(a, n);
    let mut fb = zero_padded(b, n);
    fft_in_place(&mut fa, Direction::Forward).expect("power of two");
    fft_in_place(&mut fb, Direction::Forward).expect("power of two");
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft_in_place(&mut fa, Direction::Inverse).expect("power of two");
    fa.iter().take(out_len).map(|z| z.re).collect()
}

pub(crate) fn zero_padded(v: &[f64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (o, &x) in out.iter_mut().zip(v) {
        o.re = x;
    }
    out
}
