//! Independent reference computations for the integration tests. Nothing
//! here calls into the library's numerical code.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(row);
                for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// HP trend from the dense normal equations `(I + λ DᵀD) g = y`.
pub fn hp_trend_dense(y: &[f64], lambda: f64) -> Vec<f64> {
    let n = y.len();
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    // rows of D are (1, -2, 1) at offsets r, r+1, r+2
    for r in 0..n - 2 {
        let d = [(r, 1.0), (r + 1, -2.0), (r + 2, 1.0)];
        for &(i, di) in &d {
            for &(j, dj) in &d {
                a[i][j] += lambda * di * dj;
            }
        }
    }
    dense_solve(a, y.to_vec())
}

/// One-sided periodogram by the defining sum, `P_k = c_k |X_k|² step / N`
/// with `c_k = 1` at DC and Nyquist and 2 elsewhere.
pub fn naive_power(x: &[f64], step: f64) -> Vec<f64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let ang = -2.0 * PI * (k * t % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            let c = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                1.0
            } else {
                2.0
            };
            c * (re * re + im * im) * step / n as f64
        })
        .collect()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Amplitude of the best least-squares fit `c + p cos(2πft) + q sin(2πft)`.
pub fn fitted_amplitude(times: &[f64], values: &[f64], f: f64) -> f64 {
    let basis = |t: f64| [1.0, (2.0 * PI * f * t).cos(), (2.0 * PI * f * t).sin()];
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut atb = vec![0.0; 3];
    for (&t, &v) in times.iter().zip(values) {
        let b = basis(t);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
            atb[i] += b[i] * v;
        }
    }
    let c = dense_solve(ata, atb);
    c[1].hypot(c[2])
}

/// Frequency response `|Σ_j w_j e^{-i 2π f j step}|` of weights at lags `-K..=K`.
pub fn response(weights: &[f64], f: f64, step: f64) -> f64 {
    let k = (weights.len() / 2) as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, w) in weights.iter().enumerate() {
        let ang = -2.0 * PI * f * (i as f64 - k) * step;
        re += w * ang.cos();
        im += w * ang.sin();
    }
    re.hypot(im)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
