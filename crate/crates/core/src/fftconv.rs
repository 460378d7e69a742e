//! Zero-padded linear convolution via FFT (never circular, so densities on
//! grids pick up no wrap-around mass).

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Linear convolution of two real sequences; output length n + m - 1.
pub fn convolve_1d(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);

    let mut fa: Vec<Complex<f64>> = a
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut fb: Vec<Complex<f64>> = b
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();

    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft.process(&mut fa);

    let scale = 1.0 / size as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Linear convolution of two real 2-d arrays (row-major, dims (rows, cols)).
pub fn convolve_2d(a: &[f64], adim: (usize, usize), b: &[f64], bdim: (usize, usize)) -> Vec<f64> {
    let rows = adim.0 + bdim.0 - 1;
    let cols = adim.1 + bdim.1 - 1;
    let (pr, pc) = (rows.next_power_of_two(), cols.next_power_of_two());

    let embed = |src: &[f64], dim: (usize, usize)| -> Vec<Complex<f64>> {
        let mut out = vec![Complex::new(0.0, 0.0); pr * pc];
        for r in 0..dim.0 {
            for c in 0..dim.1 {
                out[r * pc + c] = Complex::new(src[r * dim.1 + c], 0.0);
            }
        }
        out
    };
    let mut fa = embed(a, adim);
    let mut fb = embed(b, bdim);

    let mut planner = FftPlanner::<f64>::new();
    fft2(&mut planner, &mut fa, pr, pc, false);
    fft2(&mut planner, &mut fb, pr, pc, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft2(&mut planner, &mut fa, pr, pc, true);

    let scale = 1.0 / (pr * pc) as f64;
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] = fa[r * pc + c].re * scale;
        }
    }
    out
}

fn fft2(
    planner: &mut FftPlanner<f64>,
    data: &mut [Complex<f64>],
    rows: usize,
    cols: usize,
    inverse: bool,
) {
    let row_fft = if inverse {
        planner.plan_fft_inverse(cols)
    } else {
        planner.plan_fft_forward(cols)
    };
    for r in 0..rows {
        row_fft.process(&mut data[r * cols..(r + 1) * cols]);
    }
    let col_fft = if inverse {
        planner.plan_fft_inverse(rows)
    } else {
        planner.plan_fft_forward(rows)
    };
    let mut col = vec![Complex::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = data[r * cols + c];
        }
        col_fft.process(&mut col);
        for r in 0..rows {
            data[r * cols + c] = col[r];
        }
    }
}
