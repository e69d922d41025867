//! Fast Fourier transform on `(Z/p)^k` (the Chrestenson / Vilenkin transform).
//!
//! Data of length `p^k` is indexed by `k` base-`p` digits, most significant
//! first. The transform computes
//! `out[x] = sum_a data[a] * exp(sign * 2 pi i <a, x> / p)`
//! one digit axis at a time, `O(k p^(k+1))` in total.

use num_complex::Complex64;

use crate::characters::root_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// Kernel `exp(+2 pi i <a, x> / p)`.
    Positive,
    /// Kernel `exp(-2 pi i <a, x> / p)`.
    Negative,
}

/// Transforms `data` in place. Panics if `data.len() != p^axes`.
pub fn transform(data: &mut [Complex64], p: u32, axes: usize, sign: Sign) {
    let p_us = p as usize;
    assert_eq!(data.len(), p_us.pow(axes as u32), "length must be p^axes");
    let roots = root_table(p);
    let kernel: Vec<Complex64> = (0..p_us * p_us)
        .map(|jx| {
            let e = (jx / p_us) * (jx % p_us) % p_us;
            match sign {
                Sign::Positive => roots[e],
                Sign::Negative => roots[(p_us - e) % p_us],
            }
        })
        .collect();
    let mut gathered = vec![Complex64::default(); p_us];
    for axis in 0..axes {
        let stride = p_us.pow((axes - 1 - axis) as u32);
        let block = stride * p_us;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for (j, g) in gathered.iter_mut().enumerate() {
                    *g = data[base + off + j * stride];
                }
                if p_us == 2 {
                    data[base + off] = gathered[0] + gathered[1];
                    data[base + off + stride] = gathered[0] - gathered[1];
                    continue;
                }
                for x in 0..p_us {
                    let row = &kernel[x * p_us..(x + 1) * p_us];
                    data[base + off + x * stride] =
                        gathered.iter().zip(row).map(|(g, k)| g * k).sum();
                }
            }
        }
    }
}
