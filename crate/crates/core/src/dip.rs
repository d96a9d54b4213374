//! Hartigan's dip statistic and its uniform-reference p-value.
//!
//! The dip is the largest deviation between the empirical CDF and the
//! closest unimodal CDF, found by alternately fitting the greatest convex
//! minorant left of a candidate modal interval and the least concave
//! majorant right of it until the interval stops shrinking. The value is
//! halved so it lies in `[1/(2n), 1/4]`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_BOOTSTRAP_BASE};

/// Dip of a sample; sorts a copy when needed.
pub fn dip_statistic(sample: &[f64]) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::param(format!(
            "dip statistic needs at least 2 values, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("dip sample contains non-finite values".into()));
    }
    if sample.windows(2).all(|w| w[0] <= w[1]) {
        Ok(dip_sorted(sample))
    } else {
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(dip_sorted(&sorted))
    }
}

/// Dip of an ascending, finite sample with `n >= 1`.
pub(crate) fn dip_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    // 1-based copy keeps the index arithmetic of the classic algorithm.
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    x.extend_from_slice(sorted);

    // Work in units of 1/n counts; `dip` is 2n times the final value.
    let mut dip = 1.0f64;
    if n < 2 || x[n] == x[1] {
        return dip / (2 * n) as f64;
    }

    // Predecessor links of the convex minorant.
    let mut mn = vec![0usize; n + 1];
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1 || (x[j] - x[mnj]) * ((mnj - mnmnj) as f64) < (x[mnj] - x[mnmnj]) * ((j - mnj) as f64) {
                break;
            }
            mn[j] = mnmnj;
        }
    }

    // Successor links of the concave majorant.
    let mut mj = vec![0usize; n + 1];
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n || (x[k] - x[mjk]) * (mjk as f64 - mjmjk as f64) < (x[mjk] - x[mjmjk]) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];
    let mut low = 1usize;
    let mut high = n;

    loop {
        // Minorant knots from `high` down to `low`.
        let mut ic = 1;
        gcm[1] = high;
        while gcm[ic] > low {
            let i = gcm[ic];
            ic += 1;
            gcm[ic] = mn[i];
        }
        let l_gcm = ic;

        // Majorant knots from `low` up to `high`.
        ic = 1;
        lcm[1] = low;
        while lcm[ic] < high {
            let i = lcm[ic];
            ic += 1;
            lcm[ic] = mj[i];
        }
        let l_lcm = ic;

        // Largest gap between minorant and majorant on [low, high].
        let mut ig = l_gcm;
        let mut ih = l_lcm;
        let mut ix = l_gcm - 1;
        let mut iv = 2;
        let mut d = 0.0f64;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcm_ix = gcm[ix];
                let lcm_iv = lcm[iv];
                if gcm_ix > lcm_iv {
                    let gcm_i1 = gcm[ix + 1];
                    let dx = (lcm_iv as f64 - gcm_i1 as f64 + 1.0)
                        - (x[lcm_iv] - x[gcm_i1]) * (gcm_ix - gcm_i1) as f64 / (x[gcm_ix] - x[gcm_i1]);
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcm_i1 = lcm[iv - 1];
                    let dx = (x[gcm_ix] - x[lcm_i1]) * (lcm_iv - lcm_i1) as f64 / (x[lcm_iv] - x[lcm_i1])
                        - (gcm_ix as f64 - lcm_i1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                if ix < 1 {
                    ix = 1;
                }
                if iv > l_lcm {
                    iv = l_lcm;
                }
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }

        if d < dip {
            break;
        }

        // Deviation of the ECDF from the minorant left of the modal interval.
        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let mut max_t = 1.0f64;
            let (j_hi, j_lo) = (gcm[j], gcm[j + 1]);
            if j_hi - j_lo > 1 && x[j_hi] != x[j_lo] {
                let slope = (j_hi - j_lo) as f64 / (x[j_hi] - x[j_lo]);
                for jj in j_lo..=j_hi {
                    let t = (jj - j_lo + 1) as f64 - (x[jj] - x[j_lo]) * slope;
                    max_t = max_t.max(t);
                }
            }
            dip_l = dip_l.max(max_t);
        }

        // Deviation from the majorant right of the modal interval.
        let mut dip_u = 0.0f64;
        for k in ih..l_lcm {
            let mut max_t = 1.0f64;
            let (k_lo, k_hi) = (lcm[k], lcm[k + 1]);
            if k_hi - k_lo > 1 && x[k_hi] != x[k_lo] {
                let slope = (k_hi - k_lo) as f64 / (x[k_hi] - x[k_lo]);
                for kk in k_lo..=k_hi {
                    let t = (x[kk] - x[k_lo]) * slope - (kk as f64 - k_lo as f64 - 1.0);
                    max_t = max_t.max(t);
                }
            }
            dip_u = dip_u.max(max_t);
        }

        dip = dip.max(dip_l.max(dip_u));

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }

    dip / (2 * n) as f64
}

/// Fraction of `n_boot` uniform samples of the same size whose dip is at
/// least the observed one. Replicate `b` draws from its own seeded stream.
pub fn dip_p_value(sample: &[f64], n_boot: usize, seed: u64) -> Result<f64> {
    if n_boot == 0 {
        return Err(Error::param("n_boot must be positive"));
    }
    let observed = dip_statistic(sample)?;
    Ok(p_value_for(observed, sample.len(), n_boot, seed))
}

pub(crate) fn p_value_for(observed: f64, n: usize, n_boot: usize, seed: u64) -> f64 {
    let exceed = (0..n_boot)
        .into_par_iter()
        .filter(|&b| {
            let mut rng = stream_rng(seed, STREAM_BOOTSTRAP_BASE + b as u64);
            let mut draw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            draw.sort_by(f64::total_cmp);
            dip_sorted(&draw) >= observed
        })
        .count();
    exceed as f64 / n_boot as f64
}
