//! Deterministic reductions.
//!
//! All floating-point reductions in the solver go through pairwise (tree)
//! summation with a fixed recursion structure and fixed parallel chunk
//! boundaries. Results are therefore independent of the number of worker
//! threads and reproducible bit-for-bit across runs, and the accumulated
//! rounding stays near 1e-15 relative even for multi-million-element arrays.

use rayon::prelude::*;

/// Below this length a plain in-order loop is used as the recursion base.
const SEQ_BASE: usize = 64;

/// Chunk size for parallel partials. Chunk boundaries depend only on the
/// array length, never on the thread count; below this size the fork-join
/// overhead outweighs the work.
const PAR_CHUNK: usize = 65_536;

fn sum_seq(v: &[f64]) -> f64 {
    if v.len() <= SEQ_BASE {
        let mut acc = 0.0;
        for &x in v {
            acc += x;
        }
        acc
    } else {
        let mid = v.len() / 2;
        sum_seq(&v[..mid]) + sum_seq(&v[mid..])
    }
}

fn dot_seq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= SEQ_BASE {
        let mut acc = 0.0;
        for (&x, &y) in a.iter().zip(b) {
            acc += x * y;
        }
        acc
    } else {
        let mid = a.len() / 2;
        dot_seq(&a[..mid], &b[..mid]) + dot_seq(&a[mid..], &b[mid..])
    }
}

/// Pairwise sum of a slice.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= PAR_CHUNK {
        sum_seq(v)
    } else {
        let partials: Vec<f64> = v.par_chunks(PAR_CHUNK).map(sum_seq).collect();
        sum_seq(&partials)
    }
}

/// Pairwise inner product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    if a.len() <= PAR_CHUNK {
        dot_seq(a, b)
    } else {
        let partials: Vec<f64> = a
            .par_chunks(PAR_CHUNK)
            .zip(b.par_chunks(PAR_CHUNK))
            .map(|(ca, cb)| dot_seq(ca, cb))
            .collect();
        sum_seq(&partials)
    }
}

/// Pairwise sum of `f(i)` for `i in 0..len` without materializing the values.
pub fn pairwise_sum_by<F: Fn(usize) -> f64 + Sync>(len: usize, f: F) -> f64 {
    fn seq<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= SEQ_BASE {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            seq(lo, mid, f) + seq(mid, hi, f)
        }
    }
    if len <= PAR_CHUNK {
        seq(0, len, &f)
    } else {
        let n_chunks = len.div_ceil(PAR_CHUNK);
        let partials: Vec<f64> = (0..n_chunks)
            .into_par_iter()
            .map(|ci| {
                let lo = ci * PAR_CHUNK;
                let hi = (lo + PAR_CHUNK).min(len);
                seq(lo, hi, &f)
            })
            .collect();
        sum_seq(&partials)
    }
}

/// Maximum of `f(i)` over `i in 0..len`; `f64::NEG_INFINITY` for empty input.
pub fn max_by<F: Fn(usize) -> f64 + Sync>(len: usize, f: F) -> f64 {
    if len <= PAR_CHUNK {
        (0..len).map(&f).fold(f64::NEG_INFINITY, f64::max)
    } else {
        let n_chunks = len.div_ceil(PAR_CHUNK);
        (0..n_chunks)
            .into_par_iter()
            .map(|ci| {
                let lo = ci * PAR_CHUNK;
                let hi = (lo + PAR_CHUNK).min(len);
                (lo..hi).map(&f).fold(f64::NEG_INFINITY, f64::max)
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
}

/// Runs `f(line_index, line)` over consecutive `line_len` chunks of `dst`.
/// Small arrays run sequentially; large ones split into blocks of whole
/// lines. Output is elementwise, so the split never affects the bits.
pub(crate) fn for_each_line_mut<F>(dst: &mut [f64], line_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    const PAR_MIN: usize = 1 << 16;
    const BLOCK_ELEMS: usize = 1 << 14;
    if dst.len() < PAR_MIN {
        for (line, chunk) in dst.chunks_mut(line_len).enumerate() {
            f(line, chunk);
        }
    } else {
        let lines_per = (BLOCK_ELEMS / line_len).max(1);
        dst.par_chunks_mut(line_len * lines_per)
            .enumerate()
            .for_each(|(block, chunk)| {
                for (off, line) in chunk.chunks_mut(line_len).enumerate() {
                    f(block * lines_per + off, line);
                }
            });
    }
}

/// Minimum and maximum of a slice in one pass.
pub fn min_max(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    #[test]
    fn pairwise_matches_naive_within_tolerance() {
        let mut s = 42u64;
        let v: Vec<f64> = (0..100_000).map(|_| splitmix(&mut s)).collect();
        let naive: f64 = v.iter().sum();
        let abs: f64 = v.iter().map(|x| x.abs()).sum();
        let pw = pairwise_sum(&v);
        assert!((pw - naive).abs() <= 1e-13 * abs.max(1.0));
    }

    #[test]
    fn sum_by_agrees_with_slice_sum() {
        let mut s = 7u64;
        let v: Vec<f64> = (0..20_000).map(|_| splitmix(&mut s)).collect();
        let a = pairwise_sum(&v);
        let b = pairwise_sum_by(v.len(), |i| v[i]);
        assert_eq!(a, b);
    }

    #[test]
    fn dot_simple() {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0, 6.0];
        assert_eq!(dot(&a, &b), 32.0);
    }

    #[test]
    fn min_max_basic() {
        let (lo, hi) = min_max(&[3.0, -1.0, 2.0]);
        assert_eq!((lo, hi), (-1.0, 3.0));
    }
}
