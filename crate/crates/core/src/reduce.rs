//! Reductions over the discrete domain: integrals and norms.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::sum::{dot, max_by, pairwise_sum, pairwise_sum_by};

/// Discrete integral: `cell_volume * sum(values)` by pairwise summation.
/// Exactly linear in the field values up to the fixed summation roundoff.
pub fn integrate(f: &ScalarField) -> Result<f64> {
    f.check_finite("integrate")?;
    Ok(integrate_raw(f.grid(), f.values()))
}

pub(crate) fn integrate_raw(grid: &GridSpec, values: &[f64]) -> f64 {
    grid.cell_volume() * pairwise_sum(values)
}

/// `integral(f * g)` over the cells.
pub fn integrate_product(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(CoreError::GridMismatch {
            context: "integrate_product on different grids".into(),
        });
    }
    f.check_finite("integrate_product")?;
    g.check_finite("integrate_product")?;
    Ok(f.grid().cell_volume() * dot(f.values(), g.values()))
}

/// The Lp norm `(cell_volume * sum |f|^p)^(1/p)`, or `max |f|` for p = inf.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    f.check_finite("lp_norm")?;
    if p.is_infinite() && p > 0.0 {
        return Ok(linf_raw(f.values()));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(CoreError::InvalidExponent { p });
    }
    let vol = f.grid().cell_volume();
    let values = f.values();
    let total = if p == 1.0 {
        pairwise_sum_by(values.len(), |i| values[i].abs())
    } else if p == 2.0 {
        pairwise_sum_by(values.len(), |i| values[i] * values[i])
    } else {
        pairwise_sum_by(values.len(), |i| values[i].abs().powf(p))
    };
    Ok((vol * total).powf(1.0 / p))
}

pub(crate) fn linf_raw(values: &[f64]) -> f64 {
    max_by(values.len(), |i| values[i].abs())
}

/// Max over faces of the absolute normal difference quotient: the discrete
/// `|grad f|` in the max norm. Boundary faces contribute the zero-flux value 0.
pub fn grad_linf(f: &ScalarField) -> Result<f64> {
    f.check_finite("grad_linf")?;
    Ok(grad_linf_raw(f.grid(), f.values()))
}

pub(crate) fn grad_linf_raw(grid: &GridSpec, values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..grid.dim() {
        let n = grid.cells(a);
        let s = grid.stride(a);
        let inv_h = 1.0 / grid.spacing(a);
        let m = max_by(grid.cell_count(), |idx| {
            let ia = (idx / s) % n;
            if ia + 1 < n {
                ((values[idx + s] - values[idx]) * inv_h).abs()
            } else {
                0.0
            }
        });
        worst = worst.max(m);
    }
    worst
}

/// Discrete Dirichlet energy `integral(|grad f|^2)` as the sum over interior
/// faces of `(df/h)^2 * cell_volume`. This is exactly `<-lap f, f>` for the
/// reflected Neumann Laplacian, which is the identity the gradient-decay
/// monitor relies on.
pub fn integrate_grad_sq(f: &ScalarField) -> Result<f64> {
    f.check_finite("integrate_grad_sq")?;
    Ok(integrate_grad_sq_raw(f.grid(), f.values()))
}

pub(crate) fn integrate_grad_sq_raw(grid: &GridSpec, values: &[f64]) -> f64 {
    let vol = grid.cell_volume();
    let mut total = 0.0;
    for a in 0..grid.dim() {
        let n = grid.cells(a);
        let s = grid.stride(a);
        let inv_h = 1.0 / grid.spacing(a);
        total += pairwise_sum_by(grid.cell_count(), |idx| {
            let ia = (idx / s) % n;
            if ia + 1 < n {
                let d = (values[idx + s] - values[idx]) * inv_h;
                d * d
            } else {
                0.0
            }
        });
    }
    vol * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_field(grid: GridSpec, seed: u64) -> ScalarField {
        let mut s = seed;
        let values: Vec<f64> = (0..grid.cell_count()).map(|_| splitmix(&mut s) - 0.5).collect();
        ScalarField::from_values(grid, values).unwrap()
    }

    #[test]
    fn integrate_constant_is_value_times_volume() {
        let g = GridSpec::unit_box(3, 8).unwrap();
        let f = ScalarField::constant(g, 5.0);
        assert!((integrate(&f).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(integrate(&ScalarField::zeros(g)).unwrap(), 0.0);
    }

    #[test]
    fn integrate_is_linear() {
        let g = GridSpec::unit_box(3, 16).unwrap();
        let f = random_field(g, 1);
        let h = random_field(g, 2);
        let mut sum = f.clone();
        for (a, b) in sum.values_mut().iter_mut().zip(h.values()) {
            *a += *b;
        }
        let lhs = integrate(&sum).unwrap();
        let rhs = integrate(&f).unwrap() + integrate(&h).unwrap();
        let scale = integrate(&f).unwrap().abs() + integrate(&h).unwrap().abs() + 1.0;
        assert!((lhs - rhs).abs() <= 1e-13 * scale);
    }

    #[test]
    fn integrate_is_monotone() {
        let g = GridSpec::unit_box(2, 16).unwrap();
        let f = random_field(g, 3);
        let mut bigger = f.clone();
        for v in bigger.values_mut() {
            *v += 0.25;
        }
        assert!(integrate(&f).unwrap() <= integrate(&bigger).unwrap());
    }

    #[test]
    fn lp_norm_examples() {
        let g = GridSpec::unit_box(3, 8).unwrap();
        let f = ScalarField::constant(g, 3.0);
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 3.0);
        let f2 = ScalarField::constant(g, 2.0);
        assert!((lp_norm(&f2, 2.0).unwrap() - 2.0).abs() < 1e-14);

        // indicator of half the cells on the unit box, p = 1 -> 0.5
        let mut ind = ScalarField::zeros(g);
        let half = g.cell_count() / 2;
        for v in ind.values_mut().iter_mut().take(half) {
            *v = 1.0;
        }
        assert!((lp_norm(&ind, 1.0).unwrap() - 0.5).abs() < 1e-14);

        assert!(lp_norm(&f, 0.5).is_err());
        assert!(lp_norm(&f, f64::NAN).is_err());
    }

    #[test]
    fn lp_norm_approaches_linf() {
        // random signs with a broad plateau at the peak magnitude; the
        // p-norm of a field with a vanishing plateau approaches the sup only
        // like (plateau volume)^(1/p)
        let g = GridSpec::unit_box(2, 16).unwrap();
        let mut f = random_field(g, 4);
        for (i, v) in f.values_mut().iter_mut().enumerate() {
            let sign = if *v >= 0.0 { 1.0 } else { -1.0 };
            *v = sign * if i % 3 == 0 { 0.3 + 0.2 * v.abs() } else { 1.0 };
        }
        let inf = lp_norm(&f, f64::INFINITY).unwrap();
        assert_eq!(inf, 1.0);
        let mut prev = 0.0;
        for p in [2.0, 8.0, 32.0, 64.0] {
            let lp = lp_norm(&f, p).unwrap();
            assert!(lp >= prev && lp <= inf + 1e-12, "p-norms must increase to the sup");
            prev = lp;
        }
        let p64 = lp_norm(&f, 64.0).unwrap();
        assert!((p64 - inf).abs() / inf < 0.01, "p64 = {p64}, inf = {inf}");
    }

    #[test]
    fn grad_linf_constant_and_linear() {
        let g = GridSpec::unit_box(1, 64).unwrap();
        assert_eq!(grad_linf(&ScalarField::constant(g, 7.0)).unwrap(), 0.0);
        let f = ScalarField::from_fn(g, |x| x[0]);
        assert_eq!(grad_linf(&f).unwrap(), 1.0);
    }

    #[test]
    fn grad_linf_sine_second_order() {
        // f = sin(2 pi x): max gradient 2 pi, face-centered differences are
        // second-order accurate, so the error shrinks ~4x per refinement.
        let exact = 2.0 * PI;
        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let g = GridSpec::unit_box(1, n).unwrap();
            let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
            errs.push((grad_linf(&f).unwrap() - exact).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (2.5..6.0).contains(&ratio),
            "expected ~4x error reduction, got {ratio} ({errs:?})"
        );
    }

    #[test]
    fn grad_sq_matches_hand_sum_1d() {
        let g = GridSpec::unit_box(1, 4).unwrap();
        let f = ScalarField::from_values(g, vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        // faces: (1-0)/h, 0, (3-1)/h with h = 1/4; vol = 1/4
        let expect = 0.25 * (16.0 + 0.0 + 64.0);
        assert!((integrate_grad_sq(&f).unwrap() - expect).abs() < 1e-12);
    }
}
