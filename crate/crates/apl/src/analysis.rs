//! Gradient-shape analysis for the loss family.
//!
//! Closed-form gradient curves for both classes, the location `p*` of the
//! negative-class gradient peak (predictions above it behave like suspected
//! mislabels), the coefficient-interaction difference series, and tabular
//! curve data backing the three standard diagnostic figures.

use crate::error::{Error, Result};
use crate::loss::{self, AplParams};

/// Stationary point of the negative-class logit gradient.
///
/// `residual` is the numerically differentiated slope of the gradient at
/// `p_star`; `bracket` is the scan interval whose endpoints straddled the
/// sign change.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub p_star: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
}

/// Uniform evaluation grid. For the probability-axis figures `lo` and `hi`
/// must lie strictly inside (0, 1); for the coefficient figure only
/// `points` is used (as the number of series terms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> GridSpec {
        GridSpec {
            lo: 0.001,
            hi: 0.999,
            points: 512,
        }
    }
}

/// Which diagnostic figure to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Positive-class series coefficients against the exponent of their
    /// `(1-p)^k` basis.
    PolyCoeffs,
    /// Negative-class loss curves against p.
    LnegCurves,
    /// Negative-class logit gradient curves against p.
    LnegGradients,
}

/// One tabulated curve: `values[i]` sampled at `grid[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub series_id: String,
    pub params_used: AplParams,
}

/// `-d(L+)/dp`: the (positive) gradient magnitude pulling a positive-class
/// probability upward. In closed form for `g+ = 0` this is
/// `1/p + (a1 - 1) + (2 a2 - 1)(1 - p)`, equivalently
/// `a1 + 2 a2 (1-p) + (1-p)^2 / p`; the general case multiplies in the
/// focusing factor and its product-rule term.
pub fn positive_gradient(p: f64, params: &AplParams) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
    -loss::pos_entry_dloss_dp(p, params)
}

/// `d(L-)/d(logit)` for a negative-class entry:
///
/// ```text
/// p (1-p) s^g- [ 1/(1-s) - g- ln(1-s)/s + (b1 - 1)(g- + 1) ]
/// ```
///
/// with `s = max(p - p_th, 0)`; exactly zero for `p <= p_th`.
pub fn negative_gradient_wrt_logit(p: f64, params: &AplParams) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
    loss::neg_entry_dloss_dlogit(p, params)
}

const SCAN_POINTS: usize = 10_000;
const SCAN_DELTA: f64 = 1e-6;
const DERIV_H: f64 = 1e-6;
const BISECT_TOL: f64 = 1e-10;

/// Central-difference slope of the negative-class logit gradient in p.
fn grad_slope(p: f64, params: &AplParams) -> f64 {
    let a = negative_gradient_wrt_logit(p + DERIV_H, params);
    let b = negative_gradient_wrt_logit(p - DERIV_H, params);
    (a - b) / (2.0 * DERIV_H)
}

/// Finds `p*`, the probability at which the negative-class logit gradient
/// peaks.
///
/// The slope of the gradient is scanned on a 10,000-point uniform grid over
/// `(p_th, 1)` (inset by a small margin so the difference stencil stays in
/// range). Every sign change is bracketed; the bracket with the largest p
/// is refined by bisection to an interval below 1e-10. Monotone gradients,
/// e.g. the plain cross-entropy case, yield [`Error::NoCriticalPoint`].
pub fn find_pstar(params: &AplParams) -> Result<CriticalPoint> {
    let lo = params.p_th() + SCAN_DELTA + DERIV_H;
    let hi = 1.0 - SCAN_DELTA - DERIV_H;
    if lo >= hi {
        return Err(Error::NoCriticalPoint);
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut bracket: Option<(f64, f64)> = None;
    let mut prev_x = lo;
    let mut prev_d = grad_slope(lo, params);
    for i in 1..SCAN_POINTS {
        let x = lo + step * i as f64;
        let d = grad_slope(x, params);
        if prev_d == 0.0 || (prev_d < 0.0) != (d < 0.0) {
            bracket = Some((prev_x, x));
        }
        prev_x = x;
        prev_d = d;
    }
    let (mut a, mut b) = bracket.ok_or(Error::NoCriticalPoint)?;
    let bracket0 = (a, b);
    let mut da = grad_slope(a, params);
    while b - a > BISECT_TOL {
        let mid = 0.5 * (a + b);
        let dm = grad_slope(mid, params);
        if dm == 0.0 || ((da < 0.0) != (dm < 0.0)) {
            b = mid;
        } else {
            a = mid;
            da = dm;
        }
    }
    let p_star = 0.5 * (a + b);
    Ok(CriticalPoint {
        p_star,
        residual: grad_slope(p_star, params),
        bracket: bracket0,
    })
}

/// Coefficient of `(1-p)^(i+1)` in the difference between raising every
/// positive-class exponent by one and dropping the first-order term:
/// `1/i - 1/(i+1) = 1/(i (i+1))` for `i >= 1`.
pub fn interaction_term_coefficient(i: usize) -> f64 {
    assert!(i >= 1, "series terms start at 1");
    1.0 / (i as f64 * (i as f64 + 1.0))
}

/// Truncated sum of the difference series
/// `sum_{i=1..M} (1-p)^(i+1) / (i (i+1))`, which converges to
/// `p ln p + 1 - p`: the extra loss incurred by raising all exponents
/// rather than adjusting the quadratic coefficient. Nonnegative on (0, 1]
/// and vanishing at p = 1.
pub fn interaction_difference(p: f64, trunc_order: usize) -> f64 {
    debug_assert!(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
    debug_assert!(trunc_order >= 2, "trunc_order must be at least 2");
    let q = 1.0 - p;
    let mut pow = q * q;
    let mut sum = 0.0;
    for i in 1..=trunc_order {
        sum += interaction_term_coefficient(i) * pow;
        pow *= q;
    }
    sum
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Tabulates the data behind one diagnostic figure for each parameter set.
///
/// For [`FigureId::PolyCoeffs`] the grid column holds the exponent
/// `m + g+` of each `(1-p)` basis and the value column its coefficient;
/// `grid.points` is the number of leading terms emitted. The other two
/// figures sample the probability axis.
pub fn emit_curve(
    figure: FigureId,
    params_list: &[AplParams],
    grid: &GridSpec,
) -> Result<Vec<CurveTable>> {
    if params_list.is_empty() {
        return Err(Error::InvalidSpec("at least one parameter set".into()));
    }
    if grid.points < 1 {
        return Err(Error::InvalidSpec("grid needs at least one point".into()));
    }
    if matches!(figure, FigureId::LnegCurves | FigureId::LnegGradients) {
        if !(grid.lo > 0.0 && grid.lo < grid.hi && grid.hi < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "probability grid must satisfy 0 < lo < hi < 1, got [{}, {}]",
                grid.lo, grid.hi
            )));
        }
        if grid.points < 2 {
            return Err(Error::InvalidSpec("probability grid needs >= 2 points".into()));
        }
    }
    let mut tables = Vec::with_capacity(params_list.len());
    for params in params_list {
        let (xs, values) = match figure {
            FigureId::PolyCoeffs => {
                let xs: Vec<f64> = (1..=grid.points)
                    .map(|m| m as f64 + params.gamma_plus())
                    .collect();
                let vs: Vec<f64> = (1..=grid.points).map(|m| params.pos_coefficient(m)).collect();
                (xs, vs)
            }
            FigureId::LnegCurves => {
                let xs = linspace(grid.lo, grid.hi, grid.points);
                let vs = xs.iter().map(|&p| loss::neg_entry_loss(p, params)).collect();
                (xs, vs)
            }
            FigureId::LnegGradients => {
                let xs = linspace(grid.lo, grid.hi, grid.points);
                let vs = xs
                    .iter()
                    .map(|&p| negative_gradient_wrt_logit(p, params))
                    .collect();
                (xs, vs)
            }
        };
        tables.push(CurveTable {
            grid: xs,
            values,
            series_id: params.label(),
            params_used: *params,
        });
    }
    Ok(tables)
}

/// Renders curve tables in the long CSV layout `p,value,series_id` with
/// 9 significant digits and LF line endings.
pub fn curve_tables_to_csv(tables: &[CurveTable]) -> String {
    let mut out = String::from("p,value,series_id\n");
    for t in tables {
        for (x, v) in t.grid.iter().zip(&t.values) {
            out.push_str(&crate::fmt::sig9(*x));
            out.push(',');
            out.push_str(&crate::fmt::sig9(*v));
            out.push(',');
            out.push_str(&t.series_id);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_gradient_bce_is_inverse_p() {
        let params = AplParams::bce();
        assert!((positive_gradient(0.5, &params) - 2.0).abs() < 1e-12);
        for i in 1..100 {
            let p = i as f64 / 100.0;
            assert!((positive_gradient(p, &params) - 1.0 / p).abs() <= 1e-9);
        }
    }

    #[test]
    fn positive_gradient_constant_term_near_one() {
        let params = AplParams::new(3.0, 0.5, 1.0, 0.0, 0.0, 0.0).unwrap();
        let g = positive_gradient(1.0 - 1e-9, &params);
        assert!((g - 3.0).abs() < 1e-8);
    }

    #[test]
    fn positive_gradient_three_term_sum() {
        let params = AplParams::new(1.0, 2.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((positive_gradient(0.5, &params) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn negative_gradient_bce_is_p() {
        let params = AplParams::bce();
        assert!((negative_gradient_wrt_logit(0.7, &params) - 0.7).abs() < 1e-12);
        for i in 1..100 {
            let p = i as f64 / 100.0;
            assert!((negative_gradient_wrt_logit(p, &params) - p).abs() <= 1e-9);
        }
    }

    #[test]
    fn negative_gradient_dead_zone() {
        let params = AplParams::new(1.0, 0.5, 1.0, 0.0, 1.8, 0.3).unwrap();
        assert_eq!(negative_gradient_wrt_logit(0.2, &params), 0.0);
        assert_eq!(negative_gradient_wrt_logit(0.3, &params), 0.0);
    }

    // Cross-check of the analytic bracket against central differences of
    // the negative-class loss with respect to the logit.
    #[test]
    fn negative_gradient_matches_finite_differences() {
        let params = AplParams::new(1.0, 0.5, 1.0, 0.0, 1.8, 0.01).unwrap();
        let h = 1e-6;
        for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let l = (p / (1.0_f64 - p)).ln();
            let up = crate::loss::neg_entry_loss(crate::loss::sigmoid_scalar(l + h), &params);
            let dn = crate::loss::neg_entry_loss(crate::loss::sigmoid_scalar(l - h), &params);
            let fd = (up - dn) / (2.0 * h);
            let analytic = negative_gradient_wrt_logit(p, &params);
            assert!(analytic > 0.0);
            let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs());
            assert!(rel < 1e-4, "p={p}: analytic {analytic} fd {fd}");
        }
    }

    // The focused branch differentiates the product form; check it against
    // central differences of the positive-class loss in p.
    #[test]
    fn positive_gradient_matches_finite_differences_when_focused() {
        let h = 1e-6;
        for (gp, a1, a2) in [(1.0, 1.0, 0.5), (2.5, 2.0, 1.0), (4.0, 0.0, 3.0)] {
            let params = AplParams::new(a1, a2, 1.0, gp, 0.0, 0.0).unwrap();
            for p in [0.1, 0.35, 0.6, 0.85] {
                let up = crate::loss::pos_entry_loss(p + h, &params);
                let dn = crate::loss::pos_entry_loss(p - h, &params);
                let fd = -(up - dn) / (2.0 * h);
                let analytic = positive_gradient(p, &params);
                let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs());
                assert!(rel < 1e-6, "gp={gp} p={p}: analytic {analytic} fd {fd}");
            }
        }
    }

    #[test]
    fn pstar_absent_for_monotone_gradient() {
        assert!(matches!(
            find_pstar(&AplParams::bce()),
            Err(Error::NoCriticalPoint)
        ));
    }

    #[test]
    fn pstar_found_for_focused_loss() {
        let params = AplParams::new(1.0, 0.5, 1.0, 0.0, 1.8, 0.01).unwrap();
        let cp = find_pstar(&params).unwrap();
        assert!(cp.p_star > params.p_th() && cp.p_star < 1.0);
        assert!(cp.residual.abs() <= 1e-8, "residual {}", cp.residual);
        let (a, b) = cp.bracket;
        let da = grad_slope(a, &params);
        let db = grad_slope(b, &params);
        assert!(da == 0.0 || db == 0.0 || (da < 0.0) != (db < 0.0));
        // The returned point is the gradient peak.
        let at = negative_gradient_wrt_logit(cp.p_star, &params);
        assert!(at >= negative_gradient_wrt_logit(cp.p_star - 0.01, &params));
        assert!(at >= negative_gradient_wrt_logit(cp.p_star + 0.01, &params));
    }

    #[test]
    fn raising_beta1_moves_pstar_left() {
        let base = AplParams::new(1.0, 0.5, 1.0, 0.0, 1.8, 0.01).unwrap();
        let raised = AplParams::new(1.0, 0.5, 1.5, 0.0, 1.8, 0.01).unwrap();
        let p1 = find_pstar(&base).unwrap().p_star;
        let p15 = find_pstar(&raised).unwrap().p_star;
        assert!(p15 < p1, "p*(b1=1.5)={p15} vs p*(b1=1.0)={p1}");
    }

    #[test]
    fn interaction_series_coefficients() {
        assert_eq!(interaction_term_coefficient(1), 0.5);
        assert_eq!(interaction_term_coefficient(2), 1.0 / 6.0);
        assert_eq!(interaction_term_coefficient(3), 1.0 / 12.0);
    }

    #[test]
    fn interaction_difference_vanishes_at_one() {
        assert_eq!(interaction_difference(1.0, 100), 0.0);
    }

    // Oracle identity: the two log series collapse to p ln p + 1 - p.
    #[test]
    fn interaction_difference_matches_closed_form() {
        let v = interaction_difference(0.5, 200);
        let closed = 0.5 * 0.5_f64.ln() + 1.0 - 0.5;
        assert!((v - closed).abs() <= 1e-12);
        assert!((v - 0.153426).abs() < 1e-6);
        for i in 1..=9 {
            let p = i as f64 / 10.0;
            let closed = p * p.ln() + 1.0 - p;
            assert!((interaction_difference(p, 10_000) - closed).abs() <= 1e-9);
        }
    }

    #[test]
    fn interaction_difference_is_nonnegative() {
        for i in 1..=1000 {
            let p = i as f64 / 1000.0;
            assert!(interaction_difference(p, 500) >= 0.0);
        }
    }

    #[test]
    fn poly_coeffs_table_for_bce() {
        let tables = emit_curve(
            FigureId::PolyCoeffs,
            &[AplParams::bce()],
            &GridSpec {
                points: 6,
                ..GridSpec::default()
            },
        )
        .unwrap();
        assert_eq!(tables[0].grid, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(
            tables[0].values,
            vec![1.0, 0.5, 1.0 / 3.0, 0.25, 0.2, 1.0 / 6.0]
        );
    }

    #[test]
    fn lneg_curve_respects_dead_zone() {
        let params = AplParams::new(1.0, 0.5, 1.0, 0.0, 2.0, 0.2).unwrap();
        let tables = emit_curve(FigureId::LnegCurves, &[params], &GridSpec::default()).unwrap();
        for (p, v) in tables[0].grid.iter().zip(&tables[0].values) {
            if *p <= 0.2 {
                assert_eq!(*v, 0.0, "nonzero loss at p={p}");
            } else {
                assert!(*v > 0.0);
            }
        }
    }

    #[test]
    fn lneg_gradient_peak_shifts_left_with_beta1() {
        let base = AplParams::new(1.0, 0.5, 1.0, 0.0, 1.8, 0.01).unwrap();
        let raised = AplParams::new(1.0, 0.5, 1.5, 0.0, 1.8, 0.01).unwrap();
        let tables =
            emit_curve(FigureId::LnegGradients, &[base, raised], &GridSpec::default()).unwrap();
        let argmax = |t: &CurveTable| {
            let mut best = 0;
            for i in 1..t.values.len() {
                if t.values[i] > t.values[best] {
                    best = i;
                }
            }
            t.grid[best]
        };
        assert!(argmax(&tables[1]) < argmax(&tables[0]));
    }

    #[test]
    fn unknown_grid_is_rejected() {
        let bad = GridSpec {
            lo: 0.5,
            hi: 0.2,
            points: 10,
        };
        assert!(emit_curve(FigureId::LnegCurves, &[AplParams::bce()], &bad).is_err());
    }

    #[test]
    fn csv_layout() {
        let tables = emit_curve(
            FigureId::LnegCurves,
            &[AplParams::bce()],
            &GridSpec {
                lo: 0.25,
                hi: 0.75,
                points: 3,
            },
        )
        .unwrap();
        let csv = curve_tables_to_csv(&tables);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("p,value,series_id"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("2.50000000e-1,"));
        assert!(first.ends_with("a1=1;a2=0.5;b1=1;gp=0;gm=0;pth=0"));
        assert_eq!(first.split(',').count(), 3);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }
}
