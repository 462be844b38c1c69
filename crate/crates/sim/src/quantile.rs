//! Empirical quantile functions and the sup-distance over a grid of levels.

/// Levels `0.900, 0.901, …, 0.990`.
pub fn kqs_grid() -> Vec<f64> {
    (900..=990).map(|k| k as f64 / 1000.0).collect()
}

/// Order-statistic quantile `x_(⌈n·p⌉)` of a sorted sample.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let k = (sorted.len() as f64 * p).ceil() as usize;
    sorted[k.clamp(1, sorted.len()) - 1]
}

/// Linearly interpolated quantile (`x_(1 + (n−1)p)`), for sensitivity checks.
pub fn interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sort_sample(mut x: Vec<f64>) -> Vec<f64> {
    x.sort_by(f64::total_cmp);
    x
}

/// `sup_p |f(p) − g(p)|` over `grid`.
pub fn sup_distance(grid: &[f64], f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
    grid.iter().map(|&p| (f(p) - g(p)).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_91_levels() {
        let g = kqs_grid();
        assert_eq!(g.len(), 91);
        assert_eq!(g[0], 0.9);
        assert_eq!(g[90], 0.99);
    }

    #[test]
    fn order_statistic_quantile() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(empirical_quantile(&x, 0.2), 1.0);
        assert_eq!(empirical_quantile(&x, 0.21), 2.0);
        assert_eq!(empirical_quantile(&x, 1.0), 5.0);
        assert_eq!(empirical_quantile(&x, 0.0), 1.0);
        assert_eq!(interpolated_quantile(&x, 0.5), 3.0);
        assert_eq!(interpolated_quantile(&x, 0.625), 3.5);
    }

    #[test]
    fn quantile_function_is_nondecreasing_and_right_continuous() {
        let x = sort_sample(vec![3.0, -1.0, 2.5, 7.0, 0.0, 2.5, 9.0]);
        let mut last = f64::NEG_INFINITY;
        for k in 0..=1000 {
            let q = empirical_quantile(&x, k as f64 / 1000.0);
            assert!(q >= last);
            last = q;
        }
        // Jumps happen just after k/n.
        assert_eq!(empirical_quantile(&x, 2.0 / 7.0), x[1]);
        assert_eq!(empirical_quantile(&x, 2.0 / 7.0 + 1e-9), x[2]);
    }

    #[test]
    fn single_level_grid() {
        let d = sup_distance(&[0.95], |p| p * 2.0, |p| p);
        assert_eq!(d, 0.95);
    }
}
