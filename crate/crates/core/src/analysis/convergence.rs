use crate::analysis::euclid;
use crate::model::SystemState;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// First `t` at which the trailing `window` displacements, ending with
    /// the move `t-1 → t`, were all within tolerance.
    pub first_step: Option<u64>,
    /// Final state, the candidate limit.
    pub limit: SystemState,
}

/// Displacement at step `t` is `max_i ‖x_i(t) − x_i(t−1)‖`.
pub fn detect_convergence(states: &[SystemState], tol: f64, window: usize) -> ConvergenceReport {
    assert!(window >= 1, "window must be at least 1");
    assert!(!states.is_empty(), "no states");
    let mut run = 0usize;
    let mut first = None;
    for pair in states.windows(2) {
        let moved = pair[0]
            .rows()
            .zip(pair[1].rows())
            .map(|(a, b)| euclid(a, b))
            .fold(0.0, f64::max);
        run = if moved <= tol { run + 1 } else { 0 };
        if run >= window {
            first = Some(pair[1].t());
            break;
        }
    }
    ConvergenceReport {
        converged: first.is_some(),
        first_step: first,
        limit: states.last().cloned().expect("nonempty"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_series(xs: impl IntoIterator<Item = f64>) -> Vec<SystemState> {
        xs.into_iter()
            .enumerate()
            .map(|(t, x)| SystemState::from_rows(t as u64, &[vec![x]]).unwrap())
            .collect()
    }

    #[test]
    fn constant_converges_at_window() {
        let s = scalar_series(std::iter::repeat_n(0.3, 20));
        let r = detect_convergence(&s, 1e-12, 5);
        assert_eq!(r.first_step, Some(5));
    }

    #[test]
    fn halving_sequence() {
        // displacement at t is 0.5^t; first t with 0.5^t <= 1e-9 is 30
        let s = scalar_series((0..100).map(|t| 0.5f64.powi(t)));
        let r = detect_convergence(&s, 1e-9, 1);
        assert_eq!(r.first_step, Some(30));
        assert!(r.converged);
    }

    #[test]
    fn two_cycle_never_converges() {
        let s = scalar_series((0..100).map(|t| if t % 2 == 0 { 0.0 } else { 1e-3 }));
        let r = detect_convergence(&s, 1e-6, 1);
        assert!(!r.converged);
        assert_eq!(r.first_step, None);
        assert_eq!(r.limit.t(), 99);
    }
}
