//! Explicit finite-state chain over failure-burst depth, with a direct
//! steady-state solve used as an independent numerical oracle for the
//! closed-form metrics in [`crate::model`].

use crate::error::{Error, Result};
use crate::model::NetworkParams;

/// Largest supported chain dimension for the dense representation.
const MAX_DIM: usize = 1 << 17;

/// The per-cycle chain tracking how deep the current loss burst is.
///
/// State indexing is fixed: index 0 is the network-up state, indices
/// `1..=n_sv` count consecutive lost cycles so far, and the last index is
/// the application-down state. The transition matrix is stored dense,
/// row-major, rows summing to one:
///
/// * row 0: stays with `1 - r_u`, moves to depth 1 with `r_u`;
/// * depth rows: back to up with `r_d`, one step deeper with `1 - r_d`;
/// * last row: back to up with `r_d`, stays down with `1 - r_d`.
#[derive(Clone, Debug)]
pub struct FsmcModel {
    n_sv: u32,
    params: NetworkParams,
    matrix: Vec<f64>,
}

impl FsmcModel {
    /// Build the `(n_sv + 2)`-state chain for the given channel parameters.
    /// `n_sv = 0` yields the plain two-state up/down chain.
    pub fn build(params: NetworkParams, n_sv: u32) -> Result<FsmcModel> {
        let dim = (n_sv as usize)
            .checked_add(2)
            .filter(|d| *d <= MAX_DIM)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "survival depth {n_sv} exceeds the supported dense chain size"
                ))
            })?;
        let r_u = params.up_exit_rate();
        let r_d = params.down_exit_rate();
        let mut matrix = vec![0.0; dim * dim];
        matrix[0] = 1.0 - r_u;
        matrix[1] = r_u;
        for i in 1..dim - 1 {
            matrix[i * dim] = r_d;
            matrix[i * dim + i + 1] = 1.0 - r_d;
        }
        matrix[(dim - 1) * dim] = r_d;
        matrix[dim * dim - 1] = 1.0 - r_d;
        Ok(FsmcModel {
            n_sv,
            params,
            matrix,
        })
    }

    pub fn n_sv(&self) -> u32 {
        self.n_sv
    }

    pub fn params(&self) -> NetworkParams {
        self.params
    }

    /// Number of states, `n_sv + 2`.
    pub fn dim(&self) -> usize {
        self.n_sv as usize + 2
    }

    /// Row-major transition matrix.
    pub fn transition_matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let dim = self.dim();
        &self.matrix[i * dim..(i + 1) * dim]
    }

    /// Transition probability from state `from` to state `to`.
    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.matrix[from * self.dim() + to]
    }

    /// Human-readable state labels in index order: `UN`, `1`, .., `n_sv`, `D`.
    pub fn state_labels(&self) -> Vec<String> {
        let dim = self.dim();
        let mut labels = Vec::with_capacity(dim);
        labels.push("UN".to_string());
        for depth in 1..dim - 1 {
            labels.push(depth.to_string());
        }
        labels.push("D".to_string());
        labels
    }

    /// Solve `pi * M = pi`, `sum(pi) = 1` directly: Gaussian elimination with
    /// partial pivoting on the transposed balance system with one equation
    /// replaced by the normalization.
    pub fn steady_state(&self) -> Result<SteadyState> {
        let dim = self.dim();
        // A = M^T - I, last row replaced by ones; b = unit vector on that row.
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                a[j * dim + i] = self.matrix[i * dim + j];
            }
        }
        for i in 0..dim {
            a[i * dim + i] -= 1.0;
        }
        for j in 0..dim {
            a[(dim - 1) * dim + j] = 1.0;
        }
        let mut b = vec![0.0; dim];
        b[dim - 1] = 1.0;

        let pi = solve_in_place(&mut a, &mut b, dim)?;
        Ok(SteadyState { pi })
    }
}

/// Dense partial-pivot elimination. Zero multipliers are skipped, so the
/// mostly-empty balance system stays cheap even for deep chains.
fn solve_in_place(a: &mut [f64], b: &mut [f64], dim: usize) -> Result<Vec<f64>> {
    for k in 0..dim {
        let mut pivot_row = k;
        let mut pivot_mag = a[k * dim + k].abs();
        for i in k + 1..dim {
            let mag = a[i * dim + k].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag < f64::MIN_POSITIVE {
            return Err(Error::Numerical(format!(
                "singular steady-state system at column {k}"
            )));
        }
        if pivot_row != k {
            for j in k..dim {
                a.swap(k * dim + j, pivot_row * dim + j);
            }
            b.swap(k, pivot_row);
        }
        let pivot = a[k * dim + k];
        for i in k + 1..dim {
            let factor = a[i * dim + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[i * dim + k] = 0.0;
            for j in k + 1..dim {
                a[i * dim + j] -= factor * a[k * dim + j];
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![0.0; dim];
    for k in (0..dim).rev() {
        let mut sum = b[k];
        for j in k + 1..dim {
            sum -= a[k * dim + j] * x[j];
        }
        x[k] = sum / a[k * dim + k];
    }
    Ok(x)
}

/// Stationary distribution of an [`FsmcModel`], in the model's state order.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    pi: Vec<f64>,
}

impl SteadyState {
    pub fn probabilities(&self) -> &[f64] {
        &self.pi
    }

    /// Steady-state probability of the network-up state.
    pub fn network_up(&self) -> f64 {
        self.pi[0]
    }

    /// Steady-state probability of the application-down state.
    pub fn app_down(&self) -> f64 {
        self.pi[self.pi.len() - 1]
    }

    /// Largest per-component balance residual `|pi * M - pi|`.
    pub fn balance_residual(&self, model: &FsmcModel) -> f64 {
        let next = step_distribution(&self.pi, model);
        self.pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// One application of the chain: `pi * M`.
pub(crate) fn step_distribution(pi: &[f64], model: &FsmcModel) -> Vec<f64> {
    let dim = model.dim();
    let m = model.transition_matrix();
    let mut out = vec![0.0; dim];
    for (i, &weight) in pi.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        for j in 0..dim {
            out[j] += weight * m[i * dim + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params_01_2() -> NetworkParams {
        NetworkParams::from_per_and_mean_down_time(0.01, 2.0).unwrap()
    }

    #[test]
    fn example_matrix_three_states() {
        let model = FsmcModel::build(params_01_2(), 1).unwrap();
        assert_eq!(model.dim(), 3);
        let r_u = 1.0 / 198.0;
        let expected = [
            [1.0 - r_u, r_u, 0.0],
            [0.5, 0.0, 0.5],
            [0.5, 0.0, 0.5],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(model.entry(i, j), expected[i][j], max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn two_state_collapse() {
        let params = NetworkParams::from_exit_rates(0.25, 0.6).unwrap();
        let model = FsmcModel::build(params, 0).unwrap();
        assert_eq!(model.dim(), 2);
        assert_eq!(model.row(0), &[0.75, 0.25]);
        assert_eq!(model.row(1), &[0.6, 0.4]);
        assert_eq!(model.state_labels(), vec!["UN", "D"]);
    }

    #[test]
    fn state_labels_include_depths() {
        let model = FsmcModel::build(params_01_2(), 3).unwrap();
        assert_eq!(model.state_labels(), vec!["UN", "1", "2", "3", "D"]);
    }

    #[test]
    fn steady_state_example() {
        let model = FsmcModel::build(params_01_2(), 1).unwrap();
        let pi = model.steady_state().unwrap();
        let expected = [0.99, 0.005, 0.005];
        for (got, want) in pi.probabilities().iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
        assert!(pi.balance_residual(&model) <= 1e-12);
    }

    #[test]
    fn steady_state_two_states() {
        let params = NetworkParams::from_per_and_mean_down_time(0.2, 3.0).unwrap();
        let model = FsmcModel::build(params, 0).unwrap();
        let pi = model.steady_state().unwrap();
        assert_relative_eq!(pi.network_up(), 0.8, epsilon = 1e-13);
        assert_relative_eq!(pi.app_down(), 0.2, epsilon = 1e-13);
    }

    #[test]
    fn steady_state_alternating_never_reaches_down() {
        let params = NetworkParams::from_per_and_mean_down_time(0.5, 1.0).unwrap();
        let model = FsmcModel::build(params, 1).unwrap();
        let pi = model.steady_state().unwrap();
        assert!(pi.app_down().abs() <= 1e-15);
    }

    #[test]
    fn deep_chain_solves_and_matches_closed_form() {
        let params = NetworkParams::from_per_and_mean_down_time(0.05, 5.0).unwrap();
        let n_sv = 10_000;
        let model = FsmcModel::build(params, n_sv).unwrap();
        let pi = model.steady_state().unwrap();
        let closed = params.per() * (1.0 - params.down_exit_rate()).powi(n_sv as i32);
        assert!((pi.app_down() - closed).abs() <= 1e-10);
        assert!((pi.network_up() - (1.0 - params.per())).abs() <= 1e-10);
        let total: f64 = pi.probabilities().iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn oversized_chain_rejected() {
        assert!(FsmcModel::build(params_01_2(), u32::MAX).is_err());
    }

    proptest! {
        #[test]
        fn rows_are_stochastic(
            r_u in 1e-8f64..=1.0,
            r_d in 1e-8f64..=1.0,
            n_sv in 0u32..40,
        ) {
            let params = NetworkParams::from_exit_rates(r_u, r_d).unwrap();
            let model = FsmcModel::build(params, n_sv).unwrap();
            for i in 0..model.dim() {
                let sum: f64 = model.row(i).iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-15);
                for &entry in model.row(i) {
                    prop_assert!((0.0..=1.0).contains(&entry));
                }
            }
        }

        #[test]
        fn solve_agrees_with_closed_form(
            per in 1e-6f64..0.45,
            tau_dn in 1.0f64..50.0,
            n_sv in 0u32..30,
        ) {
            prop_assume!(per < tau_dn / (1.0 + tau_dn));
            let params = NetworkParams::from_per_and_mean_down_time(per, tau_dn).unwrap();
            let model = FsmcModel::build(params, n_sv).unwrap();
            let pi = model.steady_state().unwrap();
            let closed_down = params.per()
                * (1.0 - params.down_exit_rate()).powi(n_sv as i32);
            prop_assert!((pi.app_down() - closed_down).abs() <= 1e-10);
            prop_assert!((pi.network_up() - (1.0 - params.per())).abs() <= 1e-10);
            prop_assert!(pi.balance_residual(&model) <= 1e-12);
            let total: f64 = pi.probabilities().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            for &p in pi.probabilities() {
                prop_assert!(p >= -1e-15);
            }
        }

        #[test]
        fn power_iteration_converges_to_solution(
            r_u in 1e-4f64..=1.0,
            r_d in 1e-4f64..=1.0,
            n_sv in 0u32..6,
        ) {
            // 1e4 steps contract the start-up error by (1 - r_u - r_d)^1e4;
            // that only reaches 1e-8 when the chain mixes fast enough. The
            // slow corner gets its own test below with an honest step count.
            prop_assume!(r_u + r_d >= 2e-3);
            let params = NetworkParams::from_exit_rates(r_u, r_d).unwrap();
            let model = FsmcModel::build(params, n_sv).unwrap();
            let pi = model.steady_state().unwrap();
            // Start from a deliberately lopsided distribution.
            let mut dist = vec![0.0; model.dim()];
            dist[0] = 1.0;
            for _ in 0..10_000 {
                dist = step_distribution(&dist, &model);
            }
            let max_dev = dist
                .iter()
                .zip(pi.probabilities())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            prop_assert!(max_dev <= 1e-8, "max deviation {max_dev}");
        }
    }

    #[test]
    fn power_iteration_converges_in_slow_mixing_corner() {
        // r_u = r_d = 1e-4 mixes with rate 2e-4 per step; 2e5 steps give a
        // contraction of exp(-40), comfortably below 1e-8.
        let params = NetworkParams::from_exit_rates(1e-4, 1e-4).unwrap();
        let model = FsmcModel::build(params, 2).unwrap();
        let pi = model.steady_state().unwrap();
        let mut dist = vec![0.0; model.dim()];
        dist[0] = 1.0;
        for _ in 0..200_000 {
            dist = step_distribution(&dist, &model);
        }
        let max_dev = dist
            .iter()
            .zip(pi.probabilities())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_dev <= 1e-8, "max deviation {max_dev}");
    }
}
